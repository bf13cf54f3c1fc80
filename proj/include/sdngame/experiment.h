#ifndef SDNGAME_EXPERIMENT_H_
#define SDNGAME_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdngame/agent.h"
#include "sdngame/agent_ddqn.h"
#include "sdngame/agent_n2d.h"
#include "sdngame/game.h"

namespace sdngame {

enum class AgentKind { kDdqn, kN2d, kRandom };

std::string AgentKindName(AgentKind kind);
AgentKind ParseAgentKind(const std::string& name);

// Hyperparameters shared by both learners. Schedule lengths are fractions of
// the budgeted steps per agent (runs * turns_per_agent).
struct LearnerOptions {
  std::vector<int> hidden = {128, 128};
  std::vector<int> embedding = {64, 32};
  double gamma = 0.99;
  double learning_rate = 1e-3;
  double tau = 1e-3;
  int batch_size = 32;
  std::size_t replay_capacity = 50000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.2;
  double change_step_fraction = 0.5;
  int n_step = 100;
  DndOptions dnd;
};

struct SeriesOptions {
  int game_id = 1;
  int runs = 10;
  int turns_per_agent = 25000;
  std::uint64_t seed = 0;
  // Defaults follow the game id: game 1 has N2D defending against DDQN,
  // game 2 swaps the roles.
  std::optional<AgentKind> attacker;
  std::optional<AgentKind> defender;
  LearnerOptions learner;
};

struct RunRecord {
  int run = 0;
  int game = 1;
  Role winner = Role::kDefender;
  int defender_turns = 0;
  int defender_score = 0;
  int attacker_score = 0;
  double defender_reward_sum = 0.0;
  double attacker_reward_sum = 0.0;
  std::uint64_t seed = 0;
  int total_turns = 0;  // not part of the CSV schema
};

AgentKind DefaultAttacker(int game_id);
AgentKind DefaultDefender(int game_id);

// Owns both agents for one game series; agents keep their memory across
// runs.
class GameSeries {
 public:
  GameSeries(std::shared_ptr<const TopologyConfig> cfg, SeriesOptions options);

  // Plays run `run_index` (1-based) to completion, appending JSONL turn
  // events to `turn_log` when non-null.
  RunRecord PlayRun(int run_index, std::ostream* turn_log);
  std::vector<RunRecord> PlayAll(std::ostream* turn_log);

  Agent& AttackerAgent() { return *attacker_; }
  Agent& DefenderAgent() { return *defender_; }
  const SeriesOptions& Options() const { return options_; }

 private:
  std::unique_ptr<Agent> MakeAgent(AgentKind kind, Role role, std::uint64_t seed) const;

  std::shared_ptr<const TopologyConfig> cfg_;
  SeriesOptions options_;
  std::unique_ptr<Agent> attacker_;
  std::unique_ptr<Agent> defender_;
};

std::vector<RunRecord> RunSeries(const TopologyConfig& cfg, const SeriesOptions& options,
                                 std::ostream* turn_log = nullptr);

// results.csv columns: run, game, winner, defender_turns, defender_score,
// attacker_score, defender_reward_sum, attacker_reward_sum, seed.
std::string ResultsCsvHeader();
std::string ToCsvRow(const RunRecord& record);
void WriteResultsCsv(std::ostream& out, const std::vector<RunRecord>& records);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A header row plus data rows; fields are comma separated, unquoted.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int Column(const std::string& name) const;  // throws CsvError if absent
  std::vector<double> NumericColumn(const std::string& name) const;
};

CsvTable ReadCsv(std::istream& in);
CsvTable ReadCsvFile(const std::filesystem::path& path);
std::vector<RunRecord> ParseResultsCsv(const CsvTable& table);

struct RunRewards {
  int run = 0;
  double defender = 0.0;
  double attacker = 0.0;
};

std::vector<RunRewards> RewardsFromRecords(const std::vector<RunRecord>& records);
// Re-aggregates per-run reward sums from JSONL turn events.
std::vector<RunRewards> RewardsFromTurnLog(std::istream& jsonl);

// Writes an SVG bar chart (one defender/attacker bar pair per run) to
// `svg_path` and the plotted values to `csv_path`.
void EmitRewardPlot(const std::vector<RunRewards>& rewards, const std::string& title,
                    const std::filesystem::path& svg_path,
                    const std::filesystem::path& csv_path);

}  // namespace sdngame

#endif  // SDNGAME_EXPERIMENT_H_
