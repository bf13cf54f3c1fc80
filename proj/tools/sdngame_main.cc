// Command-line entry point: simulate game series, compare them with a
// t-test, plot per-run rewards and inspect topology configs.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sdngame/experiment.h"
#include "sdngame/stats.h"
#include "sdngame/topology.h"

namespace fs = std::filesystem;
using namespace sdngame;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

constexpr const char* kDefaultConfig = "config/default_topology.json";

std::string DefaultOutDir() {
  if (const char* env = std::getenv("SDNGAME_OUT_DIR"); env && *env) return env;
  return "out";
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

TopologyConfig LoadConfigOrUsage(const std::string& path, bool explicitly_set) {
  if (!fs::exists(path)) {
    throw UsageError(explicitly_set ? "config file not found: " + path
                                    : "no --config given and default " + path + " not found");
  }
  return LoadConfigFile(path);
}

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

struct SimulateArgs {
  int game = 1;
  int runs = 10;
  int turns_per_agent = 25000;
  std::string config = kDefaultConfig;
  std::uint64_t seed = 0;
  std::string out = DefaultOutDir();
  bool quick = false;
  std::string attacker;
  std::string defender;
  bool no_turn_log = false;
  LearnerOptions learner;
};

int RunSimulate(const SimulateArgs& args, const CLI::App& cmd) {
  TopologyConfig cfg = LoadConfigOrUsage(args.config, cmd.count("--config") > 0);
  SeriesOptions options;
  options.game_id = args.game;
  options.runs = args.runs;
  options.turns_per_agent = args.turns_per_agent;
  if (args.quick) {
    if (cmd.count("--runs") == 0) options.runs = 10;
    if (cmd.count("--turns-per-agent") == 0) options.turns_per_agent = 2000;
  }
  options.seed = args.seed;
  if (!args.attacker.empty()) options.attacker = ParseAgentKind(args.attacker);
  if (!args.defender.empty()) options.defender = ParseAgentKind(args.defender);
  options.learner = args.learner;

  const fs::path out_dir = args.out;
  fs::create_directories(out_dir / "checkpoints");
  GameSeries series(std::make_shared<const TopologyConfig>(cfg), options);

  std::ofstream turn_log;
  if (!args.no_turn_log) {
    turn_log.open(out_dir / "turns.jsonl", std::ios::binary);
    if (!turn_log) throw std::runtime_error("cannot write turns.jsonl");
  }
  const auto records = series.PlayAll(args.no_turn_log ? nullptr : &turn_log);
  turn_log.close();

  std::ofstream results(out_dir / "results.csv", std::ios::binary);
  WriteResultsCsv(results, records);
  results.close();

  const std::string attacker_kind = series.AttackerAgent().Kind();
  const std::string defender_kind = series.DefenderAgent().Kind();
  {
    std::ofstream ckpt(out_dir / "checkpoints" / ("attacker_" + attacker_kind + ".ckpt"),
                       std::ios::binary);
    series.AttackerAgent().Save(ckpt);
  }
  {
    std::ofstream ckpt(out_dir / "checkpoints" / ("defender_" + defender_kind + ".ckpt"),
                       std::ios::binary);
    series.DefenderAgent().Save(ckpt);
  }

  int defender_wins = 0;
  for (const auto& r : records) defender_wins += r.winner == Role::kDefender;
  std::ostringstream summary;
  summary << "game " << options.game_id << ": attacker=" << attacker_kind
          << " defender=" << defender_kind << " runs=" << options.runs
          << " turns_per_agent=" << options.turns_per_agent << " seed=" << options.seed << "\n"
          << "defender wins " << defender_wins << "/" << records.size() << "\n";
  WriteFile(out_dir / "summary.txt", summary.str());
  std::cout << summary.str();
  return kExitOk;
}

struct StatsArgs {
  std::string game1;
  std::string game2;
  double alpha = 0.05;
  std::string mode = "paired";
  std::string column = "defender_turns";
  std::string out;
};

int RunStats(const StatsArgs& args) {
  const auto xs = ReadCsvFile(args.game1).NumericColumn(args.column);
  const auto ys = ReadCsvFile(args.game2).NumericColumn(args.column);
  const stats::TTestReport report = args.mode == "paired"
                                        ? stats::PairedTTest(xs, ys, args.alpha)
                                        : stats::UnpairedTTest(xs, ys, args.alpha);
  const std::string text = stats::RenderText(report, "Game 1 " + args.column,
                                             "Game 2 " + args.column);
  std::cout << text;
  if (!args.out.empty()) {
    const fs::path prefix = args.out;
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    WriteFile(prefix.string() + ".txt", text);
    WriteFile(prefix.string() + ".csv", stats::RenderCsv(report, "game1", "game2"));
  }
  return kExitOk;
}

struct PlotArgs {
  std::string in;
  std::string out;
  std::string title = "Per-run cumulative rewards";
};

int RunPlot(const PlotArgs& args) {
  std::vector<RunRewards> rewards;
  const fs::path in_path = args.in;
  if (in_path.extension() == ".jsonl") {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open " + args.in);
    rewards = RewardsFromTurnLog(in);
  } else {
    rewards = RewardsFromRecords(ParseResultsCsv(ReadCsvFile(in_path)));
  }
  if (rewards.empty()) throw std::runtime_error("input " + args.in + " contains no runs");
  fs::path svg = args.out;
  if (svg.has_parent_path()) fs::create_directories(svg.parent_path());
  fs::path csv = svg;
  csv.replace_extension(".csv");
  EmitRewardPlot(rewards, args.title, svg, csv);
  std::cout << "wrote " << svg.string() << " and " << csv.string() << " (" << rewards.size()
            << " runs)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attacker/defender reinforcement-learning game on a simulated SDN"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Play a series of games and record results");
  simulate->add_option("--game", sim.game, "1: N2D defends vs DDQN; 2: roles swapped")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  simulate->add_option("--runs", sim.runs, "Game runs in the series")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--turns-per-agent", sim.turns_per_agent, "Turn cap per agent per run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--config", sim.config, "Topology config (JSON)")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed for every random stream")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory (env SDNGAME_OUT_DIR)")
      ->capture_default_str();
  simulate->add_flag("--quick", sim.quick, "Preset: runs=10, turns-per-agent=2000");
  simulate->add_option("--attacker", sim.attacker, "Override attacker: ddqn|n2d|random")
      ->check(CLI::IsMember({"ddqn", "n2d", "random"}));
  simulate->add_option("--defender", sim.defender, "Override defender: ddqn|n2d|random")
      ->check(CLI::IsMember({"ddqn", "n2d", "random"}));
  simulate->add_flag("--no-turn-log", sim.no_turn_log, "Skip writing turns.jsonl");
  simulate->add_option("--gamma", sim.learner.gamma, "Discount factor")->capture_default_str();
  simulate->add_option("--lr", sim.learner.learning_rate, "SGD learning rate")
      ->capture_default_str();
  simulate->add_option("--tau", sim.learner.tau, "DDQN soft target update rate")
      ->capture_default_str();
  simulate->add_option("--batch-size", sim.learner.batch_size, "Minibatch size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--replay-capacity", sim.learner.replay_capacity,
                       "Capacity of each replay buffer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--epsilon-end", sim.learner.epsilon_end, "Final exploration rate")
      ->capture_default_str();
  simulate->add_option("--epsilon-decay-fraction", sim.learner.epsilon_decay_fraction,
                       "Fraction of budgeted steps over which epsilon decays from 1")
      ->capture_default_str();
  simulate->add_option("--change-step-fraction", sim.learner.change_step_fraction,
                       "N2D change step as a fraction of budgeted steps")
      ->capture_default_str();
  simulate->add_option("--n-step", sim.learner.n_step, "N2D return horizon")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--dnd-neighbors", sim.learner.dnd.neighbors,
                       "DND neighbours per lookup (0 = all)")
      ->capture_default_str();
  simulate->add_option("--dnd-capacity", sim.learner.dnd.capacity, "DND entries per action")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--dnd-delta", sim.learner.dnd.delta, "DND kernel offset")
      ->capture_default_str();
  simulate->add_option("--dnd-alpha", sim.learner.dnd.alpha, "DND value update rate")
      ->capture_default_str();

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "t-test on two results CSV files");
  stats_cmd->add_option("--game1", st.game1, "Game 1 results CSV")->required();
  stats_cmd->add_option("--game2", st.game2, "Game 2 results CSV")->required();
  stats_cmd->add_option("--alpha", st.alpha, "Significance level")->capture_default_str();
  stats_cmd->add_option("--mode", st.mode, "paired|unpaired")
      ->check(CLI::IsMember({"paired", "unpaired"}))
      ->capture_default_str();
  stats_cmd->add_option("--column", st.column, "Column compared across games")
      ->capture_default_str();
  stats_cmd->add_option("--out", st.out, "Write PREFIX.txt and PREFIX.csv");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "Per-run reward bars from results.csv or turns.jsonl");
  plot->add_option("--in", pl.in, "results.csv or turns.jsonl")->required();
  plot->add_option("--out", pl.out, "SVG output; a .csv twin is written beside it")->required();
  plot->add_option("--title", pl.title, "Chart title")->capture_default_str();

  std::string topo_config = kDefaultConfig;
  auto* topo = app.add_subcommand("topo", "Topology utilities");
  topo->require_subcommand(1);
  auto* validate = topo->add_subcommand("validate", "Validate a config and print its slot layout");
  validate->add_option("--config", topo_config, "Topology config (JSON)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return RunSimulate(sim, *simulate);
    if (*stats_cmd) return RunStats(st);
    if (*plot) return RunPlot(pl);
    if (*validate) {
      const TopologyConfig cfg = LoadConfigOrUsage(topo_config, validate->count("--config") > 0);
      std::cout << SlotLayoutTable(cfg);
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
