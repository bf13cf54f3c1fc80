#include "sdngame/experiment.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sdngame/stats.h"

namespace sdngame {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double ParseDouble(const std::string& text, const std::string& column) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw CsvError("column '" + column + "': not a number: '" + text + "'");
  }
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string AgentKindName(AgentKind kind) {
  switch (kind) {
    case AgentKind::kDdqn: return "ddqn";
    case AgentKind::kN2d: return "n2d";
    case AgentKind::kRandom: return "random";
  }
  return "?";
}

AgentKind ParseAgentKind(const std::string& name) {
  if (name == "ddqn") return AgentKind::kDdqn;
  if (name == "n2d") return AgentKind::kN2d;
  if (name == "random") return AgentKind::kRandom;
  throw std::invalid_argument("unknown agent kind '" + name + "'");
}

AgentKind DefaultAttacker(int game_id) {
  return game_id == 1 ? AgentKind::kDdqn : AgentKind::kN2d;
}

AgentKind DefaultDefender(int game_id) {
  return game_id == 1 ? AgentKind::kN2d : AgentKind::kDdqn;
}

GameSeries::GameSeries(std::shared_ptr<const TopologyConfig> cfg, SeriesOptions options)
    : cfg_(std::move(cfg)), options_(std::move(options)) {
  if (options_.game_id != 1 && options_.game_id != 2) {
    throw std::invalid_argument("game id must be 1 or 2");
  }
  if (options_.runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (options_.turns_per_agent < 1) throw std::invalid_argument("turns per agent must be at least 1");
  const AgentKind attacker = options_.attacker.value_or(DefaultAttacker(options_.game_id));
  const AgentKind defender = options_.defender.value_or(DefaultDefender(options_.game_id));
  attacker_ = MakeAgent(attacker, Role::kAttacker, SplitMix64(options_.seed * 2 + 1));
  defender_ = MakeAgent(defender, Role::kDefender, SplitMix64(options_.seed * 2 + 2));
}

std::unique_ptr<Agent> GameSeries::MakeAgent(AgentKind kind, Role role,
                                             std::uint64_t seed) const {
  const LearnerOptions& l = options_.learner;
  const std::int64_t budget =
      static_cast<std::int64_t>(options_.runs) * options_.turns_per_agent;
  auto steps_for = [budget](double fraction) {
    return std::max<std::int64_t>(1, std::llround(fraction * static_cast<double>(budget)));
  };
  const EpsilonSchedule epsilon{l.epsilon_start, l.epsilon_end,
                                steps_for(l.epsilon_decay_fraction)};
  const int inputs = cfg_->ObservationWidth();
  const int actions = ActionCount(role, *cfg_);

  switch (kind) {
    case AgentKind::kDdqn: {
      DdqnOptions o;
      o.hidden = l.hidden;
      o.gamma = l.gamma;
      o.learning_rate = l.learning_rate;
      o.tau = l.tau;
      o.batch_size = l.batch_size;
      o.replay_capacity = l.replay_capacity;
      o.epsilon = epsilon;
      o.seed = seed;
      return std::make_unique<DdqnAgent>(inputs, actions, o);
    }
    case AgentKind::kN2d: {
      N2dOptions o;
      o.hidden = l.hidden;
      o.embedding = l.embedding;
      o.gamma = l.gamma;
      o.learning_rate = l.learning_rate;
      o.batch_size = l.batch_size;
      o.replay_d_capacity = l.replay_capacity;
      o.replay_e_capacity = l.replay_capacity;
      o.n_step = l.n_step;
      o.change_step = steps_for(l.change_step_fraction);
      o.dnd = l.dnd;
      o.epsilon = epsilon;
      o.seed = seed;
      return std::make_unique<N2dAgent>(inputs, actions, o);
    }
    case AgentKind::kRandom:
      return std::make_unique<RandomAgent>(seed);
  }
  throw std::invalid_argument("unknown agent kind");
}

RunRecord GameSeries::PlayRun(int run_index, std::ostream* turn_log) {
  GameSession session(cfg_, options_.turns_per_agent);
  RunRecord record;
  record.run = run_index;
  record.game = options_.game_id;
  record.seed = options_.seed;

  while (!session.Done()) {
    const Role role = session.ToMove();
    Agent& agent = role == Role::kAttacker ? *attacker_ : *defender_;
    const std::vector<int> legal = session.LegalActions(role);
    int chosen = -1;
    const TurnOutcome outcome = agent.ActAndLearn(
        session.Observe(), legal, [&](int action) {
          chosen = action;
          return session.Step(role, action);
        });
    if (chosen < 0) throw std::logic_error("agent did not act");
    (role == Role::kAttacker ? record.attacker_reward_sum : record.defender_reward_sum) +=
        outcome.reward;
    if (turn_log) {
      TurnEvent event{run_index,
                      session.TurnsPlayed(),
                      role,
                      chosen,
                      outcome.reward,
                      session.Score().defender_score,
                      session.Score().attacker_score,
                      outcome.done,
                      outcome.winner};
      *turn_log << ToJsonLine(event) << "\n";
    }
  }
  attacker_->FinishEpisode();
  defender_->FinishEpisode();

  record.winner = *session.Winner();
  record.defender_turns = session.DefenderTurns();
  record.defender_score = session.Score().defender_score;
  record.attacker_score = session.Score().attacker_score;
  record.total_turns = session.TurnsPlayed();
  return record;
}

std::vector<RunRecord> GameSeries::PlayAll(std::ostream* turn_log) {
  std::vector<RunRecord> records;
  for (int run = 1; run <= options_.runs; ++run) records.push_back(PlayRun(run, turn_log));
  return records;
}

std::vector<RunRecord> RunSeries(const TopologyConfig& cfg, const SeriesOptions& options,
                                 std::ostream* turn_log) {
  GameSeries series(std::make_shared<const TopologyConfig>(cfg), options);
  return series.PlayAll(turn_log);
}

std::string ResultsCsvHeader() {
  return "run,game,winner,defender_turns,defender_score,attacker_score,"
         "defender_reward_sum,attacker_reward_sum,seed";
}

std::string ToCsvRow(const RunRecord& r) {
  std::ostringstream out;
  out << r.run << "," << r.game << "," << RoleName(r.winner) << "," << r.defender_turns << ","
      << r.defender_score << "," << r.attacker_score << ","
      << stats::FormatNumber(r.defender_reward_sum) << ","
      << stats::FormatNumber(r.attacker_reward_sum) << "," << r.seed;
  return out.str();
}

void WriteResultsCsv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << ResultsCsvHeader() << "\n";
  for (const auto& r : records) out << ToCsvRow(r) << "\n";
}

int CsvTable::Column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw CsvError("missing column '" + name + "'");
  return static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::NumericColumn(const std::string& name) const {
  const int column = Column(name);
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) values.push_back(ParseDouble(row.at(column), name));
  return values;
}

CsvTable ReadCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitFields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw CsvError("row has " + std::to_string(fields.size()) + " fields, header has " +
                     std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw CsvError("empty CSV input");
  return table;
}

CsvTable ReadCsvFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  return ReadCsv(in);
}

std::vector<RunRecord> ParseResultsCsv(const CsvTable& table) {
  const int run = table.Column("run");
  const int game = table.Column("game");
  const int winner = table.Column("winner");
  const int defender_turns = table.Column("defender_turns");
  const int defender_score = table.Column("defender_score");
  const int attacker_score = table.Column("attacker_score");
  const int defender_reward = table.Column("defender_reward_sum");
  const int attacker_reward = table.Column("attacker_reward_sum");
  const int seed = table.Column("seed");
  std::vector<RunRecord> records;
  for (const auto& row : table.rows) {
    RunRecord r;
    r.run = static_cast<int>(ParseDouble(row[run], "run"));
    r.game = static_cast<int>(ParseDouble(row[game], "game"));
    if (row[winner] == "attacker") {
      r.winner = Role::kAttacker;
    } else if (row[winner] == "defender") {
      r.winner = Role::kDefender;
    } else {
      throw CsvError("column 'winner': unknown role '" + row[winner] + "'");
    }
    r.defender_turns = static_cast<int>(ParseDouble(row[defender_turns], "defender_turns"));
    r.defender_score = static_cast<int>(ParseDouble(row[defender_score], "defender_score"));
    r.attacker_score = static_cast<int>(ParseDouble(row[attacker_score], "attacker_score"));
    r.defender_reward_sum = ParseDouble(row[defender_reward], "defender_reward_sum");
    r.attacker_reward_sum = ParseDouble(row[attacker_reward], "attacker_reward_sum");
    r.seed = std::stoull(row[seed]);
    records.push_back(r);
  }
  return records;
}

std::vector<RunRewards> RewardsFromRecords(const std::vector<RunRecord>& records) {
  std::vector<RunRewards> out;
  for (const auto& r : records) out.push_back({r.run, r.defender_reward_sum, r.attacker_reward_sum});
  return out;
}

std::vector<RunRewards> RewardsFromTurnLog(std::istream& jsonl) {
  std::map<int, RunRewards> by_run;
  std::string line;
  while (std::getline(jsonl, line)) {
    if (line.empty()) continue;
    const TurnEvent event = ParseTurnEvent(line);
    RunRewards& sums = by_run[event.run];
    sums.run = event.run;
    (event.role == Role::kAttacker ? sums.attacker : sums.defender) += event.reward;
  }
  std::vector<RunRewards> out;
  for (const auto& [run, sums] : by_run) out.push_back(sums);
  return out;
}

void EmitRewardPlot(const std::vector<RunRewards>& rewards, const std::string& title,
                    const std::filesystem::path& svg_path,
                    const std::filesystem::path& csv_path) {
  if (rewards.empty()) throw std::invalid_argument("no runs to plot");

  {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
    csv << "run,defender_reward,attacker_reward\n";
    for (const auto& r : rewards) {
      csv << r.run << "," << stats::FormatNumber(r.defender) << ","
          << stats::FormatNumber(r.attacker) << "\n";
    }
  }

  double hi = 0.0;
  double lo = 0.0;
  for (const auto& r : rewards) {
    hi = std::max({hi, r.defender, r.attacker});
    lo = std::min({lo, r.defender, r.attacker});
  }
  if (hi == lo) hi = lo + 1.0;

  constexpr double kWidth = 900.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 80.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 50.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  const double group = plot_w / static_cast<double>(rewards.size());
  const double bar = group * 0.35;
  auto num = [](double v) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(2);
    s << v;
    return s.str();
  };

  std::ofstream svg(svg_path);
  if (!svg) throw std::runtime_error("cannot write " + svg_path.string());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(kHeight) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(kWidth / 2) << "\" y=\"28\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << Escape(title) << "</text>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kTop + plot_h) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y_of(0.0)) << "\" x2=\""
      << num(kLeft + plot_w) << "\" y2=\"" << num(y_of(0.0)) << "\" stroke=\"black\"/>\n";
  for (double v : {lo, 0.0, hi}) {
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y_of(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << stats::FormatNumber(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const auto& r = rewards[i];
    const double x0 = kLeft + group * static_cast<double>(i) + group * 0.15;
    auto emit_bar = [&](double x, double v, const char* color, const char* role) {
      const double top = std::min(y_of(v), y_of(0.0));
      const double height = std::fabs(y_of(v) - y_of(0.0));
      svg << "<rect class=\"bar\" data-run=\"" << r.run << "\" data-role=\"" << role
          << "\" data-value=\"" << stats::FormatNumber(v) << "\" x=\"" << num(x) << "\" y=\""
          << num(top) << "\" width=\"" << num(bar) << "\" height=\"" << num(height)
          << "\" fill=\"" << color << "\"/>\n";
    };
    emit_bar(x0, r.defender, "#1f5fbf", "defender");
    emit_bar(x0 + bar, r.attacker, "#c0392b", "attacker");
    svg << "<text x=\"" << num(x0 + bar) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << r.run
        << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"" << num(kHeight - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">run</text>\n";
  svg << "<rect x=\"" << num(kWidth - 190) << "\" y=\"40\" width=\"12\" height=\"12\" "
      << "fill=\"#1f5fbf\"/><text x=\"" << num(kWidth - 172) << "\" y=\"50\" "
      << "font-family=\"sans-serif\" font-size=\"12\">defender reward</text>\n";
  svg << "<rect x=\"" << num(kWidth - 190) << "\" y=\"58\" width=\"12\" height=\"12\" "
      << "fill=\"#c0392b\"/><text x=\"" << num(kWidth - 172) << "\" y=\"68\" "
      << "font-family=\"sans-serif\" font-size=\"12\">attacker reward</text>\n";
  svg << "</svg>\n";
}

}  // namespace sdngame
