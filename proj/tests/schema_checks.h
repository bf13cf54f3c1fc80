#ifndef SDNGAME_TESTS_SCHEMA_CHECKS_H_
#define SDNGAME_TESTS_SCHEMA_CHECKS_H_

// Independent validators for results.csv and the JSONL turn log. They parse
// with nlohmann/std directly rather than the library readers.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace sdngame::oracle {

struct RunSummary {
  int run = 0;
  std::string winner;
  int defender_turns = 0;
  int total_turns = 0;
  double defender_reward = 0.0;
  double attacker_reward = 0.0;
  int defender_score = 0;
  int attacker_score = 0;
};

inline std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Checks results.csv text; fills `runs` keyed by run index.
inline std::vector<std::string> CheckResultsCsv(const std::string& text, int expected_rows,
                                                int game, int s_max, int cap,
                                                std::map<int, RunSummary>* runs = nullptr) {
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "run,game,winner,defender_turns,defender_score,attacker_score,"
              "defender_reward_sum,attacker_reward_sum,seed") {
    problems.push_back("bad header: " + line);
    return problems;
  }
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      problems.push_back("blank line");
      continue;
    }
    ++rows;
    const auto f = SplitCsvLine(line);
    if (f.size() != 9) {
      problems.push_back("row with " + std::to_string(f.size()) + " fields");
      continue;
    }
    try {
      RunSummary r;
      r.run = std::stoi(f[0]);
      if (r.run != rows) problems.push_back("run index " + f[0] + " out of order");
      if (std::stoi(f[1]) != game) problems.push_back("game column " + f[1]);
      r.winner = f[2];
      if (r.winner != "attacker" && r.winner != "defender") problems.push_back("winner " + f[2]);
      r.defender_turns = std::stoi(f[3]);
      r.defender_score = std::stoi(f[4]);
      r.attacker_score = std::stoi(f[5]);
      r.defender_reward = std::stod(f[6]);
      r.attacker_reward = std::stod(f[7]);
      std::stoull(f[8]);
      if (r.defender_turns < 0 || r.defender_turns > cap) problems.push_back("defender_turns " + f[3]);
      if (r.winner == "defender" && r.defender_turns < 1) problems.push_back("defender won in 0 turns");
      if (r.defender_score + r.attacker_score != s_max) problems.push_back("scores not zero-sum");
      if (r.winner == "defender" && r.defender_score < r.attacker_score) {
        problems.push_back("defender won behind on points");
      }
      if (runs) (*runs)[r.run] = r;
    } catch (const std::exception& e) {
      problems.push_back("unparsable row '" + line + "'");
    }
  }
  if (rows != expected_rows) {
    problems.push_back("expected " + std::to_string(expected_rows) + " rows, got " +
                       std::to_string(rows));
  }
  return problems;
}

// Checks the JSONL log: key order, types, alternation, termination, and
// that each run ends with done=true. Fills `runs` with re-aggregated sums.
inline std::vector<std::string> CheckTurnLog(const std::string& text, int cap,
                                             std::map<int, RunSummary>* runs = nullptr) {
  static const std::vector<std::string> kKeys = {"run",            "turn",  "role",
                                                 "action_index",   "reward", "defender_score",
                                                 "attacker_score", "done",  "winner"};
  std::vector<std::string> problems;
  std::map<int, RunSummary> local;
  std::map<int, RunSummary>& out = runs ? *runs : local;
  std::istringstream in(text);
  std::string line;
  int current = 0;
  int expected_turn = 1;
  bool open = false;
  long long n = 0;
  auto fail = [&](const std::string& what) {
    if (problems.size() < 20) problems.push_back("line " + std::to_string(n) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++n;
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const std::exception&) {
      fail("not JSON");
      continue;
    }
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    if (keys != kKeys) {
      fail("unexpected keys");
      continue;
    }
    if (!j["run"].is_number_integer() || !j["turn"].is_number_integer() ||
        !j["role"].is_string() || !j["action_index"].is_number_integer() ||
        !j["reward"].is_number_integer() || !j["defender_score"].is_number_integer() ||
        !j["attacker_score"].is_number_integer() || !j["done"].is_boolean() ||
        !(j["winner"].is_null() || j["winner"].is_string())) {
      fail("field types");
      continue;
    }
    const int run = j["run"];
    if (run != current) {
      if (open) fail("run " + std::to_string(current) + " ended without done");
      if (run != current + 1) fail("run index jumped");
      current = run;
      expected_turn = 1;
      open = true;
    }
    if (!open) fail("event after done");
    const int turn = j["turn"];
    if (turn != expected_turn++) fail("turn out of sequence");
    const std::string role = j["role"];
    if (role != (turn % 2 == 1 ? "attacker" : "defender")) fail("roles do not alternate");
    const int reward = j["reward"];
    const int action = j["action_index"];
    if (role == "attacker") {
      if (reward != -1 && reward != 1) fail("attacker reward");
      if (action < 0 || action >= 32) fail("attacker action index");
    } else {
      if (reward < -1 || reward > 1) fail("defender reward");
      if (action < 0 || action >= 68) fail("defender action index");
    }
    if (turn > 2 * cap) fail("turn above 2 * cap");
    const bool done = j["done"];
    if (done != !j["winner"].is_null()) fail("done and winner disagree");
    RunSummary& s = out[run];
    s.run = run;
    s.total_turns = turn;
    s.defender_score = j["defender_score"];
    s.attacker_score = j["attacker_score"];
    (role == "attacker" ? s.attacker_reward : s.defender_reward) += reward;
    if (role == "defender") ++s.defender_turns;
    if (done) {
      s.winner = j["winner"];
      open = false;
    }
  }
  if (open) problems.push_back("last run ended without done");
  return problems;
}

}  // namespace sdngame::oracle

#endif  // SDNGAME_TESTS_SCHEMA_CHECKS_H_
