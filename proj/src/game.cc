#include "sdngame/game.h"

#include <algorithm>

#include "json.hpp"

namespace sdngame {

std::string RoleName(Role role) {
  return role == Role::kAttacker ? "attacker" : "defender";
}

Role OtherRole(Role role) {
  return role == Role::kAttacker ? Role::kDefender : Role::kAttacker;
}

int ActionCount(Role role, const TopologyConfig& cfg) {
  return role == Role::kAttacker
             ? cfg.host_count
             : 2 * cfg.host_count + TopologyConfig::kBackupCount + 1;
}

GameAction DecodeAction(Role role, int index, const TopologyConfig& cfg) {
  const int hosts = cfg.host_count;
  if (index < 0 || index >= ActionCount(role, cfg)) {
    throw GameError("action index " + std::to_string(index) + " out of range for " +
                    RoleName(role));
  }
  if (role == Role::kAttacker) return Compromise{index};
  if (index < hosts) return IsolatePatch{index};
  if (index < 2 * hosts) return Reconnect{index - hosts};
  if (index < 2 * hosts + TopologyConfig::kBackupCount) return Migrate{index - 2 * hosts};
  return NoOp{};
}

int EncodeAction(Role role, const GameAction& action, const TopologyConfig& cfg) {
  const int hosts = cfg.host_count;
  if (role == Role::kAttacker) {
    if (const auto* c = std::get_if<Compromise>(&action)) return c->host;
    throw GameError("attacker can only compromise");
  }
  if (const auto* a = std::get_if<IsolatePatch>(&action)) return a->host;
  if (const auto* a = std::get_if<Reconnect>(&action)) return hosts + a->host;
  if (const auto* a = std::get_if<Migrate>(&action)) return 2 * hosts + a->backup_slot;
  if (std::holds_alternative<NoOp>(action)) return 2 * hosts + TopologyConfig::kBackupCount;
  throw GameError("defender cannot compromise");
}

std::string ToJsonLine(const TurnEvent& event) {
  nlohmann::ordered_json line;
  line["run"] = event.run;
  line["turn"] = event.turn;
  line["role"] = RoleName(event.role);
  line["action_index"] = event.action_index;
  line["reward"] = event.reward;
  line["defender_score"] = event.defender_score;
  line["attacker_score"] = event.attacker_score;
  line["done"] = event.done;
  line["winner"] = event.winner ? nlohmann::ordered_json(RoleName(*event.winner))
                                : nlohmann::ordered_json(nullptr);
  return line.dump();
}

TurnEvent ParseTurnEvent(const std::string& text) {
  const auto line = nlohmann::json::parse(text);
  auto role_of = [](const std::string& name) {
    if (name == "attacker") return Role::kAttacker;
    if (name == "defender") return Role::kDefender;
    throw std::runtime_error("unknown role '" + name + "'");
  };
  TurnEvent event;
  event.run = line.at("run").get<int>();
  event.turn = line.at("turn").get<int>();
  event.role = role_of(line.at("role").get<std::string>());
  event.action_index = line.at("action_index").get<int>();
  event.reward = line.at("reward").get<int>();
  event.defender_score = line.at("defender_score").get<int>();
  event.attacker_score = line.at("attacker_score").get<int>();
  event.done = line.at("done").get<bool>();
  if (!line.at("winner").is_null()) event.winner = role_of(line.at("winner").get<std::string>());
  return event;
}

GameSession::GameSession(std::shared_ptr<const TopologyConfig> cfg, int turn_cap_per_agent)
    : cfg_(std::move(cfg)), turn_cap_(turn_cap_per_agent) {
  if (!cfg_) throw GameError("null topology config");
  if (turn_cap_ < 1) throw GameError("turn cap per agent must be at least 1");
  state_ = InitialState(*cfg_);
  score_ = {cfg_->s_max, 0};
}

GameSession GameSession::FromState(std::shared_ptr<const TopologyConfig> cfg,
                                   int turn_cap_per_agent, NetworkState state, Scoreboard score,
                                   Role to_move) {
  GameSession session(std::move(cfg), turn_cap_per_agent);
  const auto& c = *session.cfg_;
  if (static_cast<int>(state.compromised.size()) != c.host_count ||
      static_cast<int>(state.link_active.size()) != c.LinkCount()) {
    throw GameError("state does not match the topology");
  }
  if (score.defender_score + score.attacker_score != c.s_max) {
    throw GameError("scores must sum to s_max");
  }
  session.state_ = std::move(state);
  session.score_ = score;
  session.to_move_ = to_move;
  session.winner_ = session.CheckWinner();
  return session;
}

void GameSession::RequireTurn(Role role) const {
  if (role != to_move_) {
    throw GameError("it is the " + RoleName(to_move_) + "'s turn, not the " +
                    RoleName(role) + "'s");
  }
}

std::vector<int> GameSession::LegalActions(Role role) const {
  RequireTurn(role);
  std::vector<int> legal;
  if (role == Role::kAttacker) {
    const auto frontier = AttackFrontier(state_, *cfg_);
    legal.assign(frontier.begin(), frontier.end());
    return legal;
  }
  const int count = ActionCount(role, *cfg_);
  legal.reserve(count);
  for (int i = 0; i < count; ++i) {
    const GameAction action = DecodeAction(role, i, *cfg_);
    if (const auto* m = std::get_if<Migrate>(&action);
        m && state_.compromised[cfg_->backup_hosts[m->backup_slot]]) {
      continue;
    }
    legal.push_back(i);
  }
  return legal;
}

int GameSession::ApplyAttacker(HostId host) {
  if (state_.compromised[host] || AttackFrontier(state_, *cfg_).count(host) == 0) {
    return -1;
  }
  state_.compromised[host] = true;
  state_.flags.insert(host);
  // Scores stay inside [0, s_max].
  if (score_.defender_score > 0) {
    --score_.defender_score;
    ++score_.attacker_score;
  }
  return 1;
}

int GameSession::ApplyDefender(const GameAction& action) {
  if (const auto* a = std::get_if<IsolatePatch>(&action)) {
    for (int link : cfg_->IncidentLinks(a->host)) state_.link_active[link] = false;
    if (!state_.compromised[a->host]) return -1;
    state_.compromised[a->host] = false;
    state_.flags.erase(a->host);
    if (score_.attacker_score > 0) {
      --score_.attacker_score;
      ++score_.defender_score;
    }
    return 1;
  }
  if (const auto* a = std::get_if<Reconnect>(&action)) {
    for (int link : cfg_->IncidentLinks(a->host)) state_.link_active[link] = true;
    return 0;
  }
  if (const auto* a = std::get_if<Migrate>(&action)) {
    const HostId target = cfg_->backup_hosts[a->backup_slot];
    if (state_.compromised[target]) return -1;
    state_.server_at = target;
    return 0;
  }
  return 0;
}

TurnOutcome GameSession::Step(Role role, int action_index) {
  if (Done()) throw GameError("game is already over");
  RequireTurn(role);
  const GameAction action = DecodeAction(role, action_index, *cfg_);

  TurnOutcome outcome;
  if (role == Role::kAttacker) {
    outcome.reward = ApplyAttacker(std::get<Compromise>(action).host);
  } else {
    outcome.reward = ApplyDefender(action);
    ++defender_turns_;
  }
  ++turns_played_;
  to_move_ = OtherRole(role);
  winner_ = CheckWinner();

  outcome.next_observation = Observe();
  outcome.done = Done();
  outcome.winner = winner_;
  outcome.defender_turns_so_far = defender_turns_;
  return outcome;
}

std::optional<Role> GameSession::CheckWinner() const {
  if (state_.compromised[state_.server_at] ||
      score_.attacker_score > score_.defender_score) {
    return Role::kAttacker;
  }
  if (state_.CompromisedCount() == 0 || AttackFrontier(state_, *cfg_).empty()) {
    return Role::kDefender;
  }
  if (defender_turns_ >= turn_cap_ && score_.defender_score >= score_.attacker_score) {
    return Role::kDefender;
  }
  return std::nullopt;
}

}  // namespace sdngame
