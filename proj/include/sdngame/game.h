#ifndef SDNGAME_GAME_H_
#define SDNGAME_GAME_H_

#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sdngame/topology.h"

namespace sdngame {

enum class Role { kAttacker, kDefender };

std::string RoleName(Role role);
Role OtherRole(Role role);

class GameError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Compromise { HostId host; };
struct IsolatePatch { HostId host; };
struct Reconnect { HostId host; };
struct Migrate { int backup_slot; };
struct NoOp {};

using GameAction = std::variant<Compromise, IsolatePatch, Reconnect, Migrate, NoOp>;

// Action index layout for a config with H hosts:
//   attacker  [0, H)        Compromise(h)
//   defender  [0, H)        IsolatePatch(h)
//             [H, 2H)       Reconnect(h)
//             [2H, 2H+3)    Migrate(slot)
//             2H+3          NoOp
int ActionCount(Role role, const TopologyConfig& cfg);
GameAction DecodeAction(Role role, int index, const TopologyConfig& cfg);
int EncodeAction(Role role, const GameAction& action, const TopologyConfig& cfg);

struct Scoreboard {
  int defender_score = 0;
  int attacker_score = 0;
};

struct TurnOutcome {
  int reward = 0;
  Observation next_observation;
  bool done = false;
  std::optional<Role> winner;
  int defender_turns_so_far = 0;
};

// One line of the per-turn JSONL log.
struct TurnEvent {
  int run = 0;
  int turn = 0;
  Role role = Role::kAttacker;
  int action_index = 0;
  int reward = 0;
  int defender_score = 0;
  int attacker_score = 0;
  bool done = false;
  std::optional<Role> winner;
};

std::string ToJsonLine(const TurnEvent& event);
TurnEvent ParseTurnEvent(const std::string& line);

class GameSession {
 public:
  GameSession(std::shared_ptr<const TopologyConfig> cfg, int turn_cap_per_agent);

  // Starts from an arbitrary position, e.g. to set up a scenario.
  static GameSession FromState(std::shared_ptr<const TopologyConfig> cfg,
                               int turn_cap_per_agent, NetworkState state, Scoreboard score,
                               Role to_move);

  const TopologyConfig& Config() const { return *cfg_; }
  const NetworkState& State() const { return state_; }
  const Scoreboard& Score() const { return score_; }
  Role ToMove() const { return to_move_; }
  bool Done() const { return winner_.has_value(); }
  std::optional<Role> Winner() const { return winner_; }
  int TurnsPlayed() const { return turns_played_; }
  int DefenderTurns() const { return defender_turns_; }
  int TurnCapPerAgent() const { return turn_cap_; }
  Observation Observe() const { return Encode(state_, *cfg_); }

  // Throws GameError when it is not `role`'s turn.
  std::vector<int> LegalActions(Role role) const;

  // Throws GameError on the wrong turn, a finished game, or an index outside
  // the role's action space.
  TurnOutcome Step(Role role, int action_index);

  std::optional<Role> CheckWinner() const;

 private:
  void RequireTurn(Role role) const;
  int ApplyAttacker(HostId host);
  int ApplyDefender(const GameAction& action);

  std::shared_ptr<const TopologyConfig> cfg_;
  int turn_cap_;
  NetworkState state_;
  Scoreboard score_;
  Role to_move_ = Role::kAttacker;
  int turns_played_ = 0;
  int defender_turns_ = 0;
  std::optional<Role> winner_;
};

}  // namespace sdngame

#endif  // SDNGAME_GAME_H_
