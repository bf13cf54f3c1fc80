#ifndef SDNGAME_AGENT_H_
#define SDNGAME_AGENT_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdngame/game.h"
#include "sdngame/tensor_nn.h"

namespace sdngame {

// Linear decay from `start` to `end` over `decay_steps`, constant after.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::int64_t decay_steps = 1;

  double At(std::int64_t step) const;
  static EpsilonSchedule Constant(double epsilon) { return {epsilon, epsilon, 1}; }
};

// Executes the chosen action in the environment.
using EnvStep = std::function<TurnOutcome(int action_index)>;

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string Kind() const = 0;

  // Chooses an action among `legal`, applies it through `env_step`, stores
  // the experience and trains. Returns the environment's outcome.
  virtual TurnOutcome ActAndLearn(const Observation& observation,
                                  std::span<const int> legal,
                                  const EnvStep& env_step) = 0;

  // Called once when a game ends, whichever side ended it.
  virtual void FinishEpisode() = 0;

  virtual void Save(std::ostream& out) const = 0;
  virtual void Load(std::istream& in) = 0;
};

nn::Vector ToVector(const Observation& observation);
nn::Matrix ToMatrix(std::span<const Observation* const> observations);

// Uniform legal action with probability epsilon, otherwise the legal action
// with the largest q value (lowest index on ties). Throws on an empty set.
int EpsilonGreedy(const nn::Vector& q, std::span<const int> legal, double epsilon,
                  std::mt19937_64& rng);

// Uniformly random legal actions; used as a baseline opponent.
class RandomAgent : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}

  std::string Kind() const override { return "random"; }
  TurnOutcome ActAndLearn(const Observation& observation, std::span<const int> legal,
                          const EnvStep& env_step) override;
  void FinishEpisode() override {}
  void Save(std::ostream& out) const override;
  void Load(std::istream& in) override;

 private:
  std::mt19937_64 rng_;
};

namespace agent_io {
void WriteRng(std::ostream& out, const std::mt19937_64& rng);
void ReadRng(std::istream& in, std::mt19937_64& rng);
}  // namespace agent_io

}  // namespace sdngame

#endif  // SDNGAME_AGENT_H_
