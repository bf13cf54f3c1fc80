#ifndef SDNGAME_AGENT_DDQN_H_
#define SDNGAME_AGENT_DDQN_H_

#include <cstdint>
#include <vector>

#include "sdngame/agent.h"
#include "sdngame/memory.h"

namespace sdngame {

struct DdqnOptions {
  std::vector<int> hidden = {128, 128};
  double gamma = 0.99;
  double learning_rate = 1e-3;
  double tau = 1e-3;
  int batch_size = 32;
  std::size_t replay_capacity = 50000;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;
};

// Double DQN: the online net picks the bootstrap action, the target net
// scores it, and the target net trails the online net by soft updates.
class DdqnAgent : public Agent {
 public:
  DdqnAgent(int input_width, int action_count, DdqnOptions options);

  std::string Kind() const override { return "ddqn"; }

  int SelectAction(const Observation& observation, std::span<const int> legal);

  // r when done, else r + gamma * Q_target(s')[argmax_a Q_online(s')[a]].
  double DoubleQTarget(const Transition& t) const;

  // One minibatch SGD step on the mean squared TD error followed by a soft
  // target update. Returns the pre-update mean squared TD error. Throws
  // EmptyBufferError when the replay buffer is empty.
  double TrainStep(int batch_size);

  TurnOutcome ActAndLearn(const Observation& observation, std::span<const int> legal,
                          const EnvStep& env_step) override;
  void FinishEpisode() override {}

  void Save(std::ostream& out) const override;
  void Load(std::istream& in) override;

  double Epsilon() const { return options_.epsilon.At(steps_); }
  std::int64_t Steps() const { return steps_; }
  const DdqnOptions& Options() const { return options_; }

  const nn::DenseNet& Online() const { return online_; }
  const nn::DenseNet& TargetNet() const { return target_; }
  nn::DenseNet& MutableOnline() { return online_; }
  nn::DenseNet& MutableTargetNet() { return target_; }
  RingBuffer<Transition>& Replay() { return replay_; }
  const RingBuffer<Transition>& Replay() const { return replay_; }

 private:
  DdqnOptions options_;
  int action_count_;
  std::mt19937_64 rng_;
  nn::DenseNet online_;
  nn::DenseNet target_;
  RingBuffer<Transition> replay_;
  std::int64_t steps_ = 0;
};

}  // namespace sdngame

#endif  // SDNGAME_AGENT_DDQN_H_
