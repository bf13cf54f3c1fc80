#ifndef SDNGAME_AGENT_N2D_H_
#define SDNGAME_AGENT_N2D_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdngame/agent.h"
#include "sdngame/dnd.h"
#include "sdngame/memory.h"

namespace sdngame {

enum class LambdaMode : std::uint8_t {
  kLinearDecay = 0,  // lambda = max(0, 1 - S / CS)
  kConstant = 1,     // lambda = constant while S < CS
};

struct N2dOptions {
  std::vector<int> hidden = {128, 128};
  std::vector<int> embedding = {64, 32};  // last entry is the key width
  double gamma = 0.99;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::size_t replay_d_capacity = 50000;
  std::size_t replay_e_capacity = 50000;
  int n_step = 100;
  std::int64_t change_step = 1;
  LambdaMode lambda_mode = LambdaMode::kLinearDecay;
  double lambda_constant = 0.5;
  DndOptions dnd;  // key_width is taken from `embedding`
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;
};

// lambda * q_nec + (1 - lambda) * q_dqn
double MixQ(double lambda, double q_nec, double q_dqn);

// NEC2DQN: odd internal steps act on the lambda-mixed episodic/DQN value and
// train the DQN head on episode-end targets (buffer D); even steps act on the
// DQN head alone and train it on one-step targets bootstrapped through the
// mixed value (buffer E). The embedding network is fixed at initialization.
class N2dAgent : public Agent {
 public:
  N2dAgent(int input_width, int action_count, N2dOptions options);

  std::string Kind() const override { return "n2d"; }

  double Lambda() const;
  bool UsesNec() const { return nec_steps_ < options_.change_step; }

  nn::Vector Embed(const Observation& observation) const;
  nn::Vector QDqn(const Observation& observation) const;
  double QN2d(const Observation& observation, int action);
  nn::Vector QN2dAll(const Observation& observation);

  // True when the next ActAndLearn call runs the episodic branch.
  bool NextIsNecBranch() const { return (episode_step_ + 1) % 2 == 1; }

  TurnOutcome ActAndLearn(const Observation& observation, std::span<const int> legal,
                          const EnvStep& env_step) override;

  // Turns the episode trajectory into N-step targets, writes them into the
  // DND (while S < CS) and into D, then clears the trajectory.
  void FinishEpisode() override;

  // Episode-end targets for the current trajectory without mutating D or the
  // DND contents (DND recency stamps still move).
  std::vector<double> TrajectoryTargets();

  void Save(std::ostream& out) const override;
  void Load(std::istream& in) override;

  // Receives one event name per Algorithm step, e.g. "nec:select".
  void SetTraceSink(std::function<void(const std::string&)> sink) { trace_ = std::move(sink); }

  double Epsilon() const { return options_.epsilon.At(steps_); }
  std::int64_t Steps() const { return steps_; }
  std::int64_t NecSteps() const { return nec_steps_; }
  std::int64_t TrainUpdates() const { return train_updates_; }
  const N2dOptions& Options() const { return options_; }

  nn::DenseNet& MutableHead() { return head_; }
  const nn::DenseNet& Head() const { return head_; }
  const nn::DenseNet& Embedding() const { return embedding_; }
  DndStore& Dnd() { return dnd_; }
  const DndStore& Dnd() const { return dnd_; }
  const RingBuffer<TargetSample>& ReplayD() const { return replay_d_; }
  const RingBuffer<Transition>& ReplayE() const { return replay_e_; }
  const Trajectory& CurrentTrajectory() const { return trajectory_; }

  // Forces the episodic-step counter S; used to exercise the change step.
  void SetNecSteps(std::int64_t s) { nec_steps_ = s; }

 private:
  void Trace(const char* event) const {
    if (trace_) trace_(event);
  }
  double TrainOnTargets();
  double TrainOnTransitions();
  double Regress(const std::vector<const Observation*>& states, const std::vector<int>& actions,
                 const std::vector<double>& targets);

  N2dOptions options_;
  int action_count_;
  std::mt19937_64 rng_;
  nn::DenseNet head_;
  nn::DenseNet embedding_;
  DndStore dnd_;
  RingBuffer<TargetSample> replay_d_;
  RingBuffer<Transition> replay_e_;
  Trajectory trajectory_;
  std::int64_t episode_step_ = 0;
  std::int64_t nec_steps_ = 0;
  std::int64_t steps_ = 0;
  std::int64_t train_updates_ = 0;
  std::function<void(const std::string&)> trace_;
};

}  // namespace sdngame

#endif  // SDNGAME_AGENT_N2D_H_
