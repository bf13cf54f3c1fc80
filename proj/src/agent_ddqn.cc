#include "sdngame/agent_ddqn.h"

#include "sdngame/binary_io.h"

namespace sdngame {

namespace {

constexpr std::array<char, 4> kDdqnMagic = {'S', 'D', 'Q', 'A'};
constexpr std::uint32_t kDdqnVersion = 1;

std::vector<int> Widths(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> widths{input};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output);
  return widths;
}

int ArgMax(const Eigen::Ref<const nn::Vector>& q) {
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

DdqnAgent::DdqnAgent(int input_width, int action_count, DdqnOptions options)
    : options_(std::move(options)),
      action_count_(action_count),
      rng_(options_.seed),
      replay_(options_.replay_capacity) {
  const auto widths = Widths(input_width, options_.hidden, action_count);
  online_ = nn::DenseNet::Create(widths, rng_);
  target_ = online_;
}

int DdqnAgent::SelectAction(const Observation& observation, std::span<const int> legal) {
  return EpsilonGreedy(online_.Forward(ToVector(observation)), legal, Epsilon(), rng_);
}

double DdqnAgent::DoubleQTarget(const Transition& t) const {
  if (t.done) return t.r;
  const nn::Vector next = ToVector(t.s_next);
  const int a_star = ArgMax(online_.Forward(next));
  return t.r + options_.gamma * target_.Forward(next)(a_star);
}

double DdqnAgent::TrainStep(int batch_size) {
  const auto batch = replay_.Sample(static_cast<std::size_t>(batch_size), rng_);
  std::vector<const Observation*> states;
  std::vector<const Observation*> next_states;
  std::vector<int> actions;
  for (const auto& t : batch) {
    states.push_back(&t.s);
    next_states.push_back(&t.s_next);
    actions.push_back(t.a);
  }
  const nn::Matrix next = ToMatrix(next_states);
  const nn::Matrix next_online = online_.ForwardBatch(next);
  const nn::Matrix next_target = target_.ForwardBatch(next);
  const nn::Matrix xs = ToMatrix(states);
  const nn::Matrix current = online_.ForwardBatch(xs);

  std::vector<double> targets(batch.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& t = batch[j];
    targets[j] = t.done ? static_cast<double>(t.r)
                        : t.r + options_.gamma * next_target(ArgMax(next_online.col(j)), j);
    const double err = targets[j] - current(t.a, j);
    loss += err * err;
  }
  loss /= static_cast<double>(batch.size());

  nn::GradientSet grads = nn::BackwardMseBatch(online_, xs, targets, actions);
  grads *= 1.0 / static_cast<double>(batch.size());
  nn::SgdStep(online_, grads, options_.learning_rate);
  nn::SoftUpdate(target_, online_, options_.tau);
  return loss;
}

TurnOutcome DdqnAgent::ActAndLearn(const Observation& observation, std::span<const int> legal,
                                   const EnvStep& env_step) {
  const int action = SelectAction(observation, legal);
  TurnOutcome outcome = env_step(action);
  replay_.Push({observation, action, outcome.reward, outcome.next_observation, outcome.done});
  ++steps_;
  if (replay_.Size() >= static_cast<std::size_t>(options_.batch_size)) {
    TrainStep(options_.batch_size);
  }
  return outcome;
}

// Layout: "SDQA", u32 version, i64 steps, u64 replay size (informational),
// rng state, online net, target net. Replay contents are not persisted.
void DdqnAgent::Save(std::ostream& out) const {
  io::WriteMagic(out, kDdqnMagic, kDdqnVersion);
  io::Write<std::int64_t>(out, steps_);
  io::Write<std::uint64_t>(out, replay_.Size());
  agent_io::WriteRng(out, rng_);
  online_.Save(out);
  target_.Save(out);
}

void DdqnAgent::Load(std::istream& in) {
  io::ExpectMagic(in, kDdqnMagic, kDdqnVersion);
  steps_ = io::Read<std::int64_t>(in);
  io::Read<std::uint64_t>(in);
  agent_io::ReadRng(in, rng_);
  auto online = nn::DenseNet::Load(in);
  auto target = nn::DenseNet::Load(in);
  if (!online.SameShape(online_) || !target.SameShape(target_)) {
    throw io::FormatError("checkpoint network shape does not match this agent");
  }
  online_ = std::move(online);
  target_ = std::move(target);
}

}  // namespace sdngame
