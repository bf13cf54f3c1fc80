#include "sdngame/agent_n2d.h"

#include <algorithm>

#include "sdngame/binary_io.h"

namespace sdngame {

namespace {

constexpr std::array<char, 4> kN2dMagic = {'S', 'D', 'N', 'A'};
constexpr std::uint32_t kN2dVersion = 1;

std::vector<int> Widths(int input, const std::vector<int>& rest) {
  std::vector<int> widths{input};
  widths.insert(widths.end(), rest.begin(), rest.end());
  return widths;
}

DndOptions WithKeyWidth(DndOptions dnd, const std::vector<int>& embedding) {
  if (embedding.empty()) throw std::invalid_argument("embedding widths must be non-empty");
  dnd.key_width = embedding.back();
  return dnd;
}

int ArgMax(const nn::Vector& q) {
  Eigen::Index best = 0;
  q.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

double MixQ(double lambda, double q_nec, double q_dqn) {
  return lambda * q_nec + (1.0 - lambda) * q_dqn;
}

N2dAgent::N2dAgent(int input_width, int action_count, N2dOptions options)
    : options_(std::move(options)),
      action_count_(action_count),
      rng_(options_.seed),
      dnd_(action_count, WithKeyWidth(options_.dnd, options_.embedding)),
      replay_d_(options_.replay_d_capacity),
      replay_e_(options_.replay_e_capacity) {
  if (options_.n_step < 1) throw std::invalid_argument("n_step must be at least 1");
  auto head_widths = Widths(input_width, options_.hidden);
  head_widths.push_back(action_count);
  head_ = nn::DenseNet::Create(head_widths, rng_);
  embedding_ = nn::DenseNet::Create(Widths(input_width, options_.embedding), rng_);
}

double N2dAgent::Lambda() const {
  if (!UsesNec()) return 0.0;
  if (options_.lambda_mode == LambdaMode::kConstant) return options_.lambda_constant;
  const double frac = static_cast<double>(nec_steps_) / static_cast<double>(options_.change_step);
  return std::max(0.0, 1.0 - frac);
}

nn::Vector N2dAgent::Embed(const Observation& observation) const {
  return embedding_.Forward(ToVector(observation));
}

nn::Vector N2dAgent::QDqn(const Observation& observation) const {
  return head_.Forward(ToVector(observation));
}

double N2dAgent::QN2d(const Observation& observation, int action) {
  const double q_dqn = QDqn(observation)(action);
  const double lambda = Lambda();
  if (lambda == 0.0 || dnd_.Size(action) == 0) return q_dqn;
  return MixQ(lambda, dnd_.Lookup(action, Embed(observation)).value, q_dqn);
}

nn::Vector N2dAgent::QN2dAll(const Observation& observation) {
  nn::Vector q = QDqn(observation);
  const double lambda = Lambda();
  if (lambda == 0.0) return q;
  const nn::Vector h = Embed(observation);
  for (int a = 0; a < action_count_; ++a) {
    if (dnd_.Size(a) == 0) continue;
    q(a) = MixQ(lambda, dnd_.Lookup(a, h).value, q(a));
  }
  return q;
}

TurnOutcome N2dAgent::ActAndLearn(const Observation& observation, std::span<const int> legal,
                                  const EnvStep& env_step) {
  const bool nec_branch = NextIsNecBranch();
  ++episode_step_;
  ++steps_;
  TurnOutcome outcome;
  if (nec_branch) {
    const nn::Vector q = QN2dAll(observation);
    const int action = EpsilonGreedy(q, legal, Epsilon(), rng_);
    Trace("nec:select");
    outcome = env_step(action);
    Trace("nec:step");
    trajectory_.Append({observation, action, outcome.reward});
    Trace("nec:store");
    if (replay_d_.Size() >= static_cast<std::size_t>(options_.batch_size)) {
      TrainOnTargets();
      Trace("nec:train");
    }
    ++nec_steps_;
  } else {
    const int action = EpsilonGreedy(QDqn(observation), legal, Epsilon(), rng_);
    Trace("dqn:select");
    outcome = env_step(action);
    Trace("dqn:step");
    trajectory_.Append({observation, action, outcome.reward});
    replay_e_.Push({observation, action, outcome.reward, outcome.next_observation, outcome.done});
    Trace("dqn:store");
    if (replay_e_.Size() >= static_cast<std::size_t>(options_.batch_size)) {
      TrainOnTransitions();
      Trace("dqn:train");
    }
  }
  return outcome;
}

double N2dAgent::Regress(const std::vector<const Observation*>& states,
                         const std::vector<int>& actions, const std::vector<double>& targets) {
  const nn::Matrix xs = ToMatrix(states);
  const nn::Matrix current = head_.ForwardBatch(xs);
  double loss = 0.0;
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const double err = targets[j] - current(actions[j], static_cast<Eigen::Index>(j));
    loss += err * err;
  }
  const double n = static_cast<double>(targets.size());
  nn::GradientSet grads = nn::BackwardMseBatch(head_, xs, targets, actions);
  grads *= 1.0 / n;
  nn::SgdStep(head_, grads, options_.learning_rate);
  ++train_updates_;
  return loss / n;
}

double N2dAgent::TrainOnTargets() {
  const auto batch = replay_d_.Sample(static_cast<std::size_t>(options_.batch_size), rng_);
  std::vector<const Observation*> states;
  std::vector<int> actions;
  std::vector<double> targets;
  for (const auto& sample : batch) {
    states.push_back(&sample.s);
    actions.push_back(sample.a);
    targets.push_back(sample.y);
  }
  return Regress(states, actions, targets);
}

double N2dAgent::TrainOnTransitions() {
  const auto batch = replay_e_.Sample(static_cast<std::size_t>(options_.batch_size), rng_);
  std::vector<const Observation*> states;
  std::vector<int> actions;
  std::vector<double> targets;
  for (const auto& t : batch) {
    states.push_back(&t.s);
    actions.push_back(t.a);
    if (t.done) {
      targets.push_back(t.r);
      continue;
    }
    const int a_star = ArgMax(QDqn(t.s_next));
    targets.push_back(t.r + options_.gamma * QN2d(t.s_next, a_star));
  }
  return Regress(states, actions, targets);
}

std::vector<double> N2dAgent::TrajectoryTargets() {
  const auto& steps = trajectory_.Steps();
  const std::size_t length = steps.size();
  const std::size_t horizon = static_cast<std::size_t>(options_.n_step);
  std::vector<double> rewards;
  rewards.reserve(length);
  for (const auto& step : steps) rewards.push_back(step.r);

  std::vector<double> targets(length);
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t end = std::min(t + horizon, length);
    // Past the episode end the bootstrap is terminal.
    const double bootstrap = t + horizon < length ? QN2dAll(steps[t + horizon].s).maxCoeff() : 0.0;
    targets[t] = NStepQ(std::span<const double>(rewards.data() + t, end - t), options_.gamma,
                        bootstrap);
  }
  return targets;
}

void N2dAgent::FinishEpisode() {
  const std::vector<double> targets = TrajectoryTargets();
  const bool write_dnd = UsesNec();
  const auto& steps = trajectory_.Steps();
  for (std::size_t t = 0; t < steps.size(); ++t) {
    if (write_dnd) dnd_.Write(steps[t].a, Embed(steps[t].s), targets[t]);
    replay_d_.Push({steps[t].s, steps[t].a, targets[t]});
  }
  trajectory_.Clear();
  episode_step_ = 0;
}

// Layout: "SDNA", u32 version, i64 steps, i64 S, i64 train updates, u64 D
// size, u64 E size (informational), rng state, head net, embedding net, DND.
// Replay contents and the open trajectory are not persisted.
void N2dAgent::Save(std::ostream& out) const {
  io::WriteMagic(out, kN2dMagic, kN2dVersion);
  io::Write<std::int64_t>(out, steps_);
  io::Write<std::int64_t>(out, nec_steps_);
  io::Write<std::int64_t>(out, train_updates_);
  io::Write<std::uint64_t>(out, replay_d_.Size());
  io::Write<std::uint64_t>(out, replay_e_.Size());
  agent_io::WriteRng(out, rng_);
  head_.Save(out);
  embedding_.Save(out);
  dnd_.Save(out);
}

void N2dAgent::Load(std::istream& in) {
  io::ExpectMagic(in, kN2dMagic, kN2dVersion);
  steps_ = io::Read<std::int64_t>(in);
  nec_steps_ = io::Read<std::int64_t>(in);
  train_updates_ = io::Read<std::int64_t>(in);
  io::Read<std::uint64_t>(in);
  io::Read<std::uint64_t>(in);
  agent_io::ReadRng(in, rng_);
  auto head = nn::DenseNet::Load(in);
  auto embedding = nn::DenseNet::Load(in);
  auto dnd = DndStore::Load(in);
  if (!head.SameShape(head_) || !embedding.SameShape(embedding_) ||
      dnd.ActionCount() != dnd_.ActionCount()) {
    throw io::FormatError("checkpoint shape does not match this agent");
  }
  head_ = std::move(head);
  embedding_ = std::move(embedding);
  dnd_ = std::move(dnd);
  trajectory_.Clear();
  episode_step_ = 0;
}

}  // namespace sdngame
