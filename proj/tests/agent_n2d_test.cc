#include <random>
#include <sstream>

#include "doctest.h"
#include "sdngame/agent_n2d.h"

using namespace sdngame;

namespace {

constexpr int kWidth = 6;
constexpr int kActions = 3;

N2dOptions Tiny() {
  N2dOptions o;
  o.hidden = {8};
  o.embedding = {5, 4};
  o.batch_size = 1;
  o.change_step = 100;
  o.epsilon = EpsilonSchedule::Constant(0.0);
  o.dnd.neighbors = 0;
  o.seed = 23;
  return o;
}

Observation Obs(int code) {
  Observation obs(kWidth);
  for (int i = 0; i < kWidth; ++i) obs[i] = (code >> i) & 1;
  return obs;
}

// Feeds scripted rewards and states back to the agent.
struct ScriptedEnv {
  std::vector<int> rewards;
  int calls = 0;
  std::vector<int> actions;

  TurnOutcome operator()(int a) {
    actions.push_back(a);
    TurnOutcome out;
    out.reward = rewards[calls % rewards.size()];
    out.next_observation = Obs(calls + 1);
    ++calls;
    return out;
  }
};

const std::vector<int> kAll = {0, 1, 2};

void PlayEpisode(N2dAgent& agent, const std::vector<int>& rewards, int first_code = 0) {
  ScriptedEnv env{rewards};
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    agent.ActAndLearn(Obs(first_code + static_cast<int>(t)), kAll, std::ref(env));
  }
}

}  // namespace

TEST_CASE("mixing arithmetic") {
  CHECK(MixQ(1.0, 2.0, 4.0) == 2.0);
  CHECK(MixQ(0.0, 2.0, 4.0) == 4.0);
  CHECK(MixQ(0.5, 2.0, 4.0) == 3.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0), l(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng), lambda = l(rng);
    const double q = MixQ(lambda, a, b);
    CHECK(q >= std::min(a, b) - 1e-12);
    CHECK(q <= std::max(a, b) + 1e-12);
  }
}

TEST_CASE("lambda schedule") {
  N2dAgent agent(kWidth, kActions, Tiny());
  CHECK(agent.Lambda() == 1.0);
  agent.SetNecSteps(50);
  CHECK(agent.Lambda() == 0.5);
  agent.SetNecSteps(99);
  CHECK(agent.Lambda() == doctest::Approx(0.01));
  agent.SetNecSteps(100);
  CHECK(agent.Lambda() == 0.0);
  CHECK_FALSE(agent.UsesNec());

  N2dOptions o = Tiny();
  o.lambda_mode = LambdaMode::kConstant;
  N2dAgent constant(kWidth, kActions, o);
  CHECK(constant.Lambda() == 0.5);
  constant.SetNecSteps(100);
  CHECK(constant.Lambda() == 0.0);
}

TEST_CASE("q_n2d") {
  N2dAgent agent(kWidth, kActions, Tiny());
  const Observation s = Obs(5);

  SUBCASE("empty memory falls back to the DQN head") {
    CHECK(agent.QN2d(s, 1) == agent.QDqn(s)(1));
  }
  SUBCASE("hand cases") {
    agent.Dnd().Write(1, agent.Embed(s), 2.0);
    const double q_dqn = agent.QDqn(s)(1);
    CHECK(agent.QN2d(s, 1) == 2.0);  // lambda 1, single entry
    agent.SetNecSteps(50);
    CHECK(agent.QN2d(s, 1) == MixQ(0.5, 2.0, q_dqn));
    CHECK(agent.QN2d(s, 1) == doctest::Approx(0.5 * 2.0 + 0.5 * q_dqn).epsilon(1e-15));
    agent.SetNecSteps(100);
    CHECK(agent.QN2d(s, 1) == q_dqn);
  }
  SUBCASE("past the change step equals the DQN head exactly") {
    PlayEpisode(agent, {1, -1, 1, 1, -1, 1});
    agent.FinishEpisode();
    REQUIRE(agent.Dnd().TotalSize() > 0);
    agent.SetNecSteps(100);
    for (int code = 0; code < 64; ++code) {
      CHECK(agent.QN2dAll(Obs(code)) == agent.QDqn(Obs(code)));
    }
    const int before = agent.Dnd().TotalSize();
    PlayEpisode(agent, {1, 1, -1, 1}, 30);
    agent.FinishEpisode();
    CHECK(agent.Dnd().TotalSize() == before);
  }
}

TEST_CASE("branch parity") {
  N2dAgent agent(kWidth, kActions, Tiny());
  ScriptedEnv env{{0}};
  std::vector<bool> branches;
  for (int t = 0; t < 5; ++t) {
    branches.push_back(agent.NextIsNecBranch());
    agent.ActAndLearn(Obs(t), kAll, std::ref(env));
  }
  CHECK(branches == std::vector<bool>{true, false, true, false, true});
  CHECK(agent.NecSteps() == 3);
  agent.FinishEpisode();
  CHECK(agent.NextIsNecBranch());
}

TEST_CASE("cold start") {
  N2dOptions o = Tiny();
  o.batch_size = 32;
  N2dAgent agent(kWidth, kActions, o);
  const nn::DenseNet head = agent.Head();
  ScriptedEnv env{{1, -1}};
  for (int t = 0; t < 4; ++t) {
    const TurnOutcome out = agent.ActAndLearn(Obs(t), kAll, std::ref(env));
    CHECK(out.reward == (t % 2 == 0 ? 1 : -1));
  }
  CHECK(agent.TrainUpdates() == 0);
  CHECK(agent.Head().Layers()[0].weight == head.Layers()[0].weight);
  CHECK(agent.ReplayE().Size() == 2);
  CHECK(agent.ReplayD().Size() == 0);
  CHECK(agent.CurrentTrajectory().Size() == 4);
}

TEST_CASE("six-step trace follows select, step, store, train") {
  N2dAgent agent(kWidth, kActions, Tiny());
  PlayEpisode(agent, {1, -1});
  agent.FinishEpisode();
  REQUIRE(agent.ReplayD().Size() == 2);

  std::vector<std::string> trace;
  agent.SetTraceSink([&](const std::string& e) { trace.push_back(e); });
  PlayEpisode(agent, {1, 1, -1, 1, -1, -1}, 10);
  std::vector<std::string> expected;
  for (int i = 0; i < 3; ++i) {
    for (const char* e : {"nec:select", "nec:step", "nec:store", "nec:train", "dqn:select",
                          "dqn:step", "dqn:store", "dqn:train"}) {
      expected.push_back(e);
    }
  }
  CHECK(trace == expected);
}

TEST_CASE("even steps regress toward the mixed one-step target") {
  N2dAgent agent(kWidth, kActions, Tiny());
  // Seed the DND so the bootstrap really mixes.
  PlayEpisode(agent, {1}, 40);
  agent.FinishEpisode();
  REQUIRE(agent.Dnd().TotalSize() > 0);
  REQUIRE(agent.Lambda() > 0.0);
  REQUIRE(agent.Lambda() < 1.0);

  ScriptedEnv env{{-1, 1}};
  agent.ActAndLearn(Obs(7), kAll, std::ref(env));  // odd step, trains from D
  const nn::DenseNet head = agent.Head();
  const Observation s = Obs(8);
  const Observation s_next = Obs(env.calls + 1);
  const int a_star = [&] {
    Eigen::Index best;
    agent.QDqn(s_next).maxCoeff(&best);
    return static_cast<int>(best);
  }();
  const double target = 1.0 + 0.99 * agent.QN2d(s_next, a_star);

  agent.ActAndLearn(s, kAll, std::ref(env));
  REQUIRE(agent.ReplayE().Size() == 1);
  const int a = agent.ReplayE().At(0).a;
  nn::DenseNet expected = head;
  nn::SgdStep(expected, nn::BackwardMse(head, ToVector(s), target, a), 1e-3);
  for (std::size_t i = 0; i < expected.Layers().size(); ++i) {
    CHECK((agent.Head().Layers()[i].weight - expected.Layers()[i].weight).cwiseAbs().maxCoeff() <
          1e-15);
  }
}

TEST_CASE("episode targets") {
  SUBCASE("single terminal step") {
    N2dOptions o = Tiny();
    o.gamma = 0.37;
    N2dAgent agent(kWidth, kActions, o);
    PlayEpisode(agent, {1});
    CHECK(agent.TrajectoryTargets() == std::vector<double>{1.0});
  }
  SUBCASE("five steps within the horizon") {
    N2dOptions o = Tiny();
    o.gamma = 0.9;
    N2dAgent agent(kWidth, kActions, o);
    const std::vector<int> r = {1, -1, 0, 1, 1};
    PlayEpisode(agent, r);
    std::vector<double> expected(5);
    double acc = 0.0;
    for (int t = 4; t >= 0; --t) {
      acc = r[t] + 0.9 * acc;
      expected[t] = acc;
    }
    const auto y = agent.TrajectoryTargets();
    REQUIRE(y.size() == 5);
    for (int t = 0; t < 5; ++t) CHECK(y[t] == doctest::Approx(expected[t]).epsilon(1e-14));
  }
  SUBCASE("horizon shorter than the episode bootstraps") {
    N2dOptions o = Tiny();
    o.gamma = 0.5;
    o.n_step = 2;
    N2dAgent agent(kWidth, kActions, o);
    const std::vector<int> r = {1, 1, -1, 1, -1};
    PlayEpisode(agent, r);
    const auto y = agent.TrajectoryTargets();
    for (int t = 0; t < 5; ++t) {
      double sum = 0.0;
      double g = 1.0;
      for (int j = t; j < std::min(t + 2, 5); ++j) {
        sum += g * r[j];
        g *= 0.5;
      }
      // memory is still empty so the bootstrap is the head's max
      if (t + 2 < 5) sum += 0.25 * agent.Head().Forward(ToVector(Obs(t + 2))).maxCoeff();
      CHECK(y[t] == doctest::Approx(sum).epsilon(1e-14));
    }
  }
  SUBCASE("finished episode is written to memory and D") {
    N2dOptions o = Tiny();
    o.dnd.neighbors = 1;
    N2dAgent agent(kWidth, kActions, o);
    PlayEpisode(agent, {1, -1, 1}, 3);
    const auto y = agent.TrajectoryTargets();
    std::vector<TrajectoryStep> steps = agent.CurrentTrajectory().Steps();
    agent.FinishEpisode();
    CHECK(agent.CurrentTrajectory().Empty());
    CHECK(agent.ReplayD().Size() == 3);
    for (std::size_t t = 0; t < steps.size(); ++t) {
      CHECK(agent.ReplayD().At(t).y == y[t]);
      CHECK(agent.Dnd().Lookup(steps[t].a, agent.Embed(steps[t].s)).value == y[t]);
    }
  }
}

TEST_CASE("embedding stays fixed and memory stays bounded") {
  N2dOptions o = Tiny();
  o.dnd.capacity = 4;
  N2dAgent agent(kWidth, kActions, o);
  const nn::DenseNet embedding = agent.Embedding();
  for (int episode = 0; episode < 6; ++episode) {
    PlayEpisode(agent, {1, -1, 1, 1, -1}, episode * 5);
    agent.FinishEpisode();
    for (int a = 0; a < kActions; ++a) CHECK(agent.Dnd().Size(a) <= 4);
  }
  CHECK(agent.TrainUpdates() > 0);
  for (std::size_t i = 0; i < embedding.Layers().size(); ++i) {
    CHECK(agent.Embedding().Layers()[i].weight == embedding.Layers()[i].weight);
  }
}

TEST_CASE("checkpoint round trip") {
  N2dAgent agent(kWidth, kActions, Tiny());
  PlayEpisode(agent, {1, -1, 1, 1});
  agent.FinishEpisode();
  std::stringstream buf;
  agent.Save(buf);

  N2dOptions o = Tiny();
  o.seed = 4;
  N2dAgent other(kWidth, kActions, o);
  other.Load(buf);
  CHECK(other.NecSteps() == agent.NecSteps());
  CHECK(other.Dnd().TotalSize() == agent.Dnd().TotalSize());
  for (int code = 0; code < 8; ++code) CHECK(other.QN2dAll(Obs(code)) == agent.QN2dAll(Obs(code)));

  N2dAgent wrong(kWidth, kActions + 1, Tiny());
  std::stringstream again;
  agent.Save(again);
  CHECK_THROWS(wrong.Load(again));
}
