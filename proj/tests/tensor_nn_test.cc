#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.h"
#include "sdngame/tensor_nn.h"

using namespace sdngame;
using nn::DenseNet;

namespace {

DenseNet SingleLayer(nn::Matrix w, nn::Vector b, nn::Activation act = nn::Activation::kIdentity) {
  return DenseNet({nn::DenseLayer{std::move(w), std::move(b), act}});
}

nn::Vector RandomInput(std::mt19937_64& rng, int width) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::Vector x(width);
  for (int i = 0; i < width; ++i) x(i) = u(rng);
  return x;
}

bool SameParameters(const DenseNet& a, const DenseNet& b) {
  if (!a.SameShape(b)) return false;
  for (std::size_t i = 0; i < a.Layers().size(); ++i) {
    if (a.Layers()[i].weight != b.Layers()[i].weight) return false;
    if (a.Layers()[i].bias != b.Layers()[i].bias) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("forward") {
  SUBCASE("identity weights") {
    const DenseNet net = SingleLayer(nn::Matrix::Identity(4, 4), nn::Vector::Zero(4));
    const nn::Vector x = nn::Vector::LinSpaced(4, -2.0, 1.0);
    CHECK(net.Forward(x) == x);
  }
  SUBCASE("zero weights give the bias") {
    nn::Vector b(3);
    b << 0.5, -1.0, 2.0;
    const DenseNet net = SingleLayer(nn::Matrix::Zero(3, 5), b);
    CHECK(net.Forward(nn::Vector::Ones(5)) == b);
  }
  SUBCASE("random nets match the loop oracle") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
      const DenseNet net = oracle::RandomNet(rng, {7, 9, 5, 3});
      const nn::Vector x = RandomInput(rng, 7);
      const nn::Vector y = net.Forward(x);
      const auto expected = oracle::ForwardLoops(net, std::vector<double>(x.data(), x.data() + 7));
      REQUIRE(y.size() == 3);
      for (int i = 0; i < 3; ++i) CHECK(y(i) == doctest::Approx(expected[i]).epsilon(1e-12));
      CHECK(net.Forward(x) == y);  // pure
    }
  }
  SUBCASE("batch columns equal single passes") {
    std::mt19937_64 rng(2);
    const DenseNet net = oracle::RandomNet(rng, {6, 8, 4});
    nn::Matrix xs(6, 5);
    for (int j = 0; j < 5; ++j) xs.col(j) = RandomInput(rng, 6);
    const nn::Matrix ys = net.ForwardBatch(xs);
    for (int j = 0; j < 5; ++j) {
      CHECK((ys.col(j) - net.Forward(xs.col(j))).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("width mismatch") {
    std::mt19937_64 rng(3);
    const DenseNet net = oracle::RandomNet(rng, {4, 2});
    CHECK_THROWS_AS(net.Forward(nn::Vector::Zero(5)), nn::ShapeError);
  }
}

TEST_CASE("he-uniform initialisation") {
  std::mt19937_64 rng(4);
  const std::vector<int> widths = {80, 128, 128, 68};
  const DenseNet net = DenseNet::Create(widths, rng);
  CHECK(net.InputWidth() == 80);
  CHECK(net.OutputWidth() == 68);
  CHECK(net.ParameterCount() == 80 * 128 + 128 + 128 * 128 + 128 + 128 * 68 + 68);
  for (std::size_t i = 0; i < net.Layers().size(); ++i) {
    const auto& layer = net.Layers()[i];
    const double limit = std::sqrt(6.0 / widths[i]);
    CHECK(layer.weight.cwiseAbs().maxCoeff() <= limit);
    CHECK(layer.bias.isZero());
    CHECK(layer.activation ==
          (i + 1 == net.Layers().size() ? nn::Activation::kIdentity : nn::Activation::kRelu));
  }
  std::mt19937_64 again(4);
  CHECK(SameParameters(net, DenseNet::Create(widths, again)));
}

TEST_CASE("backward mse") {
  std::mt19937_64 rng(5);
  SUBCASE("zero gradient at the minimum") {
    const DenseNet net = oracle::RandomNet(rng, {5, 6, 3});
    const nn::Vector x = RandomInput(rng, 5);
    const auto g = nn::BackwardMse(net, x, net.Forward(x)(1), 1);
    CHECK(g.MaxAbs() == 0.0);
  }
  SUBCASE("finite differences on a two-layer net") {
    for (int trial = 0; trial < 10; ++trial) {
      const DenseNet net = oracle::RandomNet(rng, {6, 10, 4});
      const nn::Vector x = RandomInput(rng, 6);
      const int action = trial % 4;
      const double target = net.Forward(x)(action) + 1.5;
      const auto g = nn::BackwardMse(net, x, target, action);
      CHECK(oracle::MaxGradientRelativeError(net, x, target, action, g) < 1e-4);
    }
  }
  SUBCASE("linear in the error on an identity path") {
    nn::Matrix w(2, 3);
    w << 0.1, -0.4, 0.3, 0.7, 0.2, -0.5;
    const DenseNet net = SingleLayer(w, nn::Vector::Zero(2));
    nn::Vector x(3);
    x << 1.0, -2.0, 0.5;
    const double out = net.Forward(x)(0);
    const auto g1 = nn::BackwardMse(net, x, out + 1.0, 0);
    auto g3 = nn::BackwardMse(net, x, out + 3.0, 0);
    auto scaled = g1;
    scaled *= 3.0;
    CHECK((g3.weight[0] - scaled.weight[0]).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g3.bias[0] - scaled.bias[0]).cwiseAbs().maxCoeff() < 1e-12);
    // d/dw (t - w.x)^2 = -2 (t - w.x) x
    CHECK(g1.weight[0](0, 1) == doctest::Approx(-2.0 * 1.0 * -2.0));
    CHECK(g1.weight[0].row(1).isZero());
  }
  SUBCASE("action index out of range") {
    const DenseNet net = oracle::RandomNet(rng, {3, 2});
    CHECK_THROWS_AS(nn::BackwardMse(net, nn::Vector::Zero(3), 0.0, 2), std::out_of_range);
  }
  SUBCASE("batch gradient is the sum of single gradients") {
    const DenseNet net = oracle::RandomNet(rng, {5, 7, 3});
    nn::Matrix xs(5, 4);
    std::vector<double> targets;
    std::vector<int> actions;
    auto expected = nn::GradientSet::ZerosLike(net);
    for (int j = 0; j < 4; ++j) {
      xs.col(j) = RandomInput(rng, 5);
      targets.push_back(0.25 * j - 0.3);
      actions.push_back(j % 3);
      expected += nn::BackwardMse(net, xs.col(j), targets[j], actions[j]);
    }
    const auto batch = nn::BackwardMseBatch(net, xs, targets, actions);
    for (std::size_t i = 0; i < batch.weight.size(); ++i) {
      CHECK((batch.weight[i] - expected.weight[i]).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((batch.bias[i] - expected.bias[i]).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("sgd step") {
  SUBCASE("scalar arithmetic") {
    DenseNet net = SingleLayer(nn::Matrix::Constant(1, 1, 1.0), nn::Vector::Zero(1));
    auto g = nn::GradientSet::ZerosLike(net);
    g.weight[0](0, 0) = 2.0;
    nn::SgdStep(net, g, 0.1);
    CHECK(net.Layers()[0].weight(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("zero learning rate and linearity") {
    std::mt19937_64 rng(6);
    DenseNet net = oracle::RandomNet(rng, {4, 5, 2});
    const DenseNet original = net;
    const auto g = nn::BackwardMse(net, RandomInput(rng, 4), 3.0, 1);
    nn::SgdStep(net, g, 0.0);
    CHECK(SameParameters(net, original));

    DenseNet twice = original;
    nn::SgdStep(twice, g, 0.01);
    nn::SgdStep(twice, g, 0.01);
    DenseNet once = original;
    nn::SgdStep(once, g, 0.02);
    for (std::size_t i = 0; i < once.Layers().size(); ++i) {
      CHECK((once.Layers()[i].weight - twice.Layers()[i].weight).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK_THROWS(nn::SgdStep(net, g, -1.0));
  }
}

TEST_CASE("soft update") {
  std::mt19937_64 rng(7);
  const DenseNet online = oracle::RandomNet(rng, {3, 4, 2});
  const DenseNet start = oracle::RandomNet(rng, {3, 4, 2});

  DenseNet copy = start;
  nn::SoftUpdate(copy, online, 1.0);
  CHECK(SameParameters(copy, online));

  DenseNet same = start;
  nn::SoftUpdate(same, online, 0.0);
  CHECK(SameParameters(same, start));

  DenseNet scalar = SingleLayer(nn::Matrix::Zero(1, 1), nn::Vector::Zero(1));
  nn::SoftUpdate(scalar, SingleLayer(nn::Matrix::Constant(1, 1, 2.0), nn::Vector::Zero(1)), 0.5);
  CHECK(scalar.Layers()[0].weight(0, 0) == 1.0);

  DenseNet blend = start;
  double gap = (blend.Layers()[0].weight - online.Layers()[0].weight).norm();
  for (int i = 0; i < 5; ++i) {
    nn::SoftUpdate(blend, online, 0.3);
    const double next = (blend.Layers()[0].weight - online.Layers()[0].weight).norm();
    CHECK(next < gap);
    gap = next;
  }

  CHECK_THROWS_AS(nn::SoftUpdate(blend, oracle::RandomNet(rng, {3, 5, 2}), 0.5), nn::ShapeError);
  CHECK_THROWS(nn::SoftUpdate(blend, online, 1.5));
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(8);
  const DenseNet net = oracle::RandomNet(rng, {80, 64, 32});
  std::stringstream buf;
  net.Save(buf);
  const DenseNet back = DenseNet::Load(buf);
  CHECK(SameParameters(net, back));
  CHECK(back.Layers()[0].activation == nn::Activation::kRelu);

  std::stringstream garbage("not a checkpoint");
  CHECK_THROWS(DenseNet::Load(garbage));
}
