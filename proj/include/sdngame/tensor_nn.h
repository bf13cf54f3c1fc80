#ifndef SDNGAME_TENSOR_NN_H_
#define SDNGAME_TENSOR_NN_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace sdngame::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Activation : std::uint8_t { kRelu = 0, kIdentity = 1 };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::kIdentity;
};

class DenseNet {
 public:
  DenseNet() = default;
  explicit DenseNet(std::vector<DenseLayer> layers);

  // Hidden layers use ReLU, the last layer is linear. Weights are drawn
  // uniformly from [-sqrt(6 / fan_in), sqrt(6 / fan_in)], biases start at 0.
  static DenseNet Create(std::span<const int> widths, std::mt19937_64& rng);

  int InputWidth() const;
  int OutputWidth() const;
  int ParameterCount() const;

  const std::vector<DenseLayer>& Layers() const { return layers_; }
  std::vector<DenseLayer>& MutableLayers() { return layers_; }

  Vector Forward(const Vector& x) const;
  // Column-wise forward pass; column j of the result is Forward(xs.col(j)).
  Matrix ForwardBatch(const Matrix& xs) const;

  bool SameShape(const DenseNet& other) const;

  void Save(std::ostream& out) const;
  static DenseNet Load(std::istream& in);

 private:
  std::vector<DenseLayer> layers_;
};

struct GradientSet {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  static GradientSet ZerosLike(const DenseNet& net);
  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double scale);
  double MaxAbs() const;
};

// Gradient of (target - Forward(x)[action])^2 with respect to every
// parameter. Only the selected output contributes.
GradientSet BackwardMse(const DenseNet& net, const Vector& x, double target,
                        int action_index);

// Sum over columns j of BackwardMse(net, xs.col(j), targets[j], actions[j]).
GradientSet BackwardMseBatch(const DenseNet& net, const Matrix& xs,
                             std::span<const double> targets,
                             std::span<const int> actions);

// theta <- theta - lr * grad
void SgdStep(DenseNet& net, const GradientSet& grads, double lr);

// theta' <- tau * theta + (1 - tau) * theta'
void SoftUpdate(DenseNet& target, const DenseNet& online, double tau);

}  // namespace sdngame::nn

#endif  // SDNGAME_TENSOR_NN_H_
