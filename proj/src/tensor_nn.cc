#include "sdngame/tensor_nn.h"

#include <cmath>
#include <string>

#include "sdngame/binary_io.h"

namespace sdngame::nn {

namespace {

constexpr std::array<char, 4> kNetMagic = {'S', 'D', 'N', 'N'};
constexpr std::uint32_t kNetVersion = 1;

void Activate(Vector& z, Activation activation) {
  if (activation == Activation::kRelu) z = z.cwiseMax(0.0);
}

void RequireSameShape(const DenseNet& a, const DenseNet& b) {
  if (!a.SameShape(b)) throw ShapeError("networks are not shape-congruent");
}

}  // namespace

DenseNet::DenseNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.bias.size() != layer.weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + ": bias/weight row mismatch");
    }
    if (i > 0 && layer.weight.cols() != layers_[i - 1].weight.rows()) {
      throw ShapeError("layer " + std::to_string(i) + ": width does not chain");
    }
  }
}

DenseNet DenseNet::Create(std::span<const int> widths, std::mt19937_64& rng) {
  if (widths.size() < 2) throw ShapeError("need input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int fan_in = widths[i];
    const int fan_out = widths[i + 1];
    if (fan_in < 1 || fan_out < 1) throw ShapeError("layer widths must be positive");
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    }
    layer.bias = Vector::Zero(fan_out);
    layer.activation = i + 2 == widths.size() ? Activation::kIdentity : Activation::kRelu;
    layers.push_back(std::move(layer));
  }
  return DenseNet(std::move(layers));
}

int DenseNet::InputWidth() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols());
}

int DenseNet::OutputWidth() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows());
}

int DenseNet::ParameterCount() const {
  int count = 0;
  for (const auto& layer : layers_) {
    count += static_cast<int>(layer.weight.size() + layer.bias.size());
  }
  return count;
}

Vector DenseNet::Forward(const Vector& x) const {
  if (x.size() != InputWidth()) {
    throw ShapeError("input width " + std::to_string(x.size()) + ", expected " +
                     std::to_string(InputWidth()));
  }
  Vector h = x;
  for (const auto& layer : layers_) {
    Vector z = layer.weight * h + layer.bias;
    Activate(z, layer.activation);
    h = std::move(z);
  }
  return h;
}

Matrix DenseNet::ForwardBatch(const Matrix& xs) const {
  if (xs.rows() != InputWidth()) throw ShapeError("batch input width mismatch");
  Matrix h = xs;
  for (const auto& layer : layers_) {
    Matrix z = layer.weight * h;
    z.colwise() += layer.bias;
    if (layer.activation == Activation::kRelu) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

bool DenseNet::SameShape(const DenseNet& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
        a.activation != b.activation) {
      return false;
    }
  }
  return true;
}

// Layout: "SDNN", u32 version, u32 layer count, then per layer u32 rows,
// u32 cols, u8 activation, rows*cols weights (row-major f64), rows biases.
void DenseNet::Save(std::ostream& out) const {
  io::WriteMagic(out, kNetMagic, kNetVersion);
  io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& layer : layers_) {
    io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.rows()));
    io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.cols()));
    io::Write<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        io::Write<double>(out, layer.weight(r, c));
      }
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) io::Write<double>(out, layer.bias(r));
  }
}

DenseNet DenseNet::Load(std::istream& in) {
  io::ExpectMagic(in, kNetMagic, kNetVersion);
  const auto count = io::Read<std::uint32_t>(in);
  std::vector<DenseLayer> layers(count);
  for (auto& layer : layers) {
    const auto rows = io::Read<std::uint32_t>(in);
    const auto cols = io::Read<std::uint32_t>(in);
    const auto tag = io::Read<std::uint8_t>(in);
    if (tag > 1) throw io::FormatError("unknown activation tag");
    layer.activation = static_cast<Activation>(tag);
    layer.weight.resize(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
      for (std::uint32_t c = 0; c < cols; ++c) layer.weight(r, c) = io::Read<double>(in);
    }
    layer.bias.resize(rows);
    for (std::uint32_t r = 0; r < rows; ++r) layer.bias(r) = io::Read<double>(in);
  }
  return DenseNet(std::move(layers));
}

GradientSet GradientSet::ZerosLike(const DenseNet& net) {
  GradientSet grads;
  for (const auto& layer : net.Layers()) {
    grads.weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    grads.bias.push_back(Vector::Zero(layer.bias.size()));
  }
  return grads;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  if (weight.size() != other.weight.size()) throw ShapeError("gradient sets differ in depth");
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

GradientSet& GradientSet::operator*=(double scale) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] *= scale;
    bias[i] *= scale;
  }
  return *this;
}

double GradientSet::MaxAbs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (weight[i].size() > 0) m = std::max(m, weight[i].cwiseAbs().maxCoeff());
    if (bias[i].size() > 0) m = std::max(m, bias[i].cwiseAbs().maxCoeff());
  }
  return m;
}

GradientSet BackwardMse(const DenseNet& net, const Vector& x, double target,
                        int action_index) {
  if (action_index < 0 || action_index >= net.OutputWidth()) {
    throw std::out_of_range("action index " + std::to_string(action_index) +
                            " outside output width " + std::to_string(net.OutputWidth()));
  }
  if (x.size() != net.InputWidth()) throw ShapeError("input width mismatch");

  const auto& layers = net.Layers();
  // activations[i] is the input to layer i; pre[i] its affine output.
  std::vector<Vector> activations{x};
  std::vector<Vector> pre;
  for (const auto& layer : layers) {
    Vector z = layer.weight * activations.back() + layer.bias;
    pre.push_back(z);
    Activate(z, layer.activation);
    activations.push_back(std::move(z));
  }

  GradientSet grads = GradientSet::ZerosLike(net);
  Vector delta = Vector::Zero(net.OutputWidth());
  delta(action_index) = -2.0 * (target - activations.back()(action_index));
  for (std::size_t i = layers.size(); i-- > 0;) {
    if (layers[i].activation == Activation::kRelu) {
      delta = delta.cwiseProduct((pre[i].array() > 0.0).cast<double>().matrix());
    }
    grads.weight[i] = delta * activations[i].transpose();
    grads.bias[i] = delta;
    if (i > 0) delta = layers[i].weight.transpose() * delta;
  }
  return grads;
}

GradientSet BackwardMseBatch(const DenseNet& net, const Matrix& xs,
                             std::span<const double> targets,
                             std::span<const int> actions) {
  const auto batch = xs.cols();
  if (xs.rows() != net.InputWidth()) throw ShapeError("batch input width mismatch");
  if (static_cast<Eigen::Index>(targets.size()) != batch ||
      static_cast<Eigen::Index>(actions.size()) != batch) {
    throw ShapeError("targets/actions must match the batch size");
  }
  for (int a : actions) {
    if (a < 0 || a >= net.OutputWidth()) throw std::out_of_range("action index outside output width");
  }

  const auto& layers = net.Layers();
  std::vector<Matrix> activations{xs};
  std::vector<Matrix> pre;
  for (const auto& layer : layers) {
    Matrix z = layer.weight * activations.back();
    z.colwise() += layer.bias;
    pre.push_back(z);
    if (layer.activation == Activation::kRelu) z = z.cwiseMax(0.0);
    activations.push_back(std::move(z));
  }

  GradientSet grads = GradientSet::ZerosLike(net);
  Matrix delta = Matrix::Zero(net.OutputWidth(), batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    delta(actions[j], j) = -2.0 * (targets[j] - activations.back()(actions[j], j));
  }
  for (std::size_t i = layers.size(); i-- > 0;) {
    if (layers[i].activation == Activation::kRelu) {
      delta = delta.cwiseProduct((pre[i].array() > 0.0).cast<double>().matrix());
    }
    grads.weight[i] = delta * activations[i].transpose();
    grads.bias[i] = delta.rowwise().sum();
    if (i > 0) delta = layers[i].weight.transpose() * delta;
  }
  return grads;
}

void SgdStep(DenseNet& net, const GradientSet& grads, double lr) {
  if (lr < 0.0) throw std::invalid_argument("learning rate must be non-negative");
  auto& layers = net.MutableLayers();
  if (grads.weight.size() != layers.size()) throw ShapeError("gradient depth mismatch");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (grads.weight[i].rows() != layers[i].weight.rows() ||
        grads.weight[i].cols() != layers[i].weight.cols() ||
        grads.bias[i].size() != layers[i].bias.size()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(i));
    }
    layers[i].weight -= lr * grads.weight[i];
    layers[i].bias -= lr * grads.bias[i];
  }
}

void SoftUpdate(DenseNet& target, const DenseNet& online, double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
  RequireSameShape(target, online);
  auto& dst = target.MutableLayers();
  const auto& src = online.Layers();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i].weight = tau * src[i].weight + (1.0 - tau) * dst[i].weight;
    dst[i].bias = tau * src[i].bias + (1.0 - tau) * dst[i].bias;
  }
}

}  // namespace sdngame::nn
