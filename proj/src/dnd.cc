#include "sdngame/dnd.h"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "sdngame/binary_io.h"

namespace sdngame {

namespace {

constexpr std::array<char, 4> kDndMagic = {'S', 'D', 'N', 'D'};
constexpr std::uint32_t kDndVersion = 1;

double SquaredDistance(const double* a, const double* b, int width) {
  double sum = 0.0;
  for (int i = 0; i < width; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

double Kernel(std::span<const double> h, std::span<const double> h_i, double delta) {
  if (h.size() != h_i.size()) throw std::invalid_argument("kernel width mismatch");
  return 1.0 / (SquaredDistance(h.data(), h_i.data(), static_cast<int>(h.size())) + delta);
}

double NStepQ(std::span<const double> rewards, double gamma, double bootstrap) {
  if (rewards.empty()) throw std::invalid_argument("n-step return needs at least one reward");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");
  double total = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    total += discount * r;
    discount *= gamma;
  }
  return total + discount * bootstrap;
}

DndStore::DndStore(int action_count, DndOptions options)
    : options_(options), memories_(action_count) {
  if (action_count < 1) throw std::invalid_argument("DND needs at least one action");
  if (options_.key_width < 1) throw std::invalid_argument("key width must be positive");
  if (options_.capacity < 1) throw std::invalid_argument("DND capacity must be positive");
  if (options_.neighbors < 0) throw std::invalid_argument("neighbor count must be >= 0");
  if (!(options_.delta > 0.0)) throw std::invalid_argument("kernel delta must be positive");
}

DndStore::Memory& DndStore::At(int action) {
  if (action < 0 || action >= ActionCount()) throw std::out_of_range("DND action index");
  return memories_[action];
}

const DndStore::Memory& DndStore::At(int action) const {
  if (action < 0 || action >= ActionCount()) throw std::out_of_range("DND action index");
  return memories_[action];
}

int DndStore::Size(int action) const { return static_cast<int>(At(action).values.size()); }

int DndStore::TotalSize() const {
  int total = 0;
  for (const auto& m : memories_) total += static_cast<int>(m.values.size());
  return total;
}

std::span<const double> DndStore::Key(int action, int slot) const {
  const auto& m = At(action);
  return {m.keys.data() + static_cast<std::size_t>(slot) * options_.key_width,
          static_cast<std::size_t>(options_.key_width)};
}

double DndStore::Value(int action, int slot) const { return At(action).values.at(slot); }

std::string DndStore::KeyBytes(const double* key) const {
  return std::string(reinterpret_cast<const char*>(key), sizeof(double) * options_.key_width);
}

DndLookup DndStore::Lookup(int action, const Eigen::VectorXd& h) {
  Memory& m = At(action);
  if (h.size() != options_.key_width) throw std::invalid_argument("DND key width mismatch");
  const int size = static_cast<int>(m.values.size());
  if (size == 0) throw EmptyMemoryError("no keys stored for action " + std::to_string(action));

  const int width = options_.key_width;
  std::vector<double> dist(size);
  for (int i = 0; i < size; ++i) {
    dist[i] = SquaredDistance(h.data(), m.keys.data() + static_cast<std::size_t>(i) * width, width);
  }

  DndLookup result;
  result.neighbors.resize(size);
  std::iota(result.neighbors.begin(), result.neighbors.end(), 0);
  const int p = options_.neighbors;
  if (p > 0 && size > p) {
    auto closer = [&](int a, int b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::nth_element(result.neighbors.begin(), result.neighbors.begin() + p,
                     result.neighbors.end(), closer);
    result.neighbors.resize(p);
    std::sort(result.neighbors.begin(), result.neighbors.end());
  }

  double norm = 0.0;
  result.weights.reserve(result.neighbors.size());
  for (int i : result.neighbors) {
    const double k = 1.0 / (dist[i] + options_.delta);
    result.weights.push_back(k);
    norm += k;
  }
  ++clock_;
  for (std::size_t j = 0; j < result.neighbors.size(); ++j) {
    result.weights[j] /= norm;
    result.value += result.weights[j] * m.values[result.neighbors[j]];
    m.last_used[result.neighbors[j]] = clock_;
  }
  return result;
}

void DndStore::Write(int action, const Eigen::VectorXd& h, double q_target) {
  Memory& m = At(action);
  if (h.size() != options_.key_width) throw std::invalid_argument("DND key width mismatch");
  ++clock_;
  std::string bytes = KeyBytes(h.data());
  if (auto it = m.slot_of_key.find(bytes); it != m.slot_of_key.end()) {
    double& q = m.values[it->second];
    q += options_.alpha * (q_target - q);
    m.last_used[it->second] = clock_;
    return;
  }
  m.slot_of_key.emplace(std::move(bytes), static_cast<int>(m.values.size()));
  m.keys.insert(m.keys.end(), h.data(), h.data() + options_.key_width);
  m.values.push_back(q_target);
  m.last_used.push_back(clock_);
  if (static_cast<int>(m.values.size()) > options_.capacity) EvictLeastRecent(m);
}

void DndStore::EvictLeastRecent(Memory& m) {
  const int width = options_.key_width;
  const int victim = static_cast<int>(
      std::min_element(m.last_used.begin(), m.last_used.end()) - m.last_used.begin());
  const int last = static_cast<int>(m.values.size()) - 1;
  m.slot_of_key.erase(KeyBytes(m.keys.data() + static_cast<std::size_t>(victim) * width));
  if (victim != last) {
    std::copy_n(m.keys.data() + static_cast<std::size_t>(last) * width, width,
                m.keys.data() + static_cast<std::size_t>(victim) * width);
    m.values[victim] = m.values[last];
    m.last_used[victim] = m.last_used[last];
    m.slot_of_key[KeyBytes(m.keys.data() + static_cast<std::size_t>(victim) * width)] = victim;
  }
  m.keys.resize(m.keys.size() - width);
  m.values.pop_back();
  m.last_used.pop_back();
}

// Layout: "SDND", u32 version, i32 action count, i32 key width, i32
// capacity, i32 neighbors, f64 delta, f64 alpha, u64 clock, then per action
// u32 size followed by size * (key_width f64 key, f64 value, u64 stamp).
void DndStore::Save(std::ostream& out) const {
  io::WriteMagic(out, kDndMagic, kDndVersion);
  io::Write<std::int32_t>(out, ActionCount());
  io::Write<std::int32_t>(out, options_.key_width);
  io::Write<std::int32_t>(out, options_.capacity);
  io::Write<std::int32_t>(out, options_.neighbors);
  io::Write<double>(out, options_.delta);
  io::Write<double>(out, options_.alpha);
  io::Write<std::uint64_t>(out, clock_);
  for (const auto& m : memories_) {
    io::Write<std::uint32_t>(out, static_cast<std::uint32_t>(m.values.size()));
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      for (int j = 0; j < options_.key_width; ++j) {
        io::Write<double>(out, m.keys[i * options_.key_width + j]);
      }
      io::Write<double>(out, m.values[i]);
      io::Write<std::uint64_t>(out, m.last_used[i]);
    }
  }
}

DndStore DndStore::Load(std::istream& in) {
  io::ExpectMagic(in, kDndMagic, kDndVersion);
  const int actions = io::Read<std::int32_t>(in);
  DndOptions options;
  options.key_width = io::Read<std::int32_t>(in);
  options.capacity = io::Read<std::int32_t>(in);
  options.neighbors = io::Read<std::int32_t>(in);
  options.delta = io::Read<double>(in);
  options.alpha = io::Read<double>(in);
  DndStore store(actions, options);
  store.clock_ = io::Read<std::uint64_t>(in);
  for (auto& m : store.memories_) {
    const auto size = io::Read<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < size; ++i) {
      for (int j = 0; j < options.key_width; ++j) m.keys.push_back(io::Read<double>(in));
      m.values.push_back(io::Read<double>(in));
      m.last_used.push_back(io::Read<std::uint64_t>(in));
      m.slot_of_key.emplace(
          store.KeyBytes(m.keys.data() + static_cast<std::size_t>(i) * options.key_width),
          static_cast<int>(i));
    }
  }
  return store;
}

}  // namespace sdngame
