#ifndef SDNGAME_DND_H_
#define SDNGAME_DND_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace sdngame {

class EmptyMemoryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct DndOptions {
  int key_width = 32;
  int capacity = 10000;  // per action
  int neighbors = 50;    // 0 selects every stored key
  double delta = 1e-3;
  double alpha = 0.1;    // update rate for keys that already exist
};

struct DndLookup {
  double value = 0.0;
  std::vector<int> neighbors;  // slot indices, ascending
  std::vector<double> weights; // aligned with neighbors
};

// 1 / (||h - h_i||^2 + delta)
double Kernel(std::span<const double> h, std::span<const double> h_i, double delta);

// sum_{j<N} gamma^j r_j + gamma^N * bootstrap
double NStepQ(std::span<const double> rewards, double gamma, double bootstrap);

// Differentiable neural dictionary: one key/value memory per action.
class DndStore {
 public:
  DndStore(int action_count, DndOptions options);

  const DndOptions& Options() const { return options_; }
  int ActionCount() const { return static_cast<int>(memories_.size()); }
  int Size(int action) const;
  int TotalSize() const;

  // Kernel-weighted average over the nearest `neighbors` keys. Marks the
  // selected entries as recently used. Throws EmptyMemoryError when the
  // action has no stored keys.
  DndLookup Lookup(int action, const Eigen::VectorXd& h);

  // Updates the value of a bit-identical key, otherwise appends; evicts the
  // least recently used entry past capacity.
  void Write(int action, const Eigen::VectorXd& h, double q_target);

  std::span<const double> Key(int action, int slot) const;
  double Value(int action, int slot) const;

  void Save(std::ostream& out) const;
  static DndStore Load(std::istream& in);

 private:
  struct Memory {
    std::vector<double> keys;  // slot-major, key_width per slot
    std::vector<double> values;
    std::vector<std::uint64_t> last_used;
    std::unordered_map<std::string, int> slot_of_key;
  };

  Memory& At(int action);
  const Memory& At(int action) const;
  std::string KeyBytes(const double* key) const;
  void EvictLeastRecent(Memory& memory);

  DndOptions options_;
  std::vector<Memory> memories_;
  std::uint64_t clock_ = 0;
};

}  // namespace sdngame

#endif  // SDNGAME_DND_H_
