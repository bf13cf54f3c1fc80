#ifndef SDNGAME_MEMORY_H_
#define SDNGAME_MEMORY_H_

#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "sdngame/topology.h"

namespace sdngame {

struct Transition {
  Observation s;
  int a = 0;
  int r = 0;
  Observation s_next;
  bool done = false;
};

// Episode-end regression target for the DQN head.
struct TargetSample {
  Observation s;
  int a = 0;
  double y = 0.0;
};

class EmptyBufferError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Fixed-capacity FIFO; once full, each push overwrites the oldest entry.
template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("ring buffer capacity must be positive");
    entries_.reserve(capacity_ < 4096 ? capacity_ : 4096);
  }

  std::size_t Capacity() const { return capacity_; }
  std::size_t Size() const { return entries_.size(); }
  bool Empty() const { return entries_.empty(); }

  void Push(T item) {
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(item));
      return;
    }
    entries_[head_] = std::move(item);
    head_ = (head_ + 1) % capacity_;
  }

  // i = 0 is the oldest surviving entry.
  const T& At(std::size_t i) const {
    if (i >= entries_.size()) throw std::out_of_range("ring buffer index");
    return entries_[(head_ + i) % entries_.size()];
  }

  // k uniform draws with replacement.
  template <typename Rng>
  std::vector<T> Sample(std::size_t k, Rng& rng) const {
    if (entries_.empty()) throw EmptyBufferError("cannot sample from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    std::vector<T> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(entries_[pick(rng)]);
    return out;
  }

  void Clear() {
    entries_.clear();
    head_ = 0;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> entries_;
};

struct TrajectoryStep {
  Observation s;
  int a = 0;
  int r = 0;
};

// Per-episode (s, a, r) sequence used for N-step targets.
class Trajectory {
 public:
  void Append(TrajectoryStep step) { steps_.push_back(std::move(step)); }
  const std::vector<TrajectoryStep>& Steps() const { return steps_; }
  std::size_t Size() const { return steps_.size(); }
  bool Empty() const { return steps_.empty(); }
  void Clear() { steps_.clear(); }

 private:
  std::vector<TrajectoryStep> steps_;
};

}  // namespace sdngame

#endif  // SDNGAME_MEMORY_H_
