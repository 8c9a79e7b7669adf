#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "coinfer/environment.hpp"
#include "coinfer/neuralnet.hpp"

namespace coinfer {

struct Transition {
  Observation state{};
  std::size_t action = 0;
  double reward = 0.0;
  Observation next_state{};
  bool done = false;
};

// Column-major minibatch: one sample per column.
struct Batch {
  nn::Matrix states;
  nn::Matrix next_states;
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  std::vector<double> dones;  // 1.0 for terminal transitions

  std::size_t size() const { return actions.size(); }
};

Batch make_batch(const std::vector<Transition>& transitions);

// Fixed-capacity FIFO ring with a seeded uniform sampler (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(const Transition& t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_pushed() const { return pushed_; }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  Batch sample(std::size_t batch_size);

 private:
  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // slot to overwrite next once full
  std::size_t pushed_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace coinfer
