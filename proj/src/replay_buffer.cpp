#include "coinfer/replay_buffer.hpp"

#include <stdexcept>

namespace coinfer {

Batch make_batch(const std::vector<Transition>& transitions) {
  const auto n = static_cast<Eigen::Index>(transitions.size());
  Batch b;
  b.states.resize(kObservationSize, n);
  b.next_states.resize(kObservationSize, n);
  b.actions.reserve(transitions.size());
  b.rewards.reserve(transitions.size());
  b.dones.reserve(transitions.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = transitions[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < kObservationSize; ++i) {
      b.states(static_cast<Eigen::Index>(i), j) = t.state[i];
      b.next_states(static_cast<Eigen::Index>(i), j) = t.next_state[i];
    }
    b.actions.push_back(t.action);
    b.rewards.push_back(t.reward);
    b.dones.push_back(t.done ? 1.0 : 0.0);
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1u << 20));
}

void ReplayBuffer::push(const Transition& t) {
  ++pushed_;
  if (data_.size() < capacity_) {
    data_.push_back(t);
    return;
  }
  data_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw std::out_of_range("replay index out of range");
  return data_[(head_ + i) % data_.size()];
}

Batch ReplayBuffer::sample(std::size_t batch_size) {
  if (data_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<Transition> chosen;
  chosen.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) chosen.push_back(data_[pick(rng_)]);
  return make_batch(chosen);
}

}  // namespace coinfer
