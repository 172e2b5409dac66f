#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace gridnav::deep {

/// One environment step as stored for replay and rollouts.
struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

/// Fixed-capacity ring: oldest entries overwritten first once full. Sampling
/// is uniform with replacement across current contents.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Transition t);
    bool ready(std::size_t batch_size) const { return size() >= batch_size; }

    /// Indices into the buffer; call operator[] to read. Caller must check
    /// ready() first.
    std::vector<std::size_t> sample_indices(std::size_t batch_size, std::mt19937_64& rng) const;

    const Transition& operator[](std::size_t i) const { return storage_[i]; }
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

}  // namespace gridnav::deep
