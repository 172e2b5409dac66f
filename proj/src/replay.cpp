#include "gridnav/replay.hpp"

#include <stdexcept>

namespace gridnav::deep {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[cursor_] = std::move(t);
    }
    cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size,
                                                      std::mt19937_64& rng) const {
    if (size() < batch_size)
        throw std::logic_error("replay buffer not ready: check ready() before sampling");
    std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
    std::vector<std::size_t> idx(batch_size);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

}  // namespace gridnav::deep
