#pragma once

#include <cstddef>
#include <vector>

#include "wtb/error.hpp"

namespace wtb {

using Action = std::size_t;

// The last `capacity` actions played, most recent last. Fixed-capacity ring;
// pushing into a full window drops the oldest entry.
class HistoryWindow {
public:
    explicit HistoryWindow(std::size_t capacity) : slots_(capacity) {
        if (capacity == 0) {
            throw ParameterError("history capacity must be positive");
        }
    }

    std::size_t capacity() const noexcept { return slots_.size(); }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    void push(Action a) {
        slots_[head_] = a;
        head_ = (head_ + 1) % slots_.size();
        if (size_ < slots_.size()) {
            ++size_;
        }
    }

    // i-th most recent action, 1-based: recent(1) is the latest play.
    // Precondition: 1 <= i <= size().
    Action recent(std::size_t i) const {
        const std::size_t cap = slots_.size();
        return slots_[(head_ + cap - i) % cap];
    }

    // Oldest first.
    std::vector<Action> to_vector() const {
        std::vector<Action> out;
        out.reserve(size_);
        for (std::size_t i = size_; i >= 1; --i) {
            out.push_back(recent(i));
        }
        return out;
    }

    void clear() noexcept {
        head_ = 0;
        size_ = 0;
    }

private:
    std::vector<Action> slots_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

}  // namespace wtb
