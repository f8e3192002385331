#pragma once
#include <memory>
#include <mutex>

namespace lithub {

// Holds the currently published immutable value. Readers keep whatever
// snapshot they fetched; publish() swaps atomically for later readers.
template <class T>
class SnapshotSlot {
 public:
  SnapshotSlot() = default;
  explicit SnapshotSlot(std::shared_ptr<const T> initial) : current_(std::move(initial)) {}

  std::shared_ptr<const T> get() const {
    std::scoped_lock lock(mutex_);
    return current_;
  }

  void publish(std::shared_ptr<const T> next) {
    std::scoped_lock lock(mutex_);
    current_ = std::move(next);
  }

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const T> current_;
};

}  // namespace lithub
