// Copyright 2026 The gewild Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace gewild::train {

/// Loads items 0..count-1 on worker threads and hands them out in index
/// order. At most `window` items are claimed ahead of the consumer. With zero
/// workers every item is loaded inline by next().
template <typename T>
class Prefetcher {
 public:
  Prefetcher(std::size_t count, std::function<T(std::size_t)> load, std::size_t window, unsigned workers)
      : count_(count), window_(window == 0 ? 1 : window), load_(std::move(load)) {
    for (unsigned i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
  }

  ~Prefetcher() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_all();
  }

  Prefetcher(const Prefetcher&) = delete;
  Prefetcher& operator=(const Prefetcher&) = delete;

  bool done() const { return taken_ >= count_; }

  /// Next item in order; rethrows the loader's exception for that item.
  T next() {
    if (threads_.empty()) return load_(taken_++);
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return ready_.count(taken_) != 0; });
    auto node = ready_.extract(taken_);
    ++taken_;
    lock.unlock();
    cv_.notify_all();
    if (node.mapped().error) std::rethrow_exception(node.mapped().error);
    return std::move(*node.mapped().value);
  }

 private:
  struct Slot {
    std::optional<T> value;
    std::exception_ptr error;
  };

  void work() {
    while (true) {
      std::size_t index = 0;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stop_ || claimed_ >= count_ || claimed_ < taken_ + window_; });
        if (stop_ || claimed_ >= count_) return;
        index = claimed_++;
      }
      Slot slot;
      try {
        slot.value.emplace(load_(index));
      } catch (...) {
        slot.error = std::current_exception();
      }
      {
        std::lock_guard lock(mutex_);
        ready_.emplace(index, std::move(slot));
      }
      cv_.notify_all();
    }
  }

  std::size_t count_;
  std::size_t window_;
  std::function<T(std::size_t)> load_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::size_t claimed_ = 0;
  std::size_t taken_ = 0;
  bool stop_ = false;
  std::map<std::size_t, Slot> ready_;
  std::vector<std::jthread> threads_;  // last member: joined before the state above is destroyed
};

}  // namespace gewild::train
