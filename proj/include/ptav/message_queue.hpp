#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

namespace ptav {

/// Bounded multi-producer multi-consumer queue. Producers choose between
/// blocking on a full queue and evicting the oldest entry.
template <class T>
class MessageQueue {
 public:
  explicit MessageQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  // Never blocks; returns the evicted element when the queue was full.
  std::optional<T> push_evicting(T item) {
    std::optional<T> evicted;
    {
      std::lock_guard lock(mutex_);
      if (items_.size() == capacity_) {
        evicted = std::move(items_.front());
        items_.pop_front();
      }
      items_.push_back(std::move(item));
    }
    ready_.notify_one();
    return evicted;
  }

  // Blocks while full. Returns false if the queue was closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    space_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    lock.unlock();
    ready_.notify_one();
    return true;
  }

  std::optional<T> try_pop() {
    std::optional<T> out;
    {
      std::lock_guard lock(mutex_);
      if (items_.empty()) return out;
      out = std::move(items_.front());
      items_.pop_front();
    }
    space_.notify_one();
    return out;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T out = std::move(items_.front());
    items_.pop_front();
    lock.unlock();
    space_.notify_one();
    return out;
  }

  // Waits for at least one element (or close) and takes everything queued.
  std::vector<T> pop_all() {
    std::unique_lock lock(mutex_);
    ready_.wait(lock, [&] { return closed_ || !items_.empty(); });
    std::vector<T> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
    items_.clear();
    lock.unlock();
    space_.notify_all();
    return out;
  }

  // Pending elements stay poppable after close.
  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
    space_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::condition_variable space_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace ptav
