#pragma once

#include "agrisim/cdr.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agrisim {

/// Nanoseconds on the monotonic clock since the first call in this process.
inline std::int64_t monotonic_ns() {
  static const auto epoch = std::chrono::steady_clock::now();
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - epoch).count();
}

using Payload = std::shared_ptr<const std::vector<std::uint8_t>>;

struct TopicSample {
  std::string key;
  std::int64_t publish_timestamp = 0;  // ns, monotonic_ns() clock
  Payload payload;
};

namespace topics {
inline constexpr std::string_view kOdom = "rt/odom";
inline constexpr std::string_view kTf = "rt/tf";
inline constexpr std::string_view kDepth = "rt/camera/depth";
inline constexpr std::string_view kSeg = "rt/camera/seg";
inline constexpr std::string_view kRgb = "rt/camera/rgb";
inline constexpr std::string_view kCameraInfo = "rt/camera/camera_info";
inline constexpr std::string_view kClock = "rt/clock";
}  // namespace topics

/// Glob match: '*' matches any run of characters (including '/'), '?' exactly one.
inline bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

/// Bounded FIFO for one subscriber; drops the oldest sample on overflow.
class Subscription {
 public:
  static constexpr std::size_t kDefaultCapacity = 1024;

  Subscription(std::string pattern, std::size_t capacity) : pattern_(std::move(pattern)), capacity_(capacity) {}

  const std::string& pattern() const { return pattern_; }

  std::optional<TopicSample> try_pop() {
    std::lock_guard lock(mu_);
    return pop_locked();
  }

  template <typename Rep, typename Period>
  std::optional<TopicSample> pop(std::chrono::duration<Rep, Period> timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
    return pop_locked();
  }

  std::uint64_t dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
  }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  friend class Bus;

  void push(const TopicSample& s) {
    {
      std::lock_guard lock(mu_);
      if (closed_) return;
      if (queue_.size() >= capacity_) {
        queue_.pop_front();
        ++dropped_;
      }
      queue_.push_back(s);
    }
    cv_.notify_one();
  }

  std::optional<TopicSample> pop_locked() {
    if (queue_.empty()) return std::nullopt;
    TopicSample s = std::move(queue_.front());
    queue_.pop_front();
    return s;
  }

  std::string pattern_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<TopicSample> queue_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

/// In-process publish/subscribe. Safe for concurrent publishers and
/// subscribers; ordering is preserved per publisher and topic.
class Bus {
 public:
  std::shared_ptr<Subscription> subscribe(std::string pattern,
                                          std::size_t capacity = Subscription::kDefaultCapacity) {
    if (capacity == 0) throw std::invalid_argument("subscription capacity must be > 0");
    auto sub = std::make_shared<Subscription>(std::move(pattern), capacity);
    std::lock_guard lock(mu_);
    subs_.push_back(sub);
    return sub;
  }

  void publish(TopicSample sample) {
    if (sample.key.empty()) throw std::invalid_argument("topic key must not be empty");
    if (!sample.payload || sample.payload->size() < 4 ||
        !std::equal(cdr::kEncapsulationLE.begin(), cdr::kEncapsulationLE.begin() + 2, sample.payload->begin())) {
      throw std::invalid_argument("payload must start with a CDR encapsulation header");
    }
    std::lock_guard lock(mu_);
    std::erase_if(subs_, [](const auto& w) { return w.expired(); });
    for (const auto& w : subs_) {
      if (auto s = w.lock(); s && glob_match(s->pattern(), sample.key)) s->push(sample);
    }
    ++published_;
  }

  void publish(std::string key, std::vector<std::uint8_t> payload, std::int64_t timestamp = monotonic_ns()) {
    publish(TopicSample{std::move(key), timestamp,
                        std::make_shared<const std::vector<std::uint8_t>>(std::move(payload))});
  }

  std::uint64_t published() const {
    std::lock_guard lock(mu_);
    return published_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::weak_ptr<Subscription>> subs_;
  std::uint64_t published_ = 0;
};

}  // namespace agrisim
