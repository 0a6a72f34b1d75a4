// Copyright 2026 The Thunder CTF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EMUCLOUD_CLOCK_HPP_
#define EMUCLOUD_CLOCK_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>

namespace emucloud {

/// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

/// Wall-clock time, clamped so it never goes backwards.
class SystemClock final : public Clock {
 public:
  Timestamp now() const override {
    auto t = std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
                 .count();
    auto prev = last_.load();
    while (t > prev && !last_.compare_exchange_weak(prev, t)) {
    }
    return t > prev ? t : prev;
  }

 private:
  mutable std::atomic<Timestamp> last_{0};
};

/// Test clock; only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start = 1'700'000'000'000) : now_(start) {}

  Timestamp now() const override { return now_.load(); }
  void advance(std::chrono::milliseconds d) { now_ += d.count(); }
  void set(Timestamp t) { now_ = t; }

 private:
  std::atomic<Timestamp> now_;
};

}  // namespace emucloud

#endif  // EMUCLOUD_CLOCK_HPP_
