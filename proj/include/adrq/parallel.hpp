// Copyright 2026 The adrq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace adrq {

/// Worker count: ADRQ_NUM_THREADS if set to a positive integer, else the
/// hardware concurrency.
inline std::size_t thread_count() {
  if (const char *env = std::getenv("ADRQ_NUM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0)
        return static_cast<std::size_t>(v);
    } catch (const std::exception &) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n) over a static round-robin split. Results must
/// be written to per-index slots; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn &&fn, std::size_t threads = thread_count()) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads)
          fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error)
          error = std::current_exception();
      }
    });
  for (auto &th : pool)
    th.join();
  if (error)
    std::rethrow_exception(error);
}

}  // namespace adrq
