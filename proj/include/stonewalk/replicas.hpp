// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic replica execution. Replica r always runs on the stream
// SeedPlan::stream_for(r) and its result lands in slot r, so the output is
// independent of the thread count and of scheduling.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "stonewalk/error.hpp"
#include "stonewalk/random.hpp"

namespace stonewalk {

/// --threads value, else STONEWALK_THREADS, else the hardware concurrency (at least 1).
inline unsigned resolve_threads(std::optional<unsigned> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("STONEWALK_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw ConfigError("STONEWALK_THREADS must be a positive integer");
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs fn(replicaId, stream) for every replica of the plan on `threads` workers.
template <class Fn>
auto run_replicas(const SeedPlan& plan, unsigned threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::uint64_t, Stream&>> {
  using R = std::invoke_result_t<Fn&, std::uint64_t, Stream&>;
  const std::uint64_t n = plan.replica_count();
  std::vector<R> out(n);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t id = next.fetch_add(1);
      if (id >= n) return;
      try {
        Stream rng = make_stream(plan, id);
        out[id] = fn(id, rng);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failureMutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  const unsigned t = std::max(1U, static_cast<unsigned>(std::min<std::uint64_t>(threads, n)));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace stonewalk
