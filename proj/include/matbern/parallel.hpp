#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

#include "matbern/error.hpp"

namespace matbern {

// Evaluates fn(i) for i in [0, count) on `workers` threads, each taking one
// contiguous block, and returns results in index order. Callers derive all
// randomness from i, so the output does not depend on the worker count.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, int workers, Fn&& fn) {
  if (workers < 1) throw ParameterError("parallel_map: workers must be >= 1");
  std::vector<Result> out(count);
  const auto nw = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(count, 1));
  if (nw <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(nw);
  std::vector<std::thread> threads;
  threads.reserve(nw);
  const std::size_t block = (count + nw - 1) / nw;
  for (std::size_t w = 0; w < nw; ++w) {
    threads.emplace_back([&, w] {
      try {
        const std::size_t lo = w * block;
        const std::size_t hi = std::min(count, lo + block);
        for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace matbern
