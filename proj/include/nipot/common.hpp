#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nipot {

using Complex = std::complex<double>;
using IndexSet = std::vector<std::size_t>;

inline constexpr const char* kVersion = "0.3.1";

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iterative solver cannot reach its tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

/// Neumaier-compensated accumulator; the result does not depend on thread
/// count because every reduction in the library runs sequentially over
/// per-index partial results.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double stable_sum(std::span<const double> xs) {
  KahanSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Number of workers: NIPOT_THREADS if set and positive, otherwise the
/// hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index must write only its own output
/// slot; the caller reduces afterwards in index order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Seeded generator with platform-independent transforms (the standard
/// distributions are implementation-defined, the engine is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Integer uniform on [lo, hi].
  long long integer(long long lo, long long hi);
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Least-squares slope of y against x (with intercept).
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace nipot
