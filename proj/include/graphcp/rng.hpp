#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace graphcp {

/// The single random stream a chain draws from. Same seed, same build, same
/// sequence of calls => same numbers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on {0, ..., n-1}; n > 0.
  std::size_t index(std::size_t n);
  /// Uniform on {lo, ..., hi}.
  int integer(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }
  double beta(double a, double b);
  /// Geometric on {1, 2, ...} with success probability p.
  int geometric_from_one(double p);
  std::int64_t poisson(double mean);
  /// Index drawn proportionally to exp(log_weights).
  std::size_t categorical_log(std::span<const double> log_weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser, for deriving independent seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

double log_sum_exp(std::span<const double> values);

}  // namespace graphcp
