// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_NUMERIC_HPP
#define PRESCRIPTOR_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace prescriptor
{

/// Neumaier compensated summation.
class CompensatedSum
{
public:
  void add(double x) noexcept
  {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  CompensatedSum &operator+=(double x) noexcept
  {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Two-sided standard-normal critical value: P(|Z| <= z) = confidence.
double z_two_sided(double confidence);

/// One-sided: P(Z <= z) = confidence.
double z_one_sided(double confidence);

/// Sample standard deviation (n - 1 denominator). Returns 0 for n < 2.
double sample_stddev(std::span<const double> xs);

double mean(std::span<const double> xs);

/// Percentile by linear interpolation between order statistics; q in [0, 1].
double quantile(std::vector<double> xs, double q);

/// SplitMix64 mixer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;
std::uint64_t combine_seeds(std::uint64_t a, std::uint64_t b) noexcept;

/// mt19937_64 engine with distributions whose output is fixed by the seed
/// alone (the std:: distributions are implementation-defined).
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();                            // [0, 1)
  double uniform(double lo, double hi);          // [lo, hi)
  std::size_t index(std::size_t n);              // [0, n), unbiased
  double normal();                               // Box-Muller, standard normal
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential();                          // rate 1
  std::uint64_t poisson(double mean);

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace prescriptor

#endif  // PRESCRIPTOR_NUMERIC_HPP
