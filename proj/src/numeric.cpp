// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/numeric.hpp"

#include "prescriptor/error.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <numbers>

namespace prescriptor
{

double z_two_sided(double confidence)
{
  if (!(confidence > 0.0 && confidence < 1.0))
    throw DomainError("confidence must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(),
                               0.5 + 0.5 * confidence);
}

double z_one_sided(double confidence)
{
  if (!(confidence > 0.0 && confidence < 1.0))
    throw DomainError("confidence must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), confidence);
}

double mean(std::span<const double> xs)
{
  CompensatedSum s;
  for (double x : xs)
    s += x;
  return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs)
{
  if (xs.size() < 2)
    return 0.0;
  const double m = mean(xs);
  CompensatedSum s;
  for (double x : xs)
    s += (x - m) * (x - m);
  return std::sqrt(s.value() / static_cast<double>(xs.size() - 1));
}

double quantile(std::vector<double> xs, double q)
{
  if (xs.empty())
    throw DomainError("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

std::uint64_t mix_seed(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine_seeds(std::uint64_t a, std::uint64_t b) noexcept
{
  return mix_seed(a ^ mix_seed(b + 0x632be59bd9b4e019ULL));
}

double Rng::uniform01()
{
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

std::size_t Rng::index(std::size_t n)
{
  if (n == 0)
    throw DomainError("Rng::index on empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do
    x = engine_();
  while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal()
{
  if (has_spare_)
  {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do
    u1 = uniform01();
  while (u1 <= 0.0);
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::exponential()
{
  double u;
  do
    u = uniform01();
  while (u <= 0.0);
  return -std::log(u);
}

std::uint64_t Rng::poisson(double mean)
{
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw DomainError("Poisson mean must be finite and non-negative");
  // Count unit-rate arrivals in [0, mean]; exact, O(mean).
  std::uint64_t k = 0;
  double t = exponential();
  while (t <= mean)
  {
    ++k;
    t += exponential();
  }
  return k;
}

}  // namespace prescriptor
