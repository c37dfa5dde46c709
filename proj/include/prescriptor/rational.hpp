// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_RATIONAL_HPP
#define PRESCRIPTOR_RATIONAL_HPP

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace prescriptor
{

// Exact rational over int64 with overflow detection. Always normalized:
// gcd(num, den) == 1 and den > 0.
class Rational
{
public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  bool is_zero() const noexcept { return num_ == 0; }
  bool is_integer() const noexcept { return den_ == 1; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  // "3", "-1/2"
  std::string str() const;

  // Parses an exact decimal or fraction: "0.4", "-2", "1/3", "2.5e-3".
  static Rational parse(std::string_view text);

  friend Rational operator+(const Rational &a, const Rational &b);
  friend Rational operator-(const Rational &a, const Rational &b);
  friend Rational operator*(const Rational &a, const Rational &b);
  friend Rational operator/(const Rational &a, const Rational &b);
  Rational operator-() const;

  Rational &operator+=(const Rational &o) { return *this = *this + o; }
  Rational &operator-=(const Rational &o) { return *this = *this - o; }
  Rational &operator*=(const Rational &o) { return *this = *this * o; }
  Rational &operator/=(const Rational &o) { return *this = *this / o; }

  friend bool operator==(const Rational &a, const Rational &b) = default;
  friend std::strong_ordering operator<=>(const Rational &a, const Rational &b);

private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace prescriptor

#endif  // PRESCRIPTOR_RATIONAL_HPP
