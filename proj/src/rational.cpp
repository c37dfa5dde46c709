// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/rational.hpp"

#include "prescriptor/error.hpp"

#include <cctype>
#include <charconv>
#include <numeric>

namespace prescriptor
{

namespace
{

std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw DomainError("rational overflow in multiplication");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw DomainError("rational overflow in addition");
  return r;
}

std::int64_t pow10(int e)
{
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i)
    r = checked_mul(r, 10);
  return r;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den)
{
  if (den == 0)
    throw DomainError("rational with zero denominator");
  if (den < 0)
  {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / (g == 0 ? 1 : g);
  den_ = den / (g == 0 ? 1 : g);
}

std::string Rational::str() const
{
  if (den_ == 1)
    return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(std::string_view text)
{
  auto bad = [&]() { return ParseError("not an exact rational: '" + std::string(text) + "'"); };
  if (text.empty())
    throw bad();
  if (auto slash = text.find('/'); slash != std::string_view::npos)
  {
    return parse(text.substr(0, slash)) / parse(text.substr(slash + 1));
  }
  bool neg = false;
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-')
  {
    neg = text[i] == '-';
    ++i;
  }
  std::int64_t mant = 0;
  int frac_digits = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < text.size(); ++i)
  {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c)))
    {
      mant = checked_add(checked_mul(mant, 10), c - '0');
      if (seen_dot)
        ++frac_digits;
      seen_digit = true;
    }
    else if (c == '.' && !seen_dot)
      seen_dot = true;
    else
      break;
  }
  if (!seen_digit)
    throw bad();
  int exp10 = 0;
  if (i < text.size())
  {
    if (text[i] != 'e' && text[i] != 'E')
      throw bad();
    ++i;
    const char *first = text.data() + i;
    const char *last = text.data() + text.size();
    if (first != last && *first == '+')
      ++first;
    auto [p, ec] = std::from_chars(first, last, exp10);
    if (ec != std::errc() || p != last)
      throw bad();
  }
  exp10 -= frac_digits;
  Rational r = exp10 >= 0 ? Rational(checked_mul(mant, pow10(exp10)), 1)
                          : Rational(mant, pow10(-exp10));
  return neg ? -r : r;
}

Rational operator+(const Rational &a, const Rational &b)
{
  const std::int64_t g = std::gcd(a.den_, b.den_);
  const std::int64_t lhs = checked_mul(a.num_, b.den_ / g);
  const std::int64_t rhs = checked_mul(b.num_, a.den_ / g);
  return Rational(checked_add(lhs, rhs), checked_mul(a.den_ / g, b.den_));
}

Rational operator-(const Rational &a, const Rational &b) { return a + (-b); }

Rational operator*(const Rational &a, const Rational &b)
{
  const std::int64_t g1 = std::gcd(a.num_, b.den_) == 0 ? 1 : std::gcd(a.num_, b.den_);
  const std::int64_t g2 = std::gcd(b.num_, a.den_) == 0 ? 1 : std::gcd(b.num_, a.den_);
  return Rational(checked_mul(a.num_ / g1, b.num_ / g2), checked_mul(a.den_ / g2, b.den_ / g1));
}

Rational operator/(const Rational &a, const Rational &b)
{
  if (b.num_ == 0)
    throw DomainError("rational division by zero");
  return a * Rational(b.den_, b.num_);
}

Rational Rational::operator-() const
{
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

std::strong_ordering operator<=>(const Rational &a, const Rational &b)
{
  // Denominators are positive, so the sign of a - b decides.
  const Rational d = a - b;
  if (d.num_ == 0)
    return std::strong_ordering::equal;
  return d.num_ < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
}

}  // namespace prescriptor
