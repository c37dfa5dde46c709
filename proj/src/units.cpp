// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/units.hpp"

#include "prescriptor/error.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

namespace prescriptor
{

// ---------------------------------------------------------------------------
// DimVector
// ---------------------------------------------------------------------------

DimVector DimVector::base(BaseDim d, Rational power)
{
  DimVector v;
  v.exps_[static_cast<std::size_t>(d)] = power;
  return v;
}

bool DimVector::is_dimensionless() const
{
  for (const auto &e : exps_)
    if (!e.is_zero())
      return false;
  return true;
}

DimVector operator+(const DimVector &a, const DimVector &b)
{
  DimVector r;
  for (std::size_t i = 0; i < kNumBaseDims; ++i)
    r.exps_[i] = a.exps_[i] + b.exps_[i];
  return r;
}

DimVector operator-(const DimVector &a, const DimVector &b) { return a + (-b); }

DimVector DimVector::operator-() const
{
  DimVector r;
  for (std::size_t i = 0; i < kNumBaseDims; ++i)
    r.exps_[i] = -exps_[i];
  return r;
}

DimVector operator*(const DimVector &a, const Rational &k)
{
  DimVector r;
  for (std::size_t i = 0; i < kNumBaseDims; ++i)
    r.exps_[i] = a.exps_[i] * k;
  return r;
}

std::string DimVector::str() const
{
  static constexpr std::array<const char *, kNumBaseDims> names = {"m", "kg", "s", "A",
                                                                    "K", "mol", "cd"};
  // Conventional order: kg m s A K mol cd.
  static constexpr std::array<std::size_t, kNumBaseDims> order = {1, 0, 2, 3, 4, 5, 6};
  std::string out;
  for (std::size_t i : order)
  {
    const Rational &e = exps_[i];
    if (e.is_zero())
      continue;
    if (!out.empty())
      out += '*';
    out += names[i];
    if (e != Rational(1))
    {
      out += '^';
      out += e.is_integer() ? e.str() : "(" + e.str() + ")";
    }
  }
  return out.empty() ? "1" : out;
}

namespace dims
{
DimVector length() { return DimVector::base(BaseDim::Length); }
DimVector mass() { return DimVector::base(BaseDim::Mass); }
DimVector time() { return DimVector::base(BaseDim::Time); }
DimVector current() { return DimVector::base(BaseDim::Current); }
DimVector per_area() { return length() * Rational(-2); }
DimVector per_volume() { return length() * Rational(-3); }
DimVector area() { return length() * Rational(2); }
DimVector rate() { return time() * Rational(-1); }
DimVector tesla() { return mass() + time() * Rational(-2) + current() * Rational(-1); }
DimVector weber() { return tesla() + area(); }
DimVector joule() { return mass() + area() + time() * Rational(-2); }
DimVector ohm() { return joule() + time() * Rational(-1) + current() * Rational(-2); }
DimVector siemens() { return -ohm(); }
}  // namespace dims

// ---------------------------------------------------------------------------
// Quantity
// ---------------------------------------------------------------------------

Quantity::Quantity(double v, double s, DimVector d) : value(v), sigma(s), dim(std::move(d))
{
  if (!(s >= 0.0))
    throw DomainError("quantity sigma must be non-negative");
}

double Quantity::relative_sigma() const
{
  return value == 0.0 ? (sigma == 0.0 ? 0.0 : INFINITY) : sigma / std::fabs(value);
}

Quantity q_mul(const Quantity &a, const Quantity &b)
{
  return Quantity(a.value * b.value, std::hypot(a.sigma * b.value, b.sigma * a.value),
                  a.dim + b.dim);
}

Quantity q_div(const Quantity &a, const Quantity &b)
{
  if (b.value == 0.0)
    throw DomainError("division by a zero-valued quantity");
  const double v = a.value / b.value;
  const double s = std::hypot(a.sigma / b.value, a.value * b.sigma / (b.value * b.value));
  return Quantity(v, s, a.dim - b.dim);
}

Quantity q_add(const Quantity &a, const Quantity &b)
{
  if (a.dim != b.dim)
    throw DimensionError("cannot add " + a.dim.str() + " and " + b.dim.str());
  return Quantity(a.value + b.value, std::hypot(a.sigma, b.sigma), a.dim);
}

Quantity q_sub(const Quantity &a, const Quantity &b)
{
  if (a.dim != b.dim)
    throw DimensionError("cannot subtract " + b.dim.str() + " from " + a.dim.str());
  return Quantity(a.value - b.value, std::hypot(a.sigma, b.sigma), a.dim);
}

Quantity q_inv(const Quantity &a) { return q_div(Quantity::exact(1.0), a); }

Quantity q_scale(const Quantity &a, double k)
{
  return Quantity(a.value * k, a.sigma * std::fabs(k), a.dim);
}

Quantity q_pow(const Quantity &a, const Rational &p)
{
  const double pd = p.to_double();
  const double v = std::pow(a.value, pd);
  const double s = a.value == 0.0 ? 0.0 : std::fabs(pd * v / a.value) * a.sigma;
  return Quantity(v, s, a.dim * p);
}

// ---------------------------------------------------------------------------
// Unit parsing
// ---------------------------------------------------------------------------

namespace
{

const std::map<std::string, Unit, std::less<>> &unit_table()
{
  using namespace dims;
  static const std::map<std::string, Unit, std::less<>> table = [] {
    std::map<std::string, Unit, std::less<>> t;
    const DimVector amp = current();
    const DimVector volt = joule() - time() - amp;
    t["1"] = {1.0, {}};
    t["rad"] = {1.0, {}};
    t["m"] = {1.0, length()};
    t["g"] = {1e-3, mass()};
    t["s"] = {1.0, time()};
    t["A"] = {1.0, amp};
    t["K"] = {1.0, DimVector::base(BaseDim::Temperature)};
    t["mol"] = {1.0, DimVector::base(BaseDim::Amount)};
    t["cd"] = {1.0, DimVector::base(BaseDim::Luminosity)};
    t["Hz"] = {1.0, rate()};
    t["N"] = {1.0, mass() + length() + time() * Rational(-2)};
    t["J"] = {1.0, joule()};
    t["W"] = {1.0, joule() - time()};
    t["C"] = {1.0, amp + time()};
    t["V"] = {1.0, volt};
    t["F"] = {1.0, amp + time() - volt};
    t["Ohm"] = {1.0, ohm()};
    t["\xCE\xA9"] = {1.0, ohm()};  // Ω
    t["S"] = {1.0, siemens()};
    t["Wb"] = {1.0, weber()};
    t["T"] = {1.0, tesla()};
    t["H"] = {1.0, weber() - amp};
    t["eV"] = {1.602176634e-19, joule()};
    t["Phi0"] = {2.067833848461929e-15, weber()};
    return t;
  }();
  return table;
}

struct Prefix
{
  std::string_view sym;
  double scale;
};

constexpr std::array<Prefix, 11> kPrefixes = {{
    {"f", 1e-15},
    {"p", 1e-12},
    {"n", 1e-9},
    {"u", 1e-6},
    {"\xC2\xB5", 1e-6},  // µ (micro sign)
    {"\xCE\xBC", 1e-6},  // μ (greek mu)
    {"m", 1e-3},
    {"c", 1e-2},
    {"k", 1e3},
    {"M", 1e6},
    {"G", 1e9},
}};

Unit lookup_symbol(std::string_view sym)
{
  const auto &t = unit_table();
  if (auto it = t.find(sym); it != t.end())
    return it->second;
  for (const auto &p : kPrefixes)
  {
    if (sym.size() > p.sym.size() && sym.substr(0, p.sym.size()) == p.sym)
    {
      const auto rest = sym.substr(p.sym.size());
      if (rest == "1" || rest == "rad" || rest == "Phi0")
        continue;
      if (auto it = t.find(rest); it != t.end())
        return {p.scale * it->second.scale, it->second.dim};
    }
  }
  throw ParseError("unknown unit '" + std::string(sym) + "'");
}

Rational parse_exponent(std::string_view text)
{
  if (text.size() >= 2 && text.front() == '(' && text.back() == ')')
    text = text.substr(1, text.size() - 2);
  return Rational::parse(text);
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Unit parse_unit(std::string_view text)
{
  text = trim(text);
  if (text.empty())
    throw ParseError("missing unit");
  Unit out;
  bool invert = false;
  std::size_t i = 0;
  while (i <= text.size())
  {
    // Split at the next top-level '*' or '/' (not inside parentheses).
    std::size_t j = i;
    int depth = 0;
    while (j < text.size() && !(depth == 0 && (text[j] == '*' || text[j] == '/')))
    {
      if (text[j] == '(')
        ++depth;
      else if (text[j] == ')')
        --depth;
      ++j;
    }
    const std::string_view factor = trim(text.substr(i, j - i));
    if (factor.empty())
      throw ParseError("malformed unit '" + std::string(text) + "'");
    Rational power(1);
    std::string_view sym = factor;
    if (auto caret = factor.find('^'); caret != std::string_view::npos)
    {
      sym = factor.substr(0, caret);
      power = parse_exponent(factor.substr(caret + 1));
    }
    if (invert)
      power = -power;
    const Unit u = lookup_symbol(sym);
    out.scale *= std::pow(u.scale, power.to_double());
    out.dim = out.dim + u.dim * power;
    if (j >= text.size())
      break;
    invert = text[j] == '/';
    i = j + 1;
  }
  return out;
}

Quantity parse_quantity(std::string_view text)
{
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;)
    tokens.push_back(tok);
  if (tokens.size() < 2)
    throw ParseError("quantity '" + std::string(text) + "' needs '<value> [<sigma>] <unit>'");
  if (tokens.size() > 3)
    throw ParseError("quantity '" + std::string(text) + "' has trailing tokens");
  auto number = [&](const std::string &s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError("not a number: '" + s + "'");
    return v;
  };
  const double value = number(tokens[0]);
  const double sigma = tokens.size() == 3 ? number(tokens[1]) : 0.0;
  if (sigma < 0.0)
    throw ParseError("negative sigma in '" + std::string(text) + "'");
  const Unit u = parse_unit(tokens.back());
  return Quantity(value * u.scale, sigma * u.scale, u.dim);
}

double to_unit(const Quantity &q, std::string_view unit)
{
  const Unit u = parse_unit(unit);
  if (u.dim != q.dim)
    throw DimensionError("cannot express " + q.dim.str() + " in " + std::string(unit));
  return q.value / u.scale;
}

std::string format_double(double v)
{
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string to_string(const Quantity &q)
{
  return format_double(q.value) + " +- " + format_double(q.sigma) + " " + q.dim.str();
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

Quantity Constants::mu_B() { return Quantity::exact(9.2740100783e-24, dims::joule() - dims::tesla()); }

Quantity Constants::Phi0() { return Quantity::exact(2.067833848461929e-15, dims::weber()); }

Quantity Constants::mu0()
{
  return Quantity::exact(1.25663706212e-6, dims::tesla() + dims::length() - dims::current());
}

}  // namespace prescriptor
