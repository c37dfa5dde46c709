// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_UNITS_HPP
#define PRESCRIPTOR_UNITS_HPP

#include "prescriptor/rational.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace prescriptor
{

enum class BaseDim : std::size_t
{
  Length = 0,
  Mass,
  Time,
  Current,
  Temperature,
  Amount,
  Luminosity,
};

inline constexpr std::size_t kNumBaseDims = 7;

/// Exponents over the seven SI base dimensions.
class DimVector
{
public:
  DimVector() = default;
  explicit DimVector(const std::array<Rational, kNumBaseDims> &exps) : exps_(exps) {}

  static DimVector base(BaseDim d, Rational power = 1);
  static DimVector dimensionless() { return DimVector(); }

  const Rational &operator[](BaseDim d) const { return exps_[static_cast<std::size_t>(d)]; }
  const Rational &operator[](std::size_t i) const { return exps_[i]; }
  Rational &operator[](std::size_t i) { return exps_[i]; }

  bool is_dimensionless() const;

  friend DimVector operator+(const DimVector &a, const DimVector &b);
  friend DimVector operator-(const DimVector &a, const DimVector &b);
  DimVector operator-() const;
  friend DimVector operator*(const DimVector &a, const Rational &k);

  friend bool operator==(const DimVector &a, const DimVector &b) = default;

  /// e.g. "m^-2", "kg*m^2*s^-3*A^-1", "1".
  std::string str() const;

private:
  std::array<Rational, kNumBaseDims> exps_{};
};

// Common dimensions.
namespace dims
{
DimVector length();
DimVector mass();
DimVector time();
DimVector current();
DimVector per_area();    // m^-2
DimVector per_volume();  // m^-3
DimVector area();        // m^2
DimVector rate();        // s^-1
DimVector tesla();
DimVector weber();
DimVector joule();
DimVector ohm();
DimVector siemens();
}  // namespace dims

/// A value with standard uncertainty and SI dimension. Value is stored in SI.
struct Quantity
{
  double value = 0.0;
  double sigma = 0.0;
  DimVector dim;

  Quantity() = default;
  Quantity(double v, double s, DimVector d);

  static Quantity exact(double v, DimVector d = {}) { return Quantity(v, 0.0, d); }
  static Quantity dimensionless(double v, double s = 0.0) { return Quantity(v, s, {}); }

  double relative_sigma() const;
};

// First-order (uncorrelated) propagation throughout.
Quantity q_mul(const Quantity &a, const Quantity &b);
Quantity q_div(const Quantity &a, const Quantity &b);
Quantity q_add(const Quantity &a, const Quantity &b);  // throws DimensionError on mismatch
Quantity q_sub(const Quantity &a, const Quantity &b);
Quantity q_inv(const Quantity &a);
Quantity q_scale(const Quantity &a, double k);
Quantity q_pow(const Quantity &a, const Rational &p);

inline Quantity operator*(const Quantity &a, const Quantity &b) { return q_mul(a, b); }
inline Quantity operator/(const Quantity &a, const Quantity &b) { return q_div(a, b); }
inline Quantity operator+(const Quantity &a, const Quantity &b) { return q_add(a, b); }
inline Quantity operator-(const Quantity &a, const Quantity &b) { return q_sub(a, b); }

/// Parsed unit expression: SI scale factor plus dimension.
struct Unit
{
  double scale = 1.0;
  DimVector dim;
};

/// Parses "m^-2", "T^2*A^-2*m^2", "S/m", "us", "Ohm*m", "Phi0^2", "1".
/// Unknown symbols raise ParseError.
Unit parse_unit(std::string_view text);

/// Parses "<value> [<sigma>] <unit>" into an SI quantity.
Quantity parse_quantity(std::string_view text);

/// Quantity in the given unit, e.g. to_unit(q, "us"). Dimension must match.
double to_unit(const Quantity &q, std::string_view unit);

/// Shortest round-trip formatting for doubles.
std::string format_double(double v);

std::string to_string(const Quantity &q);

/// CODATA 2018 values, zero uncertainty.
struct Constants
{
  static Quantity mu_B();  // J/T
  static Quantity Phi0();  // Wb
  static Quantity mu0();   // T*m/A
};

}  // namespace prescriptor

#endif  // PRESCRIPTOR_UNITS_HPP
