// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_ERROR_HPP
#define PRESCRIPTOR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace prescriptor
{

/// Any failure that is a property of the inputs rather than of the program.
class DomainError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Arithmetic or closure check combined incompatible dimensions.
class DimensionError : public DomainError
{
public:
  using DomainError::DomainError;
};

/// Field evaluation too close to a current filament.
class SingularityError : public DomainError
{
public:
  using DomainError::DomainError;
};

/// Malformed input file. Carries a 1-based location when known.
class ParseError : public DomainError
{
public:
  ParseError(const std::string &msg, int line = 0, int column = 0)
    : DomainError(line > 0 ? std::to_string(line) + ":" + std::to_string(column) + ": " + msg
                           : msg),
      line_(line), column_(column)
  {
  }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

/// Pre-commitment rules of the 2x2 protocol were broken (unsealed or tampered design).
class ProtocolViolation : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace prescriptor

#endif  // PRESCRIPTOR_ERROR_HPP
