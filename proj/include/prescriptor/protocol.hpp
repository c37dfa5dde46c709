// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_PROTOCOL_HPP
#define PRESCRIPTOR_PROTOCOL_HPP

#include "prescriptor/channels.hpp"
#include "prescriptor/units.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace prescriptor::protocol
{

// Cell order everywhere: aA, aB, bA, bB (rows a/b are materials
// treatments, columns A/B are geometries).
inline constexpr std::array<std::string_view, 4> kCellNames = {"aA", "aB", "bA", "bB"};

using Cells = std::array<Quantity, 4>;

struct TwoByTwoDesign
{
  ChannelId channel = ChannelId::TLS;
  Quantity c;
  std::array<Quantity, 2> rho;  // a, b
  std::array<Quantity, 2> g;    // A, B
  double epsilon = 0.1;
  double confidence = 0.95;
  std::string committed_at;

  std::optional<Cells> predictions;
  std::optional<std::string> seal;  // hex SHA-256 of the canonical record

  bool sealed() const noexcept { return predictions.has_value() && seal.has_value(); }
};

/// O_mn = C * rho_m * G_n. Requires the channel's registered dimensions.
Cells predict(const TwoByTwoDesign &design);

/// Computes predictions, stamps the commit time and stores the seal hash.
TwoByTwoDesign seal(TwoByTwoDesign design, std::string committed_at);

/// SHA-256 over the canonical text of the inputs, predictions and commit time.
std::string seal_hash(const TwoByTwoDesign &design);

/// Throws ProtocolViolation unless the design is sealed and its hash matches.
void verify_seal(const TwoByTwoDesign &design);

enum class ResidualStatus
{
  Pass,       // |r| <= eps and z <= z_crit
  Fail,       // z > z_crit: deviation is statistically resolved
  Undecided,  // |r| > eps but not resolved from zero
};

struct Residual
{
  double value = 0.0;  // measured ratio / predicted ratio - 1
  double sigma = 0.0;
  double z = 0.0;
  bool magnitude_ok = false;
  bool low_power = false;  // z_crit * sigma > eps
  ResidualStatus status = ResidualStatus::Undecided;
};

struct RatioTest
{
  std::array<Residual, 2> residuals;  // row test: columns A, B; column test: rows a, b
  bool pass = false;
  bool failed = false;
  bool low_power = false;
};

/// Row test: (O_bn / O_an) against rho_b / rho_a for each column n.
RatioTest row_ratio_test(const TwoByTwoDesign &design, const Cells &measured);
/// Column test: (O_mB / O_mA) against G_B / G_A for each row m.
RatioTest column_ratio_test(const TwoByTwoDesign &design, const Cells &measured);

enum class VerdictStatus
{
  Supported,
  Falsified,
  Indeterminate,
};

enum class Axis
{
  None,
  Row,
  Column,
  Both,
};

struct Verdict
{
  VerdictStatus status = VerdictStatus::Indeterminate;
  Axis axis = Axis::None;
  RatioTest row;
  RatioTest column;
  double z_crit = 0.0;

  std::string label() const;  // "Supported", "Falsified(column)", ...
};

/// Refuses (ProtocolViolation) to judge a design whose seal is missing or stale.
Verdict verdict(const TwoByTwoDesign &design, const Cells &measured);

/// Monte-Carlo spread of the four residuals [row A, row B, column a, column b]
/// under independent normal inputs.
std::array<double, 4> mc_residual_sigmas(const TwoByTwoDesign &design, const Cells &measured, std::size_t n,
                                         std::uint64_t seed);

// Design files: sections [design], [rho], [g], [predictions], [seal],
// [measurements]. Quantities are "<value> <sigma> <unit>".
struct DesignFile
{
  TwoByTwoDesign design;
  std::optional<Cells> measurements;
};

DesignFile parse_design(std::string_view text);
std::string serialize_design(const TwoByTwoDesign &design, const std::optional<Cells> &measurements = std::nullopt);

/// CSV with header `cell,value,sigma,unit`, one row per cell.
Cells parse_measurements_csv(std::string_view text);

std::string format_report(const TwoByTwoDesign &design, const Verdict &v);
std::string verdict_csv(const Verdict &v);

}  // namespace prescriptor::protocol

#endif  // PRESCRIPTOR_PROTOCOL_HPP
