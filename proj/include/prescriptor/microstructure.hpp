// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_MICROSTRUCTURE_HPP
#define PRESCRIPTOR_MICROSTRUCTURE_HPP

#include "prescriptor/units.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prescriptor::stats
{

struct CurvatureSample
{
  double s = 0.0;      // arclength, m
  double kappa = 0.0;  // curvature, 1/m
};

/// Arclength-sampled edge curvature on perimeter-normal slices.
///
/// Arclength must be non-decreasing. A repeated s value marks a jump in
/// kappa (the two samples are the left and right limits); at most two
/// samples may share an s value.
class CurvatureTrace
{
public:
  explicit CurvatureTrace(std::vector<CurvatureSample> samples);

  const std::vector<CurvatureSample> &samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  /// Sampled perimeter L = s_last - s_first.
  double perimeter() const noexcept { return samples_.back().s - samples_.front().s; }
  /// Trapezoid weight of each sample; sums to perimeter().
  std::vector<double> weights() const;

private:
  std::vector<CurvatureSample> samples_;
};

struct HeightSample
{
  double s = 0.0;  // m
  double h = 0.0;  // m
};

class HeightProfile
{
public:
  explicit HeightProfile(std::vector<HeightSample> samples);
  const std::vector<HeightSample> &samples() const noexcept { return samples_; }

private:
  std::vector<HeightSample> samples_;
};

/// (1/L) * integral of kappa(s)^n ds, trapezoid rule. n = 2 is the second
/// curvature moment.
double curvature_moment(const CurvatureTrace &trace, int n);

struct CurvatureMoments
{
  double mu1 = 0.0;  // m^-1
  double mu2 = 0.0;  // m^-2
  double mu3 = 0.0;  // m^-3
  double mu4 = 0.0;  // m^-4
};

/// Higher moments are reported only; verdicts use mu2.
CurvatureMoments curvature_moments(const CurvatureTrace &trace);

/// Point estimate of mu2 (sigma = 0).
Quantity mu2(const CurvatureTrace &trace);

/// mu2 with sigma from a site-level bootstrap: whole samples are resampled
/// with their trapezoid weights.
Quantity mu2_bootstrap(const CurvatureTrace &trace, std::size_t n_resamples, std::uint64_t seed);

Quantity rms_roughness(const HeightProfile &profile);

enum class LossTangentForm
{
  Linear,       // tan_d0 * (1 + alpha * mu2)
  Exponential,  // tan_d0 * exp(beta * mu2)
};

struct LossTangentModel
{
  LossTangentForm form = LossTangentForm::Linear;
  Quantity tan_delta0;  // dimensionless, > 0
  Quantity coeff;       // alpha or beta, m^2

  LossTangentModel(LossTangentForm f, Quantity tan_d0, Quantity c);
};

Quantity tan_delta_eff(const LossTangentModel &model, const Quantity &mu2);

struct SplitRow
{
  Quantity mu2;    // m^-2
  Quantity r_rms;  // m
  Quantity t1;     // s
  std::optional<Quantity> mu1;
};

struct SplitSeries
{
  std::vector<SplitRow> rows;
};

enum class DiscriminationVerdict
{
  Supported,
  Falsified,
  Indeterminate,
};

std::string_view to_string(DiscriminationVerdict v);

struct DiscriminationOptions
{
  double confidence = 0.95;
  std::size_t n_resamples = 2000;
  std::uint64_t seed = 1;
};

struct DiscriminationReport
{
  double r2_mu2 = 0.0;
  std::optional<double> r2_mu1;
  double r2_rms = 0.0;
  double delta_lo = 0.0;  // CI on R2(mu2) - R2(R_RMS)
  double delta_hi = 0.0;
  double confidence = 0.95;
  DiscriminationVerdict verdict = DiscriminationVerdict::Indeterminate;
  std::vector<std::string> warnings;
  std::string target = "1/T1";
};

/// Coefficient of determination of an ordinary least-squares line y ~ a + b x.
/// Throws DomainError if x or y has zero variance.
double r_squared(const std::vector<double> &x, const std::vector<double> &y);

/// Regresses 1/T1 on each predictor. SUPPORTED when the bootstrap interval
/// of R2(mu2) - R2(R_RMS) lies above zero, FALSIFIED when it lies at or
/// below zero, INDETERMINATE otherwise.
DiscriminationReport discriminate(const SplitSeries &series, const DiscriminationOptions &opts = {});

// CSV ingestion: `s_m,kappa_per_m`, `s_m,h_m`,
// `mu2_per_m2,mu2_sigma,rrms_m,rrms_sigma,T1_s,T1_sigma`.
CurvatureTrace load_curvature_csv(const std::filesystem::path &path);
HeightProfile load_profile_csv(const std::filesystem::path &path);
SplitSeries load_split_series_csv(const std::filesystem::path &path);

}  // namespace prescriptor::stats

#endif  // PRESCRIPTOR_MICROSTRUCTURE_HPP
