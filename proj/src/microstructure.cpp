// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/microstructure.hpp"

#include "prescriptor/error.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace prescriptor::stats
{

CurvatureTrace::CurvatureTrace(std::vector<CurvatureSample> samples) : samples_(std::move(samples))
{
  if (samples_.size() < 2)
    throw DomainError("curvature trace needs at least 2 samples");
  if (samples_.front().s < 0.0)
    throw DomainError("curvature trace arclength must start at s >= 0");
  for (std::size_t i = 1; i < samples_.size(); ++i)
  {
    if (samples_[i].s < samples_[i - 1].s)
      throw DomainError("curvature trace arclength must be non-decreasing (sample " +
                        std::to_string(i) + ")");
    if (i >= 2 && samples_[i].s == samples_[i - 2].s)
      throw DomainError("more than two curvature samples share s = " +
                        format_double(samples_[i].s));
  }
  for (const auto &smp : samples_)
    if (!std::isfinite(smp.kappa) || !std::isfinite(smp.s))
      throw DomainError("curvature trace contains non-finite values");
  if (!(perimeter() > 0.0))
    throw DomainError("curvature trace has zero perimeter");
}

std::vector<double> CurvatureTrace::weights() const
{
  std::vector<double> w(samples_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < samples_.size(); ++i)
  {
    const double h = samples_[i + 1].s - samples_[i].s;
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

HeightProfile::HeightProfile(std::vector<HeightSample> samples) : samples_(std::move(samples))
{
  if (samples_.size() < 2)
    throw DomainError("height profile needs at least 2 samples");
  for (std::size_t i = 1; i < samples_.size(); ++i)
    if (!(samples_[i].s > samples_[i - 1].s))
      throw DomainError("height profile arclength must be strictly increasing (sample " +
                        std::to_string(i) + ")");
}

double curvature_moment(const CurvatureTrace &trace, int n)
{
  const auto &smp = trace.samples();
  const auto w = trace.weights();
  CompensatedSum acc;
  for (std::size_t i = 0; i < smp.size(); ++i)
    acc += w[i] * std::pow(smp[i].kappa, n);
  return acc.value() / trace.perimeter();
}

CurvatureMoments curvature_moments(const CurvatureTrace &trace)
{
  return {curvature_moment(trace, 1), curvature_moment(trace, 2), curvature_moment(trace, 3),
          curvature_moment(trace, 4)};
}

Quantity mu2(const CurvatureTrace &trace)
{
  return Quantity(curvature_moment(trace, 2), 0.0, dims::per_area());
}

Quantity mu2_bootstrap(const CurvatureTrace &trace, std::size_t n_resamples, std::uint64_t seed)
{
  if (n_resamples < 100)
    throw DomainError("mu2 bootstrap needs at least 100 resamples");
  const auto &smp = trace.samples();
  const auto w = trace.weights();
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < smp.size(); ++i)
    if (w[i] > 0.0)
      sites.push_back(i);
  if (sites.size() < 2)
    throw DomainError("mu2 bootstrap needs at least 2 weighted sites");

  Rng rng(seed);
  std::vector<double> stats(n_resamples);
  for (auto &stat : stats)
  {
    CompensatedSum num, den;
    for (std::size_t k = 0; k < sites.size(); ++k)
    {
      const std::size_t i = sites[rng.index(sites.size())];
      num += w[i] * smp[i].kappa * smp[i].kappa;
      den += w[i];
    }
    stat = num.value() / den.value();
  }
  return Quantity(curvature_moment(trace, 2), sample_stddev(stats), dims::per_area());
}

Quantity rms_roughness(const HeightProfile &profile)
{
  const auto &smp = profile.samples();
  std::vector<double> w(smp.size(), 0.0);
  for (std::size_t i = 0; i + 1 < smp.size(); ++i)
  {
    const double h = smp[i + 1].s - smp[i].s;
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  CompensatedSum wsum, hsum;
  for (std::size_t i = 0; i < smp.size(); ++i)
  {
    wsum += w[i];
    hsum += w[i] * smp[i].h;
  }
  const double mean_h = hsum.value() / wsum.value();
  CompensatedSum var;
  for (std::size_t i = 0; i < smp.size(); ++i)
    var += w[i] * (smp[i].h - mean_h) * (smp[i].h - mean_h);
  return Quantity(std::sqrt(var.value() / wsum.value()), 0.0, dims::length());
}

LossTangentModel::LossTangentModel(LossTangentForm f, Quantity tan_d0, Quantity c)
  : form(f), tan_delta0(std::move(tan_d0)), coeff(std::move(c))
{
  if (!tan_delta0.dim.is_dimensionless())
    throw DimensionError("tan_delta0 must be dimensionless");
  if (!(tan_delta0.value > 0.0))
    throw DomainError("tan_delta0 must be positive");
  if (coeff.dim != dims::area())
    throw DimensionError("loss-tangent coefficient must carry m^2, got " + coeff.dim.str());
}

Quantity tan_delta_eff(const LossTangentModel &model, const Quantity &mu2)
{
  if (!(model.coeff.dim + mu2.dim).is_dimensionless())
    throw DimensionError("coeff * mu2 must be dimensionless");
  if (mu2.value < 0.0)
    throw DomainError("mu2 must be non-negative");
  const double t0 = model.tan_delta0.value;
  const double k = model.coeff.value;
  const double m = mu2.value;
  double v = 0.0, d_t0 = 0.0, d_k = 0.0, d_m = 0.0;
  switch (model.form)
  {
  case LossTangentForm::Linear:
    v = t0 * (1.0 + k * m);
    d_t0 = 1.0 + k * m;
    d_k = t0 * m;
    d_m = t0 * k;
    break;
  case LossTangentForm::Exponential:
    v = t0 * std::exp(k * m);
    d_t0 = std::exp(k * m);
    d_k = v * m;
    d_m = v * k;
    break;
  }
  const double s = std::sqrt(std::pow(d_t0 * model.tan_delta0.sigma, 2) +
                             std::pow(d_k * model.coeff.sigma, 2) + std::pow(d_m * mu2.sigma, 2));
  return Quantity(v, s, {});
}

std::string_view to_string(DiscriminationVerdict v)
{
  switch (v)
  {
  case DiscriminationVerdict::Supported:
    return "SUPPORTED";
  case DiscriminationVerdict::Falsified:
    return "FALSIFIED";
  case DiscriminationVerdict::Indeterminate:
    return "INDETERMINATE";
  }
  return "?";
}

double r_squared(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw DomainError("regression needs matching samples of size >= 2");
  const double mx = mean(x), my = mean(y);
  CompensatedSum sxx, syy, sxy;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double scale_x = std::max(std::fabs(mx), 1e-300);
  const double scale_y = std::max(std::fabs(my), 1e-300);
  if (!(sxx.value() > 1e-24 * scale_x * scale_x * static_cast<double>(x.size())))
    throw DomainError("rank-deficient regressor (zero variance)");
  if (!(syy.value() > 1e-24 * scale_y * scale_y * static_cast<double>(y.size())))
    throw DomainError("regression target has zero variance");
  // Simple regression with intercept: R^2 = 1 - SSres/SStot = corr^2.
  return sxy.value() * sxy.value() / (sxx.value() * syy.value());
}

DiscriminationReport discriminate(const SplitSeries &series, const DiscriminationOptions &opts)
{
  const auto &rows = series.rows;
  if (rows.size() < 4)
    throw DomainError("discrimination needs at least 4 split rows");
  if (!(opts.confidence > 0.0 && opts.confidence < 1.0))
    throw DomainError("confidence must lie in (0, 1)");
  if (opts.n_resamples < 100)
    throw DomainError("discrimination needs at least 100 bootstrap resamples");

  std::vector<double> y, x_mu2, x_rms, x_mu1;
  const bool have_mu1 = std::all_of(rows.begin(), rows.end(), [](const SplitRow &r) { return r.mu1.has_value(); });
  for (const auto &r : rows)
  {
    if (!(r.t1.value > 0.0))
      throw DomainError("T1 must be positive");
    y.push_back(1.0 / r.t1.value);
    x_mu2.push_back(r.mu2.value);
    x_rms.push_back(r.r_rms.value);
    if (have_mu1)
      x_mu1.push_back(r.mu1->value);
  }

  DiscriminationReport rep;
  rep.confidence = opts.confidence;
  rep.r2_mu2 = r_squared(x_mu2, y);
  rep.r2_rms = r_squared(x_rms, y);
  if (have_mu1)
    rep.r2_mu1 = r_squared(x_mu1, y);

  std::set<double> distinct(x_mu2.begin(), x_mu2.end());
  if (distinct.size() < 4)
    rep.warnings.push_back("fewer than four distinct mu2 values");
  const auto [mn, mx] = std::minmax_element(x_mu2.begin(), x_mu2.end());
  if (*mn <= 0.0 || *mx / *mn < 3.0)
    rep.warnings.push_back("mu2 values span less than a factor of 3");

  Rng rng(opts.seed);
  std::vector<double> deltas;
  deltas.reserve(opts.n_resamples);
  const std::size_t n = rows.size();
  std::vector<double> by(n), bm(n), br(n);
  for (std::size_t b = 0; b < opts.n_resamples; ++b)
  {
    for (std::size_t k = 0; k < n; ++k)
    {
      const std::size_t i = rng.index(n);
      by[k] = y[i];
      bm[k] = x_mu2[i];
      br[k] = x_rms[i];
    }
    try
    {
      deltas.push_back(r_squared(bm, by) - r_squared(br, by));
    }
    catch (const DomainError &)
    {
      // degenerate resample (a constant column); skipped
    }
  }
  if (deltas.size() < opts.n_resamples / 2)
    throw DomainError("too many degenerate bootstrap resamples");
  const double tail = 0.5 * (1.0 - opts.confidence);
  rep.delta_lo = quantile(deltas, tail);
  rep.delta_hi = quantile(deltas, 1.0 - tail);
  if (rep.delta_lo > 0.0)
    rep.verdict = DiscriminationVerdict::Supported;
  else if (rep.delta_hi <= 0.0)
    rep.verdict = DiscriminationVerdict::Falsified;
  else
    rep.verdict = DiscriminationVerdict::Indeterminate;
  return rep;
}

CurvatureTrace load_curvature_csv(const std::filesystem::path &path)
{
  const auto t = read_csv(path, {{"s_m", "kappa_per_m"}});
  std::vector<CurvatureSample> v;
  for (const auto &r : t.rows)
    v.push_back({r.number(0), r.number(1)});
  return CurvatureTrace(std::move(v));
}

HeightProfile load_profile_csv(const std::filesystem::path &path)
{
  const auto t = read_csv(path, {{"s_m", "h_m"}});
  std::vector<HeightSample> v;
  for (const auto &r : t.rows)
    v.push_back({r.number(0), r.number(1)});
  return HeightProfile(std::move(v));
}

SplitSeries load_split_series_csv(const std::filesystem::path &path)
{
  const std::vector<std::string> base = {"mu2_per_m2", "mu2_sigma", "rrms_m",
                                         "rrms_sigma", "T1_s",      "T1_sigma"};
  auto extended = base;
  extended.insert(extended.end(), {"mu1_per_m", "mu1_sigma"});
  const auto t = read_csv(path, {base, extended});
  SplitSeries s;
  for (const auto &r : t.rows)
  {
    SplitRow row{Quantity(r.number(0), r.number(1), dims::per_area()),
                 Quantity(r.number(2), r.number(3), dims::length()),
                 Quantity(r.number(4), r.number(5), dims::time()),
                 std::nullopt};
    if (t.header.size() == extended.size())
      row.mu1 = Quantity(r.number(6), r.number(7), dims::length() * Rational(-1));
    s.rows.push_back(std::move(row));
  }
  return s;
}

}  // namespace prescriptor::stats
