// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/separability.hpp"

#include "prescriptor/error.hpp"
#include "prescriptor/numeric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

namespace prescriptor::lab
{

Vec3 GridSpec::extent() const noexcept
{
  return {spacing.x * static_cast<double>(nx), spacing.y * static_cast<double>(ny),
          spacing.z * static_cast<double>(nz)};
}

Vec3 GridSpec::centroid(std::size_t cell) const
{
  const std::size_t i = cell % nx;
  const std::size_t j = (cell / nx) % ny;
  const std::size_t l = cell / (nx * ny);
  return {origin.x + (static_cast<double>(i) + 0.5) * spacing.x,
          origin.y + (static_cast<double>(j) + 0.5) * spacing.y,
          origin.z + (static_cast<double>(l) + 0.5) * spacing.z};
}

namespace
{

std::optional<std::size_t> axis_index(double p, double o, double h, std::size_t n)
{
  const double t = (p - o) / h;
  if (!(t >= 0.0) || t > static_cast<double>(n))
    return std::nullopt;
  return std::min(static_cast<std::size_t>(t), n - 1);
}

double wrap(double x, double lo, double len)
{
  double t = std::fmod(x - lo, len);
  if (t < 0.0)
    t += len;
  return lo + t;
}

}  // namespace

std::optional<std::size_t> GridSpec::locate(Vec3 p) const
{
  const auto i = axis_index(p.x, origin.x, spacing.x, nx);
  const auto j = axis_index(p.y, origin.y, spacing.y, ny);
  const auto l = axis_index(p.z, origin.z, spacing.z, nz);
  if (!i || !j || !l)
    return std::nullopt;
  return *i + nx * (*j + ny * *l);
}

void GridSpec::validate() const
{
  if (nx == 0 || ny == 0 || nz == 0)
    throw DomainError("grid needs at least one cell per axis");
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0))
    throw DomainError("grid spacing must be positive");
}

double KernelField::at(Vec3 p) const
{
  const auto cell = grid.locate(p);
  if (!cell)
    throw DomainError("point outside the kernel domain");
  return k[*cell];
}

double KernelField::integral() const
{
  CompensatedSum s;
  for (double v : k)
    s += v;
  return s.value() * grid.cell_volume();
}

double KernelField::mean() const
{
  return integral() / grid.volume();
}

double KernelField::max() const { return k[argmax()]; }

std::size_t KernelField::argmax() const
{
  return static_cast<std::size_t>(std::max_element(k.begin(), k.end()) - k.begin());
}

KernelField custom_kernel(const GridSpec &grid, std::vector<double> values)
{
  grid.validate();
  if (values.size() != grid.cell_count())
    throw DomainError("kernel has " + std::to_string(values.size()) + " values for " +
                      std::to_string(grid.cell_count()) + " cells");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("kernel values must be finite and >= 0");
  return {grid, std::move(values), KernelFamily::Custom, 0.0};
}

KernelField uniform_kernel(const GridSpec &grid, double k0)
{
  auto f = custom_kernel(grid, std::vector<double>(grid.cell_count(), k0));
  f.family = KernelFamily::Uniform;
  return f;
}

KernelField edge_exponential_kernel(const GridSpec &grid, double k0, double lambda)
{
  if (!(lambda > 0.0))
    throw DomainError("decay length must be positive");
  grid.validate();
  std::vector<double> v(grid.cell_count());
  for (std::size_t c = 0; c < v.size(); ++c)
    v[c] = k0 * std::exp(-(grid.centroid(c).x - grid.origin.x) / lambda);
  auto f = custom_kernel(grid, std::move(v));
  f.family = KernelFamily::EdgeExponential;
  f.lambda = lambda;
  return f;
}

double DensityField::mean() const
{
  CompensatedSum s;
  for (double v : d)
    s += v;
  return s.value() / static_cast<double>(d.size());
}

DensityField uniform_density(const GridSpec &grid, double rho)
{
  grid.validate();
  return {grid, std::vector<double>(grid.cell_count(), rho)};
}

Quantity kernel_observable(const DensityField &d, const KernelField &k)
{
  if (!(d.grid == k.grid) || d.d.size() != k.k.size())
    throw DomainError("defect and kernel grids do not match");
  CompensatedSum s;
  for (std::size_t i = 0; i < d.d.size(); ++i)
  {
    if (!(d.d[i] >= 0.0))
      throw DomainError("defect density must be >= 0 (cell " + std::to_string(i) + ")");
    s += d.d[i] * k.k[i];
  }
  return Quantity::dimensionless(s.value() * k.grid.cell_volume());
}

Quantity golden_rule_sum(const DefectList &defects, const KernelField &k)
{
  CompensatedSum s;
  for (std::size_t i = 0; i < defects.size(); ++i)
  {
    const auto cell = k.grid.locate(defects[i].position);
    if (!cell)
      throw DomainError("defect " + std::to_string(i) + " lies outside the kernel domain");
    if (!(defects[i].weight >= 0.0))
      throw DomainError("defect weight must be >= 0 (defect " + std::to_string(i) + ")");
    s += defects[i].weight * k.k[*cell];
  }
  return Quantity::dimensionless(s.value());
}

Quantity factorized(const Quantity &rho, const Quantity &g, const Quantity &c, std::optional<ChannelId> channel)
{
  if (channel)
  {
    const ClosureEntry &e = closure_entry(*channel);
    if (!check_closure(e).pass)
      throw DimensionError("closure fails for channel " + std::string(channel_name(*channel)));
    auto expect = [&](const Quantity &q, const DimVector &want, const char *what) {
      if (q.dim != want)
        throw DimensionError(std::string(what) + " for " + std::string(channel_name(*channel)) + " must be " +
                             want.str() + ", got " + q.dim.str());
    };
    expect(rho, e.rho.dim, "rho");
    expect(g, e.g.dim, "G");
    expect(c, e.c_dim(), "C");
  }
  return q_mul(c, q_mul(rho, g));
}

SeparabilityDeltas separability_deltas(const std::vector<Quantity> &rho_by_geometry,
                                       const std::vector<Quantity> &g_by_chemistry, double threshold)
{
  if (!(threshold > 0.0))
    throw DomainError("threshold must be positive");
  auto delta = [](const std::vector<Quantity> &xs, const char *what) {
    if (xs.size() < 2)
      throw DomainError(std::string(what) + " list needs at least 2 entries");
    const Quantity &base = xs.front();
    if (base.value == 0.0)
      throw DomainError(std::string(what) + " baseline is zero");
    double worst = 0.0;
    for (const auto &x : xs)
    {
      if (x.dim != base.dim)
        throw DimensionError(std::string(what) + " entries mix dimensions");
      worst = std::max(worst, std::fabs(x.value - base.value) / std::fabs(base.value));
    }
    return worst;
  };
  SeparabilityDeltas out;
  out.threshold = threshold;
  out.delta_rho = delta(rho_by_geometry, "rho");
  out.delta_g = delta(g_by_chemistry, "G");
  out.rho_flag = out.delta_rho > threshold;
  out.g_flag = out.delta_g > threshold;
  return out;
}

SeparabilityReport compare(const Quantity &o_exact, const Quantity &o_factorized)
{
  SeparabilityReport r;
  r.o_exact = o_exact;
  r.o_factorized = o_factorized;
  r.delta_residual = q_sub(o_exact, o_factorized);
  r.rel_error = o_exact.value == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                     : std::fabs(r.delta_residual.value) / std::fabs(o_exact.value);
  return r;
}

std::uint64_t cell_seed(std::uint64_t seed, double density, double correlation)
{
  return combine_seeds(seed, combine_seeds(std::bit_cast<std::uint64_t>(density),
                                           std::bit_cast<std::uint64_t>(correlation)));
}

namespace
{

Vec3 uniform_point(Rng &rng, const GridSpec &g)
{
  const Vec3 e = g.extent();
  // Draw order x, y, z is part of the generator contract.
  const double x = g.origin.x + rng.uniform01() * e.x;
  const double y = g.origin.y + rng.uniform01() * e.y;
  const double z = g.origin.z + rng.uniform01() * e.z;
  return {x, y, z};
}

}  // namespace

DefectList uniform_defects(const GridSpec &grid, std::size_t count, double weight, std::uint64_t seed)
{
  grid.validate();
  Rng rng(seed);
  DefectList out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back({uniform_point(rng, grid), weight});
  return out;
}

DefectList synthesize_defects(const KernelField &k, const SweepConfig &cfg, double density, double correlation,
                              std::uint64_t seed)
{
  if (!(density >= 0.0) || !std::isfinite(density))
    throw DomainError("density must be finite and >= 0");
  if (!(correlation >= 0.0 && correlation <= 1.0))
    throw DomainError("correlation must lie in [0, 1]");
  if (!(cfg.offspring_mean > 0.0))
    throw DomainError("offspring mean must be positive");
  if (!(cfg.cluster_sigma >= 0.0))
    throw DomainError("cluster width must be >= 0");

  const GridSpec &g = k.grid;
  const double volume = g.volume();
  const Vec3 e = g.extent();
  Rng rng(seed);
  DefectList out;

  const std::uint64_t n_background = rng.poisson((1.0 - correlation) * density * volume);
  for (std::uint64_t i = 0; i < n_background; ++i)
    out.push_back({uniform_point(rng, g), cfg.weight});

  const std::uint64_t n_parents = rng.poisson(correlation * density * volume / cfg.offspring_mean);
  const Vec3 hotspot = g.centroid(k.argmax());
  for (std::uint64_t p = 0; p < n_parents; ++p)
  {
    const Vec3 parent = cfg.parents_at_kernel_max ? hotspot : uniform_point(rng, g);
    const std::uint64_t n_children = rng.poisson(cfg.offspring_mean);
    for (std::uint64_t c = 0; c < n_children; ++c)
    {
      Vec3 pos = parent;
      if (cfg.cluster_sigma > 0.0)
      {
        const double dx = rng.normal(0.0, cfg.cluster_sigma);
        const double dy = rng.normal(0.0, cfg.cluster_sigma);
        const double dz = rng.normal(0.0, cfg.cluster_sigma);
        pos = {wrap(parent.x + dx, g.origin.x, e.x), wrap(parent.y + dy, g.origin.y, e.y),
               wrap(parent.z + dz, g.origin.z, e.z)};
      }
      out.push_back({pos, cfg.weight});
    }
  }
  return out;
}

namespace
{

SweepRow run_cell(const KernelField &k, const SweepConfig &cfg, double density, double correlation,
                  std::uint64_t seed)
{
  const DefectList defects = synthesize_defects(k, cfg, density, correlation, cell_seed(seed, density, correlation));
  const Quantity exact = golden_rule_sum(defects, k);
  const double rho = cfg.rho_mode == RhoMode::True
                         ? density * cfg.weight
                         : static_cast<double>(defects.size()) * cfg.weight / k.grid.volume();
  const Quantity fact = factorized(Quantity::dimensionless(rho), Quantity::dimensionless(k.integral()),
                                   Quantity::dimensionless(1.0));
  const SeparabilityReport rep = compare(exact, fact);
  return {density, correlation, seed, exact.value, fact.value, rep.rel_error, defects.size()};
}

}  // namespace

std::vector<SweepRow> dilution_sweep(const KernelField &k, const SweepConfig &cfg)
{
  if (cfg.densities.empty() || cfg.correlations.empty() || cfg.seeds.empty())
    throw DomainError("empty sweep: need at least one density, correlation and seed");

  struct Job
  {
    double density, correlation;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double d : cfg.densities)
    for (double c : cfg.correlations)
      for (std::uint64_t s : cfg.seeds)
        jobs.push_back({d, c, s});

  std::vector<SweepRow> rows(jobs.size());
  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
  if (threads == 1)
  {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      rows[i] = run_cell(k, cfg, jobs[i].density, jobs[i].correlation, jobs[i].seed);
    return rows;
  }

  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
  {
    pool.emplace_back([&, t] {
      try
      {
        for (std::size_t i = t; i < jobs.size(); i += threads)
          rows[i] = run_cell(k, cfg, jobs[i].density, jobs[i].correlation, jobs[i].seed);
      }
      catch (...)
      {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto &th : pool)
    th.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
  return rows;
}

void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows)
{
  out << "density,correlation,seed,o_exact,o_factorized,rel_error\n";
  out << "# units: m^-3,1,1,a.u.,a.u.,1\n";
  for (const auto &r : rows)
    out << format_double(r.density) << ',' << format_double(r.correlation) << ',' << r.seed << ','
        << format_double(r.o_exact) << ',' << format_double(r.o_factorized) << ',' << format_double(r.rel_error)
        << '\n';
}

}  // namespace prescriptor::lab
