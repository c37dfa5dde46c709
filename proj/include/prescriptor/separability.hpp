// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_SEPARABILITY_HPP
#define PRESCRIPTOR_SEPARABILITY_HPP

#include "prescriptor/channels.hpp"
#include "prescriptor/geometry.hpp"
#include "prescriptor/units.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace prescriptor::lab
{

using geom::Vec3;

/// Regular box grid: nx * ny * nz cells of size spacing, starting at origin.
struct GridSpec
{
  Vec3 origin;
  Vec3 spacing{1.0, 1.0, 1.0};
  std::size_t nx = 1, ny = 1, nz = 1;

  std::size_t cell_count() const noexcept { return nx * ny * nz; }
  double cell_volume() const noexcept { return spacing.x * spacing.y * spacing.z; }
  double volume() const noexcept { return cell_volume() * static_cast<double>(cell_count()); }
  Vec3 extent() const noexcept;
  Vec3 centroid(std::size_t cell) const;
  /// Cell containing p (upper faces belong to the last cell). nullopt outside.
  std::optional<std::size_t> locate(Vec3 p) const;

  void validate() const;
  friend bool operator==(const GridSpec &, const GridSpec &) = default;
};

enum class KernelFamily
{
  Uniform,
  EdgeExponential,  // k0 * exp(-(x - origin.x) / lambda)
  Custom,
};

struct KernelField
{
  GridSpec grid;
  std::vector<double> k;  // per cell, >= 0
  KernelFamily family = KernelFamily::Custom;
  double lambda = 0.0;

  double at(Vec3 p) const;  // throws DomainError outside the grid
  double integral() const;  // sum K * vol
  double mean() const;      // volume-weighted
  double max() const;
  std::size_t argmax() const;
};

KernelField uniform_kernel(const GridSpec &grid, double k0);
KernelField edge_exponential_kernel(const GridSpec &grid, double k0, double lambda);
KernelField custom_kernel(const GridSpec &grid, std::vector<double> values);

/// Continuous defect density sampled on the same kind of grid as the kernel.
struct DensityField
{
  GridSpec grid;
  std::vector<double> d;  // per cell, >= 0

  double mean() const;  // volume-weighted
};

DensityField uniform_density(const GridSpec &grid, double rho);

struct Defect
{
  Vec3 position;
  double weight = 1.0;  // |<f|h_d|i>|^2 with the rate prefactor folded in
};

using DefectList = std::vector<Defect>;

/// Midpoint quadrature of the integral of d * K over the domain.
Quantity kernel_observable(const DensityField &d, const KernelField &k);

/// Sum over defects of w_d * K(r_d).
Quantity golden_rule_sum(const DefectList &defects, const KernelField &k);

/// c * rho * g. Dimensions are free unless a channel is named, in which case
/// each factor must carry that channel's registered dimension.
Quantity factorized(const Quantity &rho, const Quantity &g, const Quantity &c,
                    std::optional<ChannelId> channel = std::nullopt);

struct SeparabilityDeltas
{
  double delta_rho = 0.0;  // max |rho_i - rho_0| / |rho_0|
  double delta_g = 0.0;
  double threshold = 0.1;
  bool rho_flag = false;  // delta_rho > threshold
  bool g_flag = false;
};

SeparabilityDeltas separability_deltas(const std::vector<Quantity> &rho_by_geometry,
                                       const std::vector<Quantity> &g_by_chemistry, double threshold = 0.1);

struct SeparabilityReport
{
  Quantity o_exact;
  Quantity o_factorized;
  Quantity delta_residual;  // o_exact - o_factorized
  double rel_error = 0.0;   // |delta| / |o_exact|, NaN when o_exact == 0
};

SeparabilityReport compare(const Quantity &o_exact, const Quantity &o_factorized);

// ---------------------------------------------------------------------------
// Defect synthesis and the dilution sweep
//
// Generator contract: background defects are a homogeneous Poisson process
// of intensity (1 - c) * density; clustered defects come from a Neyman-Scott
// process whose parents have intensity c * density / offspring_mean, each
// parent emitting Poisson(offspring_mean) children displaced by an isotropic
// Gaussian of width cluster_sigma (wrapped periodically into the box). With
// parents_at_kernel_max the parents sit on the kernel's maximal cell
// centroid instead of being uniform. All draws come from one Rng seeded
// with cell_seed(seed, density, correlation).
// ---------------------------------------------------------------------------

enum class RhoMode
{
  True,       // intensity * weight
  Estimated,  // realised count * weight / volume
};

struct SweepConfig
{
  std::vector<double> densities;     // m^-3 (defects per unit volume)
  std::vector<double> correlations;  // clustered fraction in [0, 1]
  std::vector<std::uint64_t> seeds;
  double weight = 1.0;
  double offspring_mean = 10.0;
  double cluster_sigma = 0.0;  // m; 0 places children on the parent
  bool parents_at_kernel_max = false;
  RhoMode rho_mode = RhoMode::True;
  unsigned threads = 1;
};

struct SweepRow
{
  double density = 0.0;
  double correlation = 0.0;
  std::uint64_t seed = 0;
  double o_exact = 0.0;
  double o_factorized = 0.0;
  double rel_error = 0.0;
  std::size_t defect_count = 0;
};

std::uint64_t cell_seed(std::uint64_t seed, double density, double correlation);

DefectList synthesize_defects(const KernelField &k, const SweepConfig &cfg, double density, double correlation,
                              std::uint64_t seed);

/// Exactly `count` i.i.d. uniform defects in the kernel box.
DefectList uniform_defects(const GridSpec &grid, std::size_t count, double weight, std::uint64_t seed);

/// Rows ordered density-major, then correlation, then seed, whatever the
/// thread count.
std::vector<SweepRow> dilution_sweep(const KernelField &k, const SweepConfig &cfg);

void write_sweep_csv(std::ostream &out, const std::vector<SweepRow> &rows);

}  // namespace prescriptor::lab

#endif  // PRESCRIPTOR_SEPARABILITY_HPP
