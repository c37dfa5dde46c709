// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_GEOMETRY_HPP
#define PRESCRIPTOR_GEOMETRY_HPP

#include "prescriptor/units.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace prescriptor::geom
{

struct Vec3
{
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double k, Vec3 a) { return {k * a.x, k * a.y, k * a.z}; }
  friend bool operator==(const Vec3 &, const Vec3 &) = default;
};

double dot(Vec3 a, Vec3 b);
Vec3 cross(Vec3 a, Vec3 b);
double norm(Vec3 a);

/// Current path as straight segments between consecutive vertices (m).
class LoopPolyline
{
public:
  LoopPolyline(std::vector<Vec3> vertices, bool closed);

  const std::vector<Vec3> &vertices() const noexcept { return vertices_; }
  bool closed() const noexcept { return closed_; }
  std::size_t segment_count() const noexcept;
  Vec3 segment_start(std::size_t i) const { return vertices_[i]; }
  Vec3 segment_end(std::size_t i) const { return vertices_[(i + 1) % vertices_.size()]; }

  /// Same path traversed backwards.
  LoopPolyline reversed() const;

private:
  std::vector<Vec3> vertices_;
  bool closed_ = true;
};

/// Regular n-gon of circumradius r in the plane z = z0, centred on the z axis,
/// counter-clockwise seen from +z.
LoopPolyline regular_polygon(std::size_t n, double r, double z0 = 0.0);

struct SurfacePatch
{
  Vec3 centroid;  // m
  double area = 0.0;  // m^2
};

class SurfacePatchGrid
{
public:
  explicit SurfacePatchGrid(std::vector<SurfacePatch> patches);
  const std::vector<SurfacePatch> &patches() const noexcept { return patches_; }

private:
  std::vector<SurfacePatch> patches_;
};

struct GeometryOptions
{
  double clearance = 1e-9;  // m
  unsigned threads = 1;
};

/// Magnetic field per unit current (T/A) from the exact finite-segment
/// Biot-Savart law summed over the loop. Throws SingularityError when the
/// point is closer than `clearance` to any segment.
Vec3 biot_savart(const LoopPolyline &loop, Vec3 point, double clearance = 1e-9);

/// Sum over patches of |B/I|^2 * area, in T^2 A^-2 m^2. Sigma is a Richardson
/// estimate from re-evaluating on pairwise-merged patches.
Quantity g_phi(const LoopPolyline &loop, const SurfacePatchGrid &surface, const GeometryOptions &opts = {});

struct FieldCell
{
  double eps = 0.0;        // F/m
  double e2 = 0.0;         // V^2/m^2
  double tan_delta = 0.0;  // 1
  double volume = 0.0;     // m^3
  std::string region;
};

class FieldGrid
{
public:
  explicit FieldGrid(std::vector<FieldCell> cells);
  const std::vector<FieldCell> &cells() const noexcept { return cells_; }
  std::vector<std::string> regions() const;  // sorted, unique

private:
  std::vector<FieldCell> cells_;
};

/// (sum eps e2 tan_delta vol) / (sum eps e2 vol).
Quantity q_inv_dielectric(const FieldGrid &grid);

/// Energy fraction of one region. Throws DomainError for an unknown tag.
Quantity participation(const FieldGrid &grid, const std::string &region);
std::map<std::string, Quantity> participations(const FieldGrid &grid);

/// G_I = p_edge * alpha (m^2), with C_I = tan_delta0 so that
/// Q^-1 = tan_delta0 * p_edge + tan_delta0 * mu2 * G_I for the linear model.
Quantity g_one(const FieldGrid &grid, const std::string &edge_region, const Quantity &alpha);

struct SeamSample
{
  double s = 0.0;   // m
  double js = 0.0;  // A/m
};

class SeamTrace
{
public:
  SeamTrace(std::vector<SeamSample> samples, double omega, double stored_energy);

  const std::vector<SeamSample> &samples() const noexcept { return samples_; }
  double omega() const noexcept { return omega_; }
  double stored_energy() const noexcept { return stored_energy_; }

private:
  std::vector<SeamSample> samples_;
  double omega_ = 0.0;          // rad/s
  double stored_energy_ = 0.0;  // J
};

/// (1 / (2 omega U)) * integral |J_s|^2 ds, trapezoid; S/m. Sigma from the
/// half-resolution trapezoid (Richardson).
Quantity y_seam(const SeamTrace &trace);

LoopPolyline load_loop_csv(const std::filesystem::path &path, bool closed = true);
SurfacePatchGrid load_surface_csv(const std::filesystem::path &path);
FieldGrid load_field_grid_csv(const std::filesystem::path &path);

struct SeamScalars
{
  double omega = 0.0;
  double stored_energy = 0.0;
};

/// Sidecar of `key = value` lines with keys omega_rad_s and U_J.
SeamScalars load_seam_sidecar(const std::filesystem::path &path);
SeamTrace load_seam_csv(const std::filesystem::path &path, const SeamScalars &scalars);

}  // namespace prescriptor::geom

#endif  // PRESCRIPTOR_GEOMETRY_HPP
