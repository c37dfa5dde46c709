// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/geometry.hpp"

#include "prescriptor/error.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <thread>

namespace prescriptor::geom
{

double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

Vec3 cross(Vec3 a, Vec3 b)
{
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

namespace
{

bool finite(Vec3 v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

double distance_to_segment(Vec3 p, Vec3 a, Vec3 b)
{
  const Vec3 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return norm(p - (a + t * ab));
}

DimVector g_phi_dim()
{
  // (T/A)^2 * m^2
  return (dims::tesla() - dims::current()) * Rational(2) + dims::area();
}

}  // namespace

LoopPolyline::LoopPolyline(std::vector<Vec3> vertices, bool closed)
  : vertices_(std::move(vertices)), closed_(closed)
{
  if (closed_ && vertices_.size() < 3)
    throw DomainError("closed loop needs at least 3 vertices");
  if (vertices_.size() < 2)
    throw DomainError("loop needs at least 2 vertices");
  for (std::size_t i = 0; i < vertices_.size(); ++i)
  {
    if (!finite(vertices_[i]))
      throw DomainError("loop vertex " + std::to_string(i) + " is not finite");
    if (i + 1 < vertices_.size() && vertices_[i] == vertices_[i + 1])
      throw DomainError("loop vertices " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " coincide");
  }
  if (closed_ && vertices_.front() == vertices_.back())
    throw DomainError("closed loop repeats its first vertex; omit the duplicate");
}

std::size_t LoopPolyline::segment_count() const noexcept
{
  return closed_ ? vertices_.size() : vertices_.size() - 1;
}

LoopPolyline LoopPolyline::reversed() const
{
  return LoopPolyline(std::vector<Vec3>(vertices_.rbegin(), vertices_.rend()), closed_);
}

LoopPolyline regular_polygon(std::size_t n, double r, double z0)
{
  std::vector<Vec3> v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    v.push_back({r * std::cos(t), r * std::sin(t), z0});
  }
  return LoopPolyline(std::move(v), true);
}

SurfacePatchGrid::SurfacePatchGrid(std::vector<SurfacePatch> patches) : patches_(std::move(patches))
{
  if (patches_.empty())
    throw DomainError("surface has no patches");
  for (std::size_t i = 0; i < patches_.size(); ++i)
    if (!(patches_[i].area > 0.0) || !std::isfinite(patches_[i].area) || !finite(patches_[i].centroid))
      throw DomainError("surface patch " + std::to_string(i) + " needs finite centroid and area > 0");
}

Vec3 biot_savart(const LoopPolyline &loop, Vec3 point, double clearance)
{
  if (!(clearance > 0.0))
    throw DomainError("clearance must be positive");
  CompensatedSum bx, by, bz;
  for (std::size_t i = 0; i < loop.segment_count(); ++i)
  {
    const Vec3 a = loop.segment_start(i);
    const Vec3 b = loop.segment_end(i);
    if (distance_to_segment(point, a, b) < clearance)
      throw SingularityError("point within clearance of loop segment " + std::to_string(i));
    const Vec3 r1 = point - a;
    const Vec3 r2 = point - b;
    const double n1 = norm(r1), n2 = norm(r2);
    const double denom = n1 * n2 * (n1 * n2 + dot(r1, r2));
    if (denom == 0.0)
      continue;  // collinear beyond the segment end: no contribution
    const Vec3 c = ((n1 + n2) / denom) * cross(r1, r2);
    bx += c.x;
    by += c.y;
    bz += c.z;
  }
  const double k = Constants::mu0().value / (4.0 * std::numbers::pi);
  return {k * bx.value(), k * by.value(), k * bz.value()};
}

namespace
{

double patch_sum(const LoopPolyline &loop, const std::vector<SurfacePatch> &patches, const GeometryOptions &opts)
{
  auto range = [&](std::size_t lo, std::size_t hi, CompensatedSum &acc) {
    for (std::size_t i = lo; i < hi; ++i)
    {
      Vec3 b;
      try
      {
        b = biot_savart(loop, patches[i].centroid, opts.clearance);
      }
      catch (const SingularityError &e)
      {
        throw SingularityError("surface patch " + std::to_string(i) + ": " + e.what());
      }
      acc += dot(b, b) * patches[i].area;
    }
  };

  const std::size_t n = patches.size();
  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n)));
  if (threads == 1)
  {
    CompensatedSum acc;
    range(0, n, acc);
    return acc.value();
  }

  std::vector<CompensatedSum> partial(threads);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
  {
    pool.emplace_back([&, t] {
      try
      {
        range(n * t / threads, n * (t + 1) / threads, partial[t]);
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
  CompensatedSum total;
  for (const auto &p : partial)
    total += p.value();
  return total.value();
}

std::vector<SurfacePatch> merge_pairs(const std::vector<SurfacePatch> &patches)
{
  std::vector<SurfacePatch> out;
  out.reserve(patches.size() / 2 + 1);
  for (std::size_t i = 0; i < patches.size(); i += 2)
  {
    if (i + 1 == patches.size())
    {
      out.push_back(patches[i]);
      break;
    }
    const auto &p = patches[i];
    const auto &q = patches[i + 1];
    const double a = p.area + q.area;
    out.push_back({(1.0 / a) * (p.area * p.centroid + q.area * q.centroid), a});
  }
  return out;
}

}  // namespace

Quantity g_phi(const LoopPolyline &loop, const SurfacePatchGrid &surface, const GeometryOptions &opts)
{
  const auto &patches = surface.patches();
  const double fine = patch_sum(loop, patches, opts);
  double sigma = 0.0;
  if (patches.size() >= 2)
  {
    double coarse = fine;
    try
    {
      coarse = patch_sum(loop, merge_pairs(patches), opts);
    }
    catch (const SingularityError &)
    {
      // Merged centroids can land on the wire even when the patches do not.
    }
    sigma = std::fabs(fine - coarse) / 3.0;
  }
  return Quantity(fine, sigma, g_phi_dim());
}

FieldGrid::FieldGrid(std::vector<FieldCell> cells) : cells_(std::move(cells))
{
  if (cells_.empty())
    throw DomainError("field grid has no cells");
  for (std::size_t i = 0; i < cells_.size(); ++i)
  {
    const auto &c = cells_[i];
    const std::string where = "field cell " + std::to_string(i);
    if (!(c.eps > 0.0) || !(c.e2 > 0.0) || !(c.volume > 0.0))
      throw DomainError(where + ": eps, e2 and volume must be positive");
    if (!(c.tan_delta >= 0.0) || !std::isfinite(c.tan_delta) || !std::isfinite(c.eps) ||
        !std::isfinite(c.e2) || !std::isfinite(c.volume))
      throw DomainError(where + ": values must be finite with tan_delta >= 0");
    if (c.region.empty())
      throw DomainError(where + ": empty region tag");
  }
}

std::vector<std::string> FieldGrid::regions() const
{
  std::set<std::string> tags;
  for (const auto &c : cells_)
    tags.insert(c.region);
  return {tags.begin(), tags.end()};
}

Quantity q_inv_dielectric(const FieldGrid &grid)
{
  CompensatedSum num, den;
  for (const auto &c : grid.cells())
  {
    const double w = c.eps * c.e2 * c.volume;
    num += w * c.tan_delta;
    den += w;
  }
  if (!(den.value() > 0.0))
    throw DomainError("field grid stores no energy");
  return Quantity::dimensionless(num.value() / den.value());
}

Quantity participation(const FieldGrid &grid, const std::string &region)
{
  CompensatedSum part, total;
  bool found = false;
  for (const auto &c : grid.cells())
  {
    const double w = c.eps * c.e2 * c.volume;
    total += w;
    if (c.region == region)
    {
      part += w;
      found = true;
    }
  }
  if (!found)
    throw DomainError("unknown region tag '" + region + "'");
  return Quantity::dimensionless(part.value() / total.value());
}

std::map<std::string, Quantity> participations(const FieldGrid &grid)
{
  std::map<std::string, Quantity> out;
  for (const auto &tag : grid.regions())
    out.emplace(tag, participation(grid, tag));
  return out;
}

Quantity g_one(const FieldGrid &grid, const std::string &edge_region, const Quantity &alpha)
{
  if (alpha.dim != dims::area())
    throw DimensionError("alpha must be in m^2, got " + alpha.dim.str());
  if (!(alpha.value > 0.0))
    throw DomainError("alpha must be positive");
  return q_mul(participation(grid, edge_region), alpha);
}

SeamTrace::SeamTrace(std::vector<SeamSample> samples, double omega, double stored_energy)
  : samples_(std::move(samples)), omega_(omega), stored_energy_(stored_energy)
{
  if (samples_.size() < 2)
    throw DomainError("zero-length seam: need at least 2 samples");
  for (std::size_t i = 0; i < samples_.size(); ++i)
  {
    if (!std::isfinite(samples_[i].s) || !std::isfinite(samples_[i].js))
      throw DomainError("seam sample " + std::to_string(i) + " is not finite");
    if (i > 0 && !(samples_[i].s > samples_[i - 1].s))
      throw DomainError("seam arclength must be strictly increasing at sample " + std::to_string(i));
  }
  if (!(omega_ > 0.0) || !std::isfinite(omega_))
    throw DomainError("omega must be positive");
  if (!(stored_energy_ > 0.0) || !std::isfinite(stored_energy_))
    throw DomainError("stored energy must be positive");
}

namespace
{

double trapezoid_j2(const std::vector<SeamSample> &v, std::size_t stride)
{
  CompensatedSum acc;
  std::size_t i = 0;
  for (; i + stride < v.size(); i += stride)
  {
    const auto &a = v[i];
    const auto &b = v[i + stride];
    acc += 0.5 * (b.s - a.s) * (a.js * a.js + b.js * b.js);
  }
  return acc.value();
}

}  // namespace

Quantity y_seam(const SeamTrace &trace)
{
  const auto &v = trace.samples();
  const double scale = 1.0 / (2.0 * trace.omega() * trace.stored_energy());
  const double fine = trapezoid_j2(v, 1);
  double sigma = 0.0;
  // Half-resolution estimate covers the same interval only for odd counts.
  if (v.size() >= 3 && v.size() % 2 == 1)
    sigma = std::fabs(fine - trapezoid_j2(v, 2)) / 3.0;
  const DimVector dim = dims::siemens() - dims::length();
  return Quantity(scale * fine, scale * sigma, dim);
}

LoopPolyline load_loop_csv(const std::filesystem::path &path, bool closed)
{
  const auto t = read_csv(path, {{"x_m", "y_m", "z_m"}});
  std::vector<Vec3> v;
  for (const auto &r : t.rows)
    v.push_back({r.number(0), r.number(1), r.number(2)});
  return LoopPolyline(std::move(v), closed);
}

SurfacePatchGrid load_surface_csv(const std::filesystem::path &path)
{
  const auto t = read_csv(path, {{"x_m", "y_m", "z_m", "area_m2"}});
  std::vector<SurfacePatch> v;
  for (const auto &r : t.rows)
    v.push_back({{r.number(0), r.number(1), r.number(2)}, r.number(3)});
  return SurfacePatchGrid(std::move(v));
}

FieldGrid load_field_grid_csv(const std::filesystem::path &path)
{
  const auto t = read_csv(path, {{"eps_F_per_m", "e2_V2_per_m2", "tan_delta", "vol_m3", "region"}});
  std::vector<FieldCell> v;
  for (const auto &r : t.rows)
    v.push_back({r.number(0), r.number(1), r.number(2), r.number(3), r.text(4)});
  return FieldGrid(std::move(v));
}

SeamScalars load_seam_sidecar(const std::filesystem::path &path)
{
  SeamScalars out;
  bool have_omega = false, have_u = false;
  std::string text = read_file(path);
  int line = 0;
  for (const auto &raw : split(text, '\n'))
  {
    ++line;
    const auto sv = trim(raw);
    if (sv.empty() || sv.front() == '#')
      continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected key = value", line, 1);
    const std::string key(trim(sv.substr(0, eq)));
    CsvRow r{line, {std::string(trim(sv.substr(eq + 1)))}};
    if (key == "omega_rad_s")
    {
      out.omega = r.number(0);
      have_omega = true;
    }
    else if (key == "U_J")
    {
      out.stored_energy = r.number(0);
      have_u = true;
    }
    else
      throw ParseError("unknown key '" + key + "'", line, 1);
  }
  if (!have_omega || !have_u)
    throw ParseError("seam sidecar needs omega_rad_s and U_J");
  return out;
}

SeamTrace load_seam_csv(const std::filesystem::path &path, const SeamScalars &scalars)
{
  const auto t = read_csv(path, {{"s_m", "Js_A_per_m"}});
  std::vector<SeamSample> v;
  for (const auto &r : t.rows)
    v.push_back({r.number(0), r.number(1)});
  return SeamTrace(std::move(v), scalars.omega, scalars.stored_energy);
}

}  // namespace prescriptor::geom
