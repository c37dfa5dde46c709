#include <doctest.h>

#include "prescriptor/error.hpp"
#include "prescriptor/geometry.hpp"
#include "prescriptor/microstructure.hpp"
#include "prescriptor/numeric.hpp"

#include <cmath>
#include <numbers>

using namespace prescriptor;
using namespace prescriptor::geom;

namespace
{

constexpr double kPi = std::numbers::pi;
const double kMu0 = Constants::mu0().value;

// Exact field of a circular filament of radius a in the z = 0 plane, per unit
// current, at cylindrical (rho, z). Returns {B_rho, B_z}.
std::pair<double, double> circular_loop_field(double a, double rho, double z)
{
  const double s = a * a + rho * rho + z * z;
  const double alpha2 = s - 2.0 * a * rho;
  const double beta2 = s + 2.0 * a * rho;
  const double beta = std::sqrt(beta2);
  const double k = std::sqrt(1.0 - alpha2 / beta2);
  const double K = std::comp_ellint_1(k);
  const double E = std::comp_ellint_2(k);
  const double c = kMu0 / kPi;
  const double bz = c / (2.0 * alpha2 * beta) * ((a * a - rho * rho - z * z) * E + alpha2 * K);
  const double brho = rho == 0.0 ? 0.0 : c * z / (2.0 * alpha2 * beta * rho) * ((s)*E - alpha2 * K);
  return {brho, bz};
}

SurfacePatchGrid annulus(double r_in, double r_out, double z, int n_r, int n_t)
{
  std::vector<SurfacePatch> p;
  const double dr = (r_out - r_in) / n_r;
  const double dt = 2.0 * kPi / n_t;
  for (int i = 0; i < n_r; ++i)
  {
    const double r = r_in + (i + 0.5) * dr;
    for (int j = 0; j < n_t; ++j)
    {
      const double t = (j + 0.5) * dt;
      p.push_back({{r * std::cos(t), r * std::sin(t), z}, r * dr * dt});
    }
  }
  return SurfacePatchGrid(p);
}

Vec3 rotate_z(Vec3 v, double t)
{
  return {std::cos(t) * v.x - std::sin(t) * v.y, std::sin(t) * v.x + std::cos(t) * v.y, v.z};
}

Vec3 rotate_x(Vec3 v, double t)
{
  return {v.x, std::cos(t) * v.y - std::sin(t) * v.z, std::sin(t) * v.y + std::cos(t) * v.z};
}

FieldGrid random_region_uniform_grid(Rng &rng, std::vector<double> &tan_by_region)
{
  const std::size_t n_regions = 1 + rng.index(5);
  tan_by_region.clear();
  for (std::size_t r = 0; r < n_regions; ++r)
    tan_by_region.push_back(std::pow(10.0, rng.uniform(-7.0, -2.0)));
  std::vector<FieldCell> cells;
  const std::size_t n_cells = n_regions + rng.index(200);
  for (std::size_t i = 0; i < n_cells; ++i)
  {
    const std::size_t r = i < n_regions ? i : rng.index(n_regions);
    cells.push_back({8.85e-12 * rng.uniform(1.0, 12.0), std::pow(10.0, rng.uniform(2.0, 12.0)),
                     tan_by_region[r], std::pow(10.0, rng.uniform(-21.0, -15.0)), "r" + std::to_string(r)});
  }
  return FieldGrid(cells);
}

}  // namespace

TEST_SUITE("geometry")
{
  TEST_CASE("biot-savart: polygon approximating a circle, centre field")
  {
    const double R = 50e-6;
    const Vec3 b = biot_savart(regular_polygon(10000, R), {0, 0, 0});
    CHECK(std::fabs(b.z - kMu0 / (2.0 * R)) / (kMu0 / (2.0 * R)) < 1e-3);
    CHECK(std::fabs(b.x) < 1e-12 * std::fabs(b.z));
    CHECK(std::fabs(b.y) < 1e-12 * std::fabs(b.z));
  }

  TEST_CASE("biot-savart: far field of a square loop follows the dipole law")
  {
    const double a = 10e-6;
    const LoopPolyline sq({{0, 0, 0}, {a, 0, 0}, {a, a, 0}, {0, a, 0}}, true);
    for (double d : {100 * a, 300 * a})
    {
      const Vec3 b = biot_savart(sq, {a / 2, a / 2, d});
      const double dipole = kMu0 * a * a / (2.0 * kPi * d * d * d);
      CHECK(std::fabs(norm(b) - dipole) / dipole < 0.01);
    }
  }

  TEST_CASE("biot-savart: transverse components vanish on the axis")
  {
    const LoopPolyline loop = regular_polygon(64, 1e-3);
    for (double z : {-2e-3, 0.0, 1e-4, 5e-3})
    {
      const Vec3 b = biot_savart(loop, {0, 0, z});
      CHECK(std::fabs(b.x) <= 1e-12 * std::fabs(b.z));
      CHECK(std::fabs(b.y) <= 1e-12 * std::fabs(b.z));
    }
  }

  TEST_CASE("biot-savart: matches the analytic circular loop off axis")
  {
    const double R = 1e-3;
    const LoopPolyline loop = regular_polygon(20000, R);
    for (auto [rho, z] : {std::pair{0.3e-3, 0.2e-3}, {1.5e-3, -0.4e-3}, {0.9e-3, 0.15e-3}})
    {
      const auto [br, bz] = circular_loop_field(R, rho, z);
      const Vec3 b = biot_savart(loop, {rho, 0, z});
      CHECK(b.x == doctest::Approx(br).epsilon(1e-4));
      CHECK(b.z == doctest::Approx(bz).epsilon(1e-4));
    }
  }

  TEST_CASE("biot-savart: orientation reversal and superposition")
  {
    Rng rng(3);
    const LoopPolyline loop({{0, 0, 0}, {1e-4, 0, 0}, {1.2e-4, 8e-5, 1e-5}, {-2e-5, 9e-5, 0}}, true);
    const LoopPolyline other = regular_polygon(7, 3e-5, 2e-5);
    for (int i = 0; i < 20; ++i)
    {
      const Vec3 p{rng.uniform(-3e-4, 3e-4), rng.uniform(-3e-4, 3e-4), rng.uniform(1e-4, 3e-4)};
      const Vec3 f = biot_savart(loop, p);
      const Vec3 r = biot_savart(loop.reversed(), p);
      CHECK(r.x == doctest::Approx(-f.x).epsilon(1e-12));
      CHECK(r.y == doctest::Approx(-f.y).epsilon(1e-12));
      CHECK(r.z == doctest::Approx(-f.z).epsilon(1e-12));

      // Open segments: a closed loop is the sum of its two halves.
      const auto &v = loop.vertices();
      const LoopPolyline first({v[0], v[1], v[2]}, false);
      const LoopPolyline second({v[2], v[3], v[0]}, false);
      const Vec3 s = biot_savart(first, p) + biot_savart(second, p);
      CHECK(s.x == doctest::Approx(f.x).epsilon(1e-12));
      CHECK(s.z == doctest::Approx(f.z).epsilon(1e-12));

      const Vec3 g = biot_savart(other, p);
      const Vec3 sum = f + g;
      CHECK(sum.y == doctest::Approx(f.y + g.y).epsilon(1e-15));
    }
  }

  TEST_CASE("biot-savart: singular points are refused")
  {
    const LoopPolyline loop = regular_polygon(4, 1.0);
    CHECK_THROWS_AS(biot_savart(loop, {1.0, 0.0, 0.0}), SingularityError);
    CHECK_THROWS_AS(biot_savart(loop, {0.5, 0.5, 1e-10}), SingularityError);
    CHECK_NOTHROW(biot_savart(loop, {0.5, 0.5, 1e-8}));
    CHECK_THROWS_AS(biot_savart(loop, {0.5, 0.5, 1e-8}, 1e-6), SingularityError);
    CHECK_THROWS_AS(LoopPolyline({{0, 0, 0}, {1, 0, 0}}, true), DomainError);
    CHECK_THROWS_AS(LoopPolyline({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}, true), DomainError);
  }

  TEST_CASE("g_phi: constant integrand and area linearity")
  {
    const LoopPolyline loop = regular_polygon(100, 1e-4);
    const Vec3 b = biot_savart(loop, {0, 0, 0});
    const double b2 = dot(b, b);
    std::vector<SurfacePatch> patches;
    for (double a : {1e-12, 2e-12, 4e-12, 0.5e-12})
      patches.push_back({{0, 0, 0}, a});
    const Quantity g = g_phi(loop, SurfacePatchGrid(patches));
    CHECK(g.value == doctest::Approx(b2 * 7.5e-12).epsilon(1e-13));
    CHECK(g.dim == parse_unit("T^2*A^-2*m^2").dim);
    CHECK(g.sigma == doctest::Approx(0.0).epsilon(1e-15));

    const SurfacePatchGrid ring = annulus(2e-4, 4e-4, 1e-5, 20, 12);
    std::vector<SurfacePatch> doubled = ring.patches();
    for (auto &p : doubled)
      p.area *= 2.0;
    CHECK(g_phi(loop, SurfacePatchGrid(doubled)).value ==
          doctest::Approx(2.0 * g_phi(loop, ring).value).epsilon(1e-14));
  }

  TEST_CASE("g_phi: annulus against a dense analytic quadrature")
  {
    const double R = 100e-6, z0 = 20e-6, r_in = 40e-6, r_out = 160e-6;
    const Quantity g = g_phi(regular_polygon(2000, R), annulus(r_in, r_out, z0, 400, 16));

    const int n = 1000000;
    const double h = (r_out - r_in) / (n - 1);
    CompensatedSum acc;
    for (int i = 0; i < n; ++i)
    {
      const double r = r_in + i * h;
      const auto [br, bz] = circular_loop_field(R, r, z0);
      const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
      acc += w * h * 2.0 * kPi * r * (br * br + bz * bz);
    }
    CHECK(std::fabs(g.value - acc.value()) / acc.value() < 5e-3);
    // The merged-patch estimate is coarse but must cover the actual error.
    CHECK(g.sigma > 0.0);
    CHECK(std::fabs(g.value - acc.value()) <= 3.0 * g.sigma);
    CHECK(g.sigma < 0.05 * g.value);
  }

  TEST_CASE("g_phi: rigid motions and parallel reduction")
  {
    const LoopPolyline loop({{0, 0, 0}, {8e-5, 0, 0}, {8e-5, 5e-5, 0}, {0, 5e-5, 0}}, true);
    const SurfacePatchGrid surf = annulus(1e-4, 2e-4, 3e-6, 30, 24);
    const double base = g_phi(loop, surf).value;

    const Vec3 shift{1e-3, -2e-3, 5e-4};
    auto move = [&](Vec3 v) { return rotate_x(rotate_z(v, 0.7), -1.1) + shift; };
    std::vector<Vec3> lv;
    for (const auto &v : loop.vertices())
      lv.push_back(move(v));
    std::vector<SurfacePatch> sp;
    for (const auto &p : surf.patches())
      sp.push_back({move(p.centroid), p.area});
    CHECK(g_phi(LoopPolyline(lv, true), SurfacePatchGrid(sp)).value == doctest::Approx(base).epsilon(1e-9));

    GeometryOptions par;
    par.threads = 4;
    CHECK(std::fabs(g_phi(loop, surf, par).value - base) <= 1e-12 * base);
  }

  TEST_CASE("g_phi: singular patch is named")
  {
    const LoopPolyline loop = regular_polygon(4, 1.0);
    std::vector<SurfacePatch> p = {{{0, 0, 1}, 1.0}, {{0, 0, 2}, 1.0}, {{1.0, 0.0, 0.0}, 1.0}};
    try
    {
      g_phi(loop, SurfacePatchGrid(p));
      FAIL("expected SingularityError");
    }
    catch (const SingularityError &e)
    {
      CHECK(std::string(e.what()).find("surface patch 2") != std::string::npos);
    }
    CHECK_THROWS_AS(SurfacePatchGrid({{{0, 0, 0}, 0.0}}), DomainError);
  }

  TEST_CASE("y_seam")
  {
    const double omega = 2 * kPi * 5e9, U = 1e-24;
    const SeamTrace flat({{0.0, 3.0}, {0.5e-3, 3.0}, {1e-3, 3.0}}, omega, U);
    const Quantity y = y_seam(flat);
    CHECK(y.value == doctest::Approx(9.0 * 1e-3 / (2 * omega * U)).epsilon(1e-14));
    CHECK(y.dim == parse_unit("S/m").dim);
    CHECK(y_seam(SeamTrace({{0.0, 0.0}, {1.0, 0.0}}, omega, U)).value == 0.0);
    CHECK(y_seam(SeamTrace(flat.samples(), omega, 2 * U)).value == doctest::Approx(0.5 * y.value).epsilon(1e-15));

    // triangular: 0 -> J0 at l/2 -> 0
    const double J0 = 7.0, l = 2e-3;
    std::vector<SeamSample> tri;
    const int n = 4001;
    for (int i = 0; i < n; ++i)
    {
      const double s = l * i / (n - 1);
      tri.push_back({s, J0 * (1.0 - std::fabs(2.0 * s / l - 1.0))});
    }
    const Quantity yt = y_seam(SeamTrace(tri, omega, U));
    const double exact = J0 * J0 * l / (6 * omega * U);
    CHECK(yt.value == doctest::Approx(exact).epsilon(1e-6));
    CHECK(std::fabs(yt.value - exact) <= 3.0 * yt.sigma + 1e-12 * exact);

    CHECK_THROWS_AS(SeamTrace({{0.0, 1.0}}, omega, U), DomainError);
    CHECK_THROWS_AS(SeamTrace({{0.0, 1.0}, {0.0, 1.0}}, omega, U), DomainError);
    CHECK_THROWS_AS(SeamTrace({{0.0, 1.0}, {1.0, 1.0}}, 0.0, U), DomainError);
  }

  TEST_CASE("q_inv_dielectric and participation closed forms")
  {
    const FieldGrid uniform({{1e-11, 1e6, 3e-6, 1e-18, "a"}, {2e-11, 5e5, 3e-6, 4e-18, "b"}});
    CHECK(q_inv_dielectric(uniform).value == doctest::Approx(3e-6).epsilon(1e-14));

    // energies 1e-23 (a) and 4e-23 (b)
    CHECK(participation(uniform, "a").value == doctest::Approx(0.2));
    CHECK(participation(uniform, "b").value == doctest::Approx(0.8));

    const FieldGrid one_lossy({{1.0, 1.0, 0.0, 1.0, "bulk"}, {1.0, 3.0, 0.01, 1.0, "edge"}, {1.0, 1.0, 0.0, 1.0, "bulk"}});
    CHECK(q_inv_dielectric(one_lossy).value == doctest::Approx(0.01 * 3.0 / 5.0).epsilon(1e-15));

    const FieldGrid equal({{1.0, 2.0, 0.0, 1.0, "x"}, {2.0, 1.0, 0.0, 1.0, "y"}});
    CHECK(participation(equal, "x").value == 0.5);
    CHECK(participation(equal, "y").value == 0.5);
    CHECK(participation(FieldGrid({{1.0, 2.0, 0.0, 1.0, "only"}}), "only").value == 1.0);
    CHECK_THROWS_AS(participation(equal, "z"), DomainError);
    CHECK_THROWS_AS(FieldGrid({{1.0, 0.0, 0.0, 1.0, "x"}}), DomainError);
    CHECK_THROWS_AS(FieldGrid({{1.0, 1.0, -1.0, 1.0, "x"}}), DomainError);
    CHECK_THROWS_AS(FieldGrid(std::vector<FieldCell>{}), DomainError);
  }

  TEST_CASE("homogeneous limit over random region-uniform grids")
  {
    Rng rng(2718);
    for (int trial = 0; trial < 200; ++trial)
    {
      std::vector<double> tans;
      const FieldGrid grid = random_region_uniform_grid(rng, tans);
      const auto p = participations(grid);
      double sum_p = 0.0, expected = 0.0;
      for (std::size_t r = 0; r < tans.size(); ++r)
      {
        const double pr = p.at("r" + std::to_string(r)).value;
        sum_p += pr;
        expected += pr * tans[r];
      }
      CHECK(sum_p == doctest::Approx(1.0).epsilon(1e-12));
      const double got = q_inv_dielectric(grid).value;
      CHECK(std::fabs(got - expected) <= 1e-10 * expected);

      const auto [lo, hi] = std::minmax_element(tans.begin(), tans.end());
      CHECK(got >= *lo * (1 - 1e-12));
      CHECK(got <= *hi * (1 + 1e-12));

      std::vector<FieldCell> scaled = grid.cells();
      for (auto &c : scaled)
        c.e2 *= 37.5;
      CHECK(q_inv_dielectric(FieldGrid(scaled)).value == doctest::Approx(got).epsilon(1e-12));
    }
  }

  TEST_CASE("g_one and the channel I pipeline")
  {
    const Quantity one_m2(1.0, 0.0, dims::area());
    CHECK(g_one(FieldGrid({{1, 1, 0, 1, "edge"}}), "edge", one_m2).value == 1.0);
    CHECK(g_one(FieldGrid({{1, 1, 0, 1, "edge"}}), "edge", one_m2).dim == dims::area());

    // Moving half the edge energy into the bulk halves G_I.
    const FieldGrid before({{1, 2, 0, 1, "edge"}, {1, 2, 0, 1, "bulk"}});
    const FieldGrid after({{1, 1, 0, 1, "edge"}, {1, 3, 0, 1, "bulk"}});
    const Quantity alpha(3e-13, 0.0, dims::area());
    CHECK(g_one(after, "edge", alpha).value == doctest::Approx(0.5 * g_one(before, "edge", alpha).value));
    CHECK_THROWS_AS(g_one(before, "edge", Quantity(-1.0, 0.0, dims::area())), DomainError);
    CHECK_THROWS_AS(g_one(before, "edge", Quantity::dimensionless(1.0)), DimensionError);
    CHECK_THROWS_AS(g_one(before, "surface", alpha), DomainError);

    // Lossy edge with tan_delta_eff from the linear model, lossless bulk.
    const Quantity tan0 = Quantity::dimensionless(2e-4);
    const Quantity mu2(4e12, 0.0, dims::per_area());
    const stats::LossTangentModel model(stats::LossTangentForm::Linear, tan0, alpha);
    const double t_eff = stats::tan_delta_eff(model, mu2).value;
    const FieldGrid device({{1.1e-10, 4e8, t_eff, 2e-20, "edge"},
                            {1.1e-10, 1e8, t_eff, 3e-20, "edge"},
                            {8.85e-12, 9e7, 0.0, 5e-17, "bulk"},
                            {8.85e-12, 2e8, 0.0, 1e-17, "vacuum"}});
    const double p_edge = participation(device, "edge").value;
    const Quantity g1 = g_one(device, "edge", alpha);
    const double baseline = tan0.value * p_edge;
    const double pi_one = (mu2 * g1).value;
    CHECK(q_inv_dielectric(device).value == doctest::Approx(baseline + tan0.value * pi_one).epsilon(1e-12));
  }

  TEST_CASE("csv loaders")
  {
    const std::string dir = PRESCRIPTOR_TEST_DATA_DIR;
    const auto loop = load_loop_csv(dir + "/square_loop.csv");
    CHECK(loop.vertices().size() == 4);
    const auto surf = load_surface_csv(dir + "/spin_surface.csv");
    CHECK(g_phi(loop, surf).value > 0.0);
    const auto grid = load_field_grid_csv(dir + "/field_grid.csv");
    CHECK(grid.regions().size() == 3);
    const auto seam = load_seam_csv(dir + "/seam.csv", load_seam_sidecar(dir + "/seam.scalars"));
    CHECK(y_seam(seam).value > 0.0);
    CHECK_THROWS_AS(load_loop_csv(dir + "/seam.csv"), ParseError);
  }
}
