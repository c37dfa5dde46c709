#include <doctest.h>

#include "prescriptor/error.hpp"
#include "prescriptor/numeric.hpp"
#include "prescriptor/separability.hpp"

#include <cmath>
#include <sstream>

using namespace prescriptor;
using namespace prescriptor::lab;

namespace
{

GridSpec box(std::size_t nx, std::size_t ny, std::size_t nz, double h = 1e-6)
{
  GridSpec g;
  g.origin = {-2e-6, 0.0, 1e-6};
  g.spacing = {h, 1.5 * h, 0.5 * h};
  g.nx = nx;
  g.ny = ny;
  g.nz = nz;
  return g;
}

GridSpec random_box(Rng &rng)
{
  GridSpec g;
  g.origin = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  g.spacing = {rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2)};
  g.nx = 1 + rng.index(8);
  g.ny = 1 + rng.index(8);
  g.nz = 1 + rng.index(4);
  return g;
}

KernelField random_kernel(Rng &rng, const GridSpec &g)
{
  std::vector<double> v(g.cell_count());
  for (auto &x : v)
    x = rng.uniform(0.0, 5.0) * std::pow(10.0, rng.uniform(-3, 3));
  return custom_kernel(g, v);
}

// Least-squares slope of y against x.
double slope(const std::vector<double> &x, const std::vector<double> &y)
{
  const double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_SUITE("separability")
{
  TEST_CASE("grid geometry")
  {
    const GridSpec g = box(4, 3, 2);
    CHECK(g.cell_count() == 24);
    CHECK(g.locate(g.centroid(17)) == 17u);
    CHECK(g.locate(g.origin) == 0u);
    const Vec3 far = g.origin + g.extent();
    CHECK(g.locate(far) == g.cell_count() - 1);
    CHECK_FALSE(g.locate(far + Vec3{1e-9, 0, 0}).has_value());
    CHECK_FALSE(g.locate(g.origin - Vec3{1e-12, 0, 0}).has_value());
  }

  TEST_CASE("kernel_observable closed forms")
  {
    const GridSpec g = box(6, 2, 1);
    const KernelField k = edge_exponential_kernel(g, 2.0, 1.5e-6);
    CHECK(k.family == KernelFamily::EdgeExponential);
    CHECK(k.max() == doctest::Approx(2.0 * std::exp(-0.5 / 1.5)));
    CHECK(kernel_observable(uniform_density(g, 3e18), k).value ==
          doctest::Approx(3e18 * k.integral()).epsilon(1e-14));

    // defects only where the kernel vanishes
    std::vector<double> kv(g.cell_count(), 1.0), dv(g.cell_count(), 0.0);
    kv[3] = kv[4] = 0.0;
    dv[3] = 5.0;
    dv[4] = 2.0;
    CHECK(kernel_observable({g, dv}, custom_kernel(g, kv)).value == 0.0);

    DensityField wrong = uniform_density(box(6, 2, 2), 1.0);
    CHECK_THROWS_AS(kernel_observable(wrong, k), DomainError);
    CHECK_THROWS_AS(custom_kernel(g, std::vector<double>(3, 1.0)), DomainError);
    CHECK_THROWS_AS(custom_kernel(g, std::vector<double>(g.cell_count(), -1.0)), DomainError);
  }

  TEST_CASE("clustering on the kernel hotspot beats a uniform field of equal mean")
  {
    const GridSpec g = box(10, 1, 1);
    const KernelField k = edge_exponential_kernel(g, 1.0, 2e-6);
    std::vector<double> clustered(g.cell_count(), 0.0);
    clustered[0] = 5.0;  // hotspot at the edge
    clustered[7] = 5.0;
    const DensityField c{g, clustered};
    const DensityField u = uniform_density(g, c.mean());
    CHECK(kernel_observable(c, k).value > kernel_observable(u, k).value);
  }

  TEST_CASE("kernel_observable is bilinear")
  {
    Rng rng(55);
    for (int t = 0; t < 50; ++t)
    {
      const GridSpec g = random_box(rng);
      const KernelField k1 = random_kernel(rng, g), k2 = random_kernel(rng, g);
      DensityField d1{g, {}}, d2{g, {}};
      for (std::size_t i = 0; i < g.cell_count(); ++i)
      {
        d1.d.push_back(rng.uniform(0, 10));
        d2.d.push_back(rng.uniform(0, 10));
      }
      const double a = rng.uniform(0.1, 3), b = rng.uniform(0.1, 3);
      DensityField mix{g, {}};
      std::vector<double> kmix;
      for (std::size_t i = 0; i < g.cell_count(); ++i)
      {
        mix.d.push_back(a * d1.d[i] + b * d2.d[i]);
        kmix.push_back(a * k1.k[i] + b * k2.k[i]);
      }
      CHECK(kernel_observable(mix, k1).value ==
            doctest::Approx(a * kernel_observable(d1, k1).value + b * kernel_observable(d2, k1).value)
                .epsilon(1e-12));
      CHECK(kernel_observable(d1, custom_kernel(g, kmix)).value ==
            doctest::Approx(a * kernel_observable(d1, k1).value + b * kernel_observable(d1, k2).value)
                .epsilon(1e-12));
    }
  }

  TEST_CASE("golden-rule sum")
  {
    const GridSpec g = box(5, 5, 1);
    const KernelField k = edge_exponential_kernel(g, 4.0, 1e-6);
    const Vec3 p = g.centroid(12);
    const double k0 = k.at(p);
    CHECK(golden_rule_sum({{p, 2.5}}, k).value == doctest::Approx(2.5 * k0));
    const DefectList many(17, Defect{p, 2.5});
    CHECK(golden_rule_sum(many, k).value == doctest::Approx(17 * 2.5 * k0).epsilon(1e-15));
    CHECK_THROWS_AS(golden_rule_sum({{g.origin - Vec3{1, 0, 0}, 1.0}}, k), DomainError);
    CHECK(golden_rule_sum({}, k).value == 0.0);
  }

  TEST_CASE("golden-rule sum over centroids equals the kernel integral")
  {
    Rng rng(99);
    for (int t = 0; t < 50; ++t)
    {
      const GridSpec g = random_box(rng);
      const KernelField k = random_kernel(rng, g);
      DensityField d{g, {}};
      DefectList defects;
      for (std::size_t i = 0; i < g.cell_count(); ++i)
      {
        d.d.push_back(rng.uniform(0, 4));
        defects.push_back({g.centroid(i), d.d.back() * g.cell_volume()});
      }
      CHECK(golden_rule_sum(defects, k).value == doctest::Approx(kernel_observable(d, k).value).epsilon(1e-12));
    }
  }

  TEST_CASE("factorized equals kernel_observable on uniform fields")
  {
    Rng rng(1234);
    for (int t = 0; t < 200; ++t)
    {
      const GridSpec g = random_box(rng);
      const KernelField k = random_kernel(rng, g);
      const double rho = std::pow(10.0, rng.uniform(-5, 20));
      const DensityField d = uniform_density(g, rho);
      const Quantity f = factorized(Quantity::dimensionless(d.mean()), Quantity::dimensionless(k.integral()),
                                    Quantity::dimensionless(1.0));
      const double exact = kernel_observable(d, k).value;
      CHECK(std::fabs(f.value - exact) <= 1e-12 * std::fabs(exact));
    }
  }

  TEST_CASE("factorized: zeros and channel closure")
  {
    const Quantity one = Quantity::dimensionless(1.0);
    CHECK(factorized(Quantity::dimensionless(0.0), Quantity::dimensionless(3.0), one).value == 0.0);
    CHECK(factorized(Quantity::dimensionless(3.0), Quantity::dimensionless(0.0), one).value == 0.0);

    const Quantity rho(2e16, 1e15, dims::per_area());
    const Quantity g(3e-9, 0.0, parse_unit("T^2*A^-2*m^2").dim);
    const Quantity mu_b = Constants::mu_B();
    const Quantity phi0 = Constants::Phi0();
    const Quantity c = q_div(q_mul(mu_b, mu_b), q_mul(phi0, phi0));
    const Quantity a_phi = factorized(rho, g, c, ChannelId::Spin);
    CHECK(a_phi.dim.is_dimensionless());
    // rho * G * mu_B^2 carries Wb^2; dividing by Phi0^2 counts flux quanta squared.
    const Quantity wb2 = q_mul(q_mul(rho, g), q_mul(mu_b, mu_b));
    CHECK(wb2.dim == dims::weber() * Rational(2));
    CHECK(in_phi0_squared(wb2) == doctest::Approx(a_phi.value).epsilon(1e-12));
    CHECK(a_phi.relative_sigma() == doctest::Approx(0.05));

    CHECK_THROWS_AS(factorized(rho, g, one, ChannelId::Spin), DimensionError);
    CHECK_THROWS_AS(factorized(Quantity(1.0, 0.0, dims::per_volume()), g, c, ChannelId::Spin), DimensionError);
  }

  TEST_CASE("separability deltas")
  {
    auto dl = [](std::initializer_list<double> xs) {
      std::vector<Quantity> v;
      for (double x : xs)
        v.push_back(Quantity::dimensionless(x));
      return v;
    };
    const auto same = separability_deltas(dl({3, 3, 3}), dl({1, 1}));
    CHECK(same.delta_rho == 0.0);
    CHECK(same.delta_g == 0.0);
    CHECK_FALSE(same.rho_flag);

    CHECK(separability_deltas(dl({2.0, 2.1}), dl({1, 1})).delta_rho == doctest::Approx(0.05));

    // 1/10 is exactly the double nearest 0.1.
    const auto at = separability_deltas(dl({10.0, 11.0, 9.5}), dl({5.0, 4.2}));
    CHECK(at.delta_rho == 0.1);
    CHECK_FALSE(at.rho_flag);
    CHECK(at.g_flag);
    CHECK(separability_deltas(dl({10.0, 11.0}), dl({1, 1}), std::nextafter(0.1, 0.0)).rho_flag);
    CHECK_FALSE(separability_deltas(dl({10.0, 11.0}), dl({1, 1}), std::nextafter(0.1, 1.0)).rho_flag);
    CHECK(separability_deltas(dl({10.0, std::nextafter(11.0, 12.0)}), dl({1, 1})).rho_flag);

    CHECK_THROWS_AS(separability_deltas(dl({0.0, 1.0}), dl({1, 1})), DomainError);
    CHECK_THROWS_AS(separability_deltas(dl({1.0}), dl({1, 1})), DomainError);
  }

  TEST_CASE("i.i.d. defects: factorization error scales like N^-1/2")
  {
    const GridSpec g = box(8, 8, 1);
    const KernelField k = edge_exponential_kernel(g, 1.0, 2e-6);
    auto mean_err = [&](std::size_t n) {
      double acc = 0.0;
      const int seeds = 60;
      for (int s = 0; s < seeds; ++s)
      {
        const DefectList d = uniform_defects(g, n, 1.0, 1000 + s);
        const Quantity fact = factorized(Quantity::dimensionless(n / g.volume()),
                                         Quantity::dimensionless(k.integral()), Quantity::dimensionless(1.0));
        acc += compare(golden_rule_sum(d, k), fact).rel_error;
      }
      return acc / seeds;
    };
    const double e100 = mean_err(100), e1000 = mean_err(1000), e10000 = mean_err(10000);
    CHECK(e100 / e1000 > 2.0);
    CHECK(e100 / e1000 < 5.0);
    CHECK(e1000 / e10000 > 2.0);
    CHECK(e1000 / e10000 < 5.0);
  }

  TEST_CASE("dilution sweep: zero correlation converges with density")
  {
    const GridSpec g = box(10, 10, 1);
    const KernelField k = edge_exponential_kernel(g, 1.0, 3e-6);
    SweepConfig cfg;
    const double v = g.volume();
    cfg.densities = {30 / v, 100 / v, 300 / v, 1000 / v, 3000 / v, 10000 / v};
    cfg.correlations = {0.0};
    cfg.seeds = {1, 2, 3, 4, 5};
    const auto rows = dilution_sweep(k, cfg);
    REQUIRE(rows.size() == 30);
    std::vector<double> x, y;
    for (const auto &r : rows)
    {
      x.push_back(std::log(static_cast<double>(r.defect_count)));
      y.push_back(r.rel_error);
    }
    CHECK(slope(x, y) < 0.0);
  }

  TEST_CASE("dilution sweep: full clustering on the kernel maximum")
  {
    const GridSpec g = box(10, 4, 1);
    const KernelField k = edge_exponential_kernel(g, 1.0, 2e-6);
    SweepConfig cfg;
    cfg.densities = {500 / g.volume()};
    cfg.correlations = {1.0};
    cfg.seeds = {7, 8};
    cfg.parents_at_kernel_max = true;
    cfg.rho_mode = RhoMode::Estimated;
    const double kmax_over_mean = k.max() / k.mean();
    for (const auto &r : dilution_sweep(k, cfg))
    {
      CHECK(r.o_exact / r.o_factorized - 1.0 == doctest::Approx(kmax_over_mean - 1.0).epsilon(1e-12));
      CHECK(r.rel_error == doctest::Approx(1.0 - 1.0 / kmax_over_mean).epsilon(1e-12));
    }

    // Partial clustering lies between the dilute and fully clustered limits.
    cfg.correlations = {0.0, 0.5, 1.0};
    cfg.seeds = {11};
    const auto rows = dilution_sweep(k, cfg);
    CHECK(rows[0].rel_error < rows[1].rel_error);
    CHECK(rows[1].rel_error < rows[2].rel_error);
  }

  TEST_CASE("dilution sweep: size-one sweep wraps golden_rule_sum")
  {
    const GridSpec g = box(6, 6, 2);
    const KernelField k = edge_exponential_kernel(g, 3.0, 1e-6);
    SweepConfig cfg;
    cfg.densities = {200 / g.volume()};
    cfg.correlations = {0.3};
    cfg.seeds = {42};
    cfg.cluster_sigma = 0.7e-6;
    const auto rows = dilution_sweep(k, cfg);
    REQUIRE(rows.size() == 1);
    const DefectList d = synthesize_defects(k, cfg, cfg.densities[0], 0.3, cell_seed(42, cfg.densities[0], 0.3));
    CHECK(rows[0].o_exact == golden_rule_sum(d, k).value);
    CHECK(rows[0].defect_count == d.size());
  }

  TEST_CASE("dilution sweep: parallel run is bitwise identical")
  {
    const GridSpec g = box(6, 6, 1);
    const KernelField k = edge_exponential_kernel(g, 1.0, 1e-6);
    SweepConfig cfg;
    cfg.densities = {50 / g.volume(), 500 / g.volume()};
    cfg.correlations = {0.0, 0.4, 0.9};
    cfg.seeds = {1, 2, 3};
    cfg.cluster_sigma = 0.5e-6;
    std::ostringstream serial, parallel;
    write_sweep_csv(serial, dilution_sweep(k, cfg));
    cfg.threads = 5;
    write_sweep_csv(parallel, dilution_sweep(k, cfg));
    CHECK(serial.str() == parallel.str());
    CHECK(serial.str().rfind("density,correlation,seed,o_exact,o_factorized,rel_error\n# units:", 0) == 0);

    cfg.seeds.clear();
    CHECK_THROWS_AS(dilution_sweep(k, cfg), DomainError);
  }
}
