#include <doctest.h>

#include "prescriptor/cli.hpp"
#include "prescriptor/io.hpp"

#include <filesystem>
#include <sstream>

using namespace prescriptor;
namespace fs = std::filesystem;

namespace
{

struct Result
{
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args)
{
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string &rel) { return std::string(PRESCRIPTOR_TEST_DATA_DIR) + "/" + rel; }

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("prescriptor_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool has(const std::string &s, const std::string &needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST_SUITE("cli")
{
  TEST_CASE("usage errors exit 2")
  {
    const Result r = run({"frobnicate"});
    CHECK(r.code == cli::kUsageError);
    CHECK(has(r.err, "unknown subcommand 'frobnicate'"));
    CHECK(has(r.err, "Subcommands:"));
    CHECK(run({}).code == cli::kUsageError);
    CHECK(run({"budget"}).code == cli::kUsageError);
    CHECK(run({"budget", "plan", "--nope"}).code == cli::kUsageError);
    CHECK(run({"stats", "mu2", "/no/such/file.csv"}).code == cli::kUsageError);
    CHECK(run({"--help"}).code == cli::kOk);
  }

  TEST_CASE("units check")
  {
    const Result r = run({"units", "check", "--channel", "II"});
    CHECK(r.code == cli::kOk);
    CHECK(has(r.out, "II-Spin: PASS"));
    CHECK(has(r.out, "Wb^2"));
    const Result all = run({"--csv", "units", "check"});
    CHECK(all.code == cli::kOk);
    CHECK(has(all.out, "channel,pass,residual\n"));
    CHECK(has(all.out, "V-Phonon,true,1\n"));
    CHECK(run({"units", "check", "--channel", "VII"}).code == cli::kDomainError);
  }

  TEST_CASE("budget plan with a preset")
  {
    const Result r = run({"budget", "plan", "--preset", "paper-b1", "--t1", "1ms"});
    CHECK(r.code == cli::kOk);
    CHECK(has(r.out, "Gamma_total: 1000 s^-1"));
    for (const char *row : {"I-TLS       0.4       400", "II-Spin     0.2       200", "III-Seam    0.2       200",
                            "IVb-QPEnv   0.1       100", "V-Phonon    0.1       100"})
      CHECK(has(r.out, row));
    CHECK(run({"budget", "plan", "--t1", "1ms"}).code == cli::kDomainError);
    CHECK(run({"budget", "plan", "--preset", "paper-b1", "--t1", "1 V"}).code == cli::kDomainError);
  }

  TEST_CASE("budget limits, feasibility and sweeps")
  {
    const Result lim = run({"--csv", "budget", "limits", data("budget/tls_plan.spec")});
    CHECK(lim.code == cli::kOk);
    CHECK(has(lim.out, "I-TLS,400,"));
    CHECK(has(lim.out, "IVb-QPEnv,100,1e+06,m^-3,"));
    const Result f =
        run({"budget", "feasibility", data("budget/tls_plan.spec"), "--measured", data("budget/measured.csv")});
    CHECK(f.code == cli::kOk);
    CHECK(has(f.out, "binding channel: I-TLS"));
    CHECK(has(f.out, "overall: INCOMPLETE"));
    const Result c = run({"budget", "conflicts", data("budget/sweeps.csv")});
    CHECK(has(c.out, "Trade-off (II vs I)"));
    const Result s = run({"--csv", "budget", "sensitivity", data("budget/sweeps.csv")});
    CHECK(has(s.out, "channel,parameter,p,g,dg_dp,dg_dp_sigma\n"));
  }

  TEST_CASE("protocol predict then evaluate")
  {
    const fs::path dir = scratch("protocol");
    const Result unsealed =
        run({"protocol", "evaluate", data("protocol/seam_design.txt"), data("protocol/seam_column.csv")});
    CHECK(unsealed.code == cli::kProtocolViolation);
    CHECK(has(unsealed.err, "not sealed"));

    const Result pred =
        run({"protocol", "predict", data("protocol/seam_design.txt"), "--committed-at", "2026-03-01T09:00:00Z"});
    REQUIRE(pred.code == cli::kOk);
    const fs::path sealed = dir / "sealed.txt";
    write_file(sealed, pred.out);

    const Result col = run({"protocol", "evaluate", sealed.string(), data("protocol/seam_column.csv")});
    CHECK(col.code == cli::kOk);
    CHECK(has(col.out, "verdict: Falsified(column)"));
    const Result ok = run({"protocol", "evaluate", sealed.string(), data("protocol/seam_match.csv")});
    CHECK(has(ok.out, "verdict: Supported"));

    std::string text = pred.out;
    text.replace(text.find("A = 1000"), 8, "A = 1100");
    write_file(dir / "stale.txt", text);
    const Result stale = run({"protocol", "evaluate", (dir / "stale.txt").string(), data("protocol/seam_match.csv")});
    CHECK(stale.code == cli::kProtocolViolation);
    CHECK(has(stale.err, "seal mismatch"));
  }

  TEST_CASE("mds validate and fmt")
  {
    CHECK(run({"mds", "validate", data("mds/minimal.mds")}).code == cli::kOk);
    CHECK(run({"mds", "validate", data("mds/trend_only.mds"), "--require", "quantitative"}).code ==
          cli::kDomainError);
    const Result g = run({"mds", "validate", data("mds/deficient_missing_g.mds")});
    CHECK(g.code == cli::kDomainError);
    CHECK(has(g.out, "Geometry Coupling Functionals absent"));
    const Result t = run({"mds", "validate", data("mds/deficient_tphi_protocol.mds")});
    CHECK(t.code == cli::kDomainError);
    CHECK(has(t.out, "8:1: [tphi-protocol]"));
    const Result p = run({"mds", "validate", data("mds/deficient_parity.mds")});
    CHECK(p.code == cli::kOk);
    CHECK(has(p.out, "grade: trend"));
    CHECK(run({"mds", "validate", data("mds/deficient_parity.mds"), "--require", "quantitative"}).code ==
          cli::kDomainError);

    const Result canon = run({"mds", "fmt", data("mds/tls_full.mds")});
    CHECK(canon.out == read_file(data("mds/tls_full.mds.canonical")));
    CHECK(run({"mds", "fmt", "--check", data("mds/tls_full.mds.canonical")}).code == cli::kOk);

    const fs::path dir = scratch("mds");
    write_file(dir / "bad.mds", "[rho]\nmu2 = 5 0.1 m^-2 | channel=XX; statistic=mu2\n");
    const Result bad = run({"mds", "parse", (dir / "bad.mds").string()});
    CHECK(bad.code == cli::kDomainError);
    CHECK(has(bad.out, "bad.mds:2:"));
  }

  TEST_CASE("stats and geom")
  {
    const Result m = run({"stats", "mu2", data("curvature_halves.csv")});
    CHECK(m.code == cli::kOk);
    CHECK(has(m.out, "mu2 = 5 m^-2"));
    CHECK(has(run({"stats", "discriminate", data("split_series.csv")}).out, "verdict: "));
    CHECK(has(run({"geom", "qinv", data("field_grid.csv")}).out, "Q^-1 = "));
    CHECK(has(run({"geom", "yseam", data("seam.csv"), data("seam.scalars")}).out, "Y_seam = "));
    CHECK(run({"geom", "gphi", data("square_loop.csv"), data("spin_surface.csv")}).code == cli::kOk);
    CHECK(run({"geom", "qinv", data("seam.csv")}).code == cli::kDomainError);
  }

  TEST_CASE("--out artefacts are reproducible")
  {
    const fs::path a = scratch("out_a");
    const fs::path b = scratch("out_b");
    const std::vector<std::string> tail = {"--seed", "7", "lab", "sweep", "--densities", "1e20,3e20",
                                           "--seeds", "1,2", "--cells", "8", "--correlations", "0,0.5"};
    std::vector<std::string> ra = {"--out", a.string()};
    std::vector<std::string> rb = {"--out", b.string()};
    ra.insert(ra.end(), tail.begin(), tail.end());
    rb.insert(rb.end(), tail.begin(), tail.end());
    REQUIRE(run(ra).code == cli::kOk);
    REQUIRE(run(rb).code == cli::kOk);
    for (const char *f : {"report.txt", "sweep.csv", "manifest.json"})
    {
      REQUIRE(fs::exists(a / f));
      CHECK(read_file(a / f) == read_file(b / f));
    }
    const std::string manifest = read_file(a / "manifest.json");
    CHECK(has(manifest, "\"subcommand\": \"lab sweep\""));
    CHECK(has(manifest, "\"seed\": 7"));
    CHECK(has(manifest, sha256_hex(read_file(a / "sweep.csv"))));

    const fs::path c = scratch("out_c");
    REQUIRE(run({"--out", c.string(), "mds", "validate", data("mds/minimal.mds")}).code == cli::kOk);
    CHECK(has(read_file(c / "manifest.json"), sha256_hex(read_file(data("mds/minimal.mds")))));
  }

  TEST_CASE("config file supplies options")
  {
    const fs::path dir = scratch("config");
    write_file(dir / "plan.toml", "[budget.plan]\npreset = \"uniform\"\nt1 = \"1ms\"\n");
    const Result r = run({"--config", (dir / "plan.toml").string(), "budget", "plan"});
    CHECK(r.code == cli::kOk);
    CHECK(has(r.out, "Gamma_total: 1000 s^-1"));
    const Result over = run({"--config", (dir / "plan.toml").string(), "budget", "plan", "--t1", "2ms"});
    CHECK(has(over.out, "Gamma_total: 500 s^-1"));
  }
}
