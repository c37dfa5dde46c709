// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/cli.hpp"

#include "prescriptor/budget.hpp"
#include "prescriptor/channels.hpp"
#include "prescriptor/error.hpp"
#include "prescriptor/geometry.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/mds.hpp"
#include "prescriptor/microstructure.hpp"
#include "prescriptor/protocol.hpp"
#include "prescriptor/separability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <sstream>

#ifndef PRESCRIPTOR_VERSION
#define PRESCRIPTOR_VERSION "0.0.0"
#endif

namespace prescriptor::cli
{

namespace fs = std::filesystem;

std::string version() { return PRESCRIPTOR_VERSION; }

namespace
{

struct Output
{
  std::string report;
  std::string csv;
  std::string csv_name = "result.csv";
  int code = kOk;
};

struct Run
{
  std::vector<std::string> args;
  std::string subcommand;
  std::vector<fs::path> inputs;
  std::optional<std::uint64_t> seed;

  std::string read(const std::string &path)
  {
    inputs.emplace_back(path);
    return read_file(path);
  }
  const std::string &track(const std::string &path)
  {
    inputs.emplace_back(path);
    return path;
  }
};

std::string fmt(double v) { return format_double(v); }

std::string quantity_line(std::string_view name, const Quantity &q, std::string_view unit)
{
  std::ostringstream o;
  o << name << " = " << fmt(to_unit(q, unit));
  if (q.sigma > 0.0)
    o << " +/- " << fmt(to_unit(Quantity(q.sigma, 0.0, q.dim), unit));
  o << ' ' << unit << '\n';
  return o.str();
}

std::string quantity_csv(const std::vector<std::tuple<std::string, Quantity, std::string>> &rows)
{
  std::ostringstream o;
  o << "quantity,value,sigma,unit\n# units: -,unit,unit,-\n";
  for (const auto &[name, q, unit] : rows)
    o << name << ',' << fmt(to_unit(q, unit)) << ',' << fmt(to_unit(Quantity(q.sigma, 0.0, q.dim), unit)) << ','
      << unit << '\n';
  return o.str();
}

// ---------------------------------------------------------------------------
// units
// ---------------------------------------------------------------------------

Output units_check(const std::string &channel)
{
  std::vector<ChannelId> ids;
  if (channel.empty() || channel == "all")
    ids = {ChannelId::TLS, ChannelId::Spin, ChannelId::Seam, ChannelId::QPTrap, ChannelId::QPEnv, ChannelId::Phonon};
  else
    ids = {parse_channel(channel)};
  Output out;
  out.csv_name = "closure.csv";
  std::ostringstream r;
  std::ostringstream c;
  c << "channel,pass,residual\n# units: -,-,-\n";
  bool all = true;
  for (auto id : ids)
  {
    const ClosureReport rep = check_closure(id);
    all = all && rep.pass;
    r << channel_name(id) << ": " << (rep.pass ? "PASS" : "FAIL") << '\n';
    for (const auto &step : rep.chain)
      r << "  " << step << '\n';
    if (!rep.pass)
      r << "  residual " << rep.residual.str() << '\n';
    c << channel_name(id) << ',' << (rep.pass ? "true" : "false") << ',' << rep.residual.str() << '\n';
  }
  out.report = r.str();
  out.csv = c.str();
  out.code = all ? kOk : kDomainError;
  return out;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

Output stats_mu2(Run &run, const std::string &path, std::size_t resamples)
{
  const stats::CurvatureTrace trace = stats::load_curvature_csv(run.track(path));
  const Quantity m = resamples > 0 ? stats::mu2_bootstrap(trace, resamples, run.seed.value_or(1)) : stats::mu2(trace);
  const stats::CurvatureMoments mom = stats::curvature_moments(trace);
  Output out;
  out.csv_name = "mu2.csv";
  std::ostringstream r;
  r << quantity_line("mu2", m, "m^-2");
  if (m.value != 0.0 && m.sigma > 0.0)
    r << "relative sigma = " << fmt(m.sigma / std::abs(m.value)) << '\n';
  r << "mu1 = " << fmt(mom.mu1) << " m^-1\n"
    << "mu3 = " << fmt(mom.mu3) << " m^-3\n"
    << "mu4 = " << fmt(mom.mu4) << " m^-4\n"
    << "perimeter = " << fmt(trace.perimeter()) << " m, samples = " << trace.size() << '\n';
  out.report = r.str();
  out.csv = quantity_csv({{"mu2", m, "m^-2"},
                          {"mu1", Quantity(mom.mu1, 0.0, parse_unit("m^-1").dim), "m^-1"},
                          {"mu3", Quantity(mom.mu3, 0.0, parse_unit("m^-3").dim), "m^-3"},
                          {"mu4", Quantity(mom.mu4, 0.0, parse_unit("m^-4").dim), "m^-4"}});
  return out;
}

Output stats_rms(Run &run, const std::string &path)
{
  const Quantity q = stats::rms_roughness(stats::load_profile_csv(run.track(path)));
  Output out;
  out.csv_name = "rms.csv";
  out.report = quantity_line("R_rms", q, "nm");
  out.csv = quantity_csv({{"R_rms", q, "m"}});
  return out;
}

Output stats_discriminate(Run &run, const std::string &path, double confidence, std::size_t resamples)
{
  stats::DiscriminationOptions opts;
  opts.confidence = confidence;
  opts.n_resamples = resamples;
  opts.seed = run.seed.value_or(1);
  const stats::DiscriminationReport rep = stats::discriminate(stats::load_split_series_csv(run.track(path)), opts);
  Output out;
  out.csv_name = "discriminate.csv";
  std::ostringstream r;
  r << "target: " << rep.target << '\n'
    << "R2(mu2) = " << fmt(rep.r2_mu2) << '\n'
    << "R2(R_rms) = " << fmt(rep.r2_rms) << '\n';
  if (rep.r2_mu1)
    r << "R2(mu1) = " << fmt(*rep.r2_mu1) << '\n';
  r << "R2(mu2) - R2(R_rms): " << fmt(rep.confidence * 100) << "% CI [" << fmt(rep.delta_lo) << ", "
    << fmt(rep.delta_hi) << "]\n";
  for (const auto &w : rep.warnings)
    r << "warning: " << w << '\n';
  r << "verdict: " << stats::to_string(rep.verdict) << '\n';
  out.report = r.str();
  std::ostringstream c;
  c << "statistic,value\n# units: -,1\n"
    << "r2_mu2," << fmt(rep.r2_mu2) << "\nr2_rms," << fmt(rep.r2_rms) << '\n';
  if (rep.r2_mu1)
    c << "r2_mu1," << fmt(*rep.r2_mu1) << '\n';
  c << "delta_lo," << fmt(rep.delta_lo) << "\ndelta_hi," << fmt(rep.delta_hi) << '\n';
  out.csv = c.str();
  return out;
}

// ---------------------------------------------------------------------------
// geom
// ---------------------------------------------------------------------------

Output geom_gphi(Run &run, const std::string &loop, const std::string &surface, bool open, double clearance,
                 unsigned threads)
{
  geom::GeometryOptions opts;
  opts.clearance = clearance;
  opts.threads = threads;
  const Quantity g = geom::g_phi(geom::load_loop_csv(run.track(loop), !open),
                                 geom::load_surface_csv(run.track(surface)), opts);
  Output out;
  out.csv_name = "gphi.csv";
  out.report = quantity_line("G_Phi", g, "T^2*A^-2*m^2");
  out.csv = quantity_csv({{"G_Phi", g, "T^2*A^-2*m^2"}});
  return out;
}

Output geom_yseam(Run &run, const std::string &csv, const std::string &scalars)
{
  const geom::SeamScalars sc = geom::load_seam_sidecar(run.track(scalars));
  const Quantity y = geom::y_seam(geom::load_seam_csv(run.track(csv), sc));
  Output out;
  out.csv_name = "yseam.csv";
  out.report = quantity_line("Y_seam", y, "S/m");
  out.csv = quantity_csv({{"Y_seam", y, "S/m"}});
  return out;
}

Output geom_qinv(Run &run, const std::string &grid)
{
  const Quantity q = geom::q_inv_dielectric(geom::load_field_grid_csv(run.track(grid)));
  Output out;
  out.csv_name = "qinv.csv";
  out.report = quantity_line("Q^-1", q, "1");
  out.csv = quantity_csv({{"Q_inv", q, "1"}});
  return out;
}

Output geom_participation(Run &run, const std::string &grid)
{
  const auto ps = geom::participations(geom::load_field_grid_csv(run.track(grid)));
  Output out;
  out.csv_name = "participation.csv";
  std::ostringstream r;
  std::vector<std::tuple<std::string, Quantity, std::string>> rows;
  for (const auto &[region, p] : ps)
  {
    r << "p[" << region << "] = " << fmt(p.value) << '\n';
    rows.emplace_back("p_" + region, p, "1");
  }
  out.report = r.str();
  out.csv = quantity_csv(rows);
  return out;
}

// ---------------------------------------------------------------------------
// lab
// ---------------------------------------------------------------------------

struct SweepArgs
{
  std::size_t cells = 16;
  double size = 1e-6;
  std::string kernel = "edge";
  double k0 = 1.0;
  double lambda = 1e-7;
  std::vector<double> densities;
  std::vector<double> correlations = {0.0};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  double offspring = 10.0;
  double cluster_sigma = 0.0;
  bool at_max = false;
  std::string rho_mode = "true";
  unsigned threads = 1;
};

Output lab_sweep(const SweepArgs &a)
{
  lab::GridSpec grid;
  const double h = a.size / static_cast<double>(a.cells);
  grid.spacing = {h, h, h};
  grid.nx = grid.ny = grid.nz = a.cells;
  lab::KernelField k;
  if (a.kernel == "uniform")
    k = lab::uniform_kernel(grid, a.k0);
  else if (a.kernel == "edge")
    k = lab::edge_exponential_kernel(grid, a.k0, a.lambda);
  else
    throw DomainError("kernel must be uniform or edge");
  lab::SweepConfig cfg;
  cfg.densities = a.densities;
  cfg.correlations = a.correlations;
  cfg.seeds = a.seeds;
  cfg.offspring_mean = a.offspring;
  cfg.cluster_sigma = a.cluster_sigma;
  cfg.parents_at_kernel_max = a.at_max;
  cfg.threads = a.threads;
  if (a.rho_mode == "true")
    cfg.rho_mode = lab::RhoMode::True;
  else if (a.rho_mode == "estimated")
    cfg.rho_mode = lab::RhoMode::Estimated;
  else
    throw DomainError("rho-mode must be true or estimated");
  const auto rows = lab::dilution_sweep(k, cfg);
  Output out;
  out.csv_name = "sweep.csv";
  std::ostringstream c;
  lab::write_sweep_csv(c, rows);
  out.csv = c.str();
  std::ostringstream r;
  r << "grid " << a.cells << "^3 cells, edge " << fmt(a.size) << " m, kernel " << a.kernel << '\n';
  r << std::left << std::setw(14) << "density" << std::setw(13) << "correlation" << std::setw(8) << "seed"
    << std::setw(10) << "defects" << "rel_error\n";
  for (const auto &row : rows)
  {
    std::ostringstream d;
    d << std::setprecision(4) << row.density;
    r << std::setw(14) << d.str() << std::setw(13) << fmt(row.correlation) << std::setw(8) << row.seed
      << std::setw(10) << row.defect_count << std::setprecision(4) << row.rel_error << std::setprecision(6) << '\n';
  }
  out.report = r.str();
  return out;
}

// ---------------------------------------------------------------------------
// protocol
// ---------------------------------------------------------------------------

std::string utc_now()
{
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

Output protocol_predict(Run &run, const std::string &path, std::string committed_at)
{
  const protocol::DesignFile f = protocol::parse_design(run.read(path));
  if (committed_at.empty())
    committed_at = f.design.committed_at.empty() ? utc_now() : f.design.committed_at;
  const protocol::TwoByTwoDesign sealed = protocol::seal(f.design, committed_at);
  Output out;
  out.csv_name = "predictions.csv";
  out.report = protocol::serialize_design(sealed);
  std::ostringstream c;
  c << "cell,value,sigma,dimension\n# units: -,SI,SI,-\n";
  for (std::size_t i = 0; i < 4; ++i)
  {
    const Quantity &q = (*sealed.predictions)[i];
    c << protocol::kCellNames[i] << ',' << fmt(q.value) << ',' << fmt(q.sigma) << ',' << q.dim.str() << '\n';
  }
  out.csv = c.str();
  return out;
}

Output protocol_evaluate(Run &run, const std::string &design, const std::string &meas)
{
  const protocol::DesignFile f = protocol::parse_design(run.read(design));
  protocol::Cells cells;
  if (!meas.empty())
    cells = protocol::parse_measurements_csv(run.read(meas));
  else if (f.measurements)
    cells = *f.measurements;
  else
    throw DomainError("no measurements: pass a CSV or add a [measurements] section");
  const protocol::Verdict v = protocol::verdict(f.design, cells);
  Output out;
  out.csv_name = "verdict.csv";
  out.report = protocol::format_report(f.design, v);
  out.csv = protocol::verdict_csv(v);
  return out;
}

// ---------------------------------------------------------------------------
// budget
// ---------------------------------------------------------------------------

budget::BudgetSpec budget_spec(Run &run, const std::string &path, const std::string &preset, const std::string &t1)
{
  budget::BudgetSpec s;
  if (!path.empty())
    s = budget::parse_budget_spec(run.read(path));
  else if (preset.empty())
    throw DomainError("give a budget spec file or --preset; allocations are never implied");
  if (!preset.empty())
    s.fractions = budget::preset(preset);
  if (!t1.empty())
    s.t1_target = budget::parse_exact_time(t1);
  if (s.t1_target == Rational(0))
    throw DomainError("T1 target missing: use --t1 or t1_target in the budget file");
  return s;
}

Output budget_plan(const budget::BudgetSpec &s)
{
  const budget::BudgetResult r = budget::plan(s);
  Output out;
  out.csv_name = "budget.csv";
  out.report = budget::format_plan(r);
  out.csv = budget::limits_csv(r);
  return out;
}

Output budget_limits(const budget::BudgetSpec &s)
{
  const budget::BudgetResult r = budget::plan(s);
  bool any = false;
  for (const auto &l : r.limits)
    any = any || l.rho_limit.has_value();
  if (!any)
    throw DomainError("no channel has both [c] and [g] entries; nothing to invert");
  Output out;
  out.csv_name = "limits.csv";
  out.report = budget::format_plan(r);
  out.csv = budget::limits_csv(r);
  return out;
}

Output budget_feasibility(Run &run, budget::BudgetSpec s, const std::string &measured, double confidence)
{
  if (!measured.empty())
    for (const auto &[c, q] : budget::parse_measured_csv(run.read(measured)))
      s.measured[c] = q;
  if (confidence > 0.0)
    s.confidence = confidence;
  const budget::BudgetResult r = budget::plan(s);
  const budget::FeasibilityReport f = budget::feasibility(r, s.measured, s.confidence);
  Output out;
  out.csv_name = "feasibility.csv";
  out.report = budget::format_feasibility(r, f);
  out.csv = budget::limits_csv(r, &f);
  return out;
}

Output budget_sensitivity(Run &run, const std::string &path)
{
  const auto sweeps = budget::parse_sweeps_csv(run.read(path));
  Output out;
  out.csv_name = "sensitivity.csv";
  out.csv = budget::sensitivity_csv(sweeps);
  std::ostringstream r;
  for (const auto &s : sweeps)
  {
    const budget::SensitivityResult res = budget::sensitivity(s);
    r << channel_name(s.channel) << " / " << s.parameter << ": max |dG/dp| = " << fmt(res.max_abs_slope) << " "
      << res.slopes.front().dim.str() << " at p = " << fmt(s.samples[res.argmax].first) << '\n';
  }
  out.report = r.str();
  return out;
}

Output budget_conflicts(Run &run, const std::string &path)
{
  const auto m = budget::conflict_matrix(budget::parse_sweeps_csv(run.read(path)));
  Output out;
  out.csv_name = "conflicts.csv";
  out.report = budget::format_conflicts(m);
  out.csv = budget::conflicts_csv(m);
  return out;
}

// ---------------------------------------------------------------------------
// mds
// ---------------------------------------------------------------------------

std::string located(const std::string &path, const Diagnostic &d)
{
  return path + ":" + std::to_string(d.line) + ":" + std::to_string(d.column) + ": " + d.message;
}

Output mds_parse(Run &run, const std::string &path)
{
  const mds::ParseResult p = mds::parse(run.read(path));
  Output out;
  out.csv_name = "errors.csv";
  std::ostringstream r;
  std::ostringstream c;
  c << "line,column,message\n# units: 1,1,-\n";
  for (const auto &e : p.errors)
  {
    r << located(path, e) << '\n';
    c << e.line << ',' << e.column << ",\"" << e.message << "\"\n";
  }
  r << (p.ok() ? "ok" : std::to_string(p.errors.size()) + " error(s)") << ": " << p.doc.rho.size() << " rho, "
    << p.doc.g.size() << " g, " << p.doc.o.size() << " o records\n";
  out.report = r.str();
  out.csv = c.str();
  out.code = p.ok() ? kOk : kDomainError;
  return out;
}

Output mds_validate(Run &run, const std::string &path, const std::string &require)
{
  mds::Grade need = mds::Grade::Trend;
  if (require == "quantitative")
    need = mds::Grade::Quantitative;
  else if (require != "trend")
    throw DomainError("--require must be trend or quantitative");
  const mds::ParseResult p = mds::parse(run.read(path));
  Output out;
  out.csv_name = "validation.csv";
  std::ostringstream r;
  for (const auto &e : p.errors)
    r << located(path, e) << '\n';
  const mds::ValidationReport v = mds::validate(p.doc);
  r << mds::format_report(v);
  const bool pass = p.ok() && v.meets(need);
  r << "required: " << require << " -> " << (pass ? "met" : "not met") << '\n';
  out.report = r.str();
  std::ostringstream c;
  c << "line,column,rule,ceiling,channel,message\n# units: 1,1,-,-,-,-\n";
  for (const auto &d : v.deficiencies)
    c << d.line << ',' << d.column << ',' << d.rule << ',' << mds::to_string(d.ceiling) << ','
      << (d.channel ? std::string(channel_name(*d.channel)) : "") << ",\"" << d.message << "\"\n";
  out.csv = c.str();
  out.code = pass ? kOk : kDomainError;
  return out;
}

Output mds_fmt(Run &run, const std::string &path, bool check, bool write)
{
  const std::string text = run.read(path);
  const mds::ParseResult p = mds::parse(text);
  if (!p.ok())
  {
    std::string msg = "cannot format a document with syntax errors:";
    for (const auto &e : p.errors)
      msg += "\n  " + located(path, e);
    throw ParseError(msg);
  }
  Output out;
  out.csv_name = "canonical.mds";
  const std::string canon = mds::serialize(p.doc);
  if (check)
  {
    out.report = canon == text ? "canonical\n" : path + ": not in canonical form\n";
    out.code = canon == text ? kOk : kDomainError;
  }
  else if (write)
  {
    write_file(path, canon);
    out.report = "wrote " + path + " (sha256 " + sha256_hex(canon) + ")\n";
  }
  else
    out.report = canon;
  out.csv = "";
  return out;
}

// ---------------------------------------------------------------------------

void emit(const Output &o, const Run &run, bool csv, const std::string &out_dir, std::ostream &out)
{
  out << (csv && !o.csv.empty() ? o.csv : o.report);
  if (out_dir.empty())
    return;
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  nlohmann::ordered_json m;
  m["tool"] = "prescriptor";
  m["version"] = version();
  m["subcommand"] = run.subcommand;
  std::vector<std::string> args;
  for (std::size_t i = 0; i < run.args.size(); ++i)
  {
    if (run.args[i] == "--out")
      ++i;
    else if (run.args[i].rfind("--out=", 0) != 0)
      args.push_back(run.args[i]);
  }
  m["args"] = args;
  if (run.seed)
    m["seed"] = *run.seed;
  m["inputs"] = nlohmann::json::array();
  for (const auto &p : run.inputs)
    m["inputs"].push_back({{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
  m["outputs"] = nlohmann::json::array();
  auto put = [&](const std::string &name, const std::string &body) {
    write_file(dir / name, body);
    m["outputs"].push_back({{"path", name}, {"sha256", sha256_hex(body)}});
  };
  put("report.txt", o.report);
  if (!o.csv.empty())
    put(o.csv_name, o.csv);
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

template <class T>
std::vector<T> parse_list(const std::string &text)
{
  std::vector<T> out;
  for (const auto &item : split(text, ','))
  {
    const std::string t(trim(item));
    if (t.empty())
      continue;
    std::istringstream in(t);
    T v{};
    in >> v;
    if (!in || !in.eof())
      throw DomainError("bad list item '" + t + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Channel-wise decoherence prescriptor toolkit", "prescriptor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());
  app.set_config("--config", "", "TOML config file; command-line flags win");

  std::string out_dir;
  bool csv = false;
  std::uint64_t seed = 0;
  app.add_option("--out", out_dir, "Directory for report, CSV and manifest");
  app.add_flag("--csv", csv, "Print the CSV result instead of the text report");
  CLI::Option *seed_opt = app.add_option("--seed", seed, "Random seed");
  app.fallthrough();

  Run run;
  run.args = args;
  std::function<Output()> action;
  auto bind = [&](CLI::App *sub, std::string name, std::function<Output()> f) {
    sub->callback([&, name, f] {
      run.subcommand = name;
      action = f;
    });
  };

  // units
  auto *units = app.add_subcommand("units", "Dimensional checks")->require_subcommand(1);
  std::string channel;
  auto *u_check = units->add_subcommand("check", "Closure chain for one or all channels");
  u_check->add_option("--channel", channel, "Channel (I, II, III, IVa, IVb, V); default all");
  bind(u_check, "units check", [&] { return units_check(channel); });

  // stats
  auto *stats = app.add_subcommand("stats", "Microstructural statistics")->require_subcommand(1);
  std::string s_path;
  std::size_t resamples = 0;
  double confidence = 0.95;
  auto *s_mu2 = stats->add_subcommand("mu2", "Curvature second moment");
  s_mu2->add_option("trace", s_path, "Curvature CSV (s_m,kappa_per_m)")->required()->check(CLI::ExistingFile);
  s_mu2->add_option("--bootstrap", resamples, "Bootstrap resamples for sigma (0 = none)");
  bind(s_mu2, "stats mu2", [&] { return stats_mu2(run, s_path, resamples); });
  auto *s_rms = stats->add_subcommand("rms", "RMS roughness");
  s_rms->add_option("profile", s_path, "Height profile CSV")->required()->check(CLI::ExistingFile);
  bind(s_rms, "stats rms", [&] { return stats_rms(run, s_path); });
  auto *s_disc = stats->add_subcommand("discriminate", "mu2 versus R_rms discrimination");
  std::size_t disc_resamples = 2000;
  s_disc->add_option("series", s_path, "Split-series CSV")->required()->check(CLI::ExistingFile);
  s_disc->add_option("--confidence", confidence, "Two-sided confidence");
  s_disc->add_option("--resamples", disc_resamples, "Bootstrap resamples");
  bind(s_disc, "stats discriminate", [&] { return stats_discriminate(run, s_path, confidence, disc_resamples); });

  // geom
  auto *geo = app.add_subcommand("geom", "Geometry coupling functionals")->require_subcommand(1);
  std::string g_a;
  std::string g_b;
  bool open = false;
  double clearance = 1e-9;
  unsigned threads = 1;
  auto *g_phi = geo->add_subcommand("gphi", "Flux coupling G_Phi of a loop over a surface");
  g_phi->add_option("loop", g_a, "Loop CSV (x_m,y_m,z_m)")->required()->check(CLI::ExistingFile);
  g_phi->add_option("surface", g_b, "Surface patch CSV (x_m,y_m,z_m,area_m2)")->required()->check(CLI::ExistingFile);
  g_phi->add_flag("--open", open, "Treat the loop as an open polyline");
  g_phi->add_option("--clearance", clearance, "Singularity clearance in m");
  g_phi->add_option("--threads", threads, "Worker threads");
  bind(g_phi, "geom gphi", [&] { return geom_gphi(run, g_a, g_b, open, clearance, threads); });
  auto *g_y = geo->add_subcommand("yseam", "Seam admittance Y_seam");
  g_y->add_option("trace", g_a, "Seam current CSV (s_m,Js_A_per_m)")->required()->check(CLI::ExistingFile);
  g_y->add_option("scalars", g_b, "Sidecar with omega_rad_s and U_J")->required()->check(CLI::ExistingFile);
  bind(g_y, "geom yseam", [&] { return geom_yseam(run, g_a, g_b); });
  auto *g_q = geo->add_subcommand("qinv", "Dielectric Q^-1 of a field grid");
  g_q->add_option("grid", g_a, "Field grid CSV")->required()->check(CLI::ExistingFile);
  bind(g_q, "geom qinv", [&] { return geom_qinv(run, g_a); });
  auto *g_p = geo->add_subcommand("participation", "Electric participation per region");
  g_p->add_option("grid", g_a, "Field grid CSV")->required()->check(CLI::ExistingFile);
  bind(g_p, "geom participation", [&] { return geom_participation(run, g_a); });

  // lab
  auto *labc = app.add_subcommand("lab", "Separability laboratory")->require_subcommand(1);
  SweepArgs sw;
  std::string densities;
  std::string correlations = "0";
  std::string seeds = "1,2,3,4,5";
  auto *l_sweep = labc->add_subcommand("sweep", "Dilution and clustering sweep");
  l_sweep->add_option("--densities", densities, "Comma-separated defect densities, m^-3")->required();
  l_sweep->add_option("--correlations", correlations, "Comma-separated clustered fractions in [0,1]");
  l_sweep->add_option("--seeds", seeds, "Comma-separated seeds");
  l_sweep->add_option("--cells", sw.cells, "Cells per axis");
  l_sweep->add_option("--size", sw.size, "Cube edge, m");
  l_sweep->add_option("--kernel", sw.kernel, "uniform or edge");
  l_sweep->add_option("--k0", sw.k0, "Kernel amplitude");
  l_sweep->add_option("--lambda", sw.lambda, "Edge decay length, m");
  l_sweep->add_option("--offspring", sw.offspring, "Mean children per cluster");
  l_sweep->add_option("--cluster-sigma", sw.cluster_sigma, "Cluster spread, m");
  l_sweep->add_flag("--parents-at-max", sw.at_max, "Place cluster parents at the kernel maximum");
  l_sweep->add_option("--rho-mode", sw.rho_mode, "true or estimated");
  l_sweep->add_option("--threads", sw.threads, "Worker threads");
  bind(l_sweep, "lab sweep", [&] {
    sw.densities = parse_list<double>(densities);
    sw.correlations = parse_list<double>(correlations);
    sw.seeds = parse_list<std::uint64_t>(seeds);
    return lab_sweep(sw);
  });

  // protocol
  auto *proto = app.add_subcommand("protocol", "Pre-committed 2x2 protocol")->require_subcommand(1);
  std::string p_design;
  std::string p_meas;
  std::string committed_at;
  auto *p_pred = proto->add_subcommand("predict", "Compute and seal the four predictions");
  p_pred->add_option("design", p_design, "Design file")->required()->check(CLI::ExistingFile);
  p_pred->add_option("--committed-at", committed_at, "Commit timestamp (default: design value or now, UTC)");
  bind(p_pred, "protocol predict", [&] { return protocol_predict(run, p_design, committed_at); });
  auto *p_eval = proto->add_subcommand("evaluate", "Judge measurements against a sealed design");
  p_eval->add_option("design", p_design, "Sealed design file")->required()->check(CLI::ExistingFile);
  p_eval->add_option("measurements", p_meas, "CSV cell,value,sigma,unit")->check(CLI::ExistingFile);
  bind(p_eval, "protocol evaluate", [&] { return protocol_evaluate(run, p_design, p_meas); });

  // budget
  auto *bud = app.add_subcommand("budget", "Coherence budget inverse design")->require_subcommand(1);
  std::string b_spec;
  std::string b_preset;
  std::string b_t1;
  std::string b_meas;
  double b_conf = 0.0;
  auto spec_opts = [&](CLI::App *sub) {
    sub->add_option("spec", b_spec, "Budget spec file")->check(CLI::ExistingFile);
    sub->add_option("--preset", b_preset, "Named allocation preset (paper-b1, uniform)");
    sub->add_option("--t1", b_t1, "T1 target, e.g. 1ms");
  };
  auto *b_plan = bud->add_subcommand("plan", "Allowance table");
  spec_opts(b_plan);
  bind(b_plan, "budget plan", [&] { return budget_plan(budget_spec(run, b_spec, b_preset, b_t1)); });
  auto *b_lim = bud->add_subcommand("limits", "Back-calculated rho limits");
  spec_opts(b_lim);
  bind(b_lim, "budget limits", [&] { return budget_limits(budget_spec(run, b_spec, b_preset, b_t1)); });
  auto *b_feas = bud->add_subcommand("feasibility", "Go/no-go against measured rho");
  spec_opts(b_feas);
  b_feas->add_option("--measured", b_meas, "CSV channel,value,sigma,unit")->check(CLI::ExistingFile);
  b_feas->add_option("--confidence", b_conf, "One-sided confidence for rho + k sigma");
  bind(b_feas, "budget feasibility",
       [&] { return budget_feasibility(run, budget_spec(run, b_spec, b_preset, b_t1), b_meas, b_conf); });
  std::string b_sweeps;
  auto *b_sens = bud->add_subcommand("sensitivity", "dG/dp along parameter sweeps");
  b_sens->add_option("sweeps", b_sweeps, "Sweep CSV")->required()->check(CLI::ExistingFile);
  bind(b_sens, "budget sensitivity", [&] { return budget_sensitivity(run, b_sweeps); });
  auto *b_conf_cmd = bud->add_subcommand("conflicts", "Sign matrix of parameter effects");
  b_conf_cmd->add_option("sweeps", b_sweeps, "Sweep CSV")->required()->check(CLI::ExistingFile);
  bind(b_conf_cmd, "budget conflicts", [&] { return budget_conflicts(run, b_sweeps); });

  // mds
  auto *md = app.add_subcommand("mds", "Minimum-dataset documents")->require_subcommand(1);
  std::string m_path;
  std::string m_require = "trend";
  bool m_check = false;
  bool m_write = false;
  auto *m_parse = md->add_subcommand("parse", "Syntax check with located errors");
  m_parse->add_option("file", m_path, ".mds file")->required()->check(CLI::ExistingFile);
  bind(m_parse, "mds parse", [&] { return mds_parse(run, m_path); });
  auto *m_val = md->add_subcommand("validate", "Grade a document");
  m_val->add_option("file", m_path, ".mds file")->required()->check(CLI::ExistingFile);
  m_val->add_option("--require", m_require, "trend or quantitative");
  bind(m_val, "mds validate", [&] { return mds_validate(run, m_path, m_require); });
  auto *m_fmt = md->add_subcommand("fmt", "Canonical form");
  m_fmt->add_option("file", m_path, ".mds file")->required()->check(CLI::ExistingFile);
  m_fmt->add_flag("--check", m_check, "Exit 1 unless already canonical");
  m_fmt->add_flag("--write", m_write, "Rewrite the file in place");
  bind(m_fmt, "mds fmt", [&] { return mds_fmt(run, m_path, m_check, m_write); });

  for (std::size_t i = 0; i < args.size(); ++i)
  {
    const std::string &a = args[i];
    if (a == "--out" || a == "--seed" || a == "--config")
    {
      ++i;
      continue;
    }
    if (a.empty() || a[0] == '-')
      continue;
    if (app.get_subcommand_no_throw(a) == nullptr)
    {
      err << "unknown subcommand '" << a << "'\n" << app.help();
      return kUsageError;
    }
    break;
  }

  try
  {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  }
  catch (const CLI::CallForHelp &e)
  {
    return app.exit(e, out, err);
  }
  catch (const CLI::CallForAllHelp &e)
  {
    return app.exit(e, out, err);
  }
  catch (const CLI::CallForVersion &e)
  {
    return app.exit(e, out, err);
  }
  catch (const CLI::ParseError &e)
  {
    app.exit(e, out, err);
    err << app.help();
    return kUsageError;
  }

  if (!action)
  {
    err << app.help();
    return kUsageError;
  }
  if (*seed_opt)
    run.seed = seed;

  try
  {
    const Output o = action();
    emit(o, run, csv, out_dir, out);
    return o.code;
  }
  catch (const ProtocolViolation &e)
  {
    err << "protocol violation: " << e.what() << '\n';
    return kProtocolViolation;
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
}

}  // namespace prescriptor::cli
