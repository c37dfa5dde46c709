// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/budget.hpp"
#include "prescriptor/channels.hpp"
#include "prescriptor/cli.hpp"
#include "prescriptor/error.hpp"
#include "prescriptor/geometry.hpp"
#include "prescriptor/mds.hpp"
#include "prescriptor/microstructure.hpp"
#include "prescriptor/protocol.hpp"
#include "prescriptor/separability.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace prescriptor;

namespace
{

py::object fraction(const Rational &r)
{
  static py::object cls = py::module_::import("fractions").attr("Fraction");
  return cls(r.num(), r.den());
}

py::tuple value_sigma(const Quantity &q) { return py::make_tuple(q.value, q.sigma); }

ChannelId channel(const std::string &text)
{
  const auto id = find_channel(text);
  if (!id)
    throw DomainError("unknown channel '" + text + "'");
  return *id;
}

stats::CurvatureTrace trace(const std::vector<double> &s, const std::vector<double> &kappa)
{
  if (s.size() != kappa.size())
    throw DomainError("s and kappa differ in length");
  std::vector<stats::CurvatureSample> v;
  for (std::size_t i = 0; i < s.size(); ++i)
    v.push_back({s[i], kappa[i]});
  return stats::CurvatureTrace(v);
}

py::dict closure(const std::string &name)
{
  const ClosureReport r = check_closure(channel(name));
  py::dict d;
  d["channel"] = std::string(channel_name(channel(name)));
  d["pass"] = r.pass;
  d["residual"] = r.residual.str();
  d["chain"] = r.chain;
  return d;
}

py::dict budget_plan(const std::string &preset, const std::string &t1)
{
  budget::BudgetSpec s;
  s.t1_target = budget::parse_exact_time(t1);
  s.fractions = budget::preset(preset);
  const budget::AllowanceTable t = budget::allowances(s);
  py::dict rows;
  for (const auto &row : t.rows)
    rows[py::str(std::string(channel_name(row.channel)))] = fraction(row.rate);
  py::dict d;
  d["gamma_total"] = fraction(t.gamma_total);
  d["allowances"] = rows;
  d["margin"] = fraction(t.margin_rate);
  return d;
}

double q_inv_cells(const std::vector<std::tuple<double, double, double, double, std::string>> &cells)
{
  std::vector<geom::FieldCell> v;
  for (const auto &[eps, e2, tan, vol, region] : cells)
    v.push_back({eps, e2, tan, vol, region});
  return geom::q_inv_dielectric(geom::FieldGrid(v)).value;
}

std::tuple<double, double, double> biot_savart(const std::vector<std::array<double, 3>> &vertices,
                                               std::array<double, 3> point, bool closed)
{
  std::vector<geom::Vec3> v;
  for (const auto &p : vertices)
    v.push_back({p[0], p[1], p[2]});
  const geom::Vec3 b = geom::biot_savart(geom::LoopPolyline(v, closed), {point[0], point[1], point[2]});
  return {b.x, b.y, b.z};
}

double factorization_error(std::size_t n, double spacing, double k0, double lambda, double rho)
{
  lab::GridSpec g;
  g.spacing = {spacing, spacing, spacing};
  g.nx = g.ny = g.nz = n;
  const lab::KernelField k = lab::edge_exponential_kernel(g, k0, lambda);
  const double exact = lab::kernel_observable(lab::uniform_density(g, rho), k).value;
  const double f = lab::factorized(Quantity::dimensionless(rho), Quantity::dimensionless(k.integral()),
                                   Quantity::dimensionless(1.0))
                       .value;
  return std::fabs(f - exact) / std::fabs(exact);
}

std::string protocol_verdict(const std::string &design, const std::string &measurements_csv)
{
  const protocol::DesignFile f = protocol::parse_design(design);
  return protocol::verdict(f.design, protocol::parse_measurements_csv(measurements_csv)).label();
}

std::string protocol_seal(const std::string &design, const std::string &committed_at)
{
  return protocol::serialize_design(protocol::seal(protocol::parse_design(design).design, committed_at));
}

py::dict mds_validate(const std::string &text)
{
  const mds::ParseResult p = mds::parse(text);
  const mds::ValidationReport r = mds::validate(p.doc);
  py::list errors;
  for (const auto &e : p.errors)
    errors.append(py::make_tuple(e.line, e.column, e.message));
  py::list defs;
  for (const auto &d : r.deficiencies)
    defs.append(py::make_tuple(d.line, d.rule, std::string(mds::to_string(d.ceiling)), d.message));
  py::dict d;
  d["grade"] = std::string(mds::to_string(r.grade));
  d["errors"] = errors;
  d["deficiencies"] = defs;
  return d;
}

std::string mds_format(const std::string &text)
{
  const mds::ParseResult p = mds::parse(text);
  if (!p.ok())
    throw ParseError(p.errors.front().message, p.errors.front().line, p.errors.front().column);
  return mds::serialize(p.doc);
}

py::tuple run_cli(const std::vector<std::string> &args)
{
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Native core of the prescriptor toolkit";
  m.attr("__version__") = cli::version();

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ProtocolViolation>(m, "ProtocolViolation", PyExc_RuntimeError);

  m.def("check_closure", &closure, py::arg("channel"));
  m.def("budget_plan", &budget_plan, py::arg("preset"), py::arg("t1"));
  m.def(
      "mu2",
      [](const std::vector<double> &s, const std::vector<double> &k) { return value_sigma(stats::mu2(trace(s, k))); },
      py::arg("s"), py::arg("kappa"));
  m.def(
      "mu2_bootstrap",
      [](const std::vector<double> &s, const std::vector<double> &k, std::size_t n, std::uint64_t seed) {
        return value_sigma(stats::mu2_bootstrap(trace(s, k), n, seed));
      },
      py::arg("s"), py::arg("kappa"), py::arg("n_resamples") = 2000, py::arg("seed") = 1);
  m.def("q_inv_dielectric", &q_inv_cells, py::arg("cells"));
  m.def("biot_savart", &biot_savart, py::arg("vertices"), py::arg("point"), py::arg("closed") = true);
  m.def("factorization_error", &factorization_error, py::arg("n"), py::arg("spacing"), py::arg("k0"),
        py::arg("lambda_"), py::arg("rho"));
  m.def("protocol_seal", &protocol_seal, py::arg("design"), py::arg("committed_at"));
  m.def("protocol_verdict", &protocol_verdict, py::arg("design"), py::arg("measurements_csv"));
  m.def("mds_validate", &mds_validate, py::arg("text"));
  m.def("mds_format", &mds_format, py::arg("text"));
  m.def("run_cli", &run_cli, py::arg("args"));
}
