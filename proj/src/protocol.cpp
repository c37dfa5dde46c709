// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/protocol.hpp"

#include "prescriptor/error.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/numeric.hpp"


#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace prescriptor::protocol
{

namespace
{

constexpr std::size_t kA = 0, kB = 1;

std::size_t cell(std::size_t row, std::size_t col) { return 2 * row + col; }

void check_design(const TwoByTwoDesign &d)
{
  if (!(d.epsilon > 0.0) || !std::isfinite(d.epsilon))
    throw DomainError("epsilon must be positive");
  if (!(d.confidence > 0.0 && d.confidence < 1.0))
    throw DomainError("confidence must lie in (0, 1)");
  const ClosureEntry &e = closure_entry(d.channel);
  const std::string ch(channel_name(d.channel));
  for (const auto &r : d.rho)
  {
    if (r.dim != e.rho.dim)
      throw DimensionError("rho for " + ch + " must be " + e.rho.dim.str() + ", got " + r.dim.str());
    if (!(r.value > 0.0))
      throw DomainError("rho values must be positive");
  }
  for (const auto &g : d.g)
  {
    if (g.dim != e.g.dim)
      throw DimensionError("G for " + ch + " must be " + e.g.dim.str() + ", got " + g.dim.str());
    if (!(g.value > 0.0))
      throw DomainError("G values must be positive");
  }
  if (d.c.dim != e.c_dim())
    throw DimensionError("C for " + ch + " must be " + e.c_dim().str() + ", got " + d.c.dim.str());
  if (!check_closure(e).pass)
    throw DimensionError("closure fails for channel " + ch);
}

std::string q_text(const Quantity &q)
{
  return format_double(q.value) + " " + format_double(q.sigma) + " " + q.dim.str();
}

std::string canonical_text(const TwoByTwoDesign &d, const Cells &pred)
{
  std::ostringstream o;
  o << "[design]\n"
    << "channel = " << channel_name(d.channel) << '\n'
    << "epsilon = " << format_double(d.epsilon) << '\n'
    << "confidence = " << format_double(d.confidence) << '\n'
    << "committed_at = " << d.committed_at << '\n'
    << "c = " << q_text(d.c) << '\n'
    << "\n[rho]\n"
    << "a = " << q_text(d.rho[0]) << '\n'
    << "b = " << q_text(d.rho[1]) << '\n'
    << "\n[g]\n"
    << "A = " << q_text(d.g[0]) << '\n'
    << "B = " << q_text(d.g[1]) << '\n'
    << "\n[predictions]\n";
  for (std::size_t i = 0; i < 4; ++i)
    o << kCellNames[i] << " = " << q_text(pred[i]) << '\n';
  return o.str();
}

double rel2(const Quantity &q)
{
  const double r = q.sigma / q.value;
  return r * r;
}

Residual make_residual(double measured_ratio, double predicted_ratio, double rel_var, double eps, double z_crit)
{
  Residual r;
  r.value = measured_ratio / predicted_ratio - 1.0;
  r.sigma = std::fabs(1.0 + r.value) * std::sqrt(rel_var);
  // Rounding floor: a few ulp of the ratio is not a resolved deviation.
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(r.value));
  const double s = std::hypot(r.sigma, floor);
  r.z = std::fabs(r.value) / s;
  r.magnitude_ok = std::fabs(r.value) <= eps;
  r.low_power = z_crit * r.sigma > eps;
  if (r.magnitude_ok && r.z <= z_crit)
    r.status = ResidualStatus::Pass;
  else if (r.z > z_crit)
    r.status = ResidualStatus::Fail;
  else
    r.status = ResidualStatus::Undecided;
  return r;
}

RatioTest summarize(std::array<Residual, 2> rs)
{
  RatioTest t;
  t.residuals = rs;
  for (const auto &r : rs)
  {
    t.failed = t.failed || r.status == ResidualStatus::Fail;
    t.low_power = t.low_power || r.low_power;
  }
  t.pass = rs[0].status == ResidualStatus::Pass && rs[1].status == ResidualStatus::Pass && !t.low_power;
  return t;
}

void check_measured(const TwoByTwoDesign &d, const Cells &m)
{
  const DimVector want = d.c.dim + d.rho[0].dim + d.g[0].dim;
  for (std::size_t i = 0; i < 4; ++i)
  {
    if (m[i].dim != want)
      throw DimensionError("measurement " + std::string(kCellNames[i]) + " must be " + want.str() + ", got " +
                           m[i].dim.str());
    if (m[i].value == 0.0)
      throw DomainError("measurement " + std::string(kCellNames[i]) + " is zero; ratio undefined");
  }
}

}  // namespace

Cells predict(const TwoByTwoDesign &design)
{
  check_design(design);
  Cells out;
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t n = 0; n < 2; ++n)
      out[cell(m, n)] = q_mul(design.c, q_mul(design.rho[m], design.g[n]));
  return out;
}

TwoByTwoDesign seal(TwoByTwoDesign design, std::string committed_at)
{
  if (committed_at.empty())
    throw DomainError("commit timestamp is required");
  if (committed_at.find('\n') != std::string::npos)
    throw DomainError("commit timestamp must be one line");
  design.committed_at = std::move(committed_at);
  design.predictions = predict(design);
  design.seal = seal_hash(design);
  return design;
}

std::string seal_hash(const TwoByTwoDesign &design)
{
  if (!design.predictions)
    throw ProtocolViolation("design has no committed predictions");
  return sha256_hex(canonical_text(design, *design.predictions));
}

void verify_seal(const TwoByTwoDesign &design)
{
  if (!design.sealed())
    throw ProtocolViolation("design is not sealed: commit predictions before entering measurements");
  if (seal_hash(design) != *design.seal)
    throw ProtocolViolation("seal mismatch: the design changed after predictions were committed");
  const Cells fresh = predict(design);
  for (std::size_t i = 0; i < 4; ++i)
    if (q_text(fresh[i]) != q_text((*design.predictions)[i]))
      throw ProtocolViolation("committed prediction " + std::string(kCellNames[i]) +
                              " does not follow from the committed inputs");
}

RatioTest row_ratio_test(const TwoByTwoDesign &design, const Cells &m)
{
  check_design(design);
  check_measured(design, m);
  const double zc = z_two_sided(design.confidence);
  const double pred = design.rho[1].value / design.rho[0].value;
  const double rho_var = rel2(design.rho[0]) + rel2(design.rho[1]);
  std::array<Residual, 2> rs;
  for (std::size_t n = 0; n < 2; ++n)
  {
    const Quantity &oa = m[cell(0, n)];
    const Quantity &ob = m[cell(1, n)];
    rs[n] = make_residual(ob.value / oa.value, pred, rel2(oa) + rel2(ob) + rho_var, design.epsilon, zc);
  }
  return summarize(rs);
}

RatioTest column_ratio_test(const TwoByTwoDesign &design, const Cells &m)
{
  check_design(design);
  check_measured(design, m);
  const double zc = z_two_sided(design.confidence);
  const double pred = design.g[kB].value / design.g[kA].value;
  const double g_var = rel2(design.g[0]) + rel2(design.g[1]);
  std::array<Residual, 2> rs;
  for (std::size_t r = 0; r < 2; ++r)
  {
    const Quantity &oA = m[cell(r, kA)];
    const Quantity &oB = m[cell(r, kB)];
    rs[r] = make_residual(oB.value / oA.value, pred, rel2(oA) + rel2(oB) + g_var, design.epsilon, zc);
  }
  return summarize(rs);
}

std::string Verdict::label() const
{
  switch (status)
  {
  case VerdictStatus::Supported:
    return "Supported";
  case VerdictStatus::Indeterminate:
    return "Indeterminate";
  case VerdictStatus::Falsified:
    break;
  }
  switch (axis)
  {
  case Axis::Row:
    return "Falsified(row)";
  case Axis::Column:
    return "Falsified(column)";
  case Axis::Both:
    return "Falsified(both)";
  case Axis::None:
    break;
  }
  return "Falsified";
}

Verdict verdict(const TwoByTwoDesign &design, const Cells &measured)
{
  verify_seal(design);
  Verdict v;
  v.z_crit = z_two_sided(design.confidence);
  v.row = row_ratio_test(design, measured);
  v.column = column_ratio_test(design, measured);
  if (v.row.failed || v.column.failed)
  {
    v.status = VerdictStatus::Falsified;
    v.axis = v.row.failed && v.column.failed ? Axis::Both : v.row.failed ? Axis::Row : Axis::Column;
  }
  else if (v.row.pass && v.column.pass)
    v.status = VerdictStatus::Supported;
  else
    v.status = VerdictStatus::Indeterminate;
  return v;
}

std::array<double, 4> mc_residual_sigmas(const TwoByTwoDesign &design, const Cells &m, std::size_t n,
                                         std::uint64_t seed)
{
  if (n < 2)
    throw DomainError("need at least 2 Monte-Carlo draws");
  check_design(design);
  check_measured(design, m);
  Rng rng(seed);
  std::array<std::vector<double>, 4> out;
  auto draw = [&](const Quantity &q) { return rng.normal(q.value, q.sigma); };
  for (std::size_t k = 0; k < n; ++k)
  {
    std::array<double, 4> o;
    for (std::size_t i = 0; i < 4; ++i)
      o[i] = draw(m[i]);
    const double ra = draw(design.rho[0]), rb = draw(design.rho[1]);
    const double gA = draw(design.g[0]), gB = draw(design.g[1]);
    for (std::size_t c = 0; c < 2; ++c)
      out[c].push_back((o[cell(1, c)] / o[cell(0, c)]) / (rb / ra) - 1.0);
    for (std::size_t r = 0; r < 2; ++r)
      out[2 + r].push_back((o[cell(r, kB)] / o[cell(r, kA)]) / (gB / gA) - 1.0);
  }
  return {sample_stddev(out[0]), sample_stddev(out[1]), sample_stddev(out[2]), sample_stddev(out[3])};
}

namespace
{

double parse_number(const TextEntry &e)
{
  const std::string &s = e.value;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError("'" + e.key + "' expects a number", e.line, e.value_column);
  return v;
}

Quantity parse_q(const TextEntry &e)
{
  try
  {
    return parse_quantity(e.value);
  }
  catch (const ParseError &err)
  {
    throw ParseError(err.what(), e.line, e.value_column);
  }
}

const TextSection &need_section(const SectionedText &t, std::string_view name)
{
  const TextSection *s = t.find(name);
  if (!s)
    throw ParseError("missing section [" + std::string(name) + "]");
  return *s;
}

const TextEntry &need_key(const TextSection &s, std::string_view key)
{
  const TextEntry *e = s.find(key);
  if (!e)
    throw ParseError("section [" + s.name + "] is missing '" + std::string(key) + "'", s.line, 1);
  return *e;
}

void reject_unknown(const TextSection &s, std::initializer_list<std::string_view> allowed)
{
  for (const auto &e : s.entries)
  {
    bool ok = false;
    for (auto a : allowed)
      ok = ok || e.key == a;
    if (!ok)
      throw ParseError("unknown key '" + e.key + "' in [" + s.name + "]", e.line, e.key_column);
  }
}

Cells parse_cells(const TextSection &s)
{
  reject_unknown(s, {"aA", "aB", "bA", "bB"});
  Cells c;
  for (std::size_t i = 0; i < 4; ++i)
    c[i] = parse_q(need_key(s, kCellNames[i]));
  return c;
}

}  // namespace

DesignFile parse_design(std::string_view text)
{
  const SectionedText t = parse_sectioned_strict(text);
  for (const auto &s : t.sections)
    if (s.name != "design" && s.name != "rho" && s.name != "g" && s.name != "predictions" && s.name != "seal" &&
        s.name != "measurements")
      throw ParseError("unknown section [" + s.name + "]", s.line, 1);

  DesignFile out;
  TwoByTwoDesign &d = out.design;
  const TextSection &ds = need_section(t, "design");
  reject_unknown(ds, {"channel", "epsilon", "confidence", "committed_at", "c"});
  const TextEntry &ch = need_key(ds, "channel");
  try
  {
    d.channel = parse_channel(ch.value);
  }
  catch (const ParseError &e)
  {
    throw ParseError(e.what(), ch.line, ch.value_column);
  }
  d.epsilon = parse_number(need_key(ds, "epsilon"));
  d.confidence = parse_number(need_key(ds, "confidence"));
  d.c = parse_q(need_key(ds, "c"));
  if (const TextEntry *e = ds.find("committed_at"))
    d.committed_at = e->value;

  const TextSection &rs = need_section(t, "rho");
  reject_unknown(rs, {"a", "b"});
  d.rho = {parse_q(need_key(rs, "a")), parse_q(need_key(rs, "b"))};
  const TextSection &gs = need_section(t, "g");
  reject_unknown(gs, {"A", "B"});
  d.g = {parse_q(need_key(gs, "A")), parse_q(need_key(gs, "B"))};

  if (const TextSection *p = t.find("predictions"))
    d.predictions = parse_cells(*p);
  if (const TextSection *s = t.find("seal"))
  {
    reject_unknown(*s, {"sha256"});
    d.seal = need_key(*s, "sha256").value;
  }
  if (const TextSection *m = t.find("measurements"))
    out.measurements = parse_cells(*m);
  return out;
}

std::string serialize_design(const TwoByTwoDesign &design, const std::optional<Cells> &measurements)
{
  std::string out;
  if (design.predictions)
    out = canonical_text(design, *design.predictions);
  else
  {
    // Unsealed: same layout without predictions.
    std::ostringstream o;
    o << "[design]\n"
      << "channel = " << channel_name(design.channel) << '\n'
      << "epsilon = " << format_double(design.epsilon) << '\n'
      << "confidence = " << format_double(design.confidence) << '\n';
    if (!design.committed_at.empty())
      o << "committed_at = " << design.committed_at << '\n';
    o << "c = " << q_text(design.c) << '\n'
      << "\n[rho]\na = " << q_text(design.rho[0]) << "\nb = " << q_text(design.rho[1]) << '\n'
      << "\n[g]\nA = " << q_text(design.g[0]) << "\nB = " << q_text(design.g[1]) << '\n';
    out = o.str();
  }
  if (design.seal)
    out += "\n[seal]\nsha256 = " + *design.seal + "\n";
  if (measurements)
  {
    out += "\n[measurements]\n";
    for (std::size_t i = 0; i < 4; ++i)
      out += std::string(kCellNames[i]) + " = " + q_text((*measurements)[i]) + "\n";
  }
  return out;
}

Cells parse_measurements_csv(std::string_view text)
{
  std::istringstream in{std::string(text)};
  const CsvTable t = read_csv(in, {{"cell", "value", "sigma", "unit"}});
  std::array<bool, 4> seen{};
  Cells c;
  for (const auto &r : t.rows)
  {
    std::size_t idx = 4;
    for (std::size_t i = 0; i < 4; ++i)
      if (r.text(0) == kCellNames[i])
        idx = i;
    if (idx == 4)
      throw ParseError("unknown cell '" + r.text(0) + "'", r.line, 1);
    if (seen[idx])
      throw ParseError("duplicate cell '" + r.text(0) + "'", r.line, 1);
    seen[idx] = true;
    Unit u;
    try
    {
      u = parse_unit(r.text(3));
    }
    catch (const ParseError &e)
    {
      throw ParseError(e.what(), r.line, 4);
    }
    const double sigma = r.number(2);
    if (sigma < 0.0)
      throw ParseError("sigma must be >= 0", r.line, 3);
    c[idx] = Quantity(r.number(1) * u.scale, sigma * u.scale, u.dim);
  }
  for (std::size_t i = 0; i < 4; ++i)
    if (!seen[i])
      throw ParseError("measurement for cell " + std::string(kCellNames[i]) + " missing");
  return c;
}

namespace
{

std::string_view status_text(ResidualStatus s)
{
  switch (s)
  {
  case ResidualStatus::Pass:
    return "pass";
  case ResidualStatus::Fail:
    return "fail";
  case ResidualStatus::Undecided:
    return "undecided";
  }
  return "?";
}

}  // namespace

std::string format_report(const TwoByTwoDesign &design, const Verdict &v)
{
  std::ostringstream o;
  o << "2x2 separability test, channel " << channel_name(design.channel) << '\n'
    << "committed_at: " << design.committed_at << '\n'
    << "seal: " << design.seal.value_or("(none)") << '\n'
    << "epsilon: " << format_double(design.epsilon) << "  confidence: " << format_double(design.confidence)
    << "  z_crit: " << format_double(v.z_crit) << '\n';
  auto block = [&](const char *title, const RatioTest &t, const char *l0, const char *l1) {
    o << title << '\n';
    const char *labels[2] = {l0, l1};
    for (std::size_t i = 0; i < 2; ++i)
    {
      const Residual &r = t.residuals[i];
      o << "  " << labels[i] << ": residual " << format_double(r.value) << " +- " << format_double(r.sigma)
        << "  z " << format_double(r.z) << "  " << status_text(r.status) << (r.low_power ? " (low power)" : "")
        << '\n';
    }
  };
  block("row test (O_b/O_a vs rho_b/rho_a):", v.row, "column A", "column B");
  block("column test (O_B/O_A vs G_B/G_A):", v.column, "row a", "row b");
  o << "verdict: " << v.label() << '\n';
  return o.str();
}

std::string verdict_csv(const Verdict &v)
{
  std::ostringstream o;
  o << "test,index,residual,sigma,z,status,low_power\n"
    << "# units: -,-,1,1,1,-,-\n";
  auto rows = [&](const char *name, const RatioTest &t, const char *i0, const char *i1) {
    const char *idx[2] = {i0, i1};
    for (std::size_t i = 0; i < 2; ++i)
    {
      const Residual &r = t.residuals[i];
      o << name << ',' << idx[i] << ',' << format_double(r.value) << ',' << format_double(r.sigma) << ','
        << format_double(r.z) << ',' << status_text(r.status) << ',' << (r.low_power ? 1 : 0) << '\n';
    }
  };
  rows("row", v.row, "A", "B");
  rows("column", v.column, "a", "b");
  o << "verdict,,,,," << v.label() << ",\n";
  return o.str();
}

}  // namespace prescriptor::protocol
