// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/budget.hpp"

#include "prescriptor/error.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace prescriptor::budget
{

namespace
{

constexpr std::array<ChannelId, 5> kBudgetOrder = {ChannelId::TLS, ChannelId::Spin, ChannelId::Seam,
                                                    ChannelId::QPEnv, ChannelId::Phonon};

int channel_rank(ChannelId c)
{
  switch (c)
  {
  case ChannelId::TLS:
    return 0;
  case ChannelId::Spin:
    return 1;
  case ChannelId::Seam:
    return 2;
  case ChannelId::QPTrap:
    return 3;
  case ChannelId::QPEnv:
    return 4;
  case ChannelId::Phonon:
    return 5;
  }
  return 6;
}

std::string_view roman(ChannelId c) { return channel_meta(c).roman; }

// Power-of-ten unit scales as exact rationals.
Rational exact_scale(double scale)
{
  for (int k = -15; k <= 9; ++k)
  {
    if (scale == std::pow(10.0, k))
    {
      Rational r(1);
      for (int i = 0; i < std::abs(k); ++i)
        r *= Rational(10);
      return k < 0 ? Rational(1) / r : r;
    }
  }
  throw ParseError("time unit must be a decimal multiple of s");
}

std::string fmt(double v) { return format_double(v); }

std::string brief(double v)
{
  std::ostringstream o;
  o << std::setprecision(6) << v;
  return o.str();
}

std::string cell(std::string s, std::size_t w)
{
  if (s.size() + 1 >= w)
    return s + "  ";
  s.resize(w, ' ');
  return s;
}

}  // namespace

std::map<ChannelId, Rational> preset(std::string_view name)
{
  if (name == "paper-b1")
    return {{ChannelId::TLS, Rational(2, 5)},
            {ChannelId::Spin, Rational(1, 5)},
            {ChannelId::Seam, Rational(1, 5)},
            {ChannelId::QPEnv, Rational(1, 10)},
            {ChannelId::Phonon, Rational(1, 10)}};
  if (name == "uniform")
  {
    std::map<ChannelId, Rational> m;
    for (auto c : kBudgetOrder)
      m[c] = Rational(1, 5);
    return m;
  }
  throw DomainError("unknown allocation preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"paper-b1", "uniform"}; }

Rational parse_exact_time(std::string_view text)
{
  text = trim(text);
  std::size_t split = 0;
  while (split < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.' || text[split] == '/' ||
          text[split] == '-' || text[split] == '+' ||
          ((text[split] == 'e' || text[split] == 'E') && split + 1 < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[split + 1])) || text[split + 1] == '-' ||
            text[split + 1] == '+'))))
    ++split;
  const std::string_view num = trim(text.substr(0, split));
  const std::string_view unit = trim(text.substr(split));
  if (num.empty() || unit.empty())
    throw ParseError("time '" + std::string(text) + "' needs '<value><unit>'");
  const Unit u = parse_unit(unit);
  if (u.dim != dims::time())
    throw DimensionError("time '" + std::string(text) + "' has dimension " + u.dim.str() + ", expected s");
  const Rational t = Rational::parse(num) * exact_scale(u.scale);
  if (t <= Rational(0))
    throw DomainError("T1 target must be > 0");
  return t;
}

Rational total_rate(const Rational &t1_target)
{
  if (t1_target <= Rational(0))
    throw DomainError("T1 target must be > 0");
  return Rational(1) / t1_target;
}

Quantity total_rate(const Quantity &t1_target)
{
  if (t1_target.dim != dims::time())
    throw DimensionError("T1 target has dimension " + t1_target.dim.str() + ", expected s");
  if (!(t1_target.value > 0.0))
    throw DomainError("T1 target must be > 0");
  return q_inv(t1_target);
}

AllowanceTable allowances(const BudgetSpec &spec)
{
  AllowanceTable t;
  t.gamma_total = total_rate(spec.t1_target);
  if (spec.fractions.empty())
    throw DomainError("budget has no channel allocations");
  std::vector<std::pair<ChannelId, Rational>> rows(spec.fractions.begin(), spec.fractions.end());
  std::sort(rows.begin(), rows.end(),
            [](const auto &a, const auto &b) { return channel_rank(a.first) < channel_rank(b.first); });
  Rational sum(0);
  for (const auto &[c, f] : rows)
  {
    if (f <= Rational(0))
      throw DomainError("allocation for " + std::string(channel_name(c)) + " must be > 0");
    sum += f;
    t.rows.push_back({c, f, f * t.gamma_total});
  }
  if (sum > Rational(1))
    throw DomainError("allocation fractions sum to " + sum.str() + " > 1");
  t.margin_fraction = Rational(1) - sum;
  t.margin_rate = t.margin_fraction * t.gamma_total;
  return t;
}

Quantity observable_allowance(ChannelId channel, const Quantity &rate, const ChannelCoupling &k)
{
  const ClosureEntry &e = closure_entry(channel);
  if (rate.dim != dims::rate())
    throw DimensionError("allowance has dimension " + rate.dim.str() + ", expected s^-1");
  const std::string name(channel_name(channel));
  if (e.observable.dim == dims::rate())
    return rate;
  if (k.bridge)
  {
    const Quantity o = rate * *k.bridge;
    if (o.dim != e.observable.dim)
      throw DimensionError(name + ": bridge gives " + o.dim.str() + ", observable needs " + e.observable.dim.str());
    return o;
  }
  if (channel_meta(channel).primary_observable == ObservableTag::RelaxationRate && k.omega)
  {
    if (k.omega->dim != dims::rate())
      throw DimensionError(name + ": omega has dimension " + k.omega->dim.str() + ", expected s^-1");
    if (!(k.omega->value > 0.0))
      throw DomainError(name + ": omega must be > 0");
    return rate / *k.omega;
  }
  if (channel_meta(channel).primary_observable == ObservableTag::RelaxationRate)
    throw DomainError(name + ": Q^-1 observable needs omega to convert the rate allowance");
  throw DomainError(name + ": observable " + e.observable.symbol + " needs an explicit bridge factor");
}

Quantity rho_limit(ChannelId channel, const Quantity &rate, const ChannelCoupling &k)
{
  const ClosureEntry &e = closure_entry(channel);
  const std::string name(channel_name(channel));
  if (!k.c || !k.g)
    throw DomainError(name + ": rho limit needs both c and g");
  if (k.c->dim != e.c_dim())
    throw DimensionError(name + ": c has dimension " + k.c->dim.str() + ", expected " + e.c_dim().str());
  if (k.g->dim != e.g.dim)
    throw DimensionError(name + ": g has dimension " + k.g->dim.str() + ", expected " + e.g.dim.str());
  if (!(k.c->value > 0.0) || !(k.g->value > 0.0))
    throw DomainError(name + ": c and g must be > 0");
  const Quantity o = observable_allowance(channel, rate, k);
  const Quantity lim = o / (*k.c * *k.g);
  if (lim.dim != e.rho.dim)
    throw DimensionError(name + ": limit has dimension " + lim.dim.str() + ", expected " + e.rho.dim.str());
  return lim;
}

BudgetResult plan(const BudgetSpec &spec)
{
  BudgetResult r;
  r.table = allowances(spec);
  r.gamma_total = total_rate(Quantity(spec.t1_target.to_double(), spec.t1_sigma, dims::time()));
  const double rel = spec.t1_sigma / spec.t1_target.to_double();
  for (const auto &a : r.table.rows)
  {
    LimitRow row{a.channel, a.fraction, a.rate, std::nullopt, std::nullopt, closure_entry(a.channel).rho.unit};
    auto it = spec.couplings.find(a.channel);
    if (it != spec.couplings.end() && it->second.c && it->second.g)
    {
      const double v = a.rate.to_double();
      const Quantity rate(v, std::abs(v) * rel, dims::rate());
      row.observable_allowance = observable_allowance(a.channel, rate, it->second);
      row.rho_limit = rho_limit(a.channel, rate, it->second);
    }
    r.limits.push_back(std::move(row));
  }
  return r;
}

FeasibilityReport feasibility(const BudgetResult &result, const std::map<ChannelId, Quantity> &measured,
                              double confidence)
{
  FeasibilityReport f;
  f.k = z_one_sided(confidence);
  bool any_fail = false;
  bool any_unknown = false;
  double worst = -1.0;
  for (const auto &l : result.limits)
  {
    FeasibilityRow row;
    row.channel = l.channel;
    auto it = measured.find(l.channel);
    if (it != measured.end() && l.rho_limit)
    {
      const Quantity &m = it->second;
      if (m.dim != l.rho_limit->dim)
        throw DimensionError(std::string(channel_name(l.channel)) + ": measured rho has dimension " + m.dim.str() +
                             ", expected " + l.rho_limit->dim.str());
      const double upper = m.value + f.k * m.sigma;
      const double limit = l.rho_limit->value;
      row.upper = upper;
      row.utilization = upper / limit;
      row.margin = 1.0 - upper / limit;
      row.status = upper <= limit ? ChannelStatus::Pass : ChannelStatus::Fail;
      row.diminishing_returns = upper < 0.1 * limit;
      if (*row.utilization > worst)
      {
        worst = *row.utilization;
        f.binding = l.channel;
      }
    }
    any_fail = any_fail || row.status == ChannelStatus::Fail;
    any_unknown = any_unknown || row.status == ChannelStatus::Unknown;
    f.rows.push_back(row);
  }
  f.overall = any_fail ? Overall::NoGo : any_unknown ? Overall::Incomplete : Overall::Go;
  return f;
}

std::string_view to_string(ChannelStatus s)
{
  switch (s)
  {
  case ChannelStatus::Pass:
    return "PASS";
  case ChannelStatus::Fail:
    return "FAIL";
  case ChannelStatus::Unknown:
    return "UNKNOWN";
  }
  return "?";
}

std::string_view to_string(Overall o)
{
  switch (o)
  {
  case Overall::Go:
    return "GO";
  case Overall::NoGo:
    return "NO-GO";
  case Overall::Incomplete:
    return "INCOMPLETE";
  }
  return "?";
}

namespace
{

void check_sweep(const SensitivitySweep &s)
{
  const std::string where = std::string(channel_name(s.channel)) + "/" + s.parameter;
  if (s.samples.size() < 2)
    throw DomainError(where + ": sensitivity needs at least 2 samples");
  const bool increasing = s.samples[1].first > s.samples[0].first;
  for (std::size_t i = 1; i < s.samples.size(); ++i)
  {
    const double d = s.samples[i].first - s.samples[i - 1].first;
    if (d == 0.0)
      throw DomainError(where + ": duplicate parameter value " + fmt(s.samples[i].first));
    if ((d > 0.0) != increasing)
      throw DomainError(where + ": parameter values must be monotone");
  }
  for (const auto &[p, g] : s.samples)
  {
    if (!std::isfinite(p) || !std::isfinite(g.value))
      throw DomainError(where + ": non-finite sample");
    if (g.dim != s.samples.front().second.dim)
      throw DimensionError(where + ": mixed G dimensions");
  }
}

}  // namespace

SensitivityResult sensitivity(const SensitivitySweep &s)
{
  check_sweep(s);
  const auto &x = s.samples;
  const std::size_t n = x.size();
  const DimVector dim = x.front().second.dim - s.p_dim;
  SensitivityResult r;
  auto linear = [&](std::initializer_list<std::pair<std::size_t, double>> terms) {
    double v = 0.0;
    double var = 0.0;
    for (const auto &[i, w] : terms)
    {
      v += w * x[i].second.value;
      var += w * w * x[i].second.sigma * x[i].second.sigma;
    }
    return Quantity(v, std::sqrt(var), dim);
  };
  for (std::size_t i = 0; i < n; ++i)
  {
    if (i == 0 || i + 1 == n || n == 2)
    {
      const std::size_t a = i + 1 == n ? i - 1 : i;
      const double h = x[a + 1].first - x[a].first;
      r.slopes.push_back(linear({{a, -1.0 / h}, {a + 1, 1.0 / h}}));
    }
    else
    {
      const double hm = x[i].first - x[i - 1].first;
      const double hp = x[i + 1].first - x[i].first;
      const double den = hm * hp * (hm + hp);
      r.slopes.push_back(linear({{i - 1, -hp * hp / den}, {i, (hp * hp - hm * hm) / den}, {i + 1, hm * hm / den}}));
    }
    if (std::abs(r.slopes.back().value) > r.max_abs_slope)
    {
      r.max_abs_slope = std::abs(r.slopes.back().value);
      r.argmax = i;
    }
  }
  return r;
}

ConflictMatrix conflict_matrix(const std::vector<SensitivitySweep> &sweeps)
{
  ConflictMatrix m;
  std::set<ChannelId> chans;
  for (const auto &s : sweeps)
  {
    check_sweep(s);
    chans.insert(s.channel);
    auto row = std::find_if(m.rows.begin(), m.rows.end(), [&](const auto &r) { return r.parameter == s.parameter; });
    if (row == m.rows.end())
    {
      m.rows.push_back({s.parameter, {}, {}});
      row = std::prev(m.rows.end());
    }
    if (row->cells.count(s.channel))
      throw DomainError("duplicate sweep for " + std::string(channel_name(s.channel)) + "/" + s.parameter);
    const auto &f = s.samples.front();
    const auto &b = s.samples.back();
    const double range = b.first - f.first;
    const double slope = (b.second.value - f.second.value) / range;
    double gref = 0.0;
    for (const auto &[p, g] : s.samples)
      gref = std::max(gref, std::abs(g.value));
    ConflictCell cell{0, slope};
    if (gref > 0.0 && std::abs(slope * range / gref) >= kDeadBand)
      cell.sign = slope > 0.0 ? 1 : -1;
    row->cells[s.channel] = cell;
  }
  m.channels.assign(chans.begin(), chans.end());
  std::sort(m.channels.begin(), m.channels.end(),
            [](ChannelId a, ChannelId b) { return channel_rank(a) < channel_rank(b); });
  for (auto &row : m.rows)
  {
    std::optional<ChannelId> up;
    std::optional<ChannelId> down;
    for (auto c : m.channels)
    {
      auto it = row.cells.find(c);
      if (it == row.cells.end())
        continue;
      if (it->second.sign > 0 && !up)
        up = c;
      if (it->second.sign < 0 && !down)
        down = c;
    }
    if (up && down)
      row.label = "Trade-off (" + std::string(roman(*up)) + " vs " + std::string(roman(*down)) + ")";
    else if (!up && !down)
      row.label = "Favorable/neutral";
    else
      row.label = "No conflict";
  }
  return m;
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

namespace
{

ParseError at(const TextEntry &e, const std::string &what) { return ParseError(what, e.line, e.value_column); }

Quantity entry_quantity(const TextEntry &e)
{
  try
  {
    return parse_quantity(e.value);
  }
  catch (const ParseError &err)
  {
    throw at(e, err.what());
  }
}

ChannelId entry_channel(const TextEntry &e)
{
  auto c = find_channel(e.key);
  if (!c)
    throw ParseError("unknown channel '" + e.key + "'", e.line, e.key_column);
  return *c;
}

}  // namespace

BudgetSpec parse_budget_spec(std::string_view text)
{
  const SectionedText t = parse_sectioned_strict(text);
  static const std::set<std::string> known = {"budget", "allocation", "c", "g", "omega", "bridge", "measured"};
  for (const auto &s : t.sections)
    if (!known.count(s.name))
      throw ParseError("unknown section [" + s.name + "]", s.line, 1);

  BudgetSpec spec;
  const TextSection *b = t.find("budget");
  if (!b)
    throw ParseError("missing section [budget]");
  const TextEntry *t1 = nullptr;
  const TextEntry *pre = nullptr;
  for (const auto &e : b->entries)
  {
    if (e.key == "t1_target")
      t1 = &e;
    else if (e.key == "preset")
      pre = &e;
    else if (e.key == "t1_sigma")
    {
      const Quantity q = entry_quantity(e);
      if (q.dim != dims::time())
        throw at(e, "t1_sigma must be a time");
      spec.t1_sigma = q.value;
    }
    else if (e.key == "confidence")
    {
      double v = 0.0;
      auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
      if (ec != std::errc() || p != e.value.data() + e.value.size() || !(v > 0.0 && v < 1.0))
        throw at(e, "confidence must be a number in (0, 1)");
      spec.confidence = v;
    }
    else
      throw ParseError("unknown key '" + e.key + "' in [budget]", e.line, e.key_column);
  }
  if (!t1)
    throw ParseError("section [budget] is missing 't1_target'", b->line, 1);
  try
  {
    spec.t1_target = parse_exact_time(t1->value);
  }
  catch (const DomainError &err)
  {
    throw at(*t1, err.what());
  }

  const TextSection *alloc = t.find("allocation");
  if (pre && alloc)
    throw ParseError("give either preset or [allocation], not both", alloc->line, 1);
  if (pre)
  {
    try
    {
      spec.fractions = preset(pre->value);
    }
    catch (const DomainError &err)
    {
      throw at(*pre, err.what());
    }
  }
  else if (alloc)
  {
    for (const auto &e : alloc->entries)
    {
      const ChannelId c = entry_channel(e);
      if (spec.fractions.count(c))
        throw ParseError("duplicate allocation for '" + e.key + "'", e.line, e.key_column);
      try
      {
        spec.fractions[c] = Rational::parse(e.value);
      }
      catch (const std::exception &err)
      {
        throw at(e, std::string("allocation: ") + err.what());
      }
    }
  }
  else
    throw ParseError("budget needs a preset or an [allocation] section");

  auto load = [&](std::string_view section, std::optional<Quantity> ChannelCoupling::*field) {
    if (const TextSection *s = t.find(section))
      for (const auto &e : s->entries)
        spec.couplings[entry_channel(e)].*field = entry_quantity(e);
  };
  load("c", &ChannelCoupling::c);
  load("g", &ChannelCoupling::g);
  load("omega", &ChannelCoupling::omega);
  load("bridge", &ChannelCoupling::bridge);
  if (const TextSection *s = t.find("measured"))
    for (const auto &e : s->entries)
      spec.measured[entry_channel(e)] = entry_quantity(e);
  return spec;
}

std::vector<SensitivitySweep> parse_sweeps_csv(std::string_view text)
{
  std::istringstream in{std::string(text)};
  const CsvTable t = read_csv(in, {{"channel", "parameter", "p", "p_unit", "g", "g_sigma", "g_unit"}});
  std::vector<SensitivitySweep> out;
  for (const auto &r : t.rows)
  {
    auto c = find_channel(r.text(0));
    if (!c)
      throw ParseError("unknown channel '" + r.text(0) + "'", r.line, 1);
    Unit pu;
    Unit gu;
    try
    {
      pu = parse_unit(r.text(3));
    }
    catch (const ParseError &e)
    {
      throw ParseError(e.what(), r.line, 4);
    }
    try
    {
      gu = parse_unit(r.text(6));
    }
    catch (const ParseError &e)
    {
      throw ParseError(e.what(), r.line, 7);
    }
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const auto &s) { return s.channel == *c && s.parameter == r.text(1); });
    if (it == out.end())
    {
      out.push_back({*c, r.text(1), pu.dim, {}});
      it = std::prev(out.end());
    }
    else if (it->p_dim != pu.dim)
      throw ParseError("parameter unit changes within a sweep", r.line, 4);
    const double sigma = r.number(5);
    if (sigma < 0.0)
      throw ParseError("g_sigma must be >= 0", r.line, 6);
    it->samples.emplace_back(r.number(2) * pu.scale, Quantity(r.number(4) * gu.scale, sigma * gu.scale, gu.dim));
  }
  return out;
}

std::map<ChannelId, Quantity> parse_measured_csv(std::string_view text)
{
  std::istringstream in{std::string(text)};
  const CsvTable t = read_csv(in, {{"channel", "value", "sigma", "unit"}});
  std::map<ChannelId, Quantity> out;
  for (const auto &r : t.rows)
  {
    auto c = find_channel(r.text(0));
    if (!c)
      throw ParseError("unknown channel '" + r.text(0) + "'", r.line, 1);
    if (out.count(*c))
      throw ParseError("duplicate channel '" + r.text(0) + "'", r.line, 1);
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
    out[*c] = Quantity(r.number(1) * u.scale, sigma * u.scale, u.dim);
  }
  return out;
}

std::string decimal(const Rational &r)
{
  std::int64_t den = r.den();
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0)
  {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0)
  {
    den /= 5;
    ++fives;
  }
  if (den != 1 || std::max(twos, fives) > 18)
    return fmt(r.to_double());
  const int digits = std::max(twos, fives);
  // Scale to an integer over 10^digits.
  Rational scaled = r;
  std::int64_t pow10 = 1;
  for (int i = 0; i < digits; ++i)
  {
    scaled *= Rational(10);
    pow10 *= 10;
  }
  const std::int64_t n = scaled.num();
  const bool neg = n < 0;
  const std::uint64_t a = neg ? static_cast<std::uint64_t>(-(n + 1)) + 1 : static_cast<std::uint64_t>(n);
  std::string out = std::to_string(a / static_cast<std::uint64_t>(pow10));
  if (digits > 0)
  {
    std::string frac = std::to_string(a % static_cast<std::uint64_t>(pow10));
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0')
      frac.pop_back();
    if (!frac.empty())
      out += "." + frac;
  }
  return neg ? "-" + out : out;
}

std::string limits_csv(const BudgetResult &r, const FeasibilityReport *f)
{
  std::ostringstream o;
  o << "channel,allowance_per_s,rho_limit,limit_unit,margin\n";
  o << "# units: -,s^-1,limit_unit,-,1\n";
  for (std::size_t i = 0; i < r.limits.size(); ++i)
  {
    const auto &l = r.limits[i];
    o << channel_name(l.channel) << ',' << decimal(l.rate) << ',';
    if (l.rho_limit)
      o << fmt(l.rho_limit->value);
    o << ',' << l.limit_unit << ',';
    if (f && f->rows.at(i).margin)
      o << fmt(*f->rows[i].margin);
    o << '\n';
  }
  o << "margin," << decimal(r.table.margin_rate) << ",,," << decimal(r.table.margin_fraction) << '\n';
  return o.str();
}

std::string format_plan(const BudgetResult &r)
{
  std::ostringstream o;
  o << "Gamma_total: " << decimal(r.table.gamma_total) << " s^-1";
  if (r.gamma_total.sigma > 0.0)
    o << " +/- " << fmt(r.gamma_total.sigma);
  o << " (T1 target " << decimal(Rational(1) / r.table.gamma_total) << " s)\n\n";
  o << std::left << std::setw(12) << "channel" << std::setw(10) << "fraction" << std::setw(18) << "allowance [s^-1]"
    << "rho limit\n";
  for (const auto &l : r.limits)
  {
    o << std::setw(12) << channel_name(l.channel) << std::setw(10) << decimal(l.fraction) << std::setw(18)
      << decimal(l.rate);
    if (l.rho_limit)
      o << brief(l.rho_limit->value) << " " << l.limit_unit;
    else
      o << "-";
    o << '\n';
  }
  o << std::setw(12) << "margin" << std::setw(10) << decimal(r.table.margin_fraction) << std::setw(18)
    << decimal(r.table.margin_rate) << "-\n";
  return o.str();
}

std::string format_feasibility(const BudgetResult &r, const FeasibilityReport &f)
{
  std::ostringstream o;
  o << "k (one-sided): " << brief(f.k) << "\n\n";
  o << std::left << std::setw(12) << "channel" << std::setw(10) << "status" << std::setw(16) << "rho+k*sigma"
    << std::setw(16) << "limit" << "margin\n";
  for (std::size_t i = 0; i < f.rows.size(); ++i)
  {
    const auto &row = f.rows[i];
    const auto &l = r.limits.at(i);
    o << cell(std::string(channel_name(row.channel)), 12) << cell(std::string(to_string(row.status)), 10)
      << cell(row.upper ? brief(*row.upper) : "-", 16) << cell(l.rho_limit ? brief(l.rho_limit->value) : "-", 16)
      << (row.margin ? brief(*row.margin) : "-");
    if (row.diminishing_returns)
      o << "  (well below limit: further reduction has diminishing returns)";
    o << '\n';
  }
  if (f.binding)
    o << "\nbinding channel: " << channel_name(*f.binding) << '\n';
  o << "overall: " << to_string(f.overall) << '\n';
  return o.str();
}

std::string format_conflicts(const ConflictMatrix &m)
{
  std::ostringstream o;
  o << std::left << std::setw(24) << "parameter";
  for (auto c : m.channels)
    o << std::setw(6) << roman(c);
  o << "assessment\n";
  for (const auto &row : m.rows)
  {
    o << std::setw(24) << row.parameter;
    for (auto c : m.channels)
    {
      auto it = row.cells.find(c);
      const char *s = it == row.cells.end() ? "." : it->second.sign > 0 ? "+" : it->second.sign < 0 ? "-" : "0";
      o << std::setw(6) << s;
    }
    o << row.label << '\n';
  }
  return o.str();
}

std::string conflicts_csv(const ConflictMatrix &m)
{
  std::ostringstream o;
  o << "parameter";
  for (auto c : m.channels)
    o << ',' << roman(c);
  o << ",assessment\n# units: -";
  for (std::size_t i = 0; i < m.channels.size(); ++i)
    o << ",sign";
  o << ",-\n";
  for (const auto &row : m.rows)
  {
    o << row.parameter;
    for (auto c : m.channels)
    {
      auto it = row.cells.find(c);
      o << ',' << (it == row.cells.end() ? "" : it->second.sign > 0 ? "+" : it->second.sign < 0 ? "-" : "0");
    }
    o << ',' << row.label << '\n';
  }
  return o.str();
}

std::string sensitivity_csv(const std::vector<SensitivitySweep> &sweeps)
{
  std::ostringstream o;
  o << "channel,parameter,p,g,dg_dp,dg_dp_sigma\n";
  o << "# units: -,-,SI,SI,SI,SI\n";
  for (const auto &s : sweeps)
  {
    const SensitivityResult r = sensitivity(s);
    for (std::size_t i = 0; i < s.samples.size(); ++i)
      o << channel_name(s.channel) << ',' << s.parameter << ',' << fmt(s.samples[i].first) << ','
        << fmt(s.samples[i].second.value) << ',' << fmt(r.slopes[i].value) << ',' << fmt(r.slopes[i].sigma) << '\n';
  }
  return o.str();
}

}  // namespace prescriptor::budget
