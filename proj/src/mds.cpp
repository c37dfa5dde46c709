// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/mds.hpp"

#include "prescriptor/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace prescriptor::mds
{

std::string_view to_string(Protocol p)
{
  switch (p)
  {
  case Protocol::Ramsey:
    return "ramsey";
  case Protocol::Echo:
    return "echo";
  case Protocol::T1Window:
    return "t1-window";
  case Protocol::ParityMonitor:
    return "parity-monitor";
  }
  return "?";
}

std::string_view to_string(Grade g)
{
  switch (g)
  {
  case Grade::Insufficient:
    return "insufficient";
  case Grade::Trend:
    return "trend";
  case Grade::Quantitative:
    return "quantitative";
  }
  return "?";
}

std::string Deficiency::str() const
{
  std::string s = std::to_string(line) + ":" + std::to_string(column) + ": [" + rule + "] " + message;
  if (channel)
    s += " (channel " + std::string(channel_name(*channel)) + ")";
  return s;
}

namespace
{

struct Token
{
  std::string_view text;
  int column = 0;  // 1-based
};

std::vector<Token> tokens(std::string_view s, int base_column)
{
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size())
  {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
      ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t')
      ++i;
    if (i > b)
      out.push_back({s.substr(b, i - b), base_column + static_cast<int>(b)});
  }
  return out;
}

std::optional<double> number(std::string_view s)
{
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

bool valid_key(std::string_view k)
{
  if (k.empty())
    return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':';
  });
}

int column_of(std::string_view line, std::string_view part)
{
  return static_cast<int>(part.data() - line.data()) + 1;
}

enum class Sec
{
  None,
  Rho,
  G,
  O,
};

const std::map<std::string_view, std::vector<std::string_view>> &meta_keys()
{
  static const std::map<std::string_view, std::vector<std::string_view>> m = {
      {"rho", {"channel", "statistic", "method", "witness"}},
      {"g", {"channel", "mode_volume", "boundary", "solver"}},
      {"o", {"channel", "observable", "protocol", "window", "spectral", "parity"}},
  };
  return m;
}

struct MetaField
{
  std::string value;
  int column = 0;
};

class Parser
{
public:
  explicit Parser(std::string_view text) : text_(text) {}

  ParseResult run()
  {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text_.size())
    {
      std::size_t nl = text_.find('\n', pos);
      if (nl == std::string_view::npos)
        nl = text_.size();
      ++line_no;
      std::string_view raw = text_.substr(pos, nl - pos);
      if (!raw.empty() && raw.back() == '\r')
        raw.remove_suffix(1);
      line(raw, line_no);
      pos = nl + 1;
    }
    return std::move(out_);
  }

private:
  void error(int line, int column, std::string msg) { out_.errors.push_back({line, column, std::move(msg)}); }

  void line(std::string_view raw, int n)
  {
    const std::string_view t = trim(raw);
    if (t.empty() || t.front() == '#')
      return;
    if (t.front() == '[')
    {
      header(raw, t, n);
      return;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string_view::npos)
    {
      error(n, column_of(raw, t), "expected 'key = value' or '[section]'");
      return;
    }
    if (sec_ == Sec::None)
    {
      error(n, column_of(raw, t), "record outside of a section");
      return;
    }
    const std::string_view key = trim(t.substr(0, eq));
    if (!valid_key(key))
    {
      error(n, column_of(raw, t), "invalid record key '" + std::string(key) + "'");
      return;
    }
    auto &seen = keys_[static_cast<int>(sec_)];
    if (!seen.insert(std::string(key)).second)
    {
      error(n, column_of(raw, key), "duplicate record key '" + std::string(key) + "' in [" + sec_name() + "]");
      return;
    }
    std::string_view rest = t.substr(eq + 1);
    const std::size_t bar = rest.find('|');
    const std::string_view qpart = bar == std::string_view::npos ? rest : rest.substr(0, bar);
    const std::string_view mpart = bar == std::string_view::npos ? std::string_view{} : rest.substr(bar + 1);

    const std::size_t before = out_.errors.size();
    const std::optional<Value> v = value(raw, qpart, n);
    std::map<std::string, MetaField, std::less<>> meta;
    if (bar == std::string_view::npos)
      error(n, column_of(raw, t) + static_cast<int>(t.size()),
            "record needs metadata after '|' (at least channel=...)");
    else
      meta = metadata(raw, mpart, n);
    std::optional<ChannelId> ch;
    if (auto it = meta.find("channel"); it != meta.end())
    {
      ch = find_channel(it->second.value);
      if (!ch)
        error(n, it->second.column, "unknown channel '" + it->second.value + "'");
    }
    else if (bar != std::string_view::npos)
      error(n, column_of(raw, mpart), "metadata is missing channel=...");
    auto need = [&](std::string_view name) -> std::string {
      auto it = meta.find(name);
      if (it == meta.end() || it->second.value.empty())
      {
        error(n, bar == std::string_view::npos ? 1 : column_of(raw, mpart),
              "metadata is missing " + std::string(name) + "=...");
        return {};
      }
      return it->second.value;
    };
    auto opt = [&](std::string_view name) -> std::string {
      auto it = meta.find(name);
      return it == meta.end() ? std::string{} : it->second.value;
    };

    if (sec_ == Sec::Rho)
    {
      StateVariableRecord r{std::string(key), ch.value_or(ChannelId::TLS), need("statistic"), v.value_or(Value{}),
                            opt("method"), opt("witness"), n};
      if (out_.errors.size() == before)
        out_.doc.rho.push_back(std::move(r));
    }
    else if (sec_ == Sec::G)
    {
      CouplingRecord r{std::string(key), ch.value_or(ChannelId::TLS), v.value_or(Value{}), opt("mode_volume"),
                       opt("boundary"), opt("solver"), n};
      if (out_.errors.size() == before)
        out_.doc.g.push_back(std::move(r));
    }
    else
    {
      ObservableRecord r;
      r.key = std::string(key);
      r.channel = ch.value_or(ChannelId::TLS);
      r.observable = need("observable");
      r.value = v.value_or(Value{});
      r.window = opt("window");
      r.spectral = opt("spectral");
      r.line = n;
      if (auto it = meta.find("protocol"); it != meta.end())
      {
        for (auto p : {Protocol::Ramsey, Protocol::Echo, Protocol::T1Window, Protocol::ParityMonitor})
          if (it->second.value == to_string(p))
            r.protocol = p;
        if (!r.protocol)
          error(n, it->second.column,
                "protocol must be one of ramsey, echo, t1-window, parity-monitor (got '" + it->second.value + "')");
      }
      if (auto it = meta.find("spectral"); it != meta.end() && it->second.value != "one-sided" &&
                                           it->second.value != "two-sided")
        error(n, it->second.column, "spectral must be one-sided or two-sided");
      if (auto it = meta.find("parity"); it != meta.end())
      {
        if (it->second.value == "stable")
          r.parity_stable = true;
        else if (it->second.value == "unstable")
          r.parity_stable = false;
        else
          error(n, it->second.column, "parity must be stable or unstable");
      }
      if (out_.errors.size() == before)
        out_.doc.o.push_back(std::move(r));
    }
  }

  std::string sec_name() const
  {
    switch (sec_)
    {
    case Sec::Rho:
      return "rho";
    case Sec::G:
      return "g";
    case Sec::O:
      return "o";
    case Sec::None:
      break;
    }
    return "";
  }

  void header(std::string_view raw, std::string_view t, int n)
  {
    if (t.back() != ']')
    {
      error(n, column_of(raw, t), "unterminated section header");
      sec_ = Sec::None;
      return;
    }
    const std::string_view name = trim(t.substr(1, t.size() - 2));
    std::optional<int> *slot = nullptr;
    if (name == "rho")
    {
      sec_ = Sec::Rho;
      slot = &out_.doc.rho_section;
    }
    else if (name == "g")
    {
      sec_ = Sec::G;
      slot = &out_.doc.g_section;
    }
    else if (name == "o")
    {
      sec_ = Sec::O;
      slot = &out_.doc.o_section;
    }
    else
    {
      error(n, column_of(raw, t), "unknown section [" + std::string(name) + "]; expected [rho], [g] or [o]");
      sec_ = Sec::None;
      return;
    }
    if (*slot)
      error(n, column_of(raw, t),
            "section [" + std::string(name) + "] repeated (first at line " + std::to_string(**slot) + ")");
    else
      *slot = n;
  }

  std::optional<Value> value(std::string_view raw, std::string_view q, int n)
  {
    const auto toks = tokens(q, column_of(raw, q));
    if (toks.empty())
    {
      error(n, column_of(raw, q), "missing value");
      return std::nullopt;
    }
    const auto v = number(toks[0].text);
    if (!v)
    {
      error(n, toks[0].column, "not a number: '" + std::string(toks[0].text) + "'");
      return std::nullopt;
    }
    // A bare "1" after the value is the dimensionless unit, not a sigma.
    if (toks.size() == 1 || (toks.size() == 2 && toks[1].text != "1" && number(toks[1].text)))
    {
      error(n, toks.back().column + static_cast<int>(toks.back().text.size()), "missing unit");
      return std::nullopt;
    }
    if (toks.size() > 3)
    {
      error(n, toks[3].column, "unexpected token '" + std::string(toks[3].text) + "'");
      return std::nullopt;
    }
    Value out;
    out.value = *v;
    if (toks.size() == 3)
    {
      const auto s = number(toks[1].text);
      if (!s || *s < 0.0)
      {
        error(n, toks[1].column, "sigma must be a non-negative number");
        return std::nullopt;
      }
      out.sigma = s;
    }
    const Token &u = toks.back();
    try
    {
      const Unit unit = parse_unit(u.text);
      out.unit = std::string(u.text);
      out.si = Quantity(out.value * unit.scale, out.sigma.value_or(0.0) * std::abs(unit.scale), unit.dim);
    }
    catch (const DomainError &e)
    {
      error(n, u.column, e.what());
      return std::nullopt;
    }
    return out;
  }

  std::map<std::string, MetaField, std::less<>> metadata(std::string_view raw, std::string_view m, int n)
  {
    std::map<std::string, MetaField, std::less<>> out;
    const auto &allowed = meta_keys().at(sec_name());
    std::size_t i = 0;
    while (i <= m.size())
    {
      std::size_t j = m.find(';', i);
      if (j == std::string_view::npos)
        j = m.size();
      const std::string_view item = trim(m.substr(i, j - i));
      i = j + 1;
      if (item.empty())
        continue;
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos)
      {
        error(n, column_of(raw, item), "metadata item '" + std::string(item) + "' needs name=value");
        continue;
      }
      const std::string name(trim(item.substr(0, eq)));
      const std::string_view val = trim(item.substr(eq + 1));
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      {
        error(n, column_of(raw, item), "unknown metadata '" + name + "' in [" + sec_name() + "]");
        continue;
      }
      if (out.count(name))
      {
        error(n, column_of(raw, item), "metadata '" + name + "' given twice");
        continue;
      }
      out[name] = {std::string(val), val.empty() ? column_of(raw, item) + static_cast<int>(item.size())
                                                 : column_of(raw, val)};
    }
    return out;
  }

  std::string_view text_;
  ParseResult out_;
  Sec sec_ = Sec::None;
  std::set<std::string> keys_[4];
};

struct ObservableSpec
{
  std::string_view name;
  std::string_view unit;
};

constexpr std::array<ObservableSpec, 7> kObservables = {{
    {"T1", "s"},
    {"T_phi", "s"},
    {"T2", "s"},
    {"Gamma", "s^-1"},
    {"Q_inv", "1"},
    {"A_phi", "Wb^2"},
    {"parity_rate", "s^-1"},
}};

bool is_qp(ChannelId c) { return c == ChannelId::QPTrap || c == ChannelId::QPEnv; }

}  // namespace

ParseResult parse(std::string_view text) { return Parser(text).run(); }

StatisticRegistry StatisticRegistry::defaults()
{
  StatisticRegistry r;
  r.add("mu2", ChannelId::TLS, "m^-2");
  r.add("rho_spin", ChannelId::Spin, "m^-2");
  r.add("r_seam", ChannelId::Seam, "Ohm*m");
  r.add("n_qp", ChannelId::QPTrap, "m^-3");
  r.add("Z_ph", ChannelId::Phonon, "1");
  return r;
}

void StatisticRegistry::add(std::string name, ChannelId channel, std::string_view unit)
{
  entries_[std::move(name)] = {channel, parse_unit(unit).dim};
}

const StatisticRegistry::Entry *StatisticRegistry::find(std::string_view name) const
{
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

ValidationReport validate(const MdsDocument &doc, const StatisticRegistry &registry)
{
  ValidationReport rep;
  auto add = [&](int line, int col, std::string rule, std::string msg, Grade ceiling,
                 std::optional<ChannelId> ch = std::nullopt) {
    rep.deficiencies.push_back({line, col, std::move(rule), std::move(msg), ceiling, ch});
  };
  const Grade E = Grade::Insufficient;
  const Grade T = Grade::Trend;

  if (doc.rho.empty())
    add(doc.rho_section.value_or(1), 1, "section-absent", "Microstructural State Variables absent: [rho] has no records",
        E);
  if (doc.g.empty())
    add(doc.g_section.value_or(1), 1, "section-absent", "Geometry Coupling Functionals absent: [g] has no records", E);
  if (doc.o.empty())
    add(doc.o_section.value_or(1), 1, "section-absent", "Coherence Observables absent: [o] has no records", E);

  for (const auto &r : doc.rho)
  {
    const auto *e = registry.find(r.statistic);
    if (!e)
      add(r.line, 1, "unknown-statistic", "statistic '" + r.statistic + "' is not registered", E, r.channel);
    else
    {
      const bool same = e->channel == r.channel || (is_qp(e->channel) && is_qp(r.channel));
      if (!same)
        add(r.line, 1, "statistic-channel",
            "statistic '" + r.statistic + "' belongs to channel " + std::string(channel_name(e->channel)), E,
            r.channel);
      if (e->dim != r.value.si.dim)
        add(r.line, 1, "statistic-dimension",
            "statistic '" + r.statistic + "' needs dimension " + e->dim.str() + ", got " + r.value.si.dim.str(), E,
            r.channel);
    }
    if (!r.value.sigma)
      add(r.line, 1, "sigma-missing", "record '" + r.key + "' has no statistical bound (sigma)", T, r.channel);
    if (r.method.empty())
      add(r.line, 1, "method-missing", "record '" + r.key + "' does not name its measurement method", T, r.channel);
    if (r.witness.empty())
      add(r.line, 1, "witness-missing", "record '" + r.key + "' has no witness-sample provenance", T, r.channel);
  }

  for (const auto &r : doc.g)
  {
    if (r.value.si.dim != closure_entry(r.channel).g.dim)
      add(r.line, 1, "coupling-dimension",
          "coupling '" + r.key + "' needs dimension " + closure_entry(r.channel).g.dim.str() + ", got " +
              r.value.si.dim.str(),
          E, r.channel);
    if (!r.value.sigma)
      add(r.line, 1, "sigma-missing", "record '" + r.key + "' has no sigma", T, r.channel);
    std::vector<std::string> missing;
    if (r.mode_volume.empty())
      missing.push_back("mode_volume");
    if (r.boundary.empty())
      missing.push_back("boundary");
    if (r.solver.empty())
      missing.push_back("solver");
    if (!missing.empty())
    {
      std::string list;
      for (const auto &m : missing)
        list += (list.empty() ? "" : ", ") + m;
      add(r.line, 1, "g-procedure-missing", "coupling '" + r.key + "' cannot be reproduced without " + list, T,
          r.channel);
    }
  }

  for (const auto &r : doc.o)
  {
    auto spec = std::find_if(kObservables.begin(), kObservables.end(),
                             [&](const auto &s) { return s.name == r.observable; });
    if (spec == kObservables.end())
      add(r.line, 1, "unknown-observable",
          "observable '" + r.observable + "' is not one of T1, T_phi, T2, Gamma, Q_inv, A_phi, parity_rate", E,
          r.channel);
    else if (parse_unit(spec->unit).dim != r.value.si.dim)
      add(r.line, 1, "observable-dimension",
          "observable '" + r.observable + "' needs dimension " + parse_unit(spec->unit).dim.str() + ", got " +
              r.value.si.dim.str(),
          E, r.channel);
    if (r.observable == "T_phi" && r.protocol != Protocol::Ramsey && r.protocol != Protocol::Echo)
      add(r.line, 1, "tphi-protocol",
          "protocol context: T_phi record '" + r.key + "' needs protocol=ramsey or protocol=echo", E, r.channel);
    if (r.observable == "A_phi" && r.spectral.empty())
      add(r.line, 1, "flux-spectral", "flux-noise record '" + r.key + "' needs spectral=one-sided|two-sided", E,
          r.channel);
    if (!r.value.sigma)
      add(r.line, 1, "sigma-missing", "record '" + r.key + "' has no sigma", T, r.channel);
    if (r.observable == "T1" && r.window.empty())
      add(r.line, 1, "t1-window-missing", "T1 record '" + r.key + "' does not state its fluctuation window", T,
          r.channel);
    if (is_qp(r.channel) && r.parity_stable != true)
      add(r.line, 1, "parity-unconfirmed",
          "quasiparticle record '" + r.key + "' lacks parity=stable confirmation", T, r.channel);
  }

  std::stable_sort(rep.deficiencies.begin(), rep.deficiencies.end(),
                   [](const auto &a, const auto &b) { return a.line < b.line; });

  rep.grade = Grade::Quantitative;
  for (const auto &d : rep.deficiencies)
    rep.grade = std::min(rep.grade, d.ceiling);

  std::set<ChannelId> in_rho;
  std::set<ChannelId> in_g;
  std::set<ChannelId> in_o;
  for (const auto &r : doc.rho)
    in_rho.insert(r.channel);
  for (const auto &r : doc.g)
    in_g.insert(r.channel);
  for (const auto &r : doc.o)
    in_o.insert(r.channel);
  std::set<ChannelId> all = in_rho;
  all.insert(in_g.begin(), in_g.end());
  all.insert(in_o.begin(), in_o.end());
  for (auto c : all)
  {
    Grade g = (in_rho.count(c) && in_g.count(c) && in_o.count(c)) ? Grade::Quantitative : Grade::Insufficient;
    for (const auto &d : rep.deficiencies)
      if (d.channel == c)
        g = std::min(g, d.ceiling);
    rep.channel_grades[c] = g;
  }
  return rep;
}

namespace
{

std::string value_text(const Value &v)
{
  std::string s = format_double(v.value);
  if (v.sigma)
    s += " " + format_double(*v.sigma);
  return s + " " + v.unit;
}

void meta(std::string &out, std::string_view name, std::string_view value)
{
  if (!value.empty())
    out += "; " + std::string(name) + "=" + std::string(value);
}

template <class R>
std::vector<const R *> sorted(const std::vector<R> &rs)
{
  std::vector<const R *> p;
  for (const auto &r : rs)
    p.push_back(&r);
  std::sort(p.begin(), p.end(), [](const R *a, const R *b) { return a->key < b->key; });
  return p;
}

}  // namespace

std::string serialize(const MdsDocument &doc)
{
  std::string out = "[rho]\n";
  for (const auto *r : sorted(doc.rho))
  {
    out += r->key + " = " + value_text(r->value) + " | channel=" + std::string(channel_name(r->channel));
    meta(out, "statistic", r->statistic);
    meta(out, "method", r->method);
    meta(out, "witness", r->witness);
    out += '\n';
  }
  out += "\n[g]\n";
  for (const auto *r : sorted(doc.g))
  {
    out += r->key + " = " + value_text(r->value) + " | channel=" + std::string(channel_name(r->channel));
    meta(out, "mode_volume", r->mode_volume);
    meta(out, "boundary", r->boundary);
    meta(out, "solver", r->solver);
    out += '\n';
  }
  out += "\n[o]\n";
  for (const auto *r : sorted(doc.o))
  {
    out += r->key + " = " + value_text(r->value) + " | channel=" + std::string(channel_name(r->channel));
    meta(out, "observable", r->observable);
    if (r->protocol)
      meta(out, "protocol", to_string(*r->protocol));
    meta(out, "window", r->window);
    meta(out, "spectral", r->spectral);
    if (r->parity_stable)
      meta(out, "parity", *r->parity_stable ? "stable" : "unstable");
    out += '\n';
  }
  return out;
}

std::string format_report(const ValidationReport &r)
{
  std::ostringstream o;
  o << "grade: " << to_string(r.grade) << '\n';
  for (const auto &[c, g] : r.channel_grades)
    o << "  " << channel_name(c) << ": " << to_string(g) << '\n';
  if (!r.deficiencies.empty())
  {
    o << "deficiencies:\n";
    for (const auto &d : r.deficiencies)
      o << "  " << d.str() << (d.ceiling == Grade::Insufficient ? "  [error]" : "  [blocks quantitative]") << '\n';
  }
  return o.str();
}

}  // namespace prescriptor::mds
