// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/channels.hpp"

#include "prescriptor/error.hpp"

#include <cmath>
#include <map>

namespace prescriptor
{

namespace
{

// Table I rows, with IV split into trap-geometry and environmental parts.
constexpr std::array<ChannelMeta, 6> kChannelTable = {{
    {ChannelId::TLS, "I-TLS", "I", ObservableTag::RelaxationRate, "Often",
     "Slow dielectric fluctuations."},
    {ChannelId::Spin, "II-Spin", "II", ObservableTag::DephasingRate, "No",
     "Echo vs. Ramsey differ."},
    {ChannelId::Seam, "III-Seam", "III", ObservableTag::RelaxationRate, "Often",
     "Primarily relaxation."},
    {ChannelId::QPTrap, "IVa-QPTrap", "IVa", ObservableTag::RelaxationRate, "Approx.",
     "Parity dynamics."},
    {ChannelId::QPEnv, "IVb-QPEnv", "IVb", ObservableTag::RelaxationRate, "Approx.",
     "Parity dynamics."},
    {ChannelId::Phonon, "V-Phonon", "V", ObservableTag::RelaxationRate, "Unknown",
     "Hypothesis-level."},
}};

ClosureFactor factor(std::string symbol, std::string unit)
{
  DimVector d = parse_unit(unit).dim;
  return {std::move(symbol), std::move(unit), std::move(d)};
}

std::map<ChannelId, ClosureEntry> build_closure_table()
{
  std::map<ChannelId, ClosureEntry> t;
  t[ChannelId::TLS] = {factor("mu2", "m^-2"), factor("G_I", "m^2"),
                       {factor("tan_delta0", "1")}, factor("Q^-1", "1")};
  t[ChannelId::Spin] = {factor("rho_spin", "m^-2"), factor("G_Phi", "T^2*A^-2*m^2"),
                        {factor("mu_B^2", "J^2*T^-2"), factor("Phi0^-2", "Wb^-2")},
                        factor("A_Phi/Phi0^2", "1")};
  t[ChannelId::Seam] = {factor("r_seam", "Ohm*m"), factor("Y_seam", "S/m"),
                        {factor("C_seam", "1")}, factor("Q^-1_seam", "1")};
  const ClosureEntry qp{factor("n_qp", "m^-3"), factor("C_qp*G_qp^(trap)", "m^3*s^-1"),
                        {factor("C_qp(absorbed)", "1")}, factor("Gamma_qp", "s^-1")};
  t[ChannelId::QPTrap] = qp;
  t[ChannelId::QPEnv] = qp;
  t[ChannelId::Phonon] = {factor("Z_ph", "1"), factor("G_ph", "1"), {factor("C_ph", "1")},
                          factor("Q^-1", "1")};
  return t;
}

// Names recognised when printing intermediate products.
std::string describe(const DimVector &d)
{
  static const std::array<std::pair<const char *, const char *>, 5> named = {{
      {"Wb^2", "Wb^2"},
      {"T^2*A^-2", "T^2*A^-2"},
      {"s^-1", "s^-1"},
      {"J^2*A^-2", "Wb^2"},
      {"m^2", "m^2"},
  }};
  for (const auto &[unit, label] : named)
    if (parse_unit(unit).dim == d)
      return d.str() + " (= " + label + ")";
  return d.str();
}

}  // namespace

const ChannelMeta &channel_meta(ChannelId id)
{
  for (const auto &m : kChannelTable)
    if (m.id == id)
      return m;
  throw DomainError("unknown channel id");
}

std::optional<ChannelId> find_channel(std::string_view text)
{
  for (const auto &m : kChannelTable)
  {
    if (text == m.name || text == m.roman)
      return m.id;
    const auto dash = m.name.find('-');
    if (text == m.name.substr(dash + 1))
      return m.id;
  }
  if (text == "IV" || text == "IV-QP" || text == "QP")
    return ChannelId::QPEnv;
  return std::nullopt;
}

ChannelId parse_channel(std::string_view text)
{
  if (auto c = find_channel(text))
    return *c;
  throw ParseError("unknown channel '" + std::string(text) + "'");
}

std::string_view channel_name(ChannelId id) { return channel_meta(id).name; }

DimVector ClosureEntry::c_dim() const
{
  DimVector d;
  for (const auto &f : c)
    d = d + f.dim;
  return d;
}

const ClosureEntry &closure_entry(ChannelId id)
{
  static const std::map<ChannelId, ClosureEntry> table = build_closure_table();
  auto it = table.find(id);
  if (it == table.end())
    throw DomainError("channel has no registered closure dimensions");
  return it->second;
}

ClosureReport check_closure(const ClosureEntry &e)
{
  ClosureReport r;
  DimVector running = e.rho.dim + e.g.dim;
  r.chain.push_back(e.rho.symbol + " [" + e.rho.unit + "] * " + e.g.symbol + " [" + e.g.unit +
                    "] = " + describe(running));
  for (const auto &f : e.c)
  {
    running = running + f.dim;
    r.chain.push_back("* " + f.symbol + " [" + f.unit + "] = " + describe(running));
  }
  r.residual = running - e.observable.dim;
  r.pass = r.residual.is_dimensionless();
  r.chain.push_back("observable " + e.observable.symbol + " [" + e.observable.unit +
                    "]: residual " + r.residual.str() + (r.pass ? " -> closed" : " -> NOT closed"));
  return r;
}

ClosureReport check_closure(ChannelId id) { return check_closure(closure_entry(id)); }

Quantity t2_decompose(const Quantity &t1, const Quantity &tphi)
{
  if (t1.dim != dims::time() || tphi.dim != dims::time())
    throw DimensionError("T1 and Tphi must be times");
  if (!(t1.value > 0.0) || !(tphi.value > 0.0))
    throw DomainError("T1 and Tphi must be positive");
  const double rate = 1.0 / (2.0 * t1.value) + 1.0 / tphi.value;
  const double t2 = 1.0 / rate;
  // dT2/dT1 = T2^2 / (2 T1^2), dT2/dTphi = T2^2 / Tphi^2
  const double d1 = std::isinf(t1.value) ? 0.0 : t2 * t2 / (2.0 * t1.value * t1.value);
  const double d2 = t2 * t2 / (tphi.value * tphi.value);
  return Quantity(t2, std::hypot(d1 * t1.sigma, d2 * tphi.sigma), dims::time());
}

double in_phi0_squared(const Quantity &a_phi)
{
  const Quantity phi0 = Constants::Phi0();
  if (a_phi.dim != phi0.dim * Rational(2))
    throw DimensionError("A_Phi must carry Wb^2, got " + a_phi.dim.str());
  return a_phi.value / (phi0.value * phi0.value);
}

}  // namespace prescriptor
