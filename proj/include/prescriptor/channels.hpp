// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_CHANNELS_HPP
#define PRESCRIPTOR_CHANNELS_HPP

#include "prescriptor/units.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prescriptor
{

enum class ChannelId
{
  TLS,       // I
  Spin,      // II
  Seam,      // III
  QPTrap,    // IV(a)
  QPEnv,     // IV(b)
  Phonon,    // V
};

inline constexpr std::array<ChannelId, 6> kAllChannels = {
    ChannelId::TLS,    ChannelId::Spin,  ChannelId::Seam,
    ChannelId::QPTrap, ChannelId::QPEnv, ChannelId::Phonon,
};

enum class ObservableTag
{
  RelaxationRate,  // T1^-1
  DephasingRate,   // Tphi^-1
};

struct ChannelMeta
{
  ChannelId id;
  std::string_view name;    // "I-TLS"
  std::string_view roman;   // "I"
  ObservableTag primary_observable;
  std::string_view markovian;  // "Often", "No", "Approx.", "Unknown"
  std::string_view caveat;
};

const ChannelMeta &channel_meta(ChannelId id);

/// Accepts "I-TLS", "I", "TLS", "IVa-QPTrap", "IVa", "IV" (-> IVb), case-sensitive.
std::optional<ChannelId> find_channel(std::string_view text);
ChannelId parse_channel(std::string_view text);  // throws ParseError
std::string_view channel_name(ChannelId id);

/// One named factor in a closure chain; `unit` is a parseable unit expression.
struct ClosureFactor
{
  std::string symbol;
  std::string unit;
  DimVector dim;
};

/// Canonical dimensions of one prescriptor channel: O ~ C * rho * G.
/// C may be a product of several factors (C_Phi = mu_B^2 / Phi0^2).
struct ClosureEntry
{
  ClosureFactor rho;
  ClosureFactor g;
  std::vector<ClosureFactor> c;
  ClosureFactor observable;

  DimVector c_dim() const;
};

/// Throws DomainError for a channel with no registered dimensions.
const ClosureEntry &closure_entry(ChannelId id);

struct ClosureReport
{
  bool pass = false;
  DimVector residual;              // dim(C) + dim(rho) + dim(G) - dim(O)
  std::vector<std::string> chain;  // human-readable step-by-step product
};

ClosureReport check_closure(ChannelId id);
ClosureReport check_closure(const ClosureEntry &entry);

/// 1/T2 = 1/(2 T1) + 1/Tphi. T1 may be +inf.
Quantity t2_decompose(const Quantity &t1, const Quantity &tphi);

/// A_Phi stored in Wb^2, expressed as a multiple of Phi0^2.
double in_phi0_squared(const Quantity &a_phi_wb2);

}  // namespace prescriptor

#endif  // PRESCRIPTOR_CHANNELS_HPP
