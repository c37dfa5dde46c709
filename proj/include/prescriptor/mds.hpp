// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_MDS_HPP
#define PRESCRIPTOR_MDS_HPP

#include "prescriptor/channels.hpp"
#include "prescriptor/io.hpp"
#include "prescriptor/units.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prescriptor::mds
{

// Minimum-dataset documents (.mds). Line-oriented:
//
//   [rho]
//   key = <value> [<sigma>] <unit> | channel=I; statistic=mu2; method=FIB-SEM; witness=...
//   [g]
//   key = <value> [<sigma>] <unit> | channel=I; mode_volume=...; boundary=...; solver=...
//   [o]
//   key = <value> [<sigma>] <unit> | channel=II; observable=T_phi; protocol=echo
//
// See docs/mds-format.md for the full grammar.

struct Value
{
  double value = 0.0;
  std::optional<double> sigma;
  std::string unit;  // as written
  Quantity si;       // converted, sigma 0 when absent

  bool operator==(const Value &o) const
  {
    return value == o.value && sigma == o.sigma && unit == o.unit;
  }
};

enum class Protocol
{
  Ramsey,
  Echo,
  T1Window,
  ParityMonitor,
};

std::string_view to_string(Protocol p);

struct StateVariableRecord
{
  std::string key;
  ChannelId channel = ChannelId::TLS;
  std::string statistic;
  Value value;
  std::string method;   // FIB-SEM, EPR, CPW, ...
  std::string witness;  // witness-sample provenance
  int line = 0;

  bool operator==(const StateVariableRecord &o) const
  {
    return key == o.key && channel == o.channel && statistic == o.statistic && value == o.value &&
           method == o.method && witness == o.witness;
  }
};

struct CouplingRecord
{
  std::string key;
  ChannelId channel = ChannelId::TLS;
  Value value;
  std::string mode_volume;
  std::string boundary;
  std::string solver;
  int line = 0;

  bool operator==(const CouplingRecord &o) const
  {
    return key == o.key && channel == o.channel && value == o.value && mode_volume == o.mode_volume &&
           boundary == o.boundary && solver == o.solver;
  }
};

struct ObservableRecord
{
  std::string key;
  ChannelId channel = ChannelId::TLS;
  std::string observable;  // T1, T_phi, T2, Gamma, Q_inv, A_phi, parity_rate
  Value value;
  std::optional<Protocol> protocol;
  std::string window;    // T1 fluctuation window
  std::string spectral;  // one-sided | two-sided, flux noise only
  std::optional<bool> parity_stable;
  int line = 0;

  bool operator==(const ObservableRecord &o) const
  {
    return key == o.key && channel == o.channel && observable == o.observable && value == o.value &&
           protocol == o.protocol && window == o.window && spectral == o.spectral &&
           parity_stable == o.parity_stable;
  }
};

struct MdsDocument
{
  std::optional<int> rho_section;  // header line when present
  std::optional<int> g_section;
  std::optional<int> o_section;
  std::vector<StateVariableRecord> rho;
  std::vector<CouplingRecord> g;
  std::vector<ObservableRecord> o;
};

struct ParseResult
{
  MdsDocument doc;
  std::vector<Diagnostic> errors;  // every syntax problem, in line order

  bool ok() const { return errors.empty(); }
};

/// Total: collects located errors and keeps every well-formed record.
ParseResult parse(std::string_view text);

/// Admissible statistic names per channel, with their dimensions.
class StatisticRegistry
{
public:
  struct Entry
  {
    ChannelId channel;
    DimVector dim;
  };

  /// Seeded with mu2, rho_spin, r_seam, n_qp, Z_ph.
  static StatisticRegistry defaults();

  void add(std::string name, ChannelId channel, std::string_view unit);
  const Entry *find(std::string_view name) const;

private:
  std::map<std::string, Entry, std::less<>> entries_;
};

enum class Grade
{
  Insufficient,
  Trend,
  Quantitative,
};

std::string_view to_string(Grade g);

struct Deficiency
{
  int line = 0;
  int column = 0;
  std::string rule;  // stable identifier, e.g. "tphi-protocol"
  std::string message;
  Grade ceiling = Grade::Trend;  // best grade still reachable with this deficiency
  std::optional<ChannelId> channel;

  std::string str() const;
};

struct ValidationReport
{
  Grade grade = Grade::Insufficient;
  std::vector<Deficiency> deficiencies;
  std::map<ChannelId, Grade> channel_grades;

  bool meets(Grade required) const { return grade >= required; }
};

ValidationReport validate(const MdsDocument &doc, const StatisticRegistry &registry = StatisticRegistry::defaults());

/// Canonical text: sections rho, g, o; records sorted by key; fixed metadata order.
std::string serialize(const MdsDocument &doc);

std::string format_report(const ValidationReport &r);

}  // namespace prescriptor::mds

#endif  // PRESCRIPTOR_MDS_HPP
