// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_BUDGET_HPP
#define PRESCRIPTOR_BUDGET_HPP

#include "prescriptor/channels.hpp"
#include "prescriptor/rational.hpp"
#include "prescriptor/units.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prescriptor::budget
{

/// Per-channel inputs for back-calculating a rho limit.
struct ChannelCoupling
{
  std::optional<Quantity> c;
  std::optional<Quantity> g;
  std::optional<Quantity> omega;   // rad/s, for channels observed as Q^-1
  std::optional<Quantity> bridge;  // explicit rate -> observable factor
};

struct BudgetSpec
{
  Rational t1_target;  // seconds, exact
  double t1_sigma = 0.0;
  std::map<ChannelId, Rational> fractions;
  std::map<ChannelId, ChannelCoupling> couplings;
  std::map<ChannelId, Quantity> measured;  // witness-sample rho values
  double confidence = 0.95;
};

/// Named allocation presets. "paper-b1": I 40%, II 20%, III 20%, IV 10%, V 10%.
std::map<ChannelId, Rational> preset(std::string_view name);
std::vector<std::string> preset_names();

/// Exact time from text such as "1ms", "1 ms", "50 us", "0.25 s".
Rational parse_exact_time(std::string_view text);

Rational total_rate(const Rational &t1_target);
/// 1 / T1 with propagated sigma.
Quantity total_rate(const Quantity &t1_target);

struct Allowance
{
  ChannelId channel;
  Rational fraction;
  Rational rate;  // s^-1
};

struct AllowanceTable
{
  Rational gamma_total;
  std::vector<Allowance> rows;  // channel order
  Rational margin_fraction;     // 1 - sum of fractions
  Rational margin_rate;
};

/// Throws DomainError when fractions are non-positive or sum above 1.
AllowanceTable allowances(const BudgetSpec &spec);

/// Observable-side allowance: the rate itself for rate observables, Gamma/omega
/// for Q^-1 observables, Gamma * bridge otherwise.
Quantity observable_allowance(ChannelId channel, const Quantity &rate, const ChannelCoupling &coupling);

/// O_allow / (c * g), dimension-checked against the channel's closure entry.
Quantity rho_limit(ChannelId channel, const Quantity &rate, const ChannelCoupling &coupling);

struct LimitRow
{
  ChannelId channel;
  Rational fraction;
  Rational rate;
  std::optional<Quantity> observable_allowance;
  std::optional<Quantity> rho_limit;
  std::string limit_unit;
};

struct BudgetResult
{
  Quantity gamma_total;
  AllowanceTable table;
  std::vector<LimitRow> limits;
};

/// Limits for every allocated channel with both c and g; other rows carry
/// the allowance only.
BudgetResult plan(const BudgetSpec &spec);

enum class ChannelStatus
{
  Pass,
  Fail,
  Unknown,
};

struct FeasibilityRow
{
  ChannelId channel;
  ChannelStatus status = ChannelStatus::Unknown;
  std::optional<double> upper;        // rho + k sigma
  std::optional<double> utilization;  // upper / limit
  std::optional<double> margin;       // 1 - utilization
  bool diminishing_returns = false;   // upper < 0.1 * limit
};

enum class Overall
{
  Go,
  NoGo,
  Incomplete,
};

struct FeasibilityReport
{
  double k = 0.0;
  std::vector<FeasibilityRow> rows;
  std::optional<ChannelId> binding;
  Overall overall = Overall::Incomplete;
};

FeasibilityReport feasibility(const BudgetResult &result, const std::map<ChannelId, Quantity> &measured,
                              double confidence = 0.95);

std::string_view to_string(ChannelStatus s);
std::string_view to_string(Overall o);

struct SensitivitySweep
{
  ChannelId channel;
  std::string parameter;
  DimVector p_dim;
  std::vector<std::pair<double, Quantity>> samples;  // (p in SI, G)
};

struct SensitivityResult
{
  std::vector<Quantity> slopes;  // dG/dp at each sample
  double max_abs_slope = 0.0;
  std::size_t argmax = 0;
};

/// Non-uniform three-point central differences inside, one-sided at ends.
SensitivityResult sensitivity(const SensitivitySweep &sweep);

inline constexpr double kDeadBand = 1e-3;

struct ConflictCell
{
  int sign = 0;        // +1, 0, -1
  double slope = 0.0;  // secant over the sweep
};

struct ConflictRow
{
  std::string parameter;
  std::map<ChannelId, ConflictCell> cells;
  std::string label;  // "Trade-off (I vs II)", "Favorable/neutral", "No conflict"
};

struct ConflictMatrix
{
  std::vector<ChannelId> channels;
  std::vector<ConflictRow> rows;
};

ConflictMatrix conflict_matrix(const std::vector<SensitivitySweep> &sweeps);

// Text and CSV I/O.
BudgetSpec parse_budget_spec(std::string_view text);
std::vector<SensitivitySweep> parse_sweeps_csv(std::string_view text);
std::map<ChannelId, Quantity> parse_measured_csv(std::string_view text);

/// `channel,allowance_per_s,rho_limit,limit_unit,margin` plus a units row and
/// a final residual-margin row.
std::string limits_csv(const BudgetResult &r, const FeasibilityReport *f = nullptr);
std::string format_plan(const BudgetResult &r);
std::string format_feasibility(const BudgetResult &r, const FeasibilityReport &f);
std::string format_conflicts(const ConflictMatrix &m);
std::string conflicts_csv(const ConflictMatrix &m);
std::string sensitivity_csv(const std::vector<SensitivitySweep> &sweeps);

/// Exact decimal when the denominator divides a power of ten, else shortest double.
std::string decimal(const Rational &r);

}  // namespace prescriptor::budget

#endif  // PRESCRIPTOR_BUDGET_HPP
