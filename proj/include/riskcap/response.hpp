#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace riskcap::response {

enum class RuleKind { basel1, basel2, market_value_100 };

// Risk-capital rule. basel1 charges c times the sample standard deviation
// per unit of exposure, basel2 charges c times (overall std + max rolling
// yearly std), market_value_100 charges the full market value (1 per unit);
// c then only scales the correctly-measured baseline in excess_risk_ratio.
struct CapitalRule {
  RuleKind kind = RuleKind::basel1;
  double c = 22.0;
  std::size_t yearly_window = 252;  // basel2 only
};
void validate(const CapitalRule& rule);

// Capital required per unit of exposure under the rule, measured from the
// security's return history.
double required_capital(const CapitalRule& rule, std::span<const double> history);

struct BankAllocation {
  double budget = 0.0;
  std::vector<double> exposures;  // per security, >= 0
  std::size_t chosen = 0;         // index of the argmin-capital security
};

// Exposure-maximizing allocation: the entire budget goes into the security
// with the smallest required capital per unit (ties to the lowest index).
// Zero-capital securities are degenerate and skipped; if every security is
// degenerate, throws.
BankAllocation allocate(const CapitalRule& rule, double budget,
                        const std::vector<std::vector<double>>& histories);

// True risk carried by the allocation relative to the risk the same budget
// would carry if capital were charged at c times the true sigma. For the
// single-security basel allocation this reduces to sigma_chosen / s_chosen.
double excess_risk_ratio(const CapitalRule& rule, const BankAllocation& allocation,
                         std::span<const double> true_sigmas);

struct ConcentrationReport {
  double overlap_fraction = 0.0;  // banks holding the modal chosen security
  double herfindahl = 0.0;        // sum of squared aggregate exposure shares
};
ConcentrationReport concentration_report(const std::vector<BankAllocation>& allocations);

// Monte Carlo experiment: `banks` banks allocate against m simulated
// normal-return securities of equal true sigma. With shared histories all
// banks see substreams 0..m-1 of the seed; with independent histories bank
// b sees substreams b*m..b*m+m-1.
struct ResponseConfig {
  std::size_t m = 1000;
  std::size_t n = 60;
  std::size_t banks = 10;
  double budget = 1e6;
  CapitalRule rule{};
  std::uint64_t seed = 0;
  bool independent = false;
  double true_sigma = 1.0;
  unsigned threads = 1;
};
void validate(const ResponseConfig& config);

struct BankOutcome {
  std::size_t chosen = 0;
  double capital_per_unit = 0.0;
  double exposure = 0.0;
  double excess_ratio = 0.0;
};

struct ResponseReport {
  std::vector<BankOutcome> banks;
  double overlap_fraction = 0.0;
  double herfindahl = 0.0;
  double mean_excess_ratio = 0.0;
};

ResponseReport run_response_experiment(const ResponseConfig& config);

nlohmann::json to_json(const ResponseReport& report);

}  // namespace riskcap::response
