#include "riskcap/response.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "riskcap/montecarlo.hpp"
#include "riskcap/parallel.hpp"

namespace riskcap::response {

void validate(const CapitalRule& rule) {
  if (!(rule.c > 0.0)) throw std::domain_error("CapitalRule: c must be > 0");
  if (rule.kind == RuleKind::basel2 && rule.yearly_window < 2) {
    throw std::domain_error("CapitalRule: yearly_window must be >= 2");
  }
}

double required_capital(const CapitalRule& rule, std::span<const double> history) {
  validate(rule);
  switch (rule.kind) {
    case RuleKind::basel1:
      if (history.size() < 2) {
        throw std::domain_error("required_capital: basel1 needs at least 2 observations");
      }
      return rule.c * montecarlo::sample_std(history);
    case RuleKind::basel2:
      if (history.size() < rule.yearly_window) {
        throw std::domain_error("required_capital: basel2 needs at least one full window");
      }
      return rule.c * montecarlo::basel2_risk(history, rule.yearly_window);
    case RuleKind::market_value_100:
      return 1.0;
  }
  throw std::domain_error("required_capital: unknown rule kind");
}

BankAllocation allocate(const CapitalRule& rule, double budget,
                        const std::vector<std::vector<double>>& histories) {
  validate(rule);
  if (!(budget > 0.0)) throw std::domain_error("allocate: budget must be > 0");
  if (histories.empty()) throw std::domain_error("allocate: no securities");

  std::size_t best = histories.size();
  double best_capital = 0.0;
  for (std::size_t i = 0; i < histories.size(); ++i) {
    const double capital = required_capital(rule, histories[i]);
    if (capital <= 0.0) continue;  // degenerate, unbounded exposure
    if (best == histories.size() || capital < best_capital) {
      best = i;
      best_capital = capital;
    }
  }
  if (best == histories.size()) {
    throw std::domain_error("allocate: every security has zero required capital");
  }

  BankAllocation allocation;
  allocation.budget = budget;
  allocation.exposures.assign(histories.size(), 0.0);
  allocation.exposures[best] = budget / best_capital;
  allocation.chosen = best;
  return allocation;
}

double excess_risk_ratio(const CapitalRule& rule, const BankAllocation& allocation,
                         std::span<const double> true_sigmas) {
  validate(rule);
  if (true_sigmas.size() != allocation.exposures.size()) {
    throw std::domain_error("excess_risk_ratio: sigma count does not match allocation");
  }
  if (!(allocation.budget > 0.0)) throw std::domain_error("excess_risk_ratio: empty budget");
  double true_risk = 0.0;
  for (std::size_t i = 0; i < true_sigmas.size(); ++i) {
    true_risk += allocation.exposures[i] * true_sigmas[i];
  }
  // Baseline: the same budget charged capital c*sigma carries budget/c of
  // true risk, whatever the security.
  return rule.c * true_risk / allocation.budget;
}

ConcentrationReport concentration_report(const std::vector<BankAllocation>& allocations) {
  if (allocations.size() < 2) {
    throw std::domain_error("concentration_report: need at least 2 banks");
  }

  std::map<std::size_t, std::size_t> votes;
  std::map<std::size_t, double> aggregate;
  double total_exposure = 0.0;
  for (const BankAllocation& a : allocations) {
    ++votes[a.chosen];
    for (std::size_t i = 0; i < a.exposures.size(); ++i) {
      if (a.exposures[i] != 0.0) {
        aggregate[i] += a.exposures[i];
        total_exposure += a.exposures[i];
      }
    }
  }

  std::size_t modal_count = 0;
  for (const auto& [security, count] : votes) {
    if (count > modal_count) modal_count = count;  // ties resolve to the lowest index
  }

  ConcentrationReport report;
  report.overlap_fraction = static_cast<double>(modal_count) / allocations.size();
  for (const auto& [security, exposure] : aggregate) {
    const double share = exposure / total_exposure;
    report.herfindahl += share * share;
  }
  return report;
}

void validate(const ResponseConfig& config) {
  validate(config.rule);
  if (config.m < 1) throw std::domain_error("ResponseConfig: m must be >= 1");
  if (config.n < 2) throw std::domain_error("ResponseConfig: n must be >= 2");
  if (config.banks < 1) throw std::domain_error("ResponseConfig: banks must be >= 1");
  if (!(config.budget > 0.0)) throw std::domain_error("ResponseConfig: budget must be > 0");
  if (!(config.true_sigma > 0.0)) throw std::domain_error("ResponseConfig: sigma must be > 0");
  if (config.rule.kind == RuleKind::basel2 && config.n < config.rule.yearly_window) {
    throw std::domain_error("ResponseConfig: n must be >= the basel2 window");
  }
}

ResponseReport run_response_experiment(const ResponseConfig& config) {
  validate(config);

  const std::vector<double> sigmas(config.m, config.true_sigma);
  std::vector<BankAllocation> allocations(config.banks);
  parallel_for(config.banks, config.threads, [&](std::size_t b) {
    const std::uint64_t stream_base = config.independent ? b * config.m : 0;
    std::vector<std::vector<double>> histories(config.m);
    for (std::size_t i = 0; i < config.m; ++i) {
      montecarlo::CounterRng rng(config.seed, stream_base + i);
      histories[i].resize(config.n);
      for (double& r : histories[i]) r = config.true_sigma * rng.next_normal();
    }
    allocations[b] = allocate(config.rule, config.budget, histories);
  });

  ResponseReport report;
  report.banks.resize(config.banks);
  double ratio_sum = 0.0;
  for (std::size_t b = 0; b < config.banks; ++b) {
    const BankAllocation& a = allocations[b];
    BankOutcome& outcome = report.banks[b];
    outcome.chosen = a.chosen;
    outcome.exposure = a.exposures[a.chosen];
    outcome.capital_per_unit = a.budget / outcome.exposure;
    outcome.excess_ratio = excess_risk_ratio(config.rule, a, sigmas);
    ratio_sum += outcome.excess_ratio;
  }
  report.mean_excess_ratio = ratio_sum / static_cast<double>(config.banks);

  if (config.banks >= 2) {
    const ConcentrationReport conc = concentration_report(allocations);
    report.overlap_fraction = conc.overlap_fraction;
    report.herfindahl = conc.herfindahl;
  } else {
    report.overlap_fraction = 1.0;
    report.herfindahl = 1.0;
  }
  return report;
}

nlohmann::json to_json(const ResponseReport& report) {
  nlohmann::json banks = nlohmann::json::array();
  for (const BankOutcome& b : report.banks) {
    banks.push_back({{"chosen_security", b.chosen},
                     {"capital_per_unit", b.capital_per_unit},
                     {"exposure", b.exposure},
                     {"excess_risk_ratio", b.excess_ratio}});
  }
  return {{"banks", banks},
          {"overlap_fraction", report.overlap_fraction},
          {"herfindahl", report.herfindahl},
          {"mean_excess_ratio", report.mean_excess_ratio}};
}

}  // namespace riskcap::response
