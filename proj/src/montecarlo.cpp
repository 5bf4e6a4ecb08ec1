#include "riskcap/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "riskcap/format.hpp"
#include "riskcap/parallel.hpp"

namespace riskcap::montecarlo {

namespace {

double normal_pdf(double x) {
  return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

double window_std_from_sums(double sum, double sumsq, std::size_t w) {
  const double var = (sumsq - sum * sum / w) / (w - 1);
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

}  // namespace

void validate(const FatTailParams& params) {
  if (!(params.epsilon >= 0.0)) throw std::domain_error("FatTailParams: epsilon must be >= 0");
  if (!(params.jump > 0.0)) throw std::domain_error("FatTailParams: jump must be > 0");
  if (!(params.jump >= params.epsilon)) {
    throw std::domain_error("FatTailParams: jump must be >= epsilon");
  }
}

void validate(const SimConfig& config) {
  if (config.m < 1) throw std::domain_error("SimConfig: m must be >= 1");
  if (config.n < 2) throw std::domain_error("SimConfig: n must be >= 2");
  if (const auto* normal = std::get_if<NormalDist>(&config.distribution)) {
    if (!(normal->sigma > 0.0)) throw std::domain_error("SimConfig: sigma must be > 0");
  } else {
    validate(std::get<FatDist>(config.distribution).params);
  }
}

Histogram Histogram::with_width(std::span<const double> values, double width) {
  if (!(width > 0.0)) throw std::domain_error("Histogram: width must be > 0");
  Histogram h;
  h.total_ = values.size();
  if (values.empty()) return h;
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const long first = static_cast<long>(std::floor(*min_it / width));
  long last = static_cast<long>(std::floor(*max_it / width));
  std::size_t bins = static_cast<std::size_t>(last - first + 1);
  h.bin_edges_.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges_[i] = (first + static_cast<long>(i)) * width;
  }
  h.counts_.assign(bins, 0);
  for (double v : values) {
    auto idx = static_cast<std::size_t>(static_cast<long>(std::floor(v / width)) - first);
    if (idx >= bins) idx = bins - 1;
    ++h.counts_[idx];
  }
  return h;
}

void Histogram::write_csv(std::ostream& out) const {
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    out << fmt_double(bin_edges_[i]) << ',' << fmt_double(bin_edges_[i + 1]) << ','
        << counts_[i] << '\n';
  }
}

nlohmann::json Histogram::to_json() const {
  return {{"bin_edges", bin_edges_}, {"counts", counts_}, {"total", total_}};
}

double fat_tail_transform(double z, const FatTailParams& params) {
  if (std::fabs(z) >= params.epsilon) return z;
  return z < 0.0 ? -params.jump : params.jump;  // z == 0 inside the band maps to +jump
}

double draw_fat_tail(CounterRng& rng, const FatTailParams& params) {
  return fat_tail_transform(rng.next_normal(), params);
}

MomentSummary fat_tail_population_moments(const FatTailParams& params) {
  validate(params);
  const double eps = params.epsilon;
  const double h = params.jump;
  const double phi = normal_pdf(eps);
  const double p = std::erf(eps * 0.70710678118654752440);  // 2 Phi(eps) - 1
  // Central-band moments of the standard normal:
  //   integral of z^2 phi(z) over (-eps, eps) = p - 2 eps phi(eps)
  //   integral of z^4 phi(z) over (-eps, eps) = 3 t - 2 eps^3 phi(eps)
  const double t = p - 2.0 * eps * phi;
  const double variance = 1.0 - t + p * h * h;
  const double m4 = 3.0 - (3.0 * t - 2.0 * eps * eps * eps * phi) + p * h * h * h * h;
  MomentSummary out;
  out.mean = 0.0;
  out.std = std::sqrt(variance);
  out.kurtosis = m4 / (variance * variance);
  return out;
}

double population_std(const Distribution& dist) {
  if (const auto* normal = std::get_if<NormalDist>(&dist)) return normal->sigma;
  return fat_tail_population_moments(std::get<FatDist>(dist).params).std;
}

double sample_std(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::domain_error("sample_std: need at least 2 observations");
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  if (*min_it == *max_it) return 0.0;  // constant input, exactly zero dispersion
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (n - 1));
}

MomentSummary sample_moments(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::domain_error("sample_moments: need at least 2 observations");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  MomentSummary out;
  out.mean = mean;
  out.std = std::sqrt(m2 / (n - 1));
  m2 /= n;
  m4 /= n;
  out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  return out;
}

std::vector<double> simulate_row(const SimConfig& config, std::size_t security) {
  validate(config);
  CounterRng rng(config.seed, security);
  std::vector<double> row(config.n);
  if (const auto* normal = std::get_if<NormalDist>(&config.distribution)) {
    for (double& r : row) r = normal->sigma * rng.next_normal();
  } else {
    const FatTailParams& params = std::get<FatDist>(config.distribution).params;
    for (double& r : row) r = draw_fat_tail(rng, params);
  }
  return row;
}

std::vector<std::vector<double>> simulate_returns(const SimConfig& config) {
  validate(config);
  std::vector<std::vector<double>> matrix(config.m);
  parallel_for(config.m, config.threads,
               [&](std::size_t i) { matrix[i] = simulate_row(config, i); });
  return matrix;
}

std::vector<double> simulate_sample_stds(const SimConfig& config) {
  validate(config);
  std::vector<double> stds(config.m);
  parallel_for(config.m, config.threads, [&](std::size_t i) {
    const std::vector<double> row = simulate_row(config, i);
    stds[i] = sample_std(row);
  });
  return stds;
}

double basel2_risk(std::span<const double> returns, std::size_t yearly_window) {
  if (yearly_window < 2) throw std::domain_error("basel2_risk: window must be >= 2");
  if (returns.size() < yearly_window) {
    throw std::domain_error("basel2_risk: series shorter than the rolling window");
  }
  const double overall = sample_std(returns);

  // Rolling sums over the series shifted by its first element: variance is
  // shift-invariant, the cancellation is better conditioned, and an exactly
  // constant series yields exactly zero.
  std::vector<double> shifted(returns.begin(), returns.end());
  for (double& v : shifted) v -= returns[0];

  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < yearly_window; ++i) {
    sum += shifted[i];
    sumsq += shifted[i] * shifted[i];
  }
  double max_rolling = window_std_from_sums(sum, sumsq, yearly_window);
  for (std::size_t i = yearly_window; i < shifted.size(); ++i) {
    const double in = shifted[i];
    const double out = shifted[i - yearly_window];
    sum += in - out;
    sumsq += in * in - out * out;
    max_rolling = std::max(max_rolling, window_std_from_sums(sum, sumsq, yearly_window));
  }
  return overall + max_rolling;
}

ExperimentResult basel1_experiment(const SimConfig& config, double bin_width) {
  ExperimentResult result;
  result.standardizer = population_std(config.distribution);
  result.values = simulate_sample_stds(config);
  for (double& v : result.values) v /= result.standardizer;
  result.histogram = Histogram::with_width(result.values, bin_width);
  return result;
}

ExperimentResult basel2_experiment(const SimConfig& config, std::size_t yearly_window,
                                   double bin_width) {
  validate(config);
  if (config.n < yearly_window) {
    throw std::domain_error("basel2_experiment: n must be >= the rolling window");
  }
  std::vector<double> risks(config.m);
  parallel_for(config.m, config.threads, [&](std::size_t i) {
    const std::vector<double> row = simulate_row(config, i);
    risks[i] = basel2_risk(row, yearly_window);
  });

  ExperimentResult result;
  result.standardizer = std::accumulate(risks.begin(), risks.end(), 0.0) / risks.size();
  if (!(result.standardizer > 0.0)) {
    throw std::domain_error("basel2_experiment: degenerate zero-risk cross-section");
  }
  result.values = std::move(risks);
  for (double& v : result.values) v /= result.standardizer;
  result.histogram = Histogram::with_width(result.values, bin_width);
  return result;
}

ExperimentResult basel2_experiment_from_returns(const std::vector<std::vector<double>>& returns,
                                                std::size_t yearly_window, double bin_width) {
  if (returns.empty()) throw std::domain_error("basel2_experiment: no securities");
  std::vector<double> risks(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i) {
    risks[i] = basel2_risk(returns[i], yearly_window);
  }
  ExperimentResult result;
  result.standardizer = std::accumulate(risks.begin(), risks.end(), 0.0) / risks.size();
  if (!(result.standardizer > 0.0)) {
    throw std::domain_error("basel2_experiment: degenerate zero-risk cross-section");
  }
  result.values = std::move(risks);
  for (double& v : result.values) v /= result.standardizer;
  result.histogram = Histogram::with_width(result.values, bin_width);
  return result;
}

nlohmann::json to_json(const MomentSummary& moments) {
  return {{"mean", moments.mean}, {"std", moments.std}, {"kurtosis", moments.kurtosis}};
}

nlohmann::json to_json(const ExperimentResult& result) {
  const auto [min_it, max_it] = std::minmax_element(result.values.begin(), result.values.end());
  return {{"standardizer", result.standardizer},
          {"count", result.values.size()},
          {"min", *min_it},
          {"max", *max_it},
          {"histogram", result.histogram.to_json()}};
}

}  // namespace riskcap::montecarlo
