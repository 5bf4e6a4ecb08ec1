#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "json.hpp"
#include "riskcap/rng.hpp"

namespace riskcap::montecarlo {

// Jump-replacement return distribution: standard normal draws with the
// band (-epsilon, epsilon) replaced by a constant jump of magnitude h and
// the sign of the original draw.
struct FatTailParams {
  double epsilon = 0.01;
  double jump = 10.0;
};

struct NormalDist {
  double sigma = 1.0;
};

struct FatDist {
  FatTailParams params{};
};

using Distribution = std::variant<NormalDist, FatDist>;

struct SimConfig {
  std::size_t m = 1;       // securities
  std::size_t n = 2;       // observations per security
  std::uint64_t seed = 0;  // master seed; security i draws from substream i
  Distribution distribution = NormalDist{};
  unsigned threads = 1;
};

void validate(const FatTailParams& params);
void validate(const SimConfig& config);

struct MomentSummary {
  double mean = 0.0;
  double std = 0.0;       // n-1 denominator for sample estimates
  double kurtosis = 0.0;  // standardized fourth central moment, normal = 3
};

// Uniform-width histogram with edges aligned to multiples of the width, so
// the binning is a pure function of the values.
class Histogram {
 public:
  static Histogram with_width(std::span<const double> values, double width);

  const std::vector<double>& bin_edges() const { return bin_edges_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }

  void write_csv(std::ostream& out) const;  // bin_lo,bin_hi,count
  nlohmann::json to_json() const;

 private:
  std::vector<double> bin_edges_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// The jump replacement applied to one underlying normal draw z. A draw of
// exactly zero maps to +h.
double fat_tail_transform(double z, const FatTailParams& params);
double draw_fat_tail(CounterRng& rng, const FatTailParams& params);

// Exact moments of the jump-replacement distribution, from the truncated
// normal moment identities.
MomentSummary fat_tail_population_moments(const FatTailParams& params);

// Population standard deviation of the configured return distribution.
double population_std(const Distribution& dist);

// Sample statistics. sample_std uses the n-1 denominator; sample_moments
// reports the plain moment-ratio kurtosis.
double sample_std(std::span<const double> values);
MomentSummary sample_moments(std::span<const double> values);

// One security's return row under its substream.
std::vector<double> simulate_row(const SimConfig& config, std::size_t security);

// Full m x n return matrix; row i is substream i, so prefix rows are
// stable in m and results do not depend on the thread count.
std::vector<std::vector<double>> simulate_returns(const SimConfig& config);

// Per-security sample standard deviations without materializing the matrix.
std::vector<double> simulate_sample_stds(const SimConfig& config);

// Overall standard deviation plus the highest rolling standard deviation
// over contiguous windows of the given length (step 1).
double basel2_risk(std::span<const double> returns, std::size_t yearly_window);

struct ExperimentResult {
  std::vector<double> values;  // standardized per-security values
  double standardizer = 0.0;
  Histogram histogram;
};

// Per-security sample stds divided by the population std of the configured
// distribution (Basel I style measurement).
ExperimentResult basel1_experiment(const SimConfig& config, double bin_width = 0.01);

// Per-security basel2_risk standardized by its cross-sectional mean.
ExperimentResult basel2_experiment(const SimConfig& config, std::size_t yearly_window,
                                   double bin_width = 0.01);
ExperimentResult basel2_experiment_from_returns(const std::vector<std::vector<double>>& returns,
                                                std::size_t yearly_window,
                                                double bin_width = 0.01);

nlohmann::json to_json(const MomentSummary& moments);
nlohmann::json to_json(const ExperimentResult& result);

}  // namespace riskcap::montecarlo
