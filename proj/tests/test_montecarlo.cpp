#include "riskcap/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "riskcap/statfn.hpp"

using namespace riskcap;
using montecarlo::CounterRng;
using montecarlo::FatDist;
using montecarlo::FatTailParams;
using montecarlo::NormalDist;
using montecarlo::SimConfig;

TEST_CASE("fat_tail_transform") {
  const FatTailParams params{0.01, 10.0};
  CHECK(montecarlo::fat_tail_transform(-0.005, params) == -10.0);
  CHECK(montecarlo::fat_tail_transform(0.005, params) == 10.0);
  CHECK(montecarlo::fat_tail_transform(1.7, params) == 1.7);
  CHECK(montecarlo::fat_tail_transform(-2.3, params) == -2.3);
  CHECK(montecarlo::fat_tail_transform(0.01, params) == 0.01);  // band is open
  CHECK(montecarlo::fat_tail_transform(0.0, params) == 10.0);   // zero maps to +h
  // empty band leaves everything alone, including zero
  CHECK(montecarlo::fat_tail_transform(0.0, {0.0, 10.0}) == 0.0);
  CHECK(montecarlo::fat_tail_transform(0.003, {0.0, 10.0}) == 0.003);
}

TEST_CASE("FatTailParams validation") {
  CHECK_THROWS_AS(montecarlo::validate(FatTailParams{-0.1, 10.0}), std::domain_error);
  CHECK_THROWS_AS(montecarlo::validate(FatTailParams{0.01, 0.0}), std::domain_error);
  CHECK_THROWS_AS(montecarlo::validate(FatTailParams{0.5, 0.1}), std::domain_error);
  CHECK_NOTHROW(montecarlo::validate(FatTailParams{0.0, 1.0}));
}

TEST_CASE("fat_tail_population_moments closed form") {
  const auto m = montecarlo::fat_tail_population_moments({0.01, 10.0});
  CHECK(m.mean == 0.0);
  CHECK(m.std == doctest::Approx(1.34084711916489).epsilon(1e-9));
  CHECK(std::fabs(m.std - 1.3409) < 0.0005);
  CHECK(m.kurtosis == doctest::Approx(25.6121333690725).epsilon(1e-9));
  CHECK(std::fabs(m.kurtosis - 25.6) < 0.1);

  const auto degenerate = montecarlo::fat_tail_population_moments({0.0, 10.0});
  CHECK(degenerate.std == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(degenerate.kurtosis == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("fat_tail_population_moments against a batched Monte Carlo oracle") {
  // 10 batches of 1e6 draws; the batch spread gives the standard errors.
  const FatTailParams params{0.01, 10.0};
  const auto pop = montecarlo::fat_tail_population_moments(params);
  constexpr int kBatches = 10;
  constexpr std::size_t kBatchSize = 1000000;
  std::vector<double> means, stds, kurts;
  std::vector<double> draws(kBatchSize);
  for (int b = 0; b < kBatches; ++b) {
    CounterRng rng(424242, static_cast<std::uint64_t>(b));
    for (double& d : draws) d = montecarlo::draw_fat_tail(rng, params);
    const auto mom = montecarlo::sample_moments(draws);
    means.push_back(mom.mean);
    stds.push_back(mom.std);
    kurts.push_back(mom.kurtosis);
  }
  auto mean_and_se = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, std::sqrt(ss / (v.size() - 1) / v.size())};
  };
  const auto [mean_mc, mean_se] = mean_and_se(means);
  const auto [std_mc, std_se] = mean_and_se(stds);
  const auto [kurt_mc, kurt_se] = mean_and_se(kurts);
  // the grand mean has the exact SE sigma/sqrt(N); the others use the
  // batch-spread estimate
  CHECK(std::fabs(mean_mc - pop.mean) <
        3.0 * pop.std / std::sqrt(static_cast<double>(kBatches) * kBatchSize));
  CHECK(std::fabs(std_mc - pop.std) < 3.0 * std_se);
  CHECK(std::fabs(kurt_mc - pop.kurtosis) < 3.0 * kurt_se);
  CHECK(mean_se > 0.0);
}

TEST_CASE("no fat-tail draw lands inside the replacement band") {
  const FatTailParams params{0.01, 10.0};
  CounterRng rng(7, 0);
  for (int i = 0; i < 100000; ++i) {
    const double x = montecarlo::draw_fat_tail(rng, params);
    CHECK(!(std::fabs(x) < params.epsilon));
  }
}

TEST_CASE("epsilon = 0 reproduces the plain normal stream") {
  SimConfig fat{5, 31, 99, FatDist{{0.0, 10.0}}, 1};
  SimConfig normal{5, 31, 99, NormalDist{1.0}, 1};
  CHECK(montecarlo::simulate_returns(fat) == montecarlo::simulate_returns(normal));
}

TEST_CASE("sample_std hand values") {
  CHECK(montecarlo::sample_std(std::vector{3.5, 3.5, 3.5}) == 0.0);
  CHECK(montecarlo::sample_std(std::vector{0.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(montecarlo::sample_std(std::vector{1.0, 2.0, 3.0, 4.0}) ==
        doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(montecarlo::sample_std(std::vector{1.0}), std::domain_error);
}

TEST_CASE("sample_moments basics") {
  const auto m = montecarlo::sample_moments(std::vector{-1.0, 1.0, -1.0, 1.0});
  CHECK(m.mean == 0.0);
  CHECK(m.kurtosis == doctest::Approx(1.0));  // two-point distribution floor
  CHECK(m.kurtosis >= 1.0);
}

TEST_CASE("simulate_returns determinism and substream stability") {
  SimConfig config{3, 16, 20240601, NormalDist{1.0}, 1};
  const auto a = montecarlo::simulate_returns(config);
  const auto b = montecarlo::simulate_returns(config);
  CHECK(a == b);

  SimConfig one{1, 16, 20240601, NormalDist{1.0}, 1};
  CHECK(montecarlo::simulate_returns(one)[0] == a[0]);  // prefix rows stable in m

  SimConfig threaded = config;
  threaded.threads = 4;
  CHECK(montecarlo::simulate_returns(threaded) == a);

  CHECK_THROWS_AS(montecarlo::simulate_returns(SimConfig{0, 16, 1, NormalDist{1.0}, 1}),
                  std::domain_error);
  CHECK_THROWS_AS(montecarlo::simulate_returns(SimConfig{1, 1, 1, NormalDist{1.0}, 1}),
                  std::domain_error);
}

TEST_CASE("single-security moments match the fat-tail population law") {
  SimConfig config{1, 1000000, 777, FatDist{{0.01, 10.0}}, 1};
  const auto row = montecarlo::simulate_returns(config)[0];
  const auto mom = montecarlo::sample_moments(row);
  const auto pop = montecarlo::fat_tail_population_moments({0.01, 10.0});
  // 3 SE bands: SE(mean) = std/sqrt(N); SE(std) and SE(kurt) from the exact
  // fourth/eighth moments are ~1.1e-3 and ~0.4 at N = 1e6.
  CHECK(std::fabs(mom.mean - 0.0) < 3.0 * pop.std / 1000.0);
  CHECK(std::fabs(mom.std - pop.std) < 0.01);
  CHECK(std::fabs(mom.kurtosis - pop.kurtosis) < 1.2);
}

TEST_CASE("scaling sigma scales sample stds exactly") {
  SimConfig base{8, 60, 5150, NormalDist{1.0}, 1};
  SimConfig doubled{8, 60, 5150, NormalDist{2.0}, 1};
  const auto s1 = montecarlo::simulate_sample_stds(base);
  const auto s2 = montecarlo::simulate_sample_stds(doubled);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s2[i] == 2.0 * s1[i]);  // power-of-two scale commutes with rounding
  }
  // standardized ratios are unchanged
  const auto r1 = montecarlo::basel1_experiment(base);
  const auto r2 = montecarlo::basel1_experiment(doubled);
  for (std::size_t i = 0; i < r1.values.size(); ++i) {
    CHECK(r1.values[i] == r2.values[i]);
  }
}

TEST_CASE("fraction of low ratios follows the chi-square law") {
  SimConfig config{20000, 60, 31337, NormalDist{1.0}, 4};
  const auto result = montecarlo::basel1_experiment(config);
  for (double beta : {0.8, 0.9, 1.0}) {
    const double p = statfn::chi2_cdf(59, 59 * beta * beta);
    const double frac =
        static_cast<double>(std::count_if(result.values.begin(), result.values.end(),
                                          [&](double v) { return v < beta; })) /
        static_cast<double>(result.values.size());
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(config.m));
    CHECK(std::fabs(frac - p) < 3.0 * se);
  }
}

TEST_CASE("basel2_risk hand cases") {
  const std::vector<double> constant(300, 0.25);
  CHECK(montecarlo::basel2_risk(constant, 252) == 0.0);

  std::vector<double> series{0.01, -0.02, 0.03, 0.002, -0.013};
  CHECK(montecarlo::basel2_risk(series, series.size()) ==
        doctest::Approx(2.0 * montecarlo::sample_std(series)).epsilon(1e-14));

  CHECK_THROWS_AS(montecarlo::basel2_risk(series, 6), std::domain_error);
  CHECK_THROWS_AS(montecarlo::basel2_risk(series, 1), std::domain_error);
}

TEST_CASE("basel2_risk against the brute-force window oracle") {
  // 252 alternating +-1 then 252 zeros: the max rolling window is the first.
  std::vector<double> series(504, 0.0);
  for (int i = 0; i < 252; ++i) series[i] = i % 2 == 0 ? 1.0 : -1.0;

  double max_window = 0.0;
  for (std::size_t start = 0; start + 252 <= series.size(); ++start) {
    const std::span<const double> window(series.data() + start, 252);
    max_window = std::max(max_window, montecarlo::sample_std(window));
  }
  const double expected = montecarlo::sample_std(series) + max_window;
  CHECK(montecarlo::basel2_risk(series, 252) == doctest::Approx(expected).epsilon(1e-12));
  const std::span<const double> first_window(series.data(), 252);
  CHECK(max_window == doctest::Approx(montecarlo::sample_std(first_window)).epsilon(1e-14));

  // random series: rolling-sum implementation vs direct per-window stds
  CounterRng rng(2024, 5);
  std::vector<double> noisy(400);
  for (double& v : noisy) v = rng.next_normal();
  double brute = 0.0;
  for (std::size_t start = 0; start + 63 <= noisy.size(); ++start) {
    brute = std::max(brute, montecarlo::sample_std(std::span(noisy.data() + start, 63)));
  }
  CHECK(montecarlo::basel2_risk(noisy, 63) ==
        doctest::Approx(montecarlo::sample_std(noisy) + brute).epsilon(1e-10));
}

TEST_CASE("basel2_risk dominates the whole-series std") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng(seed, 0);
    std::vector<double> series(120);
    for (double& v : series) v = rng.next_normal();
    CHECK(montecarlo::basel2_risk(series, 30) > montecarlo::sample_std(series));
  }
}

TEST_CASE("basel1_experiment consistency for one long security") {
  SimConfig config{1, 1000000, 11, NormalDist{1.0}, 1};
  const auto result = montecarlo::basel1_experiment(config);
  CHECK(std::fabs(result.values[0] - 1.0) < 0.01);
}

TEST_CASE("basel1_experiment low-tail count sits in the Poisson band") {
  SimConfig config{1000, 60, 1, NormalDist{1.0}, 4};
  const auto result = montecarlo::basel1_experiment(config);
  const double lambda = statfn::expected_tail_count(1000, 60, 0.8);
  const auto count = std::count_if(result.values.begin(), result.values.end(),
                                   [](double v) { return v < 0.8; });
  CHECK(static_cast<std::size_t>(count) >= oracle::poisson_quantile(lambda, 0.005));
  CHECK(static_cast<std::size_t>(count) <= oracle::poisson_quantile(lambda, 0.995));
}

TEST_CASE("histogram invariants") {
  const std::vector<double> values{0.81, 0.84, 0.999, 1.0, 1.0, 1.17, 0.80};
  const auto h = montecarlo::Histogram::with_width(values, 0.01);
  CHECK(h.total() == values.size());
  CHECK(std::accumulate(h.counts().begin(), h.counts().end(), std::uint64_t{0}) == h.total());
  for (std::size_t i = 1; i < h.bin_edges().size(); ++i) {
    CHECK(h.bin_edges()[i] > h.bin_edges()[i - 1]);
  }
  CHECK(h.bin_edges().front() <= 0.80);
  CHECK(h.bin_edges().back() >= 1.17);
  CHECK_THROWS_AS(montecarlo::Histogram::with_width(values, 0.0), std::domain_error);
}

TEST_CASE("basel2_experiment standardization") {
  SimConfig config{1, 300, 3, NormalDist{1.0}, 1};
  const auto result = montecarlo::basel2_experiment(config, 252);
  CHECK(result.values[0] == 1.0);  // self-normalization

  const std::vector<std::vector<double>> flat(4, std::vector<double>(300, 0.01));
  CHECK_THROWS_AS(montecarlo::basel2_experiment_from_returns(flat, 252), std::domain_error);

  CHECK_THROWS_AS(montecarlo::basel2_experiment(SimConfig{2, 100, 3, NormalDist{1.0}, 1}, 252),
                  std::domain_error);
}

TEST_CASE("experiments are thread-count invariant") {
  SimConfig config{64, 400, 6, FatDist{{0.01, 10.0}}, 1};
  SimConfig threaded = config;
  threaded.threads = 4;
  CHECK(montecarlo::basel1_experiment(config).values ==
        montecarlo::basel1_experiment(threaded).values);
  CHECK(montecarlo::basel2_experiment(config, 252).values ==
        montecarlo::basel2_experiment(threaded, 252).values);
}

TEST_CASE("histogram CSV shape") {
  const auto h = montecarlo::Histogram::with_width(std::vector{0.5, 0.51, 0.52}, 0.01);
  std::ostringstream out;
  h.write_csv(out);
  CHECK(out.str().substr(0, 20) == "bin_lo,bin_hi,count\n");
}
