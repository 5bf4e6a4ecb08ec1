#pragma once

#include <string>

namespace riskcap::statfn {

enum class TailSide { lower, upper };

// Query for the conditional expectation of the sample standard deviation:
// n return observations, conditioning tail of mass alpha, which tail.
// alpha always denotes the mass of the conditioning region, so the lower
// and upper APIs are symmetric.
struct TailSpec {
  int n = 2;
  double alpha = 1.0;
  TailSide side = TailSide::lower;
};

// Law of the sample standard deviation of n iid normal returns with true
// standard deviation sigma: (n-1) s_n^2 / sigma^2 is chi-square with n-1
// degrees of freedom.
struct StdDevLaw {
  int n = 2;
  double sigma = 1.0;
};

void validate(const TailSpec& spec);
void validate(const StdDevLaw& law);

// ln Gamma(x), x > 0. Stirling series with argument shift; accurate to a
// few ulp on [0.5, 1e4].
double log_gamma(double x);

// Regularized lower incomplete gamma P(a, x). Power series for x < a+1,
// Lentz continued fraction otherwise.
double gamma_p(double a, double x);

// CDF of the chi-square distribution with k degrees of freedom.
double chi2_cdf(int k, double x);

// Inverse of chi2_cdf: returns x with |chi2_cdf(k, x) - p| < 1e-10.
// Wilson-Hilferty starting point, then Newton safeguarded by bisection.
double chi2_quantile(int k, double p);

// Standard normal CDF and its inverse. The inverse uses Acklam's rational
// approximation polished with one Halley step: |Phi(result) - p| < 1e-14.
double normal_cdf(double x);
double normal_quantile(double p);

// Bias constant of the sample standard deviation under normality:
// K_n = Gamma(n/2) / (Gamma((n-1)/2) sqrt((n-1)/2)) = E[s_n]/sigma.
// Lies in (0,1), increasing in n, -> 1 as n -> infinity.
double k_n(int n);

// P(s_n <= x) and the corresponding density for the law above.
double sample_std_cdf(const StdDevLaw& law, double x);
double sample_std_pdf(const StdDevLaw& law, double x);

// E[s_n | s_n in tail] / sigma for the given tail. Dimensionless; callers
// multiply by sigma. alpha = 1 conditions on everything and returns K_n
// exactly (both sides).
double cond_tail_expectation(const TailSpec& spec);

// Expected number of securities, out of m with n observations each, whose
// sample standard deviation falls below beta times the true one:
// m * chi2_cdf(n-1, (n-1) beta^2).
double expected_tail_count(int m, int n, double beta);

// Risk-capital multiple of the daily standard deviation implied by a
// VaR-style rule: sqrt(horizon) * normal_quantile(confidence) * factor.
double basel_multiplier(int horizon_days, double confidence, double supervisory_factor);

}  // namespace riskcap::statfn
