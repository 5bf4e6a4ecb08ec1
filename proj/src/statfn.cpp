#include "riskcap/statfn.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskcap::statfn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2

double clamp01(double p) {
  if (p < 0.0) return 0.0;
  if (p > 1.0) return 1.0;
  return p;
}

// Stirling correction sum B_{2k} / (2k(2k-1) x^{2k-1}), valid for x >= 12.
double stirling_correction(double x) {
  const double r = 1.0 / (x * x);
  double s = 1.0 / 1188.0;
  s = s * r - 1.0 / 1680.0;
  s = s * r + 1.0 / 1260.0;
  s = s * r - 1.0 / 360.0;
  s = s * r + 1.0 / 12.0;
  return s / x;
}

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 100000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
  }
  throw std::runtime_error("gamma_p: series failed to converge");
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) {
      return h * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
  }
  throw std::runtime_error("gamma_p: continued fraction failed to converge");
}

double chi2_pdf(int k, double x) {
  if (x <= 0.0) return 0.0;
  const double a = 0.5 * k;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - log_gamma(a));
}

}  // namespace

void validate(const TailSpec& spec) {
  if (spec.n < 2) throw std::domain_error("TailSpec: n must be >= 2");
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) {
    throw std::domain_error("TailSpec: alpha must be in (0, 1]");
  }
}

void validate(const StdDevLaw& law) {
  if (law.n < 2) throw std::domain_error("StdDevLaw: n must be >= 2");
  if (!(law.sigma > 0.0)) throw std::domain_error("StdDevLaw: sigma must be > 0");
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: x must be > 0");
  // Shift into the Stirling regime, ln G(x) = ln G(x+k) - ln(x (x+1) ... (x+k-1)).
  double shift = 1.0;
  double z = x;
  while (z < 12.0) {
    shift *= z;
    z += 1.0;
  }
  const double lg = (z - 0.5) * std::log(z) - z + kHalfLog2Pi + stirling_correction(z);
  return lg - std::log(shift);
}

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma_p: a must be > 0");
  if (std::isnan(x)) throw std::domain_error("gamma_p: x is NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return clamp01(gamma_p_series(a, x));
  return clamp01(1.0 - gamma_q_cf(a, x));
}

double chi2_cdf(int k, double x) {
  if (k < 1) throw std::domain_error("chi2_cdf: degrees of freedom must be >= 1");
  return gamma_p(0.5 * k, 0.5 * x);
}

double chi2_quantile(int k, double p) {
  if (k < 1) throw std::domain_error("chi2_quantile: degrees of freedom must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p must be in (0, 1)");

  // Wilson-Hilferty cube start.
  const double z = normal_quantile(p);
  const double t = 2.0 / (9.0 * k);
  double x = k * std::pow(1.0 - t + z * std::sqrt(t), 3);
  if (!(x > 0.0) || !std::isfinite(x)) x = static_cast<double>(k);

  // Bracket the root, then Newton with bisection fallback.
  double lo = 0.0;
  double hi = x;
  while (chi2_cdf(k, hi) < p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("chi2_quantile: bracket failed");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double f = chi2_cdf(k, x) - p;
    if (std::fabs(f) < 1e-13) return x;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double d = chi2_pdf(k, x);
    double next = (d > 0.0) ? x - f / d : 0.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0, 1)");

  // Acklam's rational approximation.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * 2.50662827463100050242 * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double k_n(int n) {
  if (n < 2) throw std::domain_error("k_n: n must be >= 2");
  const double half = 0.5 * (n - 1);
  return std::exp(log_gamma(0.5 * n) - log_gamma(half) - 0.5 * std::log(half));
}

double sample_std_cdf(const StdDevLaw& law, double x) {
  validate(law);
  if (x <= 0.0) return 0.0;
  const double r = x / law.sigma;
  return chi2_cdf(law.n - 1, (law.n - 1) * r * r);
}

double sample_std_pdf(const StdDevLaw& law, double x) {
  validate(law);
  if (!(x > 0.0)) throw std::domain_error("sample_std_pdf: x must be > 0");
  const double a = 0.5 * (law.n - 1);
  const double r = x / law.sigma;
  const double lf = std::log(2.0) + a * std::log(a) - log_gamma(a) -
                    2.0 * a * std::log(law.sigma) + (law.n - 2) * std::log(x) - a * r * r;
  return std::exp(lf);
}

double cond_tail_expectation(const TailSpec& spec) {
  validate(spec);
  const double bias = k_n(spec.n);
  if (spec.alpha == 1.0) return bias;  // conditioning on everything

  // Quantile of chi^2_{n-1} at the tail boundary; the conditioning region
  // has mass alpha on the requested side of it.
  const double q_level = spec.side == TailSide::lower ? spec.alpha : 1.0 - spec.alpha;
  const double q = chi2_quantile(spec.n - 1, q_level);
  const double p = chi2_cdf(spec.n, q);
  const double mass = spec.side == TailSide::lower ? p : 1.0 - p;
  return bias * mass / spec.alpha;
}

double expected_tail_count(int m, int n, double beta) {
  if (m < 1) throw std::domain_error("expected_tail_count: m must be >= 1");
  if (n < 2) throw std::domain_error("expected_tail_count: n must be >= 2");
  if (!(beta > 0.0)) throw std::domain_error("expected_tail_count: beta must be > 0");
  return m * chi2_cdf(n - 1, (n - 1) * beta * beta);
}

double basel_multiplier(int horizon_days, double confidence, double supervisory_factor) {
  if (horizon_days < 1) throw std::domain_error("basel_multiplier: horizon must be >= 1 day");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::domain_error("basel_multiplier: confidence must be in (0, 1)");
  }
  if (!(supervisory_factor > 0.0)) {
    throw std::domain_error("basel_multiplier: supervisory factor must be > 0");
  }
  return std::sqrt(static_cast<double>(horizon_days)) * normal_quantile(confidence) *
         supervisory_factor;
}

}  // namespace riskcap::statfn
