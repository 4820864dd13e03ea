#include "ccrecon/delay_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ccrecon/errors.hpp"

namespace ccrecon {

namespace {

constexpr int kMaxSeriesTerms = 100000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by modified Lentz.
double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxSeriesTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void require_tau(double tau) {
  if (!std::isfinite(tau) || tau < 0.0)
    throw DomainError("delay must be finite and non-negative, got " + std::to_string(tau));
}

}  // namespace

void validate(const DelaySpec& spec) {
  if (!(spec.shape > 0.0) || !std::isfinite(spec.shape))
    throw DomainError("delay shape must be positive");
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale))
    throw DomainError("delay scale must be positive");
  if (!(spec.tau_min >= 0.0) || !(spec.tau_max > spec.tau_min) || !std::isfinite(spec.tau_max))
    throw DomainError("delay window requires 0 <= tau_min < tau_max");
  if (!(window_mass(spec) > 0.0)) throw DomainError("delay window has zero probability mass");
}

DelaySpec metu_git_delay() { return DelaySpec{42.27, 0.35, 5.0, 517.0}; }

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("incomplete gamma requires a > 0");
  if (std::isnan(x) || x < 0.0) throw DomainError("incomplete gamma requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, gamma_series(a, x));
  return std::max(0.0, 1.0 - gamma_continued_fraction(a, x));
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma defined here for x > 0 only");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  result += std::log(x) - 0.5 / x -
            f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
  return result;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma defined here for x > 0 only");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  result += 1.0 / x + f / 2.0 +
            f / x * (1.0 / 6 - f * (1.0 / 30 - f * (1.0 / 42 - f * (1.0 / 30 - f * (5.0 / 66)))));
  return result;
}

double gamma_log_pdf(double tau, const DelaySpec& spec) {
  require_tau(tau);
  if (tau == 0.0) {
    if (spec.shape > 1.0) return -std::numeric_limits<double>::infinity();
    if (spec.shape < 1.0) return std::numeric_limits<double>::infinity();
    return -std::log(spec.scale);
  }
  return (spec.shape - 1.0) * std::log(tau) - tau / spec.scale - std::lgamma(spec.shape) -
         spec.shape * std::log(spec.scale);
}

double gamma_pdf(double tau, const DelaySpec& spec) { return std::exp(gamma_log_pdf(tau, spec)); }

double gamma_cdf(double tau, const DelaySpec& spec) {
  require_tau(tau);
  return regularized_gamma_p(spec.shape, tau / spec.scale);
}

double window_mass(const DelaySpec& spec) {
  return regularized_gamma_p(spec.shape, spec.tau_max / spec.scale) -
         regularized_gamma_p(spec.shape, spec.tau_min / spec.scale);
}

double truncated_pdf(double tau, const DelaySpec& spec) {
  validate(spec);
  if (!(tau > spec.tau_min) || tau > spec.tau_max) return 0.0;
  return gamma_pdf(tau, spec) / window_mass(spec);
}

TruncatedGamma::TruncatedGamma(const DelaySpec& spec)
    : spec_(spec), shape_minus_one_(spec.shape - 1.0), log_norm_(0.0) {
  validate(spec_);
  log_norm_ = std::lgamma(spec_.shape) + spec_.shape * std::log(spec_.scale) +
              std::log(window_mass(spec_));
}

double TruncatedGamma::mean() const {
  // E[X | a < X <= b] = k theta (P(k+1, b/theta) - P(k+1, a/theta)) / (P(k, b/theta) - P(k, a/theta))
  const double k = spec_.shape;
  const double th = spec_.scale;
  const double upper = regularized_gamma_p(k + 1.0, spec_.tau_max / th) -
                       regularized_gamma_p(k + 1.0, spec_.tau_min / th);
  return k * th * upper / window_mass(spec_);
}

double sample_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("gamma sampling needs shape, scale > 0");
  if (shape < 1.0) {
    // Boost to shape + 1 and scale back down by U^(1/shape).
    const double boosted = sample_gamma(shape + 1.0, 1.0, rng);
    return scale * boosted * std::pow(uniform01(rng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return scale * d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double sample_delay(const DelaySpec& spec, Rng& rng) {
  for (std::size_t attempt = 0; attempt < kMaxSamplingAttempts; ++attempt) {
    const double tau = sample_gamma(spec.shape, spec.scale, rng);
    if (tau > spec.tau_min && tau <= spec.tau_max) return tau;
  }
  throw SamplingError("no delay fell inside (" + std::to_string(spec.tau_min) + ", " +
                      std::to_string(spec.tau_max) + "] after " +
                      std::to_string(kMaxSamplingAttempts) + " attempts");
}

DelaySpec fit_gamma(std::span<const double> samples) {
  if (samples.size() < kMinFitSamples)
    throw FitError("gamma fit needs at least " + std::to_string(kMinFitSamples) + " samples, got " +
                   std::to_string(samples.size()));
  double sum = 0.0;
  double sum_log = 0.0;
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) throw FitError("gamma fit needs positive finite samples");
    sum += x;
    sum_log += std::log(x);
  }
  const double n = static_cast<double>(samples.size());
  const double mean = sum / n;
  const double s = std::log(mean) - sum_log / n;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (!(s > 1e-14) || *lo == *hi) throw FitError("gamma fit: samples have zero variance");

  // Minka's log-moment starting point, then Newton on log k - digamma(k) = s.
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = std::log(k) - digamma(k) - s;
    const double df = 1.0 / k - trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = k / 2.0;
    const bool done = std::abs(next - k) <= 1e-13 * k;
    k = next;
    if (done) break;
  }
  if (!std::isfinite(k) || !(k > 0.0)) throw FitError("gamma fit did not converge");

  DelaySpec spec{k, mean / k, *lo, *hi};
  validate(spec);
  return spec;
}

}  // namespace ccrecon
