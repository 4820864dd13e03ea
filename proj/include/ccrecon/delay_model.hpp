#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ccrecon/random.hpp"

namespace ccrecon {

/// Gamma end-to-end delay restricted to the window (tau_min, tau_max].
/// All times are milliseconds.
struct DelaySpec {
  double shape = 0.0;
  double scale = 0.0;
  double tau_min = 0.0;
  double tau_max = 0.0;

  friend bool operator==(const DelaySpec&, const DelaySpec&) = default;
};

/// Throws DomainError unless shape, scale > 0, 0 <= tau_min < tau_max and the
/// window carries positive probability.
void validate(const DelaySpec& spec);

/// Delay fitted to the METU-GIT RIPE TTM path: k = 42.27, theta = 0.35 ms,
/// window (5, 517] ms. Default for every simulation and inference.
DelaySpec metu_git_delay();

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
/// Series for x < a + 1, Lentz continued fraction for the complement otherwise.
double regularized_gamma_p(double a, double x);

double digamma(double x);
double trigamma(double x);

double gamma_log_pdf(double tau, const DelaySpec& spec);
double gamma_pdf(double tau, const DelaySpec& spec);
double gamma_cdf(double tau, const DelaySpec& spec);

/// Probability mass of the Gamma law inside (tau_min, tau_max].
double window_mass(const DelaySpec& spec);

/// Gamma density renormalized to the window; exactly 0 outside it.
double truncated_pdf(double tau, const DelaySpec& spec);

/// Truncated density with the normalizer computed once. Used in the O(n^2)
/// inner loops of level inference and edge weighting.
class TruncatedGamma {
 public:
  explicit TruncatedGamma(const DelaySpec& spec);

  double pdf(double tau) const {
    if (!(tau > spec_.tau_min) || tau > spec_.tau_max) return 0.0;
    return std::exp(shape_minus_one_ * std::log(tau) - tau / spec_.scale - log_norm_);
  }

  const DelaySpec& spec() const noexcept { return spec_; }
  double mean() const;

 private:
  DelaySpec spec_;
  double shape_minus_one_;
  double log_norm_;  // lgamma(k) + k log(theta) + log(window mass)
};

/// Gamma(shape, scale) variate by Marsaglia-Tsang squeeze.
double sample_gamma(double shape, double scale, Rng& rng);

inline constexpr std::size_t kMaxSamplingAttempts = 1'000'000;

/// One delay from the truncated law by rejection against the window.
/// Throws SamplingError after kMaxSamplingAttempts misses.
double sample_delay(const DelaySpec& spec, Rng& rng);

inline constexpr std::size_t kMinFitSamples = 30;

/// Maximum-likelihood Gamma fit (Newton on log k - digamma(k) = log mean -
/// mean log) with the window set to the sample extremes.
DelaySpec fit_gamma(std::span<const double> samples);

}  // namespace ccrecon
