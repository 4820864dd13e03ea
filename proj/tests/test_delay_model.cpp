#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <vector>

#include "ccrecon/delay_model.hpp"
#include "ccrecon/errors.hpp"
#include "oracles.hpp"

using namespace ccrecon;

namespace {

double integrate(auto f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

TEST_CASE("metu-git defaults") {
  const auto s = metu_git_delay();
  CHECK(s.shape == 42.27);
  CHECK(s.scale == 0.35);
  CHECK(s.tau_min == 5.0);
  CHECK(s.tau_max == 517.0);
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("validate rejects bad specs") {
  CHECK_THROWS_AS(validate(DelaySpec{0.0, 1.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(DelaySpec{1.0, -1.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(DelaySpec{1.0, 1.0, 5.0, 5.0}), DomainError);
  CHECK_THROWS_AS(validate(DelaySpec{1.0, 1.0, -1.0, 5.0}), DomainError);
  // the window lies so far in the tail that it holds no mass in double precision
  CHECK_THROWS_AS(validate(DelaySpec{42.27, 0.35, 5000.0, 6000.0}), DomainError);
}

TEST_CASE("special functions against boost") {
  for (double a : {0.3, 1.0, 2.5, 42.27, 43.27, 150.0})
    for (double x : {1e-3, 0.5, 1.0, 5.0, 14.79, 40.0, 42.27, 60.0, 300.0}) {
      const double ours = regularized_gamma_p(a, x);
      const double ref = boost::math::gamma_p(a, x);
      CHECK(ours == doctest::Approx(ref).epsilon(1e-12));
    }
  for (double x : {0.1, 0.5, 1.0, 3.7, 10.0, 42.27, 1000.0}) {
    CHECK(digamma(x) == doctest::Approx(boost::math::digamma(x)).epsilon(1e-12));
    CHECK(trigamma(x) == doctest::Approx(boost::math::trigamma(x)).epsilon(1e-12));
  }
}

TEST_CASE("gamma pdf") {
  const auto s = metu_git_delay();
  CHECK(gamma_pdf(0.0, s) == 0.0);
  CHECK_THROWS_AS(gamma_pdf(-1.0, s), DomainError);
  CHECK_THROWS_AS(gamma_pdf(std::nan(""), s), DomainError);

  const double total = integrate([&](double t) { return gamma_pdf(t, s); }, 0.0, 200.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));

  const double mode = (s.shape - 1.0) * s.scale;
  CHECK(mode == doctest::Approx(14.4445).epsilon(1e-12));
  const double h = 1e-4;
  const double slope = (gamma_pdf(mode + h, s) - gamma_pdf(mode - h, s)) / (2 * h);
  CHECK(std::abs(slope) < 1e-6);
  CHECK(gamma_pdf(mode, s) > gamma_pdf(mode - 0.5, s));
  CHECK(gamma_pdf(mode, s) > gamma_pdf(mode + 0.5, s));

  boost::math::gamma_distribution<double> g(s.shape, s.scale);
  for (double t : {5.0, 10.0, 14.0, 20.0, 30.0})
    CHECK(gamma_pdf(t, s) == doctest::Approx(boost::math::pdf(g, t)).epsilon(1e-12));
}

TEST_CASE("gamma cdf") {
  const auto s = metu_git_delay();
  CHECK(gamma_cdf(0.0, s) == 0.0);
  CHECK(gamma_cdf(1.0, DelaySpec{1.0, 1.0, 0.0, 10.0}) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));

  const double mean = s.shape * s.scale;
  const double at_mean = gamma_cdf(mean, s);
  CHECK(at_mean > 0.45);
  CHECK(at_mean < 0.55);

  // Monte-Carlo oracle with 10^6 draws
  Rng rng(20240601);
  std::size_t below = 0;
  const std::size_t draws = 1'000'000;
  for (std::size_t i = 0; i < draws; ++i) below += sample_gamma(s.shape, s.scale, rng) <= mean ? 1 : 0;
  const double mc = static_cast<double>(below) / draws;
  CHECK(std::abs(mc - at_mean) < 0.002);
}

TEST_CASE("truncated pdf") {
  const auto s = metu_git_delay();
  CHECK(truncated_pdf(4.0, s) == 0.0);
  CHECK(truncated_pdf(600.0, s) == 0.0);
  CHECK(truncated_pdf(5.0, s) == 0.0);
  CHECK(truncated_pdf(40.0, s) > 0.0);

  const double total = integrate([&](double t) { return truncated_pdf(t, s); }, 5.0, 517.0);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));

  const TruncatedGamma tg(s);
  for (double t : {4.0, 5.0, 5.5, 10.0, 14.4, 25.0, 517.0, 518.0})
    CHECK(tg.pdf(t) == doctest::Approx(oracle::window_density(t, s)).epsilon(1e-12));

  // a window that cuts deep into the body of the law
  const DelaySpec narrow{2.0, 3.0, 1.0, 4.0};
  const double narrow_total = integrate([&](double t) { return truncated_pdf(t, narrow); }, 1.0, 4.0);
  CHECK(narrow_total == doctest::Approx(1.0).epsilon(1e-9));
  const TruncatedGamma tn(narrow);
  const double mean = integrate([&](double t) { return t * truncated_pdf(t, narrow); }, 1.0, 4.0);
  CHECK(tn.mean() == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("sample_delay stays in the window and matches the quadrature mean") {
  const auto s = metu_git_delay();
  Rng rng(7);
  const std::size_t n = 100'000;
  double sum = 0.0;
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sample_delay(s, rng);
    inside = inside && d > s.tau_min && d <= s.tau_max;
    sum += d;
  }
  CHECK(inside);
  const double quad_mean = integrate([&](double t) { return t * truncated_pdf(t, s); }, 5.0, 517.0);
  CHECK(std::abs(sum / n - quad_mean) / quad_mean < 0.01);

  const DelaySpec narrow{2.0, 3.0, 1.0, 4.0};
  double nsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = sample_delay(narrow, rng);
    REQUIRE(d > 1.0);
    REQUIRE(d <= 4.0);
    nsum += d;
  }
  const double nmean = integrate([&](double t) { return t * truncated_pdf(t, narrow); }, 1.0, 4.0);
  CHECK(std::abs(nsum / n - nmean) / nmean < 0.01);
}

TEST_CASE("sample_delay is deterministic per seed") {
  const auto s = metu_git_delay();
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 1000; ++i) CHECK(sample_delay(s, a) == sample_delay(s, b));
}

TEST_CASE("sample_delay gives up on a window it cannot hit") {
  // about 1e-9 of the mass lies in the window, far below what 10^6 tries can find
  const DelaySpec tail{42.27, 0.35, 35.0, 36.0};
  REQUIRE(window_mass(tail) > 0.0);
  REQUIRE(window_mass(tail) < 1e-7);
  Rng rng(1);
  CHECK_THROWS_AS(sample_delay(tail, rng), SamplingError);
}

TEST_CASE("fit_gamma round trips") {
  Rng rng(11);
  std::vector<double> xs(100'000);
  for (auto& x : xs) x = sample_gamma(42.27, 0.35, rng);
  const auto fit = fit_gamma(xs);
  CHECK(std::abs(fit.shape - 42.27) / 42.27 < 0.05);
  CHECK(std::abs(fit.scale - 0.35) / 0.35 < 0.05);
  CHECK(fit.tau_min == *std::min_element(xs.begin(), xs.end()));
  CHECK(fit.tau_max == *std::max_element(xs.begin(), xs.end()));

  for (auto& x : xs) x = sample_gamma(2.0, 3.0, rng);
  const auto fit2 = fit_gamma(xs);
  CHECK(std::abs(fit2.shape - 2.0) / 2.0 < 0.05);
  CHECK(std::abs(fit2.scale - 3.0) / 3.0 < 0.05);
}

TEST_CASE("fit_gamma degenerate input") {
  std::vector<double> constant(100, 14.0);
  CHECK_THROWS_AS(fit_gamma(constant), FitError);
  std::vector<double> few(kMinFitSamples - 1, 1.0);
  for (std::size_t i = 0; i < few.size(); ++i) few[i] = 1.0 + static_cast<double>(i);
  CHECK_THROWS_AS(fit_gamma(few), FitError);
  std::vector<double> negative(100, 1.0);
  negative[3] = -2.0;
  CHECK_THROWS_AS(fit_gamma(negative), FitError);
}
