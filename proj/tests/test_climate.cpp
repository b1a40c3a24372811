#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "wecfarm/climate.hpp"
#include "wecfarm/util.hpp"

using namespace wecfarm;
using namespace wecfarm::climate;

namespace {

// independent bisection oracle for the dispersion relation
double dispersion_oracle(double omega, double h, double g) {
  double lo = 1e-12, hi = 10.0 * omega * omega / g + 10.0 / h;
  auto f = [&](double k) { return g * k * std::tanh(k * h) - omega * omega; };
  while (f(hi) < 0) hi *= 2;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// independent scripted arithmetic of the spectrum closed form
double jonswap_oracle(double hs, double tp, double w) {
  const double wp = 2.0 * M_PI / tp;
  const double ratio = tp / std::sqrt(hs);
  double gamma;
  if (ratio <= 3.6)
    gamma = 5.0;
  else if (ratio <= 5.0)
    gamma = std::exp(5.75 - 1.15 * ratio);
  else
    gamma = 1.0;
  const double beta = 1.25 * wp * wp * wp * wp;
  const double C = 1.0 - 0.287 * std::log(gamma);
  const double sigma = w <= wp ? 0.07 : 0.09;
  const double r = std::exp(-std::pow(w / wp - 1.0, 2) / (2.0 * sigma * sigma));
  const double alpha = beta / 4.0 * hs * hs * C * std::pow(gamma, r);
  return alpha * std::pow(w, -5.0) * std::exp(-beta * std::pow(w, -4.0));
}

double spectral_moment0(double hs, double tp) {
  // composite trapezoid over [0.01, 20]
  const std::size_t n = 40001;
  const double lo = 0.01, hi = 20.0;
  const double dw = (hi - lo) / static_cast<double>(n - 1);
  double m0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = lo + dw * static_cast<double>(i);
    const double s = jonswap(hs, tp, w);
    m0 += (i == 0 || i == n - 1) ? 0.5 * s : s;
  }
  return m0 * dw;
}

}  // namespace

TEST_CASE("gauss_legendre classical low-order rules") {
  const auto q2 = gauss_legendre(2, -1.0, 1.0);
  CHECK(q2.nodes[0] == doctest::Approx(-0.5773502692).epsilon(1e-9));
  CHECK(q2.nodes[1] == doctest::Approx(0.5773502692).epsilon(1e-9));
  CHECK(q2.weights[0] == doctest::Approx(1.0));
  CHECK(q2.weights[1] == doctest::Approx(1.0));

  const auto q1 = gauss_legendre(1, -1.0, 1.0);
  CHECK(q1.nodes[0] == doctest::Approx(0.0));
  CHECK(q1.weights[0] == doctest::Approx(2.0));

  const auto q1m = gauss_legendre(1, 3.0, 17.0);
  CHECK(q1m.nodes[0] == doctest::Approx(10.0));
  CHECK(q1m.weights[0] == doctest::Approx(14.0));
}

TEST_CASE("gauss_legendre node/weight structure") {
  const auto q = gauss_legendre(40, 0.25, 10.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    CHECK(q.nodes[i] > 0.25);
    CHECK(q.nodes[i] < 10.0);
    if (i > 0) CHECK(q.nodes[i] > q.nodes[i - 1]);
    CHECK(q.weights[i] > 0.0);
    sum += q.weights[i];
  }
  CHECK(sum == doctest::Approx(9.75).epsilon(1e-12));
  // integrates a cubic exactly
  double integral = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i)
    integral += q.weights[i] * q.nodes[i] * q.nodes[i] * q.nodes[i];
  CHECK(integral == doctest::Approx((std::pow(10.0, 4) - std::pow(0.25, 4)) / 4.0).epsilon(1e-12));
  CHECK_THROWS(gauss_legendre(0, -1.0, 1.0));
  CHECK_THROWS(gauss_legendre(3, 2.0, 2.0));
}

TEST_CASE("jonswap gamma branches") {
  // tp/sqrt(hs) = 3.5 <= 3.6 -> gamma = 5
  CHECK(jonswap_params(4.0, 7.0).gamma == doctest::Approx(5.0));
  // tp/sqrt(hs) ~ 5.657 > 5 -> gamma = 1, C(1) = 1
  const auto p = jonswap_params(2.0, 8.0);
  CHECK(p.gamma == doctest::Approx(1.0));
  // direct evaluation against the independent oracle at omega_p
  const double wp = 2.0 * M_PI / 8.0;
  const double expected = jonswap_oracle(2.0, 8.0, wp);
  CHECK(expected == doctest::Approx(0.45598654639838593).epsilon(1e-12));
  CHECK(jonswap(2.0, 8.0, wp) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS(jonswap(-1.0, 8.0, 1.0));
  CHECK_THROWS(jonswap(2.0, 8.0, 0.0));
}

TEST_CASE("jonswap branch values exact at thresholds and continuous in omega") {
  // ratio == 3.6 exactly: hs chosen so tp/sqrt(hs) == 3.6
  const double tp = 7.2, hs = (tp / 3.6) * (tp / 3.6);
  CHECK(jonswap_params(hs, tp).gamma == doctest::Approx(5.0));
  // ratio == 5 exactly: middle branch gives exp(5.75-5.75) = 1
  const double hs5 = (tp / 5.0) * (tp / 5.0);
  CHECK(jonswap_params(hs5, tp).gamma == doctest::Approx(1.0));
  // continuity across omega_p (sigma switch)
  const double wp = 2.0 * M_PI / 9.0;
  const double left = jonswap(3.0, 9.0, wp * (1 - 1e-9));
  const double right = jonswap(3.0, 9.0, wp * (1 + 1e-9));
  CHECK(left == doctest::Approx(right).epsilon(1e-6));
}

TEST_CASE("spectrum normalization: 4 sqrt(m0) tracks hs within 5%") {
  for (double hs : {0.25, 0.5, 1.0, 2.0, 4.0, 7.0, 10.0})
    for (double tp : {3.0, 5.0, 8.0, 11.0, 14.0, 17.0}) {
      const double m0 = spectral_moment0(hs, tp);
      CHECK(4.0 * std::sqrt(m0) == doctest::Approx(hs).epsilon(0.05));
    }
}

TEST_CASE("dispersion deep and shallow limits") {
  const double g = 9.81;
  // deep water: k ~ omega^2/g
  const double k = dispersion(2.0, 50.0, g);
  const double k_oracle = dispersion_oracle(2.0, 50.0, g);
  CHECK(k == doctest::Approx(k_oracle).epsilon(1e-9));
  CHECK(k == doctest::Approx(4.0 / g).epsilon(1e-3));
  // shallow water: k ~ omega / sqrt(g h)
  const double ks = dispersion(0.05, 1.0, g);
  CHECK(ks == doctest::Approx(0.05 / std::sqrt(g * 1.0)).epsilon(1e-3));
}

TEST_CASE("dispersion residual property and monotonicity") {
  const double g = 9.81;
  double prev = 0.0;
  for (double w : {0.1, 0.3, 0.7, 1.3, 2.0, 4.0}) {
    const double k = dispersion(w, 50.0, g);
    CHECK(std::abs(w * w - g * k * std::tanh(k * 50.0)) <= 1e-10 * w * w);
    CHECK(k > prev);
    prev = k;
  }
  CHECK_THROWS(dispersion(0.0, 50.0, g));
}

TEST_CASE("fit_climate mass normalization on lognormal synthetic data") {
  SyntheticSite site;
  const auto samples = synth_climate(site, 2, 300, 99);
  const auto model = fit_climate(samples, 24);
  REQUIRE(model.n_years() == 2);
  for (std::size_t y = 0; y < 2; ++y) {
    double sum = 0.0;
    for (double m : model.prob[y]) {
      CHECK(m >= 0.0);
      sum += m;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  for (double v : model.pdf[0]) CHECK(v >= 0.0);
}

TEST_CASE("fit_climate determinism and peaked kernels") {
  SyntheticSite site;
  const auto samples = synth_climate(site, 1, 100, 5);
  const auto a = fit_climate(samples, 16);
  const auto b = fit_climate(samples, 16);
  CHECK(a.prob[0] == b.prob[0]);

  // all samples at one point: mass concentrates near that point
  std::vector<SeaSample> point;
  for (int i = 0; i < 50; ++i) point.push_back({1, 3.0, 9.0});
  const auto peaked = fit_climate(point, 24, std::make_pair(0.15, 0.25));
  std::size_t best = 0;
  for (std::size_t i = 1; i < peaked.prob[0].size(); ++i)
    if (peaked.prob[0][i] > peaked.prob[0][best]) best = i;
  const std::size_t bi = best / peaked.n_gq(), bj = best % peaked.n_gq();
  CHECK(std::abs(peaked.hs_nodes[bi] - 3.0) < 0.5);
  CHECK(std::abs(peaked.tp_nodes[bj] - 9.0) < 0.5);
  // zero-variance set without an explicit bandwidth is degenerate
  CHECK_THROWS(fit_climate(point, 8));
}

TEST_CASE("climate model json round trip") {
  SyntheticSite site;
  const auto samples = synth_climate(site, 1, 60, 3);
  const auto model = fit_climate(samples, 8);
  const auto back = climate_from_json(climate_to_json(model));
  CHECK(back.prob[0] == model.prob[0]);
  CHECK(back.hs_nodes == model.hs_nodes);
  CHECK(back.box.tp_hi == model.box.tp_hi);
}

TEST_CASE("synth_elevation component identity") {
  WaveComponents wc;
  wc.omegas = {1.0};
  wc.wavenumbers = {0.1};
  wc.amplitudes = {2.0};
  wc.phases = {0.0};
  CHECK(elevation_at(wc, 0.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("synth_elevation determinism, zero mean, and variance") {
  const double hs = 2.5, tp = 8.0;
  CHECK(synth_elevation(hs, tp, 64, 7, 3.0, 11.0) ==
        synth_elevation(hs, tp, 64, 7, 3.0, 11.0));

  // long-time statistics against the spectrum quadrature oracle
  const auto wc = wave_components(hs, tp, 128, 11);
  const double T = 1e4 * tp;
  const std::size_t n = 200000;
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = elevation_at(wc, 0.0, T * static_cast<double>(i) / static_cast<double>(n));
    mean += eta;
    var += eta * eta;
  }
  mean /= static_cast<double>(n);
  var = var / static_cast<double>(n) - mean * mean;
  CHECK(std::abs(mean) <= 0.01 * hs);
  const double m0 = spectral_moment0(hs, tp);
  CHECK(var == doctest::Approx(m0).epsilon(0.10));
}

TEST_CASE("synth_climate determinism and statistics") {
  SyntheticSite site;
  const auto a = synth_climate(site, 2, 50, 42);
  const auto b = synth_climate(site, 2, 50, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].hs == b[i].hs);
    CHECK(a[i].tp == b[i].tp);
  }
  // zero log-variance collapses to the medians
  SyntheticSite degenerate = site;
  degenerate.sigma_log_hs = 0.0;
  degenerate.sigma_log_tp = 0.0;
  for (const auto& s : synth_climate(degenerate, 1, 20, 1)) {
    CHECK(s.hs == doctest::Approx(site.median_hs));
    CHECK(s.tp == doctest::Approx(site.median_tp));
  }
  // law of large numbers against the generator's own parameters
  const auto big = synth_climate(site, 1, 10000, 77);
  double mean_hs = 0.0;
  for (const auto& s : big) mean_hs += s.hs;
  mean_hs /= static_cast<double>(big.size());
  const double expected = site.median_hs * std::exp(0.5 * site.sigma_log_hs * site.sigma_log_hs);
  CHECK(mean_hs == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("climate csv round trip") {
  SyntheticSite site;
  const auto samples = synth_climate(site, 2, 15, 9);
  const auto path = std::filesystem::temp_directory_path() / "wecfarm_climate_test.csv";
  write_samples_csv(path.string(), samples);
  const auto back = read_samples_csv(path.string());
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].year == samples[i].year);
    CHECK(back[i].hs == doctest::Approx(samples[i].hs).epsilon(1e-10));
  }
  std::filesystem::remove(path);
}
