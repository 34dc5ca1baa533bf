#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"

using namespace cvqkd;

namespace {

const KeyParams k10 = KeyParams::from_xi_b(4.10, 0.632, 0.014, 0.175, 0.086);
const KeyParams k23 = KeyParams::from_xi_b(5.45, 0.346, 0.009, 0.161, 0.097);

// Covariance-matrix route: entanglement-based state of A and B, the trusted
// detector as a beamsplitter eta fed by one arm of an EPR pair of variance
// nu = 1 + 2 v_el / (1 - eta), then an ideal heterodyne on Bob's mode.
using Mat = Eigen::MatrixXd;

Mat omega(int modes) {
  Mat w = Mat::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    w(2 * k, 2 * k + 1) = 1.0;
    w(2 * k + 1, 2 * k) = -1.0;
  }
  return w;
}

double entropy(const Mat& g) {
  const int n = static_cast<int>(g.rows()) / 2;
  const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es((Eigen::MatrixXcd(omega(n).cast<std::complex<double>>()) *
                                                        g.cast<std::complex<double>>()) *
                                                       std::complex<double>(0.0, 1.0));
  std::vector<double> ev;
  for (int i = 0; i < 2 * n; ++i) ev.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(ev.begin(), ev.end());
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double nu = std::max(ev[static_cast<std::size_t>(2 * i)], 1.0);
    if (nu > 1.0 + 1e-12) {
      const double a = (nu + 1) / 2, b = (nu - 1) / 2;
      s += a * std::log2(a) - b * std::log2(b);
    }
  }
  return s;
}

double holevo_oracle(const KeyParams& p) {
  const double v = p.va + 1.0;
  const double vb = p.t * (v + 1.0 / p.t - 1.0 + p.xi);
  const double c = std::sqrt(p.t * (v * v - 1.0));
  const double nu = p.eta < 1.0 ? 1.0 + 2.0 * p.v_el / (1.0 - p.eta) : 1.0;
  const double d = std::sqrt(nu * nu - 1.0);
  const Mat I = Mat::Identity(2, 2);
  Mat Z = Mat::Zero(2, 2);
  Z(0, 0) = 1.0;
  Z(1, 1) = -1.0;
  // modes A, B, F0, G
  Mat g = Mat::Zero(8, 8);
  g.block(0, 0, 2, 2) = v * I;
  g.block(0, 2, 2, 2) = c * Z;
  g.block(2, 0, 2, 2) = c * Z;
  g.block(2, 2, 2, 2) = vb * I;
  g.block(4, 4, 2, 2) = nu * I;
  g.block(4, 6, 2, 2) = d * Z;
  g.block(6, 4, 2, 2) = d * Z;
  g.block(6, 6, 2, 2) = nu * I;
  const double se = std::sqrt(p.eta), sl = std::sqrt(1.0 - p.eta);
  Mat S = Mat::Identity(8, 8);
  S.block(2, 2, 2, 2) = se * I;
  S.block(2, 4, 2, 2) = sl * I;
  S.block(4, 2, 2, 2) = -sl * I;
  S.block(4, 4, 2, 2) = se * I;
  const Mat h = S * g * S.transpose();
  // Eve purifies A B
  const double s_e = entropy(g.block(0, 0, 4, 4));
  // heterodyne on B' = mode 1 of h; remaining A, F, G
  std::vector<int> rest{0, 1, 4, 5, 6, 7};
  Mat gr(6, 6), cr(6, 2);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) gr(i, j) = h(rest[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(j)]);
    for (int j = 0; j < 2; ++j) cr(i, j) = h(rest[static_cast<std::size_t>(i)], 2 + j);
  }
  const Mat gb = h.block(2, 2, 2, 2);
  const Mat cond = gr - cr * (gb + I).inverse() * cr.transpose();
  return s_e - entropy(cond);
}

std::vector<double> distances(double to, double step) {
  std::vector<double> d;
  for (double x = 0.0; x <= to + 1e-9; x += step) d.push_back(x);
  return d;
}

}  // namespace

TEST_CASE("g function") {
  CHECK(g_function(1.0) == 0.0);
  CHECK(g_function(3.0) == doctest::Approx(2.0).epsilon(1e-14));
  double prev = -1.0;
  for (double nu = 1.0; nu <= 100.0; nu += 0.25) {
    const double g = g_function(nu);
    CHECK(g > prev);
    prev = g;
  }
  CHECK_THROWS_AS(g_function(0.9), DomainError);
}

TEST_CASE("mutual information") {
  // SNR = 1 on a lossless, noiseless channel at va = 2
  const KeyParams unit{2.0, 1.0, 1.0, 0.0, 0.0};
  CHECK(mutual_information(unit).snr == doctest::Approx(1.0));
  CHECK(mutual_information(unit).i_ab == doctest::Approx(1.0));
  CHECK(mutual_information(unit, InfoConvention::DoubledPerQuadrature).i_ab == doctest::Approx(2.0));
  KeyParams zero = k10;
  zero.va = 0.0;
  CHECK(mutual_information(zero).i_ab == 0.0);
  // plug-in arithmetic at the 10 km point
  const double snr = 0.175 * 0.632 / 2.0 * 4.10 / (1.0 + 0.086 + 0.014 / 2.0);
  CHECK(mutual_information(k10).snr == doctest::Approx(snr).epsilon(1e-12));
  CHECK(mutual_information(k10).snr == doctest::Approx(0.206).epsilon(0.01));
  KeyParams bad = k10;
  bad.xi = -1e3;
  CHECK_THROWS_AS(mutual_information(bad), DomainError);
}

TEST_CASE("Holevo bound agrees with the covariance-matrix construction") {
  for (const auto& p : {k10, k23, KeyParams{1.0, 0.9, 0.6, 0.02, 0.01},
                        KeyParams{20.0, 0.1, 0.5, 0.05, 0.2}, KeyParams{4.0, 0.5, 0.999, 0.0, 0.0}}) {
    CHECK(holevo_bound(p) == doctest::Approx(holevo_oracle(p)).epsilon(1e-8));
    CHECK(holevo_bound(p) >= 0.0);
  }
}

TEST_CASE("Holevo limits") {
  KeyParams p = k10;
  p.t = 1e-9;
  CHECK(holevo_bound(p) < 1e-6);
  // no modulation and no excess noise: nothing to learn
  p = k10;
  p.xi = 0.0;
  p.va = 1e-9;
  CHECK(holevo_bound(p) < 1e-6);
  p.va = 0.0;
  CHECK(holevo_bound(p) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  // with excess noise Eve still holds the purification of the noise she added
  p.xi = k10.xi;
  CHECK(holevo_bound(p) > 0.0);
  CHECK(holevo_bound(p) == doctest::Approx(holevo_oracle(p)).epsilon(1e-8));
}

TEST_CASE("asymptotic anchors") {
  const SecurityParams sec;
  const auto r = asymptotic_skr(k10, sec, 100e6);
  CHECK(r.skr_bps == doctest::Approx(2.4e6).epsilon(0.15));
  CHECK(r.key_fraction == 1.0);
  CHECK(r.convention.find("per symbol") != std::string::npos);

  const auto r23 = asymptotic_skr(k23, sec, 100e6);
  // the average-parameter rate is null within a few percent of the 10 km rate
  CHECK(r23.skr_bps < 0.03 * r.skr_bps);

  SecurityParams zero = sec;
  zero.beta_ec = 0.0;
  for (const auto& p : {k10, k23, KeyParams{1.0, 0.9, 0.6, 0.02, 0.01}}) {
    const auto z = asymptotic_skr(p, zero, 100e6);
    CHECK(z.k_raw < 0.0);
    CHECK(z.skr_bps == 0.0);
  }
}

TEST_CASE("finite-size ladder") {
  const SecurityParams sec;
  const double target[] = {0.17e6, 0.88e6, 1.10e6, 1.18e6};
  const double n[] = {1e7, 1e8, 1e9, 1e10};
  for (int i = 0; i < 4; ++i)
    CHECK(finite_size_skr(k10, sec, n[i], 100e6).skr_bps == doctest::Approx(target[i]).epsilon(0.15));
  CHECK(finite_size_skr(k10, sec, 1e6, 100e6).skr_raw_bps <= 0.0);
  CHECK_FALSE(finite_size_skr(k10, sec, 1e6, 100e6).reason.empty());

  // N -> infinity: worst-case intervals and Delta vanish; the key fraction 1 - f stays
  const auto big = finite_size_skr(k10, sec, 1e18, 100e6);
  const auto asym = asymptotic_skr(k10, sec, 100e6);
  CHECK(big.skr_bps / big.key_fraction == doctest::Approx(asym.skr_bps).epsilon(0.01));
  for (double nb : n) CHECK(finite_size_skr(k10, sec, nb, 100e6).k_raw <= asym.k_raw);
}

TEST_CASE("monotonicity scans") {
  const SecurityParams sec;
  auto k = [&](KeyParams p) { return asymptotic_skr(p, sec, 1.0).k_raw; };
  for (double x = 0.0; x < 0.3; x += 0.01) {
    KeyParams a = k10, b = k10;
    a.xi = x;
    b.xi = x + 0.01;
    CHECK(k(b) <= k(a));
  }
  for (double v = 0.0; v < 0.5; v += 0.02) {
    KeyParams a = k10, b = k10;
    a.v_el = v;
    b.v_el = v + 0.02;
    CHECK(k(b) <= k(a));
  }
  for (double e = 0.1; e < 0.95; e += 0.05) {
    KeyParams a = k10, b = k10;
    a.eta = e;
    b.eta = e + 0.05;
    CHECK(k(b) >= k(a));
  }
  for (int i = 10; i < 20; ++i) {
    SecurityParams s1 = sec, s2 = sec;
    s1.beta_ec = i * 0.05;
    s2.beta_ec = (i + 1) * 0.05;
    CHECK(asymptotic_skr(k10, s2, 1.0).k_raw >= asymptotic_skr(k10, s1, 1.0).k_raw);
  }
}

TEST_CASE("distance sweep") {
  const SecurityParams sec;
  const auto d = distances(40.0, 0.25);
  const auto tab = skr_sweep(k23, sec, d, 0.2, {1e8, 1e10}, 100e6);
  REQUIRE(tab.rows.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(tab.rows[i].t == doctest::Approx(std::pow(10.0, -0.2 * d[i] / 10.0)).epsilon(1e-14));
    if (i > 0) {
      CHECK(tab.rows[i].skr_asym <= tab.rows[i - 1].skr_asym);
      for (std::size_t j = 0; j < 2; ++j) CHECK(tab.rows[i].skr_finite[j] <= tab.rows[i - 1].skr_finite[j]);
    }
    for (std::size_t j = 0; j < 2; ++j) CHECK(tab.rows[i].skr_finite[j] <= tab.rows[i].skr_asym);
  }
  CHECK(tab.zero_crossing_asym_km == doctest::Approx(20.0).epsilon(0.1));
  REQUIRE(tab.zero_crossing_finite_km.size() == 2);
  CHECK(tab.zero_crossing_finite_km[0] < tab.zero_crossing_finite_km[1]);
  CHECK(tab.zero_crossing_finite_km[1] <= tab.zero_crossing_asym_km);
}

TEST_CASE("modulation variance sweep reports the argmax") {
  const SecurityParams sec;
  std::vector<double> grid;
  for (double v = 0.5; v <= 20.0; v += 0.5) grid.push_back(v);
  const auto rows = va_sweep(k10, sec, {0.0, 5.0, 10.0}, 0.2, grid, 100e6);
  for (const auto& r : rows) {
    REQUIRE(r.skr_asym.size() == grid.size());
    const auto it = std::max_element(r.skr_asym.begin(), r.skr_asym.end());
    CHECK(r.best_skr == *it);
    CHECK(r.best_va == grid[static_cast<std::size_t>(it - r.skr_asym.begin())]);
  }
}
