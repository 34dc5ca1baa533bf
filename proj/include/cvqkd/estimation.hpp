#pragma once

// Covariance-based parameter estimation from the disclosed symbol pairs.
//
// With Bob's model y = sqrt(eta T / 2) x + n and E|n|^2 = 1 + v_el + eta T xi / 2:
//   T  = 2 <XY>^2 / (eta V_A^2)
//   xi = 2 (<Y^2> - 1 - v_el - eta T V_A / 2) / (eta T)
// where <XY> = mean Re(conj(x) y) and <Y^2> = mean |y|^2 are the
// per-quadrature averages over both quadratures.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd {

struct EstimationResult {
  double va_hat = 0.0;
  double t_hat = 0.0;
  double xi_hat = 0.0;    // referred to the channel input
  double xi_b_hat = 0.0;  // eta * t_hat * xi_hat
  double v_el = 0.0;
  double eta = 0.0;
  std::size_t n_disclosed = 0;
};

double estimate_transmittance(std::span<const cplx> x, std::span<const cplx> y, double eta,
                              double va);

struct ExcessNoise {
  double xi = 0.0;
  double xi_b = 0.0;
};

// Not clipped: a finite sample may give xi < 0 when the true value is near 0.
ExcessNoise estimate_excess_noise(std::span<const cplx> x, std::span<const cplx> y, double eta,
                                  double t_hat, double va, double v_el);

// V_A = 2 <n>, <n> = monitor_power_ratio * conversion_factor.
double estimate_va(double monitor_power_ratio, double conversion_factor);

EstimationResult estimate_parameters(std::span<const cplx> x, std::span<const cplx> y,
                                     double eta, double va, double v_el);

struct FrameObservation {
  std::vector<cplx> x;  // Alice, disclosed subset
  std::vector<cplx> y;  // Bob, same indices, SNU
  double va = 0.0;
  double eta = 0.0;
  double v_el = 0.0;
  bool rejected = false;
  std::string reject_reason;
};

struct Histogram {
  std::vector<double> edges;          // bins + 1 entries
  std::vector<std::size_t> counts;
};

// Equal-width histogram over [min, max] of the values.
Histogram make_histogram(std::span<const double> values, std::size_t bins = 20);

struct SeriesSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
  Histogram histogram;
};

SeriesSummary summarize(std::span<const double> values, std::size_t bins = 20);

struct BatchEstimation {
  std::vector<std::optional<EstimationResult>> frames;  // nullopt for rejected frames
  std::size_t n_frames = 0;
  std::size_t n_rejected = 0;
  double fer = 0.0;
  SeriesSummary va, t, xi, xi_b, v_el;
};

// Throws Error when every frame was rejected.
BatchEstimation run_estimation(const std::vector<FrameObservation>& frames);

}  // namespace cvqkd
