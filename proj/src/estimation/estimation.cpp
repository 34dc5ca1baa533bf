#include "cvqkd/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

void check_pair(std::span<const cplx> x, std::span<const cplx> y) {
  if (x.empty() || x.size() != y.size())
    throw DomainError("estimation: paired, non-empty sequences required");
}

double cross_moment(std::span<const cplx> x, std::span<const cplx> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (std::conj(x[i]) * y[i]).real();
  return acc / static_cast<double>(x.size());
}

double second_moment(std::span<const cplx> y) {
  double acc = 0.0;
  for (const auto& v : y) acc += std::norm(v);
  return acc / static_cast<double>(y.size());
}

}  // namespace

double estimate_transmittance(std::span<const cplx> x, std::span<const cplx> y, double eta,
                              double va) {
  check_pair(x, y);
  if (!(va > 0.0)) throw DomainError("estimate_transmittance: va must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("estimate_transmittance: eta must lie in (0, 1]");
  const double xy = cross_moment(x, y);
  return 2.0 * xy * xy / (eta * va * va);
}

ExcessNoise estimate_excess_noise(std::span<const cplx> x, std::span<const cplx> y, double eta,
                                  double t_hat, double va, double v_el) {
  check_pair(x, y);
  if (!(t_hat > 0.0)) throw DomainError("estimate_excess_noise: t_hat must be positive");
  const double y2 = second_moment(y);
  const double et = eta * t_hat;
  ExcessNoise r;
  r.xi = 2.0 * (y2 - 1.0 - v_el - et * va / 2.0) / et;
  r.xi_b = et * r.xi;
  return r;
}

double estimate_va(double monitor_power_ratio, double conversion_factor) {
  if (!(monitor_power_ratio > 0.0) || !(conversion_factor > 0.0))
    throw DomainError("estimate_va: inputs must be positive");
  return 2.0 * monitor_power_ratio * conversion_factor;
}

EstimationResult estimate_parameters(std::span<const cplx> x, std::span<const cplx> y,
                                     double eta, double va, double v_el) {
  EstimationResult r;
  r.va_hat = va;
  r.eta = eta;
  r.v_el = v_el;
  r.n_disclosed = x.size();
  r.t_hat = estimate_transmittance(x, y, eta, va);
  const auto en = estimate_excess_noise(x, y, eta, r.t_hat, va, v_el);
  r.xi_hat = en.xi;
  r.xi_b_hat = en.xi_b;
  return r;
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  if (bins == 0) throw DomainError("make_histogram: bins must be positive");
  Histogram h;
  h.counts.assign(bins, 0);
  double lo = 0.0, hi = 1.0;
  if (!values.empty()) {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
  }
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 1e-6, 1e-12);
    lo -= pad;
    hi += pad;
  }
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

SeriesSummary summarize(std::span<const double> values, std::size_t bins) {
  SeriesSummary s;
  s.histogram = make_histogram(values, bins);
  if (values.empty()) return s;
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  s.mean = m;
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - m) * (v - m);
    s.variance = acc / static_cast<double>(values.size() - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(values.size()));
  }
  return s;
}

BatchEstimation run_estimation(const std::vector<FrameObservation>& frames) {
  if (frames.empty()) throw DomainError("run_estimation: empty batch");
  BatchEstimation b;
  b.n_frames = frames.size();
  b.frames.resize(frames.size());
  // frames are independent; results land in their own slots
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(frames.size()); ++i) {
    const auto& f = frames[static_cast<std::size_t>(i)];
    if (f.rejected) continue;
    try {
      b.frames[static_cast<std::size_t>(i)] = estimate_parameters(f.x, f.y, f.eta, f.va, f.v_el);
    } catch (const Error&) {
      // degenerate frame (e.g. zero cross-covariance): counted as rejected
    }
  }
  std::vector<double> va, t, xi, xib, vel;
  for (const auto& r : b.frames) {
    if (!r) {
      ++b.n_rejected;
      continue;
    }
    va.push_back(r->va_hat);
    t.push_back(r->t_hat);
    xi.push_back(r->xi_hat);
    xib.push_back(r->xi_b_hat);
    vel.push_back(r->v_el);
  }
  b.fer = static_cast<double>(b.n_rejected) / static_cast<double>(b.n_frames);
  if (b.n_rejected == b.n_frames) throw Error("run_estimation: every frame was rejected");
  b.va = summarize(va);
  b.t = summarize(t);
  b.xi = summarize(xi);
  b.xi_b = summarize(xib);
  b.v_el = summarize(vel);
  return b;
}

}  // namespace cvqkd
