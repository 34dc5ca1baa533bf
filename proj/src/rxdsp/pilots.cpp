#include <algorithm>
#include <cmath>

#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/kernels.hpp"
#include "cvqkd/rxdsp.hpp"

namespace cvqkd {
namespace {

std::vector<cplx> segment(const IQFrame& rx, std::size_t start, std::size_t count) {
  if (start + count > rx.size() || count == 0)
    throw FrameRejected(RejectStage::Pilot, "pilot region outside the frame");
  std::vector<cplx> x(rx.samples().begin() + static_cast<long>(start),
                      rx.samples().begin() + static_cast<long>(start + count));
  if (rx.domain() == Domain::Passband) x = fft::analytic_signal(x);
  return x;
}

// Least-squares slope of y against its index.
double ls_slope(const std::vector<double>& y) {
  const double n = static_cast<double>(y.size());
  const double xm = (n - 1.0) / 2.0;
  double ym = 0.0;
  for (double v : y) ym += v;
  ym /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double dx = static_cast<double>(i) - xm;
    sxy += dx * (y[i] - ym);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<double> unwrapped_arg(const std::vector<cplx>& c) {
  std::vector<double> ph(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) ph[i] = std::arg(c[i]);
  dsp::unwrap(ph);
  return ph;
}

double periodogram_peak(const std::vector<double>& power, double fs, std::size_t nfft,
                        double f_nom, double halfwidth, double min_prom_db) {
  const double df = fs / static_cast<double>(nfft);
  const auto lo = static_cast<long>(std::floor((f_nom - halfwidth) / df));
  const auto hi = static_cast<long>(std::ceil((f_nom + halfwidth) / df));
  const long n = static_cast<long>(nfft);
  auto at = [&](long k) { return power[static_cast<std::size_t>(((k % n) + n) % n)]; };
  long kbest = lo;
  std::vector<double> window;
  for (long k = lo; k <= hi; ++k) {
    window.push_back(at(k));
    if (at(k) > at(kbest)) kbest = k;
  }
  std::nth_element(window.begin(), window.begin() + static_cast<long>(window.size() / 2), window.end());
  const double median = window[window.size() / 2];
  if (!(at(kbest) > 0.0) || 10.0 * std::log10(at(kbest) / std::max(median, 1e-300)) < min_prom_db)
    throw FrameRejected(RejectStage::Pilot, "pilot peak below prominence threshold");
  const double a = std::log(std::max(at(kbest - 1), 1e-300));
  const double b = std::log(at(kbest));
  const double c = std::log(std::max(at(kbest + 1), 1e-300));
  const double den = a - 2.0 * b + c;
  const double delta = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
  return (static_cast<double>(kbest) + std::clamp(delta, -0.5, 0.5)) * df;
}

}  // namespace

PilotEstimate track_pilot_phase(const IQFrame& rx, double f_hz, std::size_t start,
                                std::size_t count, std::size_t block_len) {
  const auto x = segment(rx, start, count);
  const auto c = kernels::block_demod(x, f_hz / rx.sample_rate(), block_len);
  if (c.size() < 2) throw FrameRejected(RejectStage::Phase, "too few pilot blocks");
  PilotEstimate pe;
  pe.f1_hat = f_hz;
  pe.phase_track = unwrapped_arg(c);
  pe.track_t0 = static_cast<double>(start) + (static_cast<double>(block_len) - 1.0) / 2.0;
  pe.track_dt = static_cast<double>(block_len);
  return pe;
}

PilotEstimate estimate_pilots(const IQFrame& rx, const DspConfig& cfg, std::size_t start,
                              std::size_t count, const PilotOptions& opts) {
  const auto x = segment(rx, start, count);
  const double fs = rx.sample_rate();
  const std::size_t nfft = fft::next_pow2(x.size());
  std::vector<cplx> xw(x.size());
  const double nm1 = static_cast<double>(x.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i)
    xw[i] = x[i] * (0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / nm1));
  const auto spec = fft::forward(xw, nfft);
  std::vector<double> power(nfft);
  for (std::size_t k = 0; k < nfft; ++k) power[k] = std::norm(spec[k]);

  double f1 = periodogram_peak(power, fs, nfft, cfg.pilot1_hz, opts.search_halfwidth_hz,
                               opts.min_prominence_db);
  double f2 = periodogram_peak(power, fs, nfft, cfg.pilot2_hz, opts.search_halfwidth_hz,
                               opts.min_prominence_db);

  const double bl = static_cast<double>(opts.block_len);
  std::vector<cplx> c1;
  for (int iter = 0; iter < 2; ++iter) {
    c1 = kernels::block_demod(x, f1 / fs, opts.block_len);
    if (c1.size() < 4) throw FrameRejected(RejectStage::Pilot, "frame too short for pilot tracking");
    f1 += ls_slope(unwrapped_arg(c1)) / (2.0 * kPi * bl) * fs;
  }
  c1 = kernels::block_demod(x, f1 / fs, opts.block_len);
  for (int iter = 0; iter < 2; ++iter) {
    const auto c2 = kernels::block_demod(x, f2 / fs, opts.block_len);
    std::vector<cplx> d(c2.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = c2[i] * std::conj(c1[i]);
    f2 += ls_slope(unwrapped_arg(d)) / (2.0 * kPi * bl) * fs;
  }
  const double spacing = f2 - f1;
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw FrameRejected(RejectStage::Pilot, "invalid pilot spacing");

  PilotEstimate pe;
  pe.f1_hat = f1;
  pe.f2_hat = f2;
  pe.clock_ratio = cfg.pilot_spacing_hz() / spacing;
  pe.phase_track = unwrapped_arg(c1);
  pe.track_t0 = static_cast<double>(start) + (bl - 1.0) / 2.0;
  pe.track_dt = bl;
  return pe;
}

PilotEstimate estimate_pilots(const IQFrame& rx, const DspConfig& cfg) {
  return estimate_pilots(rx, cfg, 0, rx.size());
}

}  // namespace cvqkd
