#include <algorithm>
#include <cmath>

#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/kernels.hpp"
#include "cvqkd/rxdsp.hpp"

namespace cvqkd {
namespace {

std::vector<cplx> as_complex(const IQFrame& rx) {
  if (rx.domain() == Domain::Passband) return fft::analytic_signal(rx.samples());
  return {rx.samples().begin(), rx.samples().end()};
}

IQFrame as_baseband(const IQFrame& rx, std::vector<cplx> samples) {
  return IQFrame(std::move(samples), rx.sample_rate(), Domain::Baseband, rx.scale(), rx.units());
}

}  // namespace

IQFrame correct_clock(const IQFrame& rx, double clock_ratio, double origin) {
  if (!(clock_ratio > 0.999 && clock_ratio < 1.001))
    throw DomainError("correct_clock: ratio outside (0.999, 1.001)");
  if (!(origin >= 0.0) || origin >= static_cast<double>(rx.size()))
    throw DomainError("correct_clock: origin outside the frame");
  auto x = as_complex(rx);
  if (clock_ratio == 1.0 && origin == 0.0) return as_baseband(rx, std::move(x));
  const auto count = static_cast<std::size_t>(
                         std::floor((static_cast<double>(rx.size()) - 1.0 - origin) / clock_ratio)) + 1;
  return as_baseband(rx, kernels::resample(x, origin, clock_ratio, count));
}

IQFrame carrier_recover(const IQFrame& rx, const PilotEstimate& pe, const DspConfig& cfg) {
  const double offset = pe.f1_hat * pe.clock_ratio - cfg.pilot1_hz;
  auto x = as_complex(rx);
  if (offset == 0.0) return as_baseband(rx, std::move(x));
  return as_baseband(rx, kernels::mix(x, -offset / rx.sample_rate(), 0.0));
}

IQFrame cancel_pilots(const IQFrame& rx, const DspConfig& cfg, std::size_t start,
                      std::size_t count, std::size_t block_len) {
  if (start + count > rx.size()) throw DomainError("cancel_pilots: region outside the frame");
  auto x = as_complex(rx);
  std::span<const cplx> seg(x.data() + start, count);
  const double fs = rx.sample_rate();
  std::vector<cplx> model(count);
  for (double f : {cfg.pilot1_hz, cfg.pilot2_hz}) {
    const auto c = kernels::block_demod(seg, f / fs, block_len);
    if (c.empty()) continue;
    const double bl = static_cast<double>(block_len);
    const double t0 = (bl - 1.0) / 2.0;
    std::vector<cplx> env(count);
    for (std::size_t n = 0; n < count; ++n) {
      const double p = (static_cast<double>(n) - t0) / bl;
      if (p <= 0.0) {
        env[n] = c.front();
      } else if (p >= static_cast<double>(c.size() - 1)) {
        env[n] = c.back();
      } else {
        const auto i = static_cast<std::size_t>(p);
        const double fr = p - static_cast<double>(i);
        env[n] = c[i] + fr * (c[i + 1] - c[i]);
      }
    }
    const auto tone = kernels::mix(env, f / fs, 0.0);
    for (std::size_t n = 0; n < count; ++n) model[n] += tone[n];
  }
  for (std::size_t n = 0; n < count; ++n) x[start + n] -= model[n];
  return as_baseband(rx, std::move(x));
}

IQFrame downconvert_and_match(const IQFrame& rx, const DspConfig& cfg, const FilterTaps& taps) {
  auto x = as_complex(rx);
  x = kernels::mix(x, -cfg.freq_shift_hz / rx.sample_rate(), 0.0);
  return as_baseband(rx, kernels::filter_same(x, taps.coefficients));
}

DownsampleResult optimal_downsample(const IQFrame& rx, int sps, const DownsampleOptions& opts) {
  if (sps < 1) throw DomainError("optimal_downsample: sps must be >= 1");
  const auto x = rx.samples();
  if (opts.start + static_cast<std::size_t>(sps) > x.size())
    throw DomainError("optimal_downsample: start beyond the frame");
  // leave one extra symbol of room so every phase sees the same count
  std::size_t count = (x.size() - opts.start) / sps;
  if (count > 0) --count;
  if (opts.count > 0) {
    if (opts.count > count) throw DomainError("optimal_downsample: not enough samples");
    count = opts.count;
  }
  if (count == 0) throw DomainError("optimal_downsample: no symbols");

  DownsampleResult res;
  res.phase_variance.assign(static_cast<std::size_t>(sps), 0.0);
  for (int p = 0; p < sps; ++p) {
    cplx mean{};
    double pow = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const cplx v = x[opts.start + static_cast<std::size_t>(p) + k * sps];
      mean += v;
      pow += std::norm(v);
    }
    mean /= static_cast<double>(count);
    res.phase_variance[static_cast<std::size_t>(p)] = pow / static_cast<double>(count) - std::norm(mean);
  }
  res.phase = static_cast<int>(std::max_element(res.phase_variance.begin(), res.phase_variance.end()) -
                               res.phase_variance.begin());

  if (!opts.fractional) {
    res.timing = static_cast<double>(opts.start + static_cast<std::size_t>(res.phase));
    res.symbols.resize(count);
    for (std::size_t k = 0; k < count; ++k) res.symbols[k] = x[opts.start + res.phase + k * sps];
    return res;
  }
  // A band-limited pulse with roll-off <= 1 gives a variance-vs-timing curve
  // holding only the DC and first harmonic, so the bin-1 phase locates the peak.
  cplx h1{};
  for (int p = 0; p < sps; ++p)
    h1 += res.phase_variance[static_cast<std::size_t>(p)] * std::polar(1.0, -2.0 * kPi * p / sps);
  double tau = -std::arg(h1) * sps / (2.0 * kPi);
  if (tau < 0.0) tau += sps;
  // keep the refined instant next to the integer argmax
  if (tau - res.phase > sps / 2.0) tau -= sps;
  if (res.phase - tau > sps / 2.0) tau += sps;
  res.timing = static_cast<double>(opts.start) + tau;
  res.symbols = kernels::resample(x, res.timing, static_cast<double>(sps), count);
  return res;
}

std::vector<cplx> phase_correct(std::span<const cplx> symbols, const PilotEstimate& pe,
                                double first_time, double step) {
  if (pe.phase_track.empty()) throw FrameRejected(RejectStage::Phase, "empty phase track");
  for (double v : pe.phase_track)
    if (!std::isfinite(v)) throw FrameRejected(RejectStage::Phase, "non-finite phase track");
  const double t_first = pe.track_t0 - pe.track_dt;
  const double t_last = pe.track_t0 + pe.track_dt * static_cast<double>(pe.phase_track.size());
  const double t_end = first_time + step * static_cast<double>(symbols.size() - 1);
  if (!symbols.empty() && (first_time < t_first || t_end > t_last))
    throw FrameRejected(RejectStage::Phase, "phase track does not cover the frame");
  std::vector<cplx> out(symbols.size());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    const double t = first_time + step * static_cast<double>(k);
    const double th = dsp::interp_linear(pe.phase_track, pe.track_t0, pe.track_dt, t);
    out[k] = symbols[k] * std::polar(1.0, -th);
  }
  return out;
}

double global_phase(std::span<const cplx> x, std::span<const cplx> y) {
  if (x.size() != y.size() || x.empty())
    throw DomainError("global_phase: paired sequences of equal, non-zero length required");
  cplx c{};
  double ex = 0.0, ey = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    c += std::conj(x[i]) * y[i];
    ex += std::norm(x[i]);
    ey += std::norm(y[i]);
  }
  const double rho = ex > 0.0 && ey > 0.0 ? std::abs(c) / std::sqrt(ex * ey) : 0.0;
  if (rho * std::sqrt(static_cast<double>(x.size())) < 5.0)
    throw FrameRejected(RejectStage::Align, "no significant correlation between Alice and Bob");
  return std::arg(c);
}

SymbolFrame global_phase_align(const SymbolFrame& x, const SymbolFrame& y) {
  const double th = global_phase(x.symbols(), y.symbols());
  const cplx r = std::polar(1.0, -th);
  std::vector<cplx> out(y.symbols().begin(), y.symbols().end());
  for (auto& v : out) v *= r;
  return SymbolFrame(std::move(out), y.modulation(), y.target_va());
}

}  // namespace cvqkd
