#include "cvqkd/txdsp.hpp"

#include <cmath>
#include <numeric>

#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/kernels.hpp"

namespace cvqkd {

FilterTaps rrc_taps(double beta, int sps, int span) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("rrc_taps: beta must lie in (0, 1]");
  if (sps < 2) throw DomainError("rrc_taps: sps must be >= 2");
  if (span < 8) throw DomainError("rrc_taps: span must be >= 8");
  return FilterTaps{dsp::rrc_impulse(beta, sps, span), span, sps, beta};
}

IQFrame upsample_and_shape(const SymbolFrame& frame, const FilterTaps& taps,
                           double symbol_rate_hz) {
  if (frame.size() == 0) throw DomainError("upsample_and_shape: empty frame");
  auto out = kernels::upsample_filter(frame.symbols(), taps.coefficients, taps.sps);
  return IQFrame(std::move(out), symbol_rate_hz * taps.sps, Domain::Baseband, 1.0, Units::Snu)
      .tagged("shaped");
}

IQFrame frequency_shift(const IQFrame& frame, double f_hz, double occupied_bw_hz) {
  if (frame.domain() != Domain::Baseband)
    throw DomainError("frequency_shift: baseband frame required");
  if (std::abs(f_hz) + occupied_bw_hz / 2.0 >= frame.sample_rate() / 2.0)
    throw DomainError("frequency_shift: shifted band exceeds Nyquist");
  if (f_hz == 0.0) return frame;
  return frame.with_samples(kernels::mix(frame.samples(), f_hz / frame.sample_rate(), 0.0));
}

IQFrame add_pilots(const IQFrame& frame, const DspConfig& cfg, double signal_power) {
  const double half_b = cfg.occupied_bandwidth_hz() / 2.0;
  for (double f : {cfg.pilot1_hz, cfg.pilot2_hz}) {
    if (f < cfg.freq_shift_hz + half_b - 1e-6 && f > cfg.freq_shift_hz - half_b)
      throw DomainError("add_pilots: pilot inside the signal band");
    if (std::abs(f) >= frame.sample_rate() / 2.0)
      throw DomainError("add_pilots: pilot above Nyquist");
  }
  const double amp = std::sqrt(signal_power * std::pow(10.0, cfg.pilot_to_signal_db / 10.0));
  if (!(amp > 0.0)) return frame;
  std::vector<cplx> ones(frame.size(), cplx(amp, 0.0));
  const auto p1 = kernels::mix(ones, cfg.pilot1_hz / frame.sample_rate(), 0.0);
  const auto p2 = kernels::mix(ones, cfg.pilot2_hz / frame.sample_rate(), 0.0);
  std::vector<cplx> out(frame.samples().begin(), frame.samples().end());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += p1[n] + p2[n];
  return frame.with_samples(std::move(out)).tagged("pilots");
}

IQFrame add_pilots(const IQFrame& frame, const DspConfig& cfg) {
  return add_pilots(frame, cfg, dsp::mean_power(frame.samples()));
}

IQFrame zadoff_chu(int u, int length, double sample_rate) {
  if (length < 1 || length % 2 == 0) throw DomainError("zadoff_chu: length must be odd");
  if (u <= 0 || std::gcd(u, length) != 1)
    throw DomainError("zadoff_chu: root must be positive and coprime with length");
  std::vector<cplx> x(static_cast<std::size_t>(length));
  const long long two_l = 2LL * length;
  for (long long k = 0; k < length; ++k) {
    // reduce u*k*(k+1) modulo 2L before scaling to keep the phase exact
    const long long m = (static_cast<long long>(u) * ((k * (k + 1)) % two_l)) % two_l;
    x[static_cast<std::size_t>(k)] = std::polar(1.0, -kPi * static_cast<double>(m) / length);
  }
  return IQFrame(std::move(x), sample_rate, Domain::Baseband, 1.0, Units::Snu).tagged("zadoff-chu");
}

IQFrame make_preamble(const DspConfig& cfg) {
  const int sps = cfg.samples_per_symbol();
  auto chips = zadoff_chu(cfg.zc_root, cfg.zc_length, cfg.symbol_rate_hz);
  if (!cfg.preamble_shaped) {
    return IQFrame(std::vector<cplx>(chips.samples().begin(), chips.samples().end()),
                   cfg.dac_sample_rate_hz, Domain::Baseband, 1.0, Units::Snu)
        .tagged("zadoff-chu");
  }
  const auto taps = rrc_taps(cfg.roll_off, sps, cfg.filter_span);
  std::vector<cplx> c(chips.samples().begin(), chips.samples().end());
  // unit power per sample: each chip carries energy sps after shaping
  for (auto& v : c) v *= std::sqrt(static_cast<double>(sps));
  IQFrame shaped(kernels::upsample_filter(c, taps.coefficients, sps), cfg.dac_sample_rate_hz,
                 Domain::Baseband, 1.0, Units::Snu);
  return frequency_shift(shaped, cfg.freq_shift_hz, cfg.occupied_bandwidth_hz()).tagged("preamble");
}

IQFrame assemble_frame(const IQFrame& payload, const IQFrame& preamble) {
  if (preamble.size() == 0) return payload;
  if (payload.sample_rate() != preamble.sample_rate())
    throw DomainError("assemble_frame: sample-rate mismatch");
  std::vector<cplx> out;
  out.reserve(payload.size() + preamble.size());
  out.insert(out.end(), preamble.samples().begin(), preamble.samples().end());
  out.insert(out.end(), payload.samples().begin(), payload.samples().end());
  return payload.with_samples(std::move(out)).tagged("assembled");
}

IQFrame assemble_frame(const IQFrame& payload, const IQFrame& preamble, double signal_power,
                       double ratio_db) {
  if (preamble.size() == 0) return payload;
  const double p = dsp::mean_power(preamble.samples());
  if (!(p > 0.0)) throw DomainError("assemble_frame: preamble has zero power");
  const double g = std::sqrt(signal_power * std::pow(10.0, ratio_db / 10.0) / p);
  std::vector<cplx> s(preamble.samples().begin(), preamble.samples().end());
  for (auto& v : s) v *= g;
  return assemble_frame(payload, preamble.with_samples(std::move(s)));
}

double image_band_ratio_db(const IQFrame& frame, double f_shift_hz, double bandwidth_hz) {
  const auto spec = fft::forward(frame.samples(), fft::next_pow2(frame.size()));
  const std::size_t n = spec.size();
  double sig = 0.0, img = 0.0;
  const double half = bandwidth_hz / 2.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = fft::bin_frequency(k, n, frame.sample_rate());
    const double p = std::norm(spec[k]);
    if (std::abs(f - f_shift_hz) <= half) sig += p;
    if (std::abs(f + f_shift_hz) <= half) img += p;
  }
  if (!(sig > 0.0)) throw DomainError("image_band_ratio_db: no power in the signal band");
  return 10.0 * std::log10(std::max(img, 1e-300) / sig);
}

TxFrame transmit(const SymbolFrame& symbols, const DspConfig& cfg) {
  cfg.validate();
  const int sps = cfg.samples_per_symbol();
  auto taps = rrc_taps(cfg.roll_off, sps, cfg.filter_span);
  const double signal_power = symbols.target_va() / sps;
  auto shaped = upsample_and_shape(symbols, taps, cfg.symbol_rate_hz);
  auto shifted = frequency_shift(shaped, cfg.freq_shift_hz, cfg.occupied_bandwidth_hz());
  auto payload = add_pilots(shifted, cfg, signal_power);
  auto pre = make_preamble(cfg);
  const double g = std::sqrt(signal_power * std::pow(10.0, cfg.preamble_to_signal_db / 10.0) /
                             dsp::mean_power(pre.samples()));
  std::vector<cplx> ps(pre.samples().begin(), pre.samples().end());
  for (auto& v : ps) v *= g;
  IQFrame preamble = pre.with_samples(std::move(ps));
  IQFrame wave = assemble_frame(payload, preamble);
  TxFrame tx{std::move(wave), std::move(preamble), symbols, std::move(taps), 0};
  tx.payload_start = tx.preamble.size();
  return tx;
}

}  // namespace cvqkd
