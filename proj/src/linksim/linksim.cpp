#include "cvqkd/linksim.hpp"

#include <algorithm>
#include <cmath>

#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/kernels.hpp"
#include "cvqkd/txdsp.hpp"

namespace cvqkd {

ChannelParams ChannelParams::from_distance(double km, double alpha_db_per_km, double xi) {
  ChannelParams ch;
  ch.distance_km = km;
  ch.fiber_alpha_db_per_km = alpha_db_per_km;
  ch.excess_noise = xi;
  ch.transmittance = ch.effective_transmittance();
  return ch;
}

double ChannelParams::effective_transmittance() const {
  if (distance_km) return std::pow(10.0, -fiber_alpha_db_per_km * *distance_km / 10.0);
  return transmittance;
}

void ChannelParams::validate() const {
  if (distance_km && !(*distance_km >= 0.0))
    throw ConfigError("distance_km", "must be non-negative");
  if (!(fiber_alpha_db_per_km >= 0.0)) throw ConfigError("fiber_alpha_db_per_km", "must be >= 0");
  const double t = effective_transmittance();
  if (!(t > 0.0 && t <= 1.0)) throw ConfigError("transmittance", "must lie in (0, 1]");
  if (!(excess_noise >= 0.0)) throw ConfigError("excess_noise_snu", "must be >= 0");
}

double clearance_at(const std::vector<ClearancePoint>& profile, double f_hz) {
  if (profile.empty()) throw DomainError("clearance_at: empty profile");
  if (profile.size() == 1 || f_hz <= profile.front().freq_hz) return profile.front().clearance_db;
  if (f_hz >= profile.back().freq_hz) return profile.back().clearance_db;
  for (std::size_t i = 1; i < profile.size(); ++i) {
    if (f_hz <= profile[i].freq_hz) {
      const auto& a = profile[i - 1];
      const auto& b = profile[i];
      const double u = (std::log10(f_hz) - std::log10(a.freq_hz)) /
                       (std::log10(b.freq_hz) - std::log10(a.freq_hz));
      return a.clearance_db + u * (b.clearance_db - a.clearance_db);
    }
  }
  return profile.back().clearance_db;
}

ReceiverModel ReceiverModel::ideal() {
  ReceiverModel rx;
  rx.efficiency = 1.0;
  rx.v_el = 0.0;
  rx.random_offset = false;
  rx.laser_offset_hz = 0.0;
  rx.linewidth_hz = 0.0;
  rx.random_initial_phase = false;
  rx.clock_ppm = 0.0;
  rx.shot_noise = false;
  return rx;
}

void ReceiverModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ConfigError("efficiency", "must lie in (0, 1]");
  if (!(v_el >= 0.0)) throw ConfigError("v_el_snu", "must be >= 0");
  if (!(linewidth_hz >= 0.0)) throw ConfigError("linewidth_hz", "must be >= 0");
  if (!(offset_range_hz >= 0.0)) throw ConfigError("offset_range_hz", "must be >= 0");
  if (!(std::abs(clock_ppm) < 1000.0)) throw ConfigError("clock_ppm", "must satisfy |ppm| < 1000");
  if (!(detector_gain > 0.0)) throw ConfigError("detector_gain", "must be positive");
  if (clip_level && !(*clip_level > 0.0)) throw ConfigError("clip_level", "must be positive");
  for (std::size_t i = 0; i < clearance_profile.size(); ++i) {
    if (!(clearance_profile[i].freq_hz > 0.0))
      throw ConfigError("clearance_profile", "frequencies must be positive");
    if (!(clearance_profile[i].clearance_db > 0.0))
      throw ConfigError("clearance_profile", "clearance must be positive dB");
    if (i > 0 && !(clearance_profile[i].freq_hz > clearance_profile[i - 1].freq_hz))
      throw ConfigError("clearance_profile", "frequencies must increase");
  }
}

IQFrame apply_channel(const IQFrame& frame, const ChannelParams& ch, const DspConfig& cfg,
                      EntropySource& rng) {
  ch.validate();
  const double t = ch.effective_transmittance();
  std::vector<cplx> out(frame.samples().begin(), frame.samples().end());
  const double a = std::sqrt(t);
  for (auto& v : out) v *= a;
  const double var = t * ch.excess_noise;
  if (var > 0.0) {
    const int sps = cfg.samples_per_symbol();
    const auto taps = dsp::rrc_impulse(cfg.roll_off, sps, cfg.filter_span);
    const std::size_t nsym = out.size() / sps + 2 * static_cast<std::size_t>(cfg.filter_span) + 2;
    const double sd = std::sqrt(var / 2.0);
    std::vector<cplx> sym(nsym);
    for (auto& s : sym) {
      const double re = rng.normal();
      const double im = rng.normal();
      s = {sd * re, sd * im};
    }
    auto shaped = kernels::upsample_filter(sym, taps, sps);
    // drop the start-up transient; pulses then peak at multiples of sps, the
    // symbol grid of the transmitted frame, so Bob samples the noise on-peak
    const std::size_t drop = taps.size() - 1;
    std::vector<cplx> noise(shaped.begin() + static_cast<long>(drop),
                            shaped.begin() + static_cast<long>(drop + out.size()));
    noise = kernels::mix(noise, cfg.freq_shift_hz / frame.sample_rate(), 0.0);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += noise[n];
  }
  return frame.with_samples(std::move(out)).tagged("channel");
}

IQFrame apply_laser_impairments(const IQFrame& frame, const ReceiverModel& rx,
                                EntropySource& rng, LaserDraw* draw) {
  if (frame.domain() != Domain::Baseband)
    throw DomainError("apply_laser_impairments: baseband frame required");
  LaserDraw d;
  d.offset_hz = rx.random_offset ? (2.0 * rng.uniform() - 1.0) * rx.offset_range_hz
                                 : rx.laser_offset_hz;
  d.initial_phase = rx.random_initial_phase ? 2.0 * kPi * rng.uniform() : 0.0;
  if (draw) *draw = d;
  const double fs = frame.sample_rate();
  const double step_sd = std::sqrt(2.0 * kPi * rx.linewidth_hz / fs);
  std::vector<cplx> out(frame.samples().begin(), frame.samples().end());
  if (d.offset_hz == 0.0 && step_sd == 0.0 && d.initial_phase == 0.0) return frame;
  double phi = d.initial_phase;
  for (std::size_t n = 0; n < out.size(); ++n) {
    const double cyc = d.offset_hz * static_cast<double>(n) / fs;
    out[n] *= std::polar(1.0, 2.0 * kPi * (cyc - std::floor(cyc)) + phi);
    if (step_sd > 0.0) phi += step_sd * rng.normal();
  }
  return frame.with_samples(std::move(out)).tagged("laser");
}

IQFrame apply_clock_skew(const IQFrame& frame, double ppm) {
  if (!(std::abs(ppm) < 1000.0)) throw DomainError("apply_clock_skew: |ppm| must be < 1000");
  if (ppm == 0.0) return frame;
  const double step = 1.0 + ppm * 1e-6;
  const auto count = static_cast<std::size_t>(std::floor((frame.size() - 1) / step)) + 1;
  return frame.with_samples(kernels::resample(frame.samples(), 0.0, step, count)).tagged("skew");
}

std::vector<double> colored_noise(std::size_t n, double sample_rate,
                                  const std::function<double(double)>& shape, double variance,
                                  EntropySource& rng) {
  const std::size_t nfft = fft::next_pow2(n);
  std::vector<cplx> w(nfft);
  for (auto& v : w) v = rng.normal();
  auto spec = fft::forward(w);
  for (std::size_t k = 0; k < nfft; ++k) {
    const double f = std::abs(fft::bin_frequency(k, nfft, sample_rate));
    const double g = shape(std::max(f, sample_rate / static_cast<double>(nfft)));
    if (!(g >= 0.0)) throw DomainError("colored_noise: negative PSD shape");
    spec[k] *= std::sqrt(g);
  }
  const auto x = fft::inverse(spec);
  std::vector<double> out(n);
  const double sd = std::sqrt(variance);
  for (std::size_t i = 0; i < n; ++i) out[i] = sd * x[i].real();
  return out;
}

double elec_to_shot_ratio(double clearance_db) {
  if (!(clearance_db > 0.0)) throw DomainError("elec_to_shot_ratio: clearance must be > 0 dB");
  return 1.0 / (std::pow(10.0, clearance_db / 10.0) - 1.0);
}

namespace {

// Adds detector noise to r in place (raw units, real).
void add_receiver_noise(std::vector<double>& r, const ReceiverModel& rx, const DspConfig& cfg,
                        double fs, bool shot, EntropySource& rng) {
  const double g = rx.detector_gain;
  // a real sample of variance g^2/4 maps to E|y|^2 = g^2 after the analytic
  // signal and the unit-energy matched filter
  if (shot) {
    const double sd = g / 2.0;
    for (auto& v : r) v += sd * rng.normal();
  }
  if (rx.v_el > 0.0) {
    const double var = g * g * rx.v_el / 4.0;
    if (rx.clearance_profile.empty()) {
      const double sd = std::sqrt(var);
      for (auto& v : r) v += sd * rng.normal();
    } else {
      // the profile sets the spectral shape; the level is pinned so the
      // in-band average equals v_el
      const auto& prof = rx.clearance_profile;
      const double half_b = cfg.occupied_bandwidth_hz() / 2.0;
      const double lo = cfg.freq_shift_hz - half_b;
      double mean = 0.0;
      constexpr int kGrid = 512;
      for (int i = 0; i < kGrid; ++i) {
        const double f = lo + (i + 0.5) * (2.0 * half_b) / kGrid;
        mean += elec_to_shot_ratio(clearance_at(prof, f));
      }
      mean /= kGrid;
      auto shape = [&prof, mean](double f) {
        return elec_to_shot_ratio(clearance_at(prof, f)) / mean;
      };
      const auto e = colored_noise(r.size(), fs, shape, var, rng);
      for (std::size_t i = 0; i < r.size(); ++i) r[i] += e[i];
    }
  }
}

IQFrame finish(std::vector<double>& r, const ReceiverModel& rx, double fs, const char* tag) {
  if (rx.clip_level) {
    const double c = *rx.clip_level;
    for (auto& v : r) v = std::clamp(v, -c, c);
  }
  std::vector<cplx> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i];
  return IQFrame(std::move(out), fs, Domain::Passband, 1.0, Units::Raw).tagged(tag);
}

}  // namespace

IQFrame detect(const IQFrame& frame, const ReceiverModel& rx, const DspConfig& cfg,
               EntropySource& rng) {
  if (frame.domain() != Domain::Baseband) throw DomainError("detect: passband input rejected");
  rx.validate();
  bool warn = false;
  if (dsp::mean_power(frame.samples()) > 0.0) {
    warn = image_band_ratio_db(frame, cfg.freq_shift_hz, cfg.occupied_bandwidth_hz()) > -40.0;
  }
  const double a = rx.detector_gain * std::sqrt(rx.efficiency / 2.0);
  std::vector<double> r(frame.size());
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = a * frame.samples()[n].real();
  add_receiver_noise(r, rx, cfg, frame.sample_rate(), rx.shot_noise, rng);
  return finish(r, rx, frame.sample_rate(), "detected").with_image_warning(warn);
}

IQFrame shot_noise_trace(std::size_t n, const ReceiverModel& rx, const DspConfig& cfg,
                         EntropySource& rng) {
  rx.validate();
  std::vector<double> r(n, 0.0);
  add_receiver_noise(r, rx, cfg, cfg.adc_sample_rate_hz, true, rng);
  return finish(r, rx, cfg.adc_sample_rate_hz, "shot-noise");
}

IQFrame dark_trace(std::size_t n, const ReceiverModel& rx, const DspConfig& cfg,
                   EntropySource& rng) {
  rx.validate();
  std::vector<double> r(n, 0.0);
  add_receiver_noise(r, rx, cfg, cfg.adc_sample_rate_hz, false, rng);
  return finish(r, rx, cfg.adc_sample_rate_hz, "dark");
}

LinkOutput simulate_link(const IQFrame& tx, const ChannelParams& ch, const ReceiverModel& rx,
                         const DspConfig& cfg, EntropySource& rng) {
  ch.validate();
  rx.validate();
  GroundTruth truth;
  truth.transmittance = ch.effective_transmittance();
  truth.excess_noise = ch.excess_noise;
  truth.efficiency = rx.efficiency;
  truth.v_el = rx.v_el;
  truth.clock_ppm = rx.clock_ppm;
  truth.lead_samples = rx.max_lead > 0
                           ? static_cast<std::size_t>(rng.uniform() * static_cast<double>(rx.max_lead))
                           : 0;
  truth.lead_samples = std::min(truth.lead_samples, rx.max_lead > 0 ? rx.max_lead - 1 : 0);
  const IQFrame chan = apply_channel(tx, ch, cfg, rng);
  std::vector<cplx> padded(truth.lead_samples + chan.size() + rx.tail);
  std::copy(chan.samples().begin(), chan.samples().end(),
            padded.begin() + static_cast<long>(truth.lead_samples));
  IQFrame f = chan.with_samples(std::move(padded));
  LaserDraw draw;
  f = apply_laser_impairments(f, rx, rng, &draw);
  truth.laser_offset_hz = draw.offset_hz;
  truth.initial_phase = draw.initial_phase;
  f = apply_clock_skew(f, rx.clock_ppm);
  return {detect(f, rx, cfg, rng), truth};
}

}  // namespace cvqkd
