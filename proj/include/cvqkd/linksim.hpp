#pragma once

// Channel and receiver emulation: fiber loss and excess noise, laser beat
// offset and phase noise, ADC clock skew, and RF-heterodyne detection with a
// single balanced detector.
//
// Amplitude bookkeeping (complex symbol convention of core.hpp): after the
// receive chain Bob sees y = sqrt(eta*T/2) x + n with
// E|n|^2 = 1 + v_el + eta*T*xi/2. The factor 1/2 is the heterodyne split of
// the signal between the two quadratures.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cvqkd/core.hpp"
#include "cvqkd/modulation.hpp"

namespace cvqkd {

struct ChannelParams {
  double transmittance = 1.0;         // used when distance_km is not set
  double excess_noise = 0.0;          // xi, SNU, referred to the channel input
  double fiber_alpha_db_per_km = 0.2;
  std::optional<double> distance_km;

  static ChannelParams from_distance(double km, double alpha_db_per_km, double xi);
  double effective_transmittance() const;
  void validate() const;
};

// One point of a clearance-vs-frequency profile.
struct ClearancePoint {
  double freq_hz = 0.0;
  double clearance_db = 0.0;
};

// Clearance at f interpolated linearly in log10(f), clamped at the end points.
double clearance_at(const std::vector<ClearancePoint>& profile, double f_hz);

struct ReceiverModel {
  double efficiency = 1.0;  // eta
  double v_el = 0.0;        // SNU, in-band average
  // Beat offset between the lasers: fixed, or drawn per frame from
  // U(-offset_range_hz, offset_range_hz).
  bool random_offset = true;
  double laser_offset_hz = 0.0;
  double offset_range_hz = 3e6;
  double linewidth_hz = 100.0;   // combined, sets the Wiener phase increment
  bool random_initial_phase = true;
  double clock_ppm = 0.0;        // ADC rate error relative to the DAC
  std::vector<ClearancePoint> clearance_profile;  // empty: white electronic noise
  double detector_gain = 1.0;    // raw units per sqrt(SNU)
  bool shot_noise = true;        // false only for noiseless loopback tests
  std::optional<double> clip_level;
  std::size_t max_lead = 4096;   // random leading silence before the frame, samples
  std::size_t tail = 2048;       // trailing silence, samples

  // All impairments and noise disabled, eta = 1.
  static ReceiverModel ideal();
  void validate() const;
};

struct GroundTruth {
  double transmittance = 1.0;
  double excess_noise = 0.0;
  double efficiency = 1.0;
  double v_el = 0.0;
  double laser_offset_hz = 0.0;
  double initial_phase = 0.0;
  double clock_ppm = 0.0;
  std::size_t lead_samples = 0;  // timing offset of the frame start

  double xi_b() const { return efficiency * transmittance * excess_noise; }
};

struct LaserDraw {
  double offset_hz = 0.0;
  double initial_phase = 0.0;
};

// Scales by sqrt(T) and adds in-band white excess noise, E|n|^2 = T*xi per
// symbol, RRC shaped and shifted to the quantum band of cfg. The noise pulses
// sit on the grid n = k*sps of the input frame.
IQFrame apply_channel(const IQFrame& frame, const ChannelParams& ch, const DspConfig& cfg,
                      EntropySource& rng);

// Multiplies by exp(i(2 pi df t + phi(t))), phi a Wiener process with
// Var[phi(t+tau) - phi(t)] = 2 pi linewidth tau.
IQFrame apply_laser_impairments(const IQFrame& frame, const ReceiverModel& rx,
                                EntropySource& rng, LaserDraw* draw = nullptr);

// out[n] = in((1 + ppm*1e-6) n). The sample_rate field is left unchanged.
IQFrame apply_clock_skew(const IQFrame& frame, double ppm);

// Balanced RF-heterodyne detection of a baseband single-sideband frame.
// Returns a real passband trace in raw detector units. Sets the image-leakage
// warning when image-band power exceeds -40 dB of the signal band.
IQFrame detect(const IQFrame& frame, const ReceiverModel& rx, const DspConfig& cfg,
               EntropySource& rng);

// Noise-only acquisitions for calibration: LO on (shot + electronic) and LO
// off (electronic only).
IQFrame shot_noise_trace(std::size_t n, const ReceiverModel& rx, const DspConfig& cfg,
                         EntropySource& rng);
IQFrame dark_trace(std::size_t n, const ReceiverModel& rx, const DspConfig& cfg,
                   EntropySource& rng);

// Real Gaussian noise whose PSD is that of white noise of the given variance
// multiplied by shape(|f|).
std::vector<double> colored_noise(std::size_t n, double sample_rate,
                                  const std::function<double(double)>& shape, double variance,
                                  EntropySource& rng);

// Electronic-to-shot noise PSD ratio implied by a clearance in dB:
// 1 / (10^(c/10) - 1).
double elec_to_shot_ratio(double clearance_db);

struct LinkOutput {
  IQFrame received;
  GroundTruth truth;
};

// apply_channel -> lead silence -> apply_laser_impairments -> apply_clock_skew -> detect
LinkOutput simulate_link(const IQFrame& tx, const ChannelParams& ch, const ReceiverModel& rx,
                         const DspConfig& cfg, EntropySource& rng);

}  // namespace cvqkd
