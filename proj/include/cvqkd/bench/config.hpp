#pragma once

// Experiment configuration and its JSON form.
//
// Every key carries its unit in the name. Sections and keys:
//   dsp        symbol_rate_hz roll_off freq_shift_hz pilot1_hz pilot2_hz
//              pilot_to_signal_db num_symbols dac_sample_rate_hz
//              adc_sample_rate_hz zc_root zc_length filter_span_symbols
//              preamble_to_signal_db preamble_shaped
//   modulation kind (gaussian|psk|qam|pcs_qam) order nu va_snu
//   channel    transmittance excess_noise_snu fiber_alpha_db_per_km
//              distance_km (null: use transmittance)
//   receiver   efficiency v_el_snu random_offset laser_offset_hz
//              offset_range_hz linewidth_hz random_initial_phase clock_ppm
//              clearance_profile [{freq_hz, clearance_db}] detector_gain
//              shot_noise clip_level (null: off) max_lead_samples tail_samples
//              calibration_samples (0: frame length) sync_threshold
//   security   beta_ec epsilon disclosure_fraction
//              info_convention (per_symbol|doubled_per_quadrature)
//   batch      frames seed xi_jitter_rel finite_n_blocks
//   output     dir save_frames
// Missing keys take the defaults below; unknown keys are an error. A parsed
// config serialises back with every effective value present.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cvqkd/core.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/linksim.hpp"

namespace cvqkd::bench {

struct ExperimentConfig {
  DspConfig dsp;
  ModulationSpec modulation;
  double va = 4.10;
  ChannelParams channel;
  ReceiverModel receiver;
  std::size_t calibration_samples = 0;
  double sync_threshold = 0.4;
  SecurityParams security;
  std::size_t frames = 10;
  std::uint64_t seed = 1;
  // Per-frame excess noise is xi * exp(s z - s^2/2), z ~ N(0, 1), s this value.
  double xi_jitter_rel = 0.0;
  std::vector<double> finite_n_blocks{1e7, 1e8, 1e9, 1e10};
  std::string out_dir;
  bool save_frames = false;

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
// Throws ConfigError on unknown keys, wrong types or invalid values.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

ExperimentConfig parse_config(const std::string& text);
// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path);

}  // namespace cvqkd::bench
