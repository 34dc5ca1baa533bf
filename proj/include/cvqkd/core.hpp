#pragma once

// Shared domain types and shot-noise-unit (SNU) conventions.
//
// Conventions used throughout the library:
//  * hbar = 2, so vacuum noise has unit variance per quadrature.
//  * A complex symbol x encodes the quadrature pair (q, p) as x = (q + ip)/sqrt(2).
//    E|x|^2 is therefore the per-quadrature variance in SNU, and a modulation
//    variance V_A corresponds to E|x|^2 = V_A and <n> = V_A/2 photons per symbol.
//  * A shot-noise-only frame normalised to SNU has E|y|^2 = 1 after the receiver
//    matched filter.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cvqkd {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

struct DspConfig {
  double symbol_rate_hz = 100e6;
  double roll_off = 0.3;
  double freq_shift_hz = 125e6;
  double pilot1_hz = 190e6;
  double pilot2_hz = 200e6;
  double pilot_to_signal_db = 12.0;
  std::size_t num_symbols = 1'000'000;
  double dac_sample_rate_hz = 500e6;
  double adc_sample_rate_hz = 500e6;
  int zc_root = 5;
  int zc_length = 797;
  int filter_span = 40;
  double preamble_to_signal_db = 12.0;
  // Preamble chips are RRC shaped at the symbol rate and placed in the quantum
  // band. When false, raw chips are emitted at the sample rate.
  bool preamble_shaped = true;

  int samples_per_symbol() const;
  double occupied_bandwidth_hz() const { return symbol_rate_hz * (1.0 + roll_off); }
  double pilot_spacing_hz() const { return pilot2_hz - pilot1_hz; }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

enum class Modulation { Gaussian, Psk, Qam, PcsQam };

struct ModulationSpec {
  Modulation kind = Modulation::Gaussian;
  int order = 0;      // constellation size, unused for Gaussian
  double nu = 0.0;    // Maxwell-Boltzmann shaping rate, PCS-QAM only
};

std::string to_string(const ModulationSpec& spec);

class SymbolFrame {
 public:
  SymbolFrame() = default;
  // Throws DomainError if any symbol is not finite or target_va < 0.
  SymbolFrame(std::vector<cplx> symbols, ModulationSpec modulation, double target_va);

  std::span<const cplx> symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }
  const ModulationSpec& modulation() const { return modulation_; }
  double target_va() const { return target_va_; }

  // Mean |x|^2 over the frame.
  double second_moment() const;

 private:
  std::vector<cplx> symbols_;
  ModulationSpec modulation_;
  double target_va_ = 0.0;
};

enum class Domain { Baseband, Passband };
enum class Units { Raw, Snu };

// A sampled waveform. Passband frames are real: the imaginary part of every
// stored sample is zero.
class IQFrame {
 public:
  IQFrame() = default;
  IQFrame(std::vector<cplx> samples, double sample_rate, Domain domain,
          double scale = 1.0, Units units = Units::Raw);

  std::span<const cplx> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double sample_rate() const { return sample_rate_; }
  Domain domain() const { return domain_; }
  // Raw detector units per stored sample unit.
  double scale() const { return scale_; }
  Units units() const { return units_; }
  const std::vector<std::string>& tags() const { return tags_; }
  bool image_leakage_warning() const { return image_warning_; }

  // Copy with new samples; metadata (rate, domain, scale, units, tags) kept.
  IQFrame with_samples(std::vector<cplx> samples) const;
  IQFrame tagged(std::string tag) const;
  IQFrame with_image_warning(bool warn) const;
  IQFrame with_scale(double scale, Units units) const;

  // Moves samples out; the frame is left empty.
  std::vector<cplx> release() && { return std::move(samples_); }

 private:
  std::vector<cplx> samples_;
  double sample_rate_ = 1.0;
  Domain domain_ = Domain::Baseband;
  double scale_ = 1.0;
  Units units_ = Units::Raw;
  std::vector<std::string> tags_;
  bool image_warning_ = false;
};

struct SnuCalibration {
  double shot_variance = 1.0;  // sigma_0^2, raw units^2
  double elec_variance = 0.0;  // sigma_el^2, raw units^2

  // Throws CalibrationError unless shot > 0 and elec >= 0.
  static SnuCalibration make(double shot_variance, double elec_variance);

  double v_el() const { return elec_variance / shot_variance; }
  // Multiplier taking raw amplitudes to sqrt(SNU).
  double conversion_factor() const;
};

// Uniformly interleaved disclosure pattern: symbol i is disclosed for
// parameter estimation when floor((i+1)f) > floor(i f). f = 0.5 discloses the
// odd indices.
bool is_disclosed(std::size_t i, double fraction);
std::vector<std::size_t> disclosed_indices(std::size_t n, double fraction);

// Mean photon number per symbol, <n> = V_A / 2.
double photons_per_symbol(double va);

// Rescales a raw frame so a shot-noise-only frame has unit variance.
// Frames already in SNU are returned unchanged.
IQFrame normalize_to_snu(const IQFrame& raw, const SnuCalibration& calib);

// Variance of the in-band, matched-filtered, decimated trace in raw units^2.
double inband_variance(const IQFrame& trace, const DspConfig& dsp);

// sigma_0^2 = var(illuminated) - var(dark), sigma_el^2 = var(dark), both
// measured after the receiver filtering chain.
SnuCalibration calibrate_noise(const IQFrame& shot_trace, const IQFrame& dark_trace,
                               const DspConfig& dsp);

}  // namespace cvqkd
