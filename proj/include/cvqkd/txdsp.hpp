#pragma once

// Alice's transmit chain: upsample, RRC shape, shift to the intermediate
// frequency, add the two pilot tones and prepend the Zadoff-Chu preamble.

#include <cstddef>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd {

struct FilterTaps {
  std::vector<double> coefficients;  // span*sps + 1 taps, unit energy
  int span = 0;
  int sps = 0;
  double roll_off = 0.0;

  std::size_t size() const { return coefficients.size(); }
  std::size_t delay() const { return coefficients.size() / 2; }
};

// Root-raised-cosine taps. Unit energy, so TX followed by the matched RX filter
// gives unit gain at the sampling instant.
FilterTaps rrc_taps(double beta, int sps, int span);

// Zero-stuffs to taps.sps samples/symbol and filters (full convolution). The
// peak of symbol k lands at index k*sps + taps.delay(). Output is baseband at
// symbol_rate_hz * sps.
IQFrame upsample_and_shape(const SymbolFrame& frame, const FilterTaps& taps,
                           double symbol_rate_hz);

// Multiplies by exp(i 2 pi f n / fs). occupied_bw_hz, when given, is used to
// check the shifted band stays below Nyquist.
IQFrame frequency_shift(const IQFrame& frame, double f_hz, double occupied_bw_hz = 0.0);

// Adds exp(i 2 pi f_p n / fs) for both pilots, each with power
// signal_power * 10^(pilot_to_signal_db/10).
IQFrame add_pilots(const IQFrame& frame, const DspConfig& cfg, double signal_power);
// As above with signal_power measured as the mean power of the frame.
IQFrame add_pilots(const IQFrame& frame, const DspConfig& cfg);

// x[k] = exp(-i pi u k (k+1) / L).
IQFrame zadoff_chu(int u, int length, double sample_rate = 1.0);

// Preamble waveform for cfg with unit chip amplitude: RRC-shaped chips shifted
// to the quantum band, or raw chips at the DAC rate.
IQFrame make_preamble(const DspConfig& cfg);

// [preamble | payload].
IQFrame assemble_frame(const IQFrame& payload, const IQFrame& preamble);
// As above with the preamble rescaled to mean power
// signal_power * 10^(ratio_db/10).
IQFrame assemble_frame(const IQFrame& payload, const IQFrame& preamble, double signal_power,
                       double ratio_db);

// Power in [-f_shift - B/2, -f_shift + B/2] relative to [f_shift - B/2, f_shift + B/2],
// in dB, from a full-length periodogram.
double image_band_ratio_db(const IQFrame& frame, double f_shift_hz, double bandwidth_hz);

struct TxFrame {
  IQFrame waveform;            // baseband, sqrt(SNU) amplitude
  IQFrame preamble;            // the scaled preamble as transmitted
  SymbolFrame symbols;
  FilterTaps taps;
  std::size_t payload_start = 0;  // index of the first payload sample
  // Index of the first symbol's peak within the waveform.
  std::size_t first_symbol_index() const { return payload_start + taps.delay(); }
};

// Full transmit chain. Pilot and preamble powers are referenced to the nominal
// signal power per sample, target_va / sps.
TxFrame transmit(const SymbolFrame& symbols, const DspConfig& cfg);

}  // namespace cvqkd
