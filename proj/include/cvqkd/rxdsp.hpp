#pragma once

// Bob's recovery chain, in order: synchronize -> estimate_pilots ->
// correct_clock -> carrier_recover -> (cancel_pilots) downconvert_and_match ->
// optimal_downsample -> phase_correct -> SNU scaling -> global_phase_align.

#include <cstddef>
#include <span>
#include <vector>

#include "cvqkd/core.hpp"
#include "cvqkd/txdsp.hpp"

namespace cvqkd {

struct SyncOptions {
  std::size_t search_len = 16384;  // samples searched from the start of rx
  double max_offset_hz = 3.5e6;    // frequency hypotheses cover +/- this
};

struct SyncResult {
  std::size_t frame_start = 0;     // index of the first preamble sample
  double correlation_peak = 0.0;   // normalised, in [0, 1]
  bool accepted = false;
  double coarse_offset_hz = 0.0;   // best frequency hypothesis
};

// Normalised cross-correlation of rx (analytic or baseband) against the
// preamble template over a bank of frequency hypotheses. Passband input is
// converted to its analytic signal first.
SyncResult synchronize(const IQFrame& rx, const IQFrame& preamble, double threshold,
                       const SyncOptions& opts = {});

// Re-times a coarse start once the carrier offset is known. A ZC sequence
// trades delay for frequency, so the bank search alone can land one chip off
// when the offset falls between hypotheses. Searches coarse_start +/- halfwidth.
SyncResult refine_sync(const IQFrame& rx, const IQFrame& preamble, std::size_t coarse_start,
                       double offset_hz, std::size_t halfwidth);

struct PilotOptions {
  std::size_t block_len = 1000;     // demodulation block, samples (200 symbols)
  double search_halfwidth_hz = 5e6;
  double min_prominence_db = 15.0;  // peak over median of the search window
};

struct PilotEstimate {
  double f1_hat = 0.0;
  double f2_hat = 0.0;
  double clock_ratio = 1.0;         // nominal spacing / (f2_hat - f1_hat)
  // Unwrapped pilot-1 phase per block, sampled at track_t0 + k*track_dt
  // (sample indices of the frame the estimate was taken on).
  std::vector<double> phase_track;
  double track_t0 = 0.0;
  double track_dt = 1.0;
};

// Pilot frequencies from a Hann periodogram with 3-point quadratic peak
// interpolation, refined by the least-squares phase slope of block
// demodulation; f2 is refined relative to f1 so laser phase noise cancels in
// the spacing. Samples [start, start + count) of rx are used.
PilotEstimate estimate_pilots(const IQFrame& rx, const DspConfig& cfg, std::size_t start,
                              std::size_t count, const PilotOptions& opts = {});
PilotEstimate estimate_pilots(const IQFrame& rx, const DspConfig& cfg);

// Pilot-1 block phase track at frequency f_hz over [start, start + count).
PilotEstimate track_pilot_phase(const IQFrame& rx, double f_hz, std::size_t start,
                                std::size_t count, std::size_t block_len);

// out[n] = rx(origin + n*clock_ratio). clock_ratio must lie in (0.999, 1.001).
IQFrame correct_clock(const IQFrame& rx, double clock_ratio, double origin = 0.0);

// Removes the laser offset exp(-i 2 pi (f1_hat * clock_ratio - f_p1) n / fs).
// f1_hat is measured before clock correction, hence the rescaling.
IQFrame carrier_recover(const IQFrame& rx, const PilotEstimate& pe, const DspConfig& cfg);

// Subtracts both pilot tones over [start, start + count), using block-wise
// complex amplitudes interpolated linearly between block centres.
IQFrame cancel_pilots(const IQFrame& rx, const DspConfig& cfg, std::size_t start,
                      std::size_t count, std::size_t block_len);

// Shifts the quantum band to baseband and applies the matched RRC (centred,
// so symbol peaks keep their indices).
IQFrame downconvert_and_match(const IQFrame& rx, const DspConfig& cfg, const FilterTaps& taps);

struct DownsampleOptions {
  std::size_t start = 0;   // index of sampling phase 0 of the first symbol
  std::size_t count = 0;   // symbols to return, 0 for as many as fit
  // Refine the argmax phase to a fractional instant from the first harmonic
  // of the variance-vs-phase curve and interpolate there.
  bool fractional = true;
};

struct DownsampleResult {
  std::vector<cplx> symbols;
  int phase = 0;                   // integer argmax phase
  double timing = 0.0;             // sample index of the first returned symbol
  std::vector<double> phase_variance;
};

DownsampleResult optimal_downsample(const IQFrame& rx, int sps, const DownsampleOptions& opts = {});

// Rotates symbol k by -theta(first_time + k*step), theta the pilot phase track
// interpolated linearly. Throws FrameRejected(Phase) when the track does not
// cover the symbols.
std::vector<cplx> phase_correct(std::span<const cplx> symbols, const PilotEstimate& pe,
                                double first_time, double step);

// theta* = arg sum conj(x) y, the maximiser of Re<x, y e^{-i theta}>. Throws
// FrameRejected(Align) when |rho| sqrt(n) < 5, rho the normalised correlation.
double global_phase(std::span<const cplx> x, std::span<const cplx> y);
// y rotated by -theta*, with theta* computed from (x, y).
SymbolFrame global_phase_align(const SymbolFrame& x, const SymbolFrame& y);

struct ReceiverOptions {
  double sync_threshold = 0.4;
  double disclosure_fraction = 0.5;
  SyncOptions sync;
  PilotOptions pilots;
};

struct ReceiveResult {
  SymbolFrame symbols;  // all N symbols, SNU, phase aligned
  SyncResult sync;
  PilotEstimate pilots;
  int sample_phase = 0;
  double timing = 0.0;
  double global_phase = 0.0;
};

// Full chain. `disclosed` holds Alice's symbols at disclosed_indices(N, f) in
// order; N = cfg.num_symbols. The sync template is make_preamble(cfg).
// Throws FrameRejected tagged with the stage.
ReceiveResult receive_frame_detailed(const IQFrame& rx, const DspConfig& cfg,
                                     const SnuCalibration& calib, const SymbolFrame& disclosed,
                                     const ReceiverOptions& opts = {});
SymbolFrame receive_frame(const IQFrame& rx, const DspConfig& cfg, const SnuCalibration& calib,
                          const SymbolFrame& disclosed, const ReceiverOptions& opts = {});

}  // namespace cvqkd
