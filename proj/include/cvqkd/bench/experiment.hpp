#pragma once

// Batch experiment runner: per frame, generate -> transmit -> simulate link ->
// calibrate (fresh shot and dark traces) -> receive -> estimate -> key rate.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cvqkd/bench/config.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/keyrate.hpp"

namespace cvqkd::bench {

struct FrameRecord {
  std::size_t index = 0;
  bool rejected = false;
  std::string reject_stage;   // empty for accepted frames
  std::string reject_reason;

  // ground truth drawn by the link simulator
  double true_transmittance = 0.0;
  double true_xi = 0.0;
  double true_xi_b = 0.0;
  double true_offset_hz = 0.0;
  std::size_t true_lead_samples = 0;

  // calibration and receiver diagnostics
  double shot_variance_raw = 0.0;
  double v_el_hat = 0.0;
  bool image_warning = false;
  double sync_peak = 0.0;
  std::size_t frame_start = 0;
  double offset_hat_hz = 0.0;
  double clock_ppm_hat = 0.0;
  double timing_samples = 0.0;
  double global_phase_rad = 0.0;
  // |y - g x|^2 / |g x|^2 over the whole frame, g the least-squares gain
  double nmse = 0.0;

  EstimationResult estimate;
  KeyRateReport key;  // asymptotic, from this frame's estimates
};

struct RunReport {
  std::string format = "cvqkd-run-report/1";
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::size_t n_frames = 0;
  std::size_t n_rejected = 0;
  double fer = 0.0;
  std::string info_convention;

  // over accepted frames
  SeriesSummary va, t, xi, xi_b, v_el, skr_frame_bps;
  // key rates from the batch means of (va, t, xi_b, v_el)
  KeyRateReport key_from_means;
  std::vector<KeyRateReport> finite_from_means;  // one per config.finite_n_blocks

  std::vector<FrameRecord> frames;
};

// Frames run in parallel; each draws from its own (seed, frame, k) streams and
// results are reduced in frame order, so the report depends only on the
// config. Rejected frames are recorded and never abort the batch.
RunReport run_experiment(const ExperimentConfig& cfg);

// The single frame pipeline; `received` is filled with the detector trace when
// non-null.
FrameRecord run_frame(const ExperimentConfig& cfg, std::size_t index, IQFrame* received = nullptr);

}  // namespace cvqkd::bench
