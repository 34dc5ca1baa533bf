#pragma once

// Result emission. JSON carries the full report (config echo included) and
// re-ingests losslessly; CSV carries the plot-ready series.
//
// CSV files written by emit_results in csv mode:
//   timeseries.csv  frame,rejected,reject_stage,t_hat,xi_hat,xi_b_hat,va_hat,
//                   v_el_hat,skr_bps,nmse,sync_peak,offset_hat_hz,clock_ppm_hat
//   histograms.csv  quantity,bin,lower,upper,count   (20 bins per quantity)
//   summary.csv     quantity,mean,variance,std_error
// Sweep tables:
//   distance_km,t,skr_asym,skr_N<n>...   (skr in bits/s, N written like 1e7)
//   distance_km,best_va,best_skr,skr_va<v>...

#include <string>
#include <vector>

#include <json.hpp>

#include "cvqkd/bench/experiment.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/keyrate.hpp"

namespace cvqkd {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EstimationResult, va_hat, t_hat, xi_hat, xi_b_hat, v_el, eta,
                                   n_disclosed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(KeyRateReport, snr, i_ab, chi_be, k_raw, k, key_fraction,
                                   skr_bps, skr_raw_bps, n_block, t_min, xi_max, delta,
                                   convention, reason)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Histogram, edges, counts)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SeriesSummary, mean, variance, std_error, histogram)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SweepRow, distance_km, t, skr_asym, skr_finite)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SweepTable, n_blocks, rows, zero_crossing_asym_km,
                                   zero_crossing_finite_km)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VaSweepRow, distance_km, skr_asym, best_va, best_skr)

namespace bench {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FrameRecord, index, rejected, reject_stage, reject_reason,
                                   true_transmittance, true_xi, true_xi_b, true_offset_hz,
                                   true_lead_samples, shot_variance_raw, v_el_hat, image_warning,
                                   sync_peak, frame_start, offset_hat_hz, clock_ppm_hat,
                                   timing_samples, global_phase_rad, nmse, estimate, key)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(RunReport, format, config, seed, n_frames, n_rejected, fer,
                                   info_convention, va, t, xi, xi_b, v_el, skr_frame_bps,
                                   key_from_means, finite_from_means, frames)

enum class OutputFormat { Json, Csv };

// Throws ConfigError for anything but "json" or "csv".
OutputFormat parse_format(const std::string& s);

// Pretty-printed, deterministic.
std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& text);

// Writes report.json, or the CSV set, into dir (created if missing). Returns
// the paths written. Throws IoError with the offending path.
std::vector<std::string> emit_results(const RunReport& report, const std::string& dir,
                                      OutputFormat format);

std::string sweep_csv(const SweepTable& table);
std::string va_sweep_csv(const std::vector<VaSweepRow>& rows, const std::vector<double>& va_grid);

// Single writer per path.
void write_text(const std::string& path, const std::string& text);

}  // namespace bench
}  // namespace cvqkd
