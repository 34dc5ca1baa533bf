#pragma once

// Offline receiver characterization: Welch PSD, clearance, bandwidth,
// linearity and responsivity.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "cvqkd/core.hpp"
#include "cvqkd/linksim.hpp"

namespace cvqkd {

struct PsdCurve {
  std::vector<double> frequencies;  // Hz, increasing
  std::vector<double> density;      // units^2 / Hz
  double resolution_bw = 0.0;       // bin spacing, Hz
};

// Averaged modified periodogram: Hann window, `overlap` fraction of
// segment_len shared between consecutive segments, mean removed. Passband
// (real) traces give a one-sided density on [0, fs/2]; baseband traces a
// two-sided density on [-fs/2, fs/2). Either way sum(density) * resolution_bw
// equals the trace variance in expectation.
PsdCurve compute_psd(const IQFrame& trace, std::size_t segment_len, double overlap = 0.5);

struct ClearanceCurve {
  std::vector<double> frequencies;
  std::vector<double> clearance_db;
};

ClearanceCurve clearance_curve(const PsdCurve& illuminated, const PsdCurve& dark);

// Mean clearance over bins within +/- halfwidth of f, averaged as a linear
// ratio and returned in dB.
double clearance_near(const ClearanceCurve& curve, double f_hz, double halfwidth_hz);

// Largest frequency whose clearance is >= threshold, nullopt when none.
std::optional<double> bandwidth_at_clearance(const ClearanceCurve& curve, double threshold_db);

struct LinearityFit {
  double slope = 0.0;
  double intercept = 0.0;
  double relative_nonlinearity = 0.0;  // max |residual| / fitted span
  std::optional<double> saturation_point;
  std::size_t n_linear = 0;            // points in the fitted region
};

// Grows a least-squares line point by point. A point whose relative residual
// against the fit of the previous points is not below `threshold` marks
// saturation at the previous point.
LinearityFit linearity_fit(std::span<const double> powers, std::span<const double> noise,
                           double threshold = 0.02);

inline constexpr double kMaxResponsivity = 1.25;  // A/W at 1550 nm

// eta = slope(I+ + I- vs P_LO) / 1.25 A/W.
double responsivity_efficiency(std::span<const double> p_lo, std::span<const double> i_plus,
                               std::span<const double> i_minus);

// Illuminated (shot + electronic) and dark (electronic) real traces whose
// clearance follows `profile`; the shot-noise level is white with variance
// shot_variance.
std::pair<IQFrame, IQFrame> synthesize_clearance_traces(const std::vector<ClearancePoint>& profile,
                                                        std::size_t n, double sample_rate,
                                                        double shot_variance, EntropySource& rng);

// Clearance profile used for synthetic receivers: 26/14/9/6 dB at
// 10/100/200/300 MHz with the 10 dB point at 150 MHz.
std::vector<ClearancePoint> reference_clearance_profile();

}  // namespace cvqkd
