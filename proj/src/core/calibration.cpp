#include <cmath>

#include "cvqkd/core.hpp"
#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/kernels.hpp"

namespace cvqkd {

SnuCalibration SnuCalibration::make(double shot_variance, double elec_variance) {
  if (!(shot_variance > 0.0) || !std::isfinite(shot_variance))
    throw CalibrationError("shot-noise variance must be positive");
  if (!(elec_variance >= 0.0) || !std::isfinite(elec_variance))
    throw CalibrationError("electronic-noise variance must be non-negative");
  return SnuCalibration{shot_variance, elec_variance};
}

double SnuCalibration::conversion_factor() const {
  if (!(shot_variance > 0.0)) throw CalibrationError("shot-noise variance must be positive");
  return 1.0 / std::sqrt(shot_variance);
}

double photons_per_symbol(double va) {
  if (!(va >= 0.0)) throw DomainError("photons_per_symbol: va must be >= 0");
  return va / 2.0;
}

IQFrame normalize_to_snu(const IQFrame& raw, const SnuCalibration& calib) {
  if (raw.units() == Units::Snu) return raw;
  // stored * scale = raw detector units
  const double k = calib.conversion_factor();
  const double m = raw.scale() * k;
  std::vector<cplx> out(raw.samples().begin(), raw.samples().end());
  for (auto& v : out) v *= m;
  return raw.with_samples(std::move(out)).with_scale(1.0 / k, Units::Snu);
}

double inband_variance(const IQFrame& trace, const DspConfig& dsp) {
  const int sps = dsp.samples_per_symbol();
  const auto taps = dsp::rrc_impulse(dsp.roll_off, sps, dsp.filter_span);
  std::vector<cplx> x = trace.domain() == Domain::Passband
                            ? fft::analytic_signal(trace.samples())
                            : std::vector<cplx>(trace.samples().begin(), trace.samples().end());
  x = kernels::mix(x, -dsp.freq_shift_hz / trace.sample_rate(), 0.0);
  // skip one filter length at each end so edge transients do not bias the estimate
  const std::size_t guard = taps.size();
  if (x.size() < 2 * guard + 10 * static_cast<std::size_t>(sps))
    throw CalibrationError("calibration trace too short for the receive filter");
  const std::size_t count = (x.size() - 2 * guard) / sps;
  const auto y = kernels::filter_decimate(x, taps, guard, sps, count);
  return dsp::complex_variance(y) * trace.scale() * trace.scale();
}

SnuCalibration calibrate_noise(const IQFrame& shot_trace, const IQFrame& dark_trace,
                               const DspConfig& dsp) {
  const double ill = inband_variance(shot_trace, dsp);
  const double dark = inband_variance(dark_trace, dsp);
  if (!(ill > dark)) throw CalibrationError("illuminated variance does not exceed dark variance");
  return SnuCalibration::make(ill - dark, dark);
}

}  // namespace cvqkd
