#include "cvqkd/characterization.hpp"

#include <algorithm>
#include <cmath>

#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"

namespace cvqkd {
namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

Line least_squares(std::span<const double> x, std::span<const double> y, std::size_t n) {
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  if (!(sxx > 0.0)) throw DomainError("least squares: constant abscissa");
  const double a = sxy / sxx;
  return {a, ym - a * xm};
}

}  // namespace

PsdCurve compute_psd(const IQFrame& trace, std::size_t segment_len, double overlap) {
  if (segment_len < 4) throw DomainError("compute_psd: segment too short");
  if (trace.size() < segment_len) throw DomainError("compute_psd: trace shorter than one segment");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw DomainError("compute_psd: overlap must lie in [0, 1)");
  const bool real = trace.domain() == Domain::Passband;
  const double fs = trace.sample_rate();
  const auto x = trace.samples();
  cplx mean{};
  for (const auto& v : x) mean += v;
  mean /= static_cast<double>(x.size());

  std::vector<double> w(segment_len);
  double w2 = 0.0;
  for (std::size_t i = 0; i < segment_len; ++i) {
    // periodic Hann, so 50% overlap sums to a constant
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(segment_len));
    w2 += w[i] * w[i];
  }
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                std::llround(segment_len * (1.0 - overlap))));
  const std::size_t nseg = (x.size() - segment_len) / hop + 1;
  std::vector<double> acc(segment_len, 0.0);
  std::vector<cplx> seg(segment_len);
  for (std::size_t s = 0; s < nseg; ++s) {
    for (std::size_t i = 0; i < segment_len; ++i) seg[i] = (x[s * hop + i] - mean) * w[i];
    const auto spec = fft::forward(seg);
    for (std::size_t k = 0; k < segment_len; ++k) acc[k] += std::norm(spec[k]);
  }
  const double scale = 1.0 / (fs * w2 * static_cast<double>(nseg));
  PsdCurve out;
  out.resolution_bw = fs / static_cast<double>(segment_len);
  if (real) {
    const std::size_t half = segment_len / 2;
    for (std::size_t k = 0; k <= half; ++k) {
      double d = acc[k] * scale;
      if (k != 0 && !(segment_len % 2 == 0 && k == half)) d *= 2.0;
      out.frequencies.push_back(static_cast<double>(k) * out.resolution_bw);
      out.density.push_back(d);
    }
  } else {
    const std::size_t half = segment_len / 2;
    for (std::size_t j = 0; j < segment_len; ++j) {
      const std::size_t k = (j + segment_len - half) % segment_len;
      out.frequencies.push_back(fft::bin_frequency(k, segment_len, fs));
      out.density.push_back(acc[k] * scale);
    }
  }
  return out;
}

ClearanceCurve clearance_curve(const PsdCurve& illuminated, const PsdCurve& dark) {
  if (illuminated.frequencies != dark.frequencies)
    throw DomainError("clearance_curve: frequency grids differ");
  ClearanceCurve c;
  c.frequencies = illuminated.frequencies;
  c.clearance_db.resize(c.frequencies.size());
  for (std::size_t i = 0; i < c.frequencies.size(); ++i) {
    if (!(dark.density[i] > 0.0)) throw DomainError("clearance_curve: zero dark density");
    c.clearance_db[i] = 10.0 * std::log10(illuminated.density[i] / dark.density[i]);
  }
  return c;
}

double clearance_near(const ClearanceCurve& curve, double f_hz, double halfwidth_hz) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
    if (std::abs(curve.frequencies[i] - f_hz) <= halfwidth_hz) {
      acc += std::pow(10.0, curve.clearance_db[i] / 10.0);
      ++n;
    }
  }
  if (n == 0) throw DomainError("clearance_near: no bins near the requested frequency");
  return 10.0 * std::log10(acc / static_cast<double>(n));
}

std::optional<double> bandwidth_at_clearance(const ClearanceCurve& curve, double threshold_db) {
  std::optional<double> bw;
  for (std::size_t i = 0; i < curve.frequencies.size(); ++i)
    if (curve.clearance_db[i] >= threshold_db) bw = curve.frequencies[i];
  return bw;
}

LinearityFit linearity_fit(std::span<const double> powers, std::span<const double> noise,
                           double threshold) {
  if (powers.size() != noise.size()) throw DomainError("linearity_fit: length mismatch");
  if (powers.size() < 3) throw DomainError("linearity_fit: at least 3 points required");
  const auto [pmin, pmax] = std::minmax_element(powers.begin(), powers.end());
  const auto [nmin, nmax] = std::minmax_element(noise.begin(), noise.end());
  if (!(*pmax > *pmin) || !(*nmax > *nmin)) throw DomainError("linearity_fit: degenerate inputs");

  LinearityFit r;
  std::size_t used = 2;
  Line line = least_squares(powers, noise, used);
  for (std::size_t i = 2; i < powers.size(); ++i) {
    const double pred = line.slope * powers[i] + line.intercept;
    const double rel = std::abs(noise[i] - pred) / std::max(std::abs(pred), 1e-300);
    if (!(rel < threshold)) {
      r.saturation_point = powers[i - 1];
      break;
    }
    used = i + 1;
    line = least_squares(powers, noise, used);
  }
  r.slope = line.slope;
  r.intercept = line.intercept;
  r.n_linear = used;
  double max_res = 0.0;
  double lo = powers[0], hi = powers[0];
  for (std::size_t i = 0; i < used; ++i) {
    max_res = std::max(max_res, std::abs(noise[i] - (line.slope * powers[i] + line.intercept)));
    lo = std::min(lo, powers[i]);
    hi = std::max(hi, powers[i]);
  }
  const double span = std::abs(line.slope * (hi - lo));
  r.relative_nonlinearity = span > 0.0 ? max_res / span : 0.0;
  return r;
}

double responsivity_efficiency(std::span<const double> p_lo, std::span<const double> i_plus,
                               std::span<const double> i_minus) {
  if (p_lo.size() != i_plus.size() || p_lo.size() != i_minus.size())
    throw DomainError("responsivity_efficiency: length mismatch");
  if (p_lo.size() < 2) throw DomainError("responsivity_efficiency: at least 2 points required");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < p_lo.size(); ++i) {
    inc = inc && p_lo[i] > p_lo[i - 1];
    dec = dec && p_lo[i] < p_lo[i - 1];
  }
  if (!inc && !dec) throw DomainError("responsivity_efficiency: powers must be monotone");
  std::vector<double> sum(p_lo.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = i_plus[i] + i_minus[i];
  return least_squares(p_lo, sum, p_lo.size()).slope / kMaxResponsivity;
}

std::pair<IQFrame, IQFrame> synthesize_clearance_traces(const std::vector<ClearancePoint>& profile,
                                                        std::size_t n, double sample_rate,
                                                        double shot_variance, EntropySource& rng) {
  auto shape = [&profile](double f) { return elec_to_shot_ratio(clearance_at(profile, f)); };
  const auto dark = colored_noise(n, sample_rate, shape, shot_variance, rng);
  const auto elec = colored_noise(n, sample_rate, shape, shot_variance, rng);
  const double sd = std::sqrt(shot_variance);
  std::vector<cplx> ill(n), drk(n);
  for (std::size_t i = 0; i < n; ++i) {
    ill[i] = elec[i] + sd * rng.normal();
    drk[i] = dark[i];
  }
  return {IQFrame(std::move(ill), sample_rate, Domain::Passband).tagged("illuminated"),
          IQFrame(std::move(drk), sample_rate, Domain::Passband).tagged("dark")};
}

std::vector<ClearancePoint> reference_clearance_profile() {
  return {{10e6, 26.0}, {100e6, 14.0}, {150e6, 10.0}, {200e6, 9.0}, {300e6, 6.0}};
}

}  // namespace cvqkd
