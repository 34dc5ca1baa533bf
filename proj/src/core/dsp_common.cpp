#include <cmath>
#include <numeric>

#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"

namespace cvqkd::dsp {

std::vector<double> rrc_impulse(double beta, int sps, int span) {
  const int n = span * sps + 1;
  const int c = n / 2;
  std::vector<double> h(static_cast<std::size_t>(n));
  const double eps = 1e-9;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i - c) / sps;  // in symbol periods
    double v;
    if (std::abs(t) < eps) {
      v = 1.0 - beta + 4.0 * beta / kPi;
    } else if (std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < eps) {
      const double a = kPi / (4.0 * beta);
      v = beta / std::sqrt(2.0) *
          ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
    } else {
      const double x = 4.0 * beta * t;
      v = (std::sin(kPi * t * (1.0 - beta)) + x * std::cos(kPi * t * (1.0 + beta))) /
          (kPi * t * (1.0 - x * x));
    }
    h[i] = v;
  }
  const double e = std::inner_product(h.begin(), h.end(), h.begin(), 0.0);
  const double s = 1.0 / std::sqrt(e);
  for (auto& v : h) v *= s;
  return h;
}

double mean_power(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

double complex_variance(std::span<const cplx> x) {
  if (x.empty()) return 0.0;
  cplx m{};
  for (const auto& v : x) m += v;
  m /= static_cast<double>(x.size());
  return mean_power(x) - std::norm(m);
}

double interp_linear(std::span<const double> track, double t0, double dt, double t) {
  if (track.empty()) throw DomainError("interp_linear: empty track");
  const double p = (t - t0) / dt;
  if (p <= 0.0) return track.front();
  const auto last = static_cast<double>(track.size() - 1);
  if (p >= last) return track.back();
  const auto i = static_cast<std::size_t>(p);
  const double fr = p - static_cast<double>(i);
  return track[i] + fr * (track[i + 1] - track[i]);
}

void unwrap(std::vector<double>& phase) {
  for (std::size_t i = 1; i < phase.size(); ++i) {
    double d = phase[i] - phase[i - 1];
    d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
    phase[i] = phase[i - 1] + d;
  }
}

}  // namespace cvqkd::dsp
