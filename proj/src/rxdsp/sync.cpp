#include <algorithm>
#include <cmath>

#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/rxdsp.hpp"

namespace cvqkd {

SyncResult synchronize(const IQFrame& rx, const IQFrame& preamble, double threshold,
                       const SyncOptions& opts) {
  const std::size_t lp = preamble.size();
  if (rx.size() <= lp) throw DomainError("synchronize: rx shorter than the preamble");
  const std::size_t w = std::min(rx.size(), std::max(opts.search_len, 2 * lp));
  std::vector<cplx> seg(rx.samples().begin(), rx.samples().begin() + static_cast<long>(w));
  if (rx.domain() == Domain::Passband) seg = fft::analytic_signal(seg);

  const std::size_t n = fft::next_pow2(w);
  const auto r = fft::forward(seg, n);
  const auto p = fft::forward(preamble.samples(), n);
  double ep = 0.0;
  for (const auto& v : preamble.samples()) ep += std::norm(v);

  // sliding energy of rx over the template length
  const std::size_t valid = w - lp + 1;
  std::vector<double> cum(w + 1, 0.0);
  for (std::size_t i = 0; i < w; ++i) cum[i + 1] = cum[i] + std::norm(seg[i]);

  const double bin_hz = rx.sample_rate() / static_cast<double>(n);
  const long mmax = static_cast<long>(std::ceil(opts.max_offset_hz / bin_hz));
  SyncResult best;
  std::vector<cplx> prod(n);
  for (long m = -mmax; m <= mmax; ++m) {
    for (std::size_t k = 0; k < n; ++k) {
      const long j = (static_cast<long>(k) - m) % static_cast<long>(n);
      const auto jj = static_cast<std::size_t>(j < 0 ? j + static_cast<long>(n) : j);
      prod[k] = r[k] * std::conj(p[jj]);
    }
    const auto c = fft::inverse(prod);
    for (std::size_t t = 0; t < valid; ++t) {
      const double er = cum[t + lp] - cum[t];
      if (!(er > 0.0)) continue;
      const double rho = std::abs(c[t]) / std::sqrt(ep * er);
      if (rho > best.correlation_peak) {
        best.correlation_peak = rho;
        best.frame_start = t;
        best.coarse_offset_hz = static_cast<double>(m) * bin_hz;
      }
    }
  }
  best.correlation_peak = std::min(best.correlation_peak, 1.0);
  best.accepted = best.correlation_peak >= threshold;
  return best;
}

SyncResult refine_sync(const IQFrame& rx, const IQFrame& preamble, std::size_t coarse_start,
                       double offset_hz, std::size_t halfwidth) {
  const std::size_t lp = preamble.size();
  if (rx.size() < lp) throw DomainError("refine_sync: rx shorter than the preamble");
  const auto x = rx.samples();
  const double w = 2.0 * kPi * offset_hz / rx.sample_rate();
  std::vector<cplx> tpl(lp);
  double ep = 0.0;
  for (std::size_t i = 0; i < lp; ++i) {
    tpl[i] = preamble.samples()[i] * std::polar(1.0, w * static_cast<double>(i));
    ep += std::norm(tpl[i]);
  }
  const std::size_t lo = coarse_start > halfwidth ? coarse_start - halfwidth : 0;
  const std::size_t hi = std::min(coarse_start + halfwidth, rx.size() - lp);
  SyncResult best;
  best.coarse_offset_hz = offset_hz;
  for (std::size_t t = lo; t <= hi; ++t) {
    cplx acc = 0.0;
    double er = 0.0;
    for (std::size_t i = 0; i < lp; ++i) {
      acc += x[t + i] * std::conj(tpl[i]);
      er += std::norm(x[t + i]);
    }
    if (!(er > 0.0)) continue;
    const double rho = std::abs(acc) / std::sqrt(ep * er);
    if (rho > best.correlation_peak) {
      best.correlation_peak = rho;
      best.frame_start = t;
    }
  }
  best.correlation_peak = std::min(best.correlation_peak, 1.0);
  best.accepted = true;
  return best;
}

}  // namespace cvqkd
