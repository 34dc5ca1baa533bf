#include <cmath>

#include "cvqkd/errors.hpp"
#include "cvqkd/kernels.hpp"

namespace cvqkd::kernels::reference {

std::vector<cplx> upsample_filter(std::span<const cplx> symbols,
                                  std::span<const double> taps, int sps) {
  if (sps < 1) throw DomainError("upsample_filter: sps must be >= 1");
  if (symbols.empty() || taps.empty()) return {};
  std::vector<cplx> stuffed(symbols.size() * static_cast<std::size_t>(sps));
  for (std::size_t i = 0; i < symbols.size(); ++i) stuffed[i * sps] = symbols[i];
  std::vector<cplx> out(stuffed.size() + taps.size() - 1);
  for (std::size_t n = 0; n < stuffed.size(); ++n) {
    if (stuffed[n] == cplx{}) continue;
    for (std::size_t k = 0; k < taps.size(); ++k) out[n + k] += taps[k] * stuffed[n];
  }
  return out;
}

std::vector<cplx> filter_same(std::span<const cplx> x, std::span<const double> taps) {
  return filter_decimate(x, taps, 0, 1, x.size());
}

std::vector<cplx> filter_decimate(std::span<const cplx> x, std::span<const double> taps,
                                  std::size_t start, std::size_t step, std::size_t count) {
  if (taps.size() % 2 == 0) throw DomainError("filter: odd tap count required");
  if (step == 0) throw DomainError("filter_decimate: step must be positive");
  const auto c = static_cast<long>(taps.size() / 2);
  const auto len = static_cast<long>(x.size());
  std::vector<cplx> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const long n = static_cast<long>(start + i * step);
    cplx acc{};
    for (long k = 0; k < static_cast<long>(taps.size()); ++k) {
      const long idx = n + c - k;
      if (idx >= 0 && idx < len) acc += taps[k] * x[idx];
    }
    out[i] = acc;
  }
  return out;
}

std::vector<cplx> mix(std::span<const cplx> x, double f, double phase0) {
  std::vector<cplx> out(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double cyc = f * static_cast<double>(n);
    const double arg = 2.0 * kPi * (cyc - std::floor(cyc)) + phase0;
    out[n] = x[n] * std::polar(1.0, arg);
  }
  return out;
}

std::vector<cplx> resample(std::span<const cplx> x, double offset, double step,
                           std::size_t count) {
  const int half = kInterpTaps / 2;
  const double i0b = std::cyl_bessel_i(0.0, kInterpKaiserBeta);
  const auto len = static_cast<long>(x.size());
  std::vector<cplx> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double t = offset + static_cast<double>(n) * step;
    const long i0 = static_cast<long>(std::floor(t));
    cplx acc{};
    for (int j = -half + 1; j <= half; ++j) {
      const long k = i0 + j;
      if (k < 0 || k >= len) continue;
      const double d = t - static_cast<double>(k);
      const double u = d / half;
      if (std::abs(u) > 1.0) continue;
      const double w = std::cyl_bessel_i(0.0, kInterpKaiserBeta * std::sqrt(1.0 - u * u)) / i0b;
      const double s = d == 0.0 ? 1.0 : std::sin(kPi * d) / (kPi * d);
      acc += w * s * x[k];
    }
    out[n] = acc;
  }
  return out;
}

std::vector<cplx> block_demod(std::span<const cplx> x, double f, std::size_t block_len) {
  if (block_len == 0) throw DomainError("block_demod: block_len must be positive");
  const std::size_t nb = x.size() / block_len;
  std::vector<cplx> out(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    cplx acc{};
    for (std::size_t i = 0; i < block_len; ++i) {
      const std::size_t n = b * block_len + i;
      const double cyc = f * static_cast<double>(n);
      acc += x[n] * std::polar(1.0, -2.0 * kPi * (cyc - std::floor(cyc)));
    }
    out[b] = acc / static_cast<double>(block_len);
  }
  return out;
}

}  // namespace cvqkd::kernels::reference
