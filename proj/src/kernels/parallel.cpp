#include <omp.h>

#include <array>
#include <cmath>

#include "cvqkd/errors.hpp"
#include "cvqkd/kernels.hpp"

namespace cvqkd::kernels::parallel {
namespace {

constexpr std::size_t kChunk = 1024;  // oscillator re-anchor interval
constexpr int kWindowTable = 8192;

// Kaiser window sampled on u in [0, 1], linearly interpolated.
struct KaiserTable {
  std::array<double, kWindowTable + 2> w{};
  KaiserTable() {
    const double i0b = std::cyl_bessel_i(0.0, kInterpKaiserBeta);
    for (int i = 0; i <= kWindowTable; ++i) {
      const double u = static_cast<double>(i) / kWindowTable;
      w[i] = std::cyl_bessel_i(0.0, kInterpKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0b;
    }
    w[kWindowTable + 1] = 0.0;
  }
  double operator()(double u) const {
    u = std::abs(u);
    if (u >= 1.0) return 0.0;
    const double p = u * kWindowTable;
    const int i = static_cast<int>(p);
    const double fr = p - i;
    return w[i] + fr * (w[i + 1] - w[i]);
  }
};

const KaiserTable& kaiser() {
  static const KaiserTable table;
  return table;
}

cplx phasor(double f, std::size_t n, double phase0) {
  const double cyc = f * static_cast<double>(n);
  return std::polar(1.0, 2.0 * kPi * (cyc - std::floor(cyc)) + phase0);
}

}  // namespace

std::vector<cplx> upsample_filter(std::span<const cplx> symbols,
                                  std::span<const double> taps, int sps) {
  if (sps < 1) throw DomainError("upsample_filter: sps must be >= 1");
  if (symbols.empty() || taps.empty()) return {};
  const long ns = static_cast<long>(symbols.size());
  const long nt = static_cast<long>(taps.size());
  const long out_len = ns * sps + nt - 1;
  std::vector<cplx> out(static_cast<std::size_t>(out_len));
  // polyphase: out[m] = sum_j sym[j] * h[m - j*sps]
#pragma omp parallel for schedule(static)
  for (long m = 0; m < out_len; ++m) {
    long jhi = m / sps;
    if (jhi > ns - 1) jhi = ns - 1;
    const long lo = m - nt + 1;
    long jlo = lo <= 0 ? 0 : (lo + sps - 1) / sps;
    cplx acc{};
    for (long j = jlo; j <= jhi; ++j) acc += taps[m - j * sps] * symbols[j];
    out[m] = acc;
  }
  return out;
}

std::vector<cplx> filter_decimate(std::span<const cplx> x, std::span<const double> taps,
                                  std::size_t start, std::size_t step, std::size_t count) {
  if (taps.size() % 2 == 0) throw DomainError("filter: odd tap count required");
  if (step == 0) throw DomainError("filter_decimate: step must be positive");
  const long c = static_cast<long>(taps.size() / 2);
  const long nt = static_cast<long>(taps.size());
  const long len = static_cast<long>(x.size());
  std::vector<cplx> out(count);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(count); ++i) {
    const long n = static_cast<long>(start) + i * static_cast<long>(step);
    // idx = n + c - k must lie in [0, len)
    long klo = n + c - (len - 1);
    if (klo < 0) klo = 0;
    long khi = n + c;
    if (khi > nt - 1) khi = nt - 1;
    double re = 0.0, im = 0.0;
    for (long k = klo; k <= khi; ++k) {
      const cplx v = x[n + c - k];
      re += taps[k] * v.real();
      im += taps[k] * v.imag();
    }
    out[i] = {re, im};
  }
  return out;
}

std::vector<cplx> filter_same(std::span<const cplx> x, std::span<const double> taps) {
  return filter_decimate(x, taps, 0, 1, x.size());
}

std::vector<cplx> mix(std::span<const cplx> x, double f, double phase0) {
  std::vector<cplx> out(x.size());
  const long nchunks = static_cast<long>((x.size() + kChunk - 1) / kChunk);
  const cplx rot = std::polar(1.0, 2.0 * kPi * f);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < nchunks; ++c) {
    const std::size_t n0 = static_cast<std::size_t>(c) * kChunk;
    const std::size_t n1 = std::min(x.size(), n0 + kChunk);
    cplx p = phasor(f, n0, phase0);
    for (std::size_t n = n0; n < n1; ++n) {
      out[n] = x[n] * p;
      p *= rot;
    }
  }
  return out;
}

std::vector<cplx> resample(std::span<const cplx> x, double offset, double step,
                           std::size_t count) {
  const int half = kInterpTaps / 2;
  const long len = static_cast<long>(x.size());
  const KaiserTable& win = kaiser();
  std::vector<cplx> out(count);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < static_cast<long>(count); ++n) {
    const double t = offset + static_cast<double>(n) * step;
    const long i0 = static_cast<long>(std::floor(t));
    const double frac = t - static_cast<double>(i0);
    // sin(pi (frac - j)) = (-1)^j sin(pi frac)
    const double sf = std::sin(kPi * frac);
    double re = 0.0, im = 0.0;
    for (int j = -half + 1; j <= half; ++j) {
      const long k = i0 + j;
      if (k < 0 || k >= len) continue;
      const double d = frac - j;
      double s;
      if (d == 0.0) {
        s = 1.0;
      } else {
        s = ((j & 1) ? -sf : sf) / (kPi * d);
      }
      const double g = s * win(d / half);
      re += g * x[k].real();
      im += g * x[k].imag();
    }
    out[n] = {re, im};
  }
  return out;
}

std::vector<cplx> block_demod(std::span<const cplx> x, double f, std::size_t block_len) {
  if (block_len == 0) throw DomainError("block_demod: block_len must be positive");
  const long nb = static_cast<long>(x.size() / block_len);
  std::vector<cplx> out(static_cast<std::size_t>(nb));
  const cplx rot = std::polar(1.0, -2.0 * kPi * f);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    const std::size_t n0 = static_cast<std::size_t>(b) * block_len;
    cplx acc{};
    cplx p{};
    for (std::size_t i = 0; i < block_len; ++i) {
      if (i % kChunk == 0) p = phasor(-f, n0 + i, 0.0);
      acc += x[n0 + i] * p;
      p *= rot;
    }
    out[b] = acc / static_cast<double>(block_len);
  }
  return out;
}

}  // namespace cvqkd::kernels::parallel
