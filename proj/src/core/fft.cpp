#include "cvqkd/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace cvqkd::fft {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Owns an FFTW buffer pair and plan for one transform.
class Transform {
 public:
  Transform(std::size_t n, int sign) : n_(n) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, sign, FFTW_ESTIMATE);
  }
  ~Transform() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buf_);
  }
  Transform(const Transform&) = delete;
  Transform& operator=(const Transform&) = delete;

  cplx* data() { return reinterpret_cast<cplx*>(buf_); }
  void run() { fftw_execute(plan_); }

 private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<cplx> forward(std::span<const cplx> x, std::size_t n) {
  if (n == 0) n = x.size();
  if (n == 0) return {};
  Transform t(n, FFTW_FORWARD);
  const std::size_t m = std::min(n, x.size());
  std::copy_n(x.begin(), m, t.data());
  std::fill(t.data() + m, t.data() + n, cplx{});
  t.run();
  return std::vector<cplx>(t.data(), t.data() + n);
}

std::vector<cplx> inverse(std::span<const cplx> spectrum) {
  const std::size_t n = spectrum.size();
  if (n == 0) return {};
  Transform t(n, FFTW_BACKWARD);
  std::copy(spectrum.begin(), spectrum.end(), t.data());
  t.run();
  const double s = 1.0 / static_cast<double>(n);
  std::vector<cplx> out(t.data(), t.data() + n);
  for (auto& v : out) v *= s;
  return out;
}

std::vector<cplx> analytic_signal(std::span<const cplx> x) {
  if (x.empty()) return {};
  // zero-pad to a power of two; arbitrary lengths can hit slow prime-size paths
  const std::size_t n = next_pow2(x.size());
  Transform t(n, FFTW_FORWARD);
  for (std::size_t i = 0; i < n; ++i) t.data()[i] = i < x.size() ? cplx(x[i].real(), 0.0) : cplx{};
  t.run();
  std::vector<cplx> spec(t.data(), t.data() + n);
  // h[k]: 1 at DC (and Nyquist for even n), 2 for positive, 0 for negative bins
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < n; ++k) {
    if (n % 2 == 0 && k == half) continue;
    if (k <= (n - 1) / 2) spec[k] *= 2.0;
    else spec[k] = 0.0;
  }
  auto out = inverse(spec);
  out.resize(x.size());
  return out;
}

double bin_frequency(std::size_t k, std::size_t n, double sample_rate) {
  const double df = sample_rate / static_cast<double>(n);
  return (k < (n + 1) / 2 ? static_cast<double>(k)
                          : static_cast<double>(k) - static_cast<double>(n)) * df;
}

}  // namespace cvqkd::fft
