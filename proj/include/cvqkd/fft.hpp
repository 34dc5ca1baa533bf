#pragma once

// Thin FFTW wrapper. Plans are created with FFTW_ESTIMATE so results do not
// depend on planner timing; plan creation is serialized internally.

#include <cstddef>
#include <span>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd::fft {

std::size_t next_pow2(std::size_t n);

// Unnormalized forward DFT, zero-padded (or truncated) to n points when n > 0.
std::vector<cplx> forward(std::span<const cplx> x, std::size_t n = 0);

// Inverse DFT scaled by 1/N.
std::vector<cplx> inverse(std::span<const cplx> spectrum);

// Analytic signal of the real parts of x: negative frequencies removed,
// positive frequencies doubled. Re(output) equals Re(x).
std::vector<cplx> analytic_signal(std::span<const cplx> x);

// Frequency (Hz) of DFT bin k for an n-point transform, in [-fs/2, fs/2).
double bin_frequency(std::size_t k, std::size_t n, double sample_rate);

}  // namespace cvqkd::fft
