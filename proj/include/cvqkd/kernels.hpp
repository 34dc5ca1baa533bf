#pragma once

// Sample-rate kernels used by the transmit and receive chains.
//
// Two implementations share one interface: `reference` is plain serial code kept
// as the numerical baseline for tests, `parallel` is the production version
// (OpenMP, polyphase filtering, table-driven interpolation). Tests hold the two
// to agreement within 1e-9 relative, except resample (1e-7, table lookup).

#include <cstddef>
#include <span>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd::kernels {

// Windowed-sinc interpolator geometry shared by both implementations.
inline constexpr int kInterpTaps = 64;
inline constexpr double kInterpKaiserBeta = 12.0;

namespace reference {

// Zero-stuff by sps and convolve with taps (full convolution,
// length n*sps + taps - 1).
std::vector<cplx> upsample_filter(std::span<const cplx> symbols,
                                  std::span<const double> taps, int sps);

// Convolution trimmed to the input length and centred on the middle tap.
// taps.size() must be odd.
std::vector<cplx> filter_same(std::span<const cplx> x, std::span<const double> taps);

// Centred filter output evaluated only at indices start + k*step.
std::vector<cplx> filter_decimate(std::span<const cplx> x, std::span<const double> taps,
                                  std::size_t start, std::size_t step, std::size_t count);

// x[n] * exp(i(2 pi f n + phase0)), f in cycles per sample.
std::vector<cplx> mix(std::span<const cplx> x, double f, double phase0);

// out[n] = x(offset + n*step) by Kaiser windowed-sinc interpolation. Input
// samples outside [0, size) read as zero.
std::vector<cplx> resample(std::span<const cplx> x, double offset, double step,
                           std::size_t count);

// Mean of x[n] exp(-i 2 pi f n) over consecutive blocks of block_len samples.
// A trailing partial block is dropped.
std::vector<cplx> block_demod(std::span<const cplx> x, double f, std::size_t block_len);

}  // namespace reference

namespace parallel {

std::vector<cplx> upsample_filter(std::span<const cplx> symbols,
                                  std::span<const double> taps, int sps);
std::vector<cplx> filter_same(std::span<const cplx> x, std::span<const double> taps);
std::vector<cplx> filter_decimate(std::span<const cplx> x, std::span<const double> taps,
                                  std::size_t start, std::size_t step, std::size_t count);
std::vector<cplx> mix(std::span<const cplx> x, double f, double phase0);
std::vector<cplx> resample(std::span<const cplx> x, double offset, double step,
                           std::size_t count);
std::vector<cplx> block_demod(std::span<const cplx> x, double f, std::size_t block_len);

}  // namespace parallel

using parallel::block_demod;
using parallel::filter_decimate;
using parallel::filter_same;
using parallel::mix;
using parallel::resample;
using parallel::upsample_filter;

}  // namespace cvqkd::kernels
