#pragma once

// Small numeric helpers shared by the transmit, receive and calibration code.

#include <span>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd::dsp {

// Root-raised-cosine impulse response sampled at sps points per symbol over
// +/- span/2 symbols (span*sps + 1 taps), scaled to unit energy.
std::vector<double> rrc_impulse(double beta, int sps, int span);

double mean_power(std::span<const cplx> x);

// Mean of |x|^2 minus |mean x|^2.
double complex_variance(std::span<const cplx> x);

// Linear interpolation of a track sampled at times
// t0 + k*dt, evaluated at t. Clamps to the end values outside the track.
double interp_linear(std::span<const double> track, double t0, double dt, double t);

// Unwraps a phase sequence in place.
void unwrap(std::vector<double>& phase);

}  // namespace cvqkd::dsp
