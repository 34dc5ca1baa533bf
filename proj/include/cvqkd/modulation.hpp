#pragma once

// Alice's symbol generators. Every generator returns symbols in SNU with
// E|x|^2 = va (see core.hpp for the complex-symbol convention).
//
// Only Gaussian frames are accepted by the key-rate module; the discrete
// constellations are provided for DSP experiments. Their security analysis
// needs dedicated bounds that this library does not implement.

#include <cstdint>
#include <random>
#include <vector>

#include "cvqkd/core.hpp"

namespace cvqkd {

// Seedable pseudo-random stream. A (seed, stream, substream) triple selects an
// independent, reproducible sequence, so frames can be generated in parallel.
class EntropySource {
 public:
  explicit EntropySource(std::uint64_t seed, std::uint64_t stream = 0,
                         std::uint64_t substream = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

SymbolFrame gen_gaussian(std::size_t n, double va, EntropySource& rng);
SymbolFrame gen_psk(std::size_t n, int m, double va, EntropySource& rng);
SymbolFrame gen_qam(std::size_t n, int m, double va, EntropySource& rng);
SymbolFrame gen_pcs_qam(std::size_t n, int m, double nu, double va, EntropySource& rng);

// Unscaled square QAM grid, points (2i - (k-1)) + i(2j - (k-1)), k = sqrt(m).
std::vector<cplx> qam_grid(int m);

// Maxwell-Boltzmann point probabilities exp(-nu |p|^2) / Z over qam_grid(m).
std::vector<double> pcs_probabilities(int m, double nu);

// measured_power_ratio is the monitored mean photon number per symbol, i.e.
// monitored optical power divided by the one-photon-per-symbol power h*nu*R.
// The frame is rescaled to V_A = 2 * ratio and target_va updated.
SymbolFrame scale_to_va(const SymbolFrame& frame, double measured_power_ratio);

}  // namespace cvqkd
