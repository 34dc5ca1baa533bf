#pragma once

// Secret key rates for Gaussian-modulated coherent states with heterodyne
// detection and reverse reconciliation, trusted receiver (eta and v_el are
// not attributed to Eve).

#include <cstddef>
#include <string>
#include <vector>

namespace cvqkd {

// Physical parameter set. xi is referred to the channel input.
struct KeyParams {
  double va = 0.0;
  double t = 1.0;
  double eta = 1.0;
  double xi = 0.0;
  double v_el = 0.0;

  static KeyParams from_xi_b(double va, double t, double xi_b, double eta, double v_el);
  double xi_b() const { return eta * t * xi; }
};

enum class InfoConvention {
  // log2(1 + SNR) per complex symbol: each quadrature carries 1/2 log2(1 + SNR).
  PerSymbol,
  // 2 log2(1 + SNR) per symbol; kept for comparison only.
  DoubledPerQuadrature,
};

std::string to_string(InfoConvention c);

struct SecurityParams {
  double beta_ec = 0.95;
  double epsilon = 1e-10;
  double disclosure_fraction = 0.5;
  InfoConvention convention = InfoConvention::PerSymbol;
};

struct MutualInformation {
  double snr = 0.0;   // per quadrature
  double i_ab = 0.0;  // bits per symbol
};

MutualInformation mutual_information(const KeyParams& p,
                                     InfoConvention c = InfoConvention::PerSymbol);

// g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2), g(1) = 0.
double g_function(double nu);

// Symplectic eigenvalues of the Alice-Bob state (nu1, nu2) and of Alice's
// state conditioned on Bob's heterodyne outcome (nu3, nu4).
struct SymplecticSpectrum {
  double nu1 = 1.0, nu2 = 1.0, nu3 = 1.0, nu4 = 1.0;
};

SymplecticSpectrum symplectic_spectrum(const KeyParams& p);
double holevo_bound(const KeyParams& p);

struct KeyRateReport {
  double snr = 0.0;
  double i_ab = 0.0;
  double chi_be = 0.0;
  double k_raw = 0.0;            // bits/symbol, signed
  double k = 0.0;                // bits/symbol, clipped at 0
  double key_fraction = 1.0;
  double skr_bps = 0.0;          // clipped k * symbol_rate * key_fraction
  double skr_raw_bps = 0.0;
  // finite-size only
  double n_block = 0.0;
  double t_min = 0.0;
  double xi_max = 0.0;
  double delta = 0.0;
  std::string convention;
  std::string reason;            // why k was forced to 0, empty otherwise
};

// k = beta_ec I_AB - chi_BE, reported with key fraction 1.
KeyRateReport asymptotic_skr(const KeyParams& p, const SecurityParams& sec, double symbol_rate);

// n_block is the number of symbols in the parameter-estimation set; the key
// set holds n_block (1 - f) / f symbols for disclosure fraction f. Worst-case
// T_min and xi_max at confidence epsilon replace the point values in chi_BE,
// Delta(n) = 7 sqrt(log2(2/epsilon) / n) with n the key-set quadrature
// samples, and the rate carries key fraction 1 - f.
KeyRateReport finite_size_skr(const KeyParams& p, const SecurityParams& sec, double n_block,
                              double symbol_rate);

struct SweepRow {
  double distance_km = 0.0;
  double t = 0.0;
  double skr_asym = 0.0;             // bits/s, clipped
  std::vector<double> skr_finite;    // one per n_block, clipped
};

struct SweepTable {
  std::vector<double> n_blocks;
  std::vector<SweepRow> rows;
  double zero_crossing_asym_km = -1.0;          // -1 when no crossing in range
  std::vector<double> zero_crossing_finite_km;  // per n_block
};

// Distance sweep at fixed (va, eta, v_el, xi); T = 10^(-alpha d / 10).
SweepTable skr_sweep(const KeyParams& shape, const SecurityParams& sec,
                     const std::vector<double>& distances_km, double alpha_db_per_km,
                     const std::vector<double>& n_blocks, double symbol_rate);

struct VaSweepRow {
  double distance_km = 0.0;
  std::vector<double> skr_asym;  // one per va grid point, clipped
  double best_va = 0.0;
  double best_skr = 0.0;
};

// Asymptotic SKR over a V_A grid for each distance, with the argmax reported.
std::vector<VaSweepRow> va_sweep(const KeyParams& shape, const SecurityParams& sec,
                                 const std::vector<double>& distances_km, double alpha_db_per_km,
                                 const std::vector<double>& va_grid, double symbol_rate);

}  // namespace cvqkd
