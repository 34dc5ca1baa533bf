#include "cvqkd/keyrate.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <exception>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

constexpr double kEigTol = 1e-9;

void check(const KeyParams& p) {
  if (!(p.va >= 0.0)) throw DomainError("key rate: va must be >= 0");
  if (!(p.t > 0.0 && p.t <= 1.0)) throw DomainError("key rate: T must lie in (0, 1]");
  if (!(p.eta > 0.0 && p.eta <= 1.0)) throw DomainError("key rate: eta must lie in (0, 1]");
  if (!(p.v_el >= 0.0)) throw DomainError("key rate: v_el must be >= 0");
  if (!std::isfinite(p.xi)) throw DomainError("key rate: xi must be finite");
}

double sym_eig(double sum, double prod) {
  // roots of l^2 - sum*l + prod, returned as the larger one's square root
  const double disc = std::max(sum * sum - 4.0 * prod, 0.0);
  return std::sqrt((sum + std::sqrt(disc)) / 2.0);
}

// from the product of the roots, avoiding cancellation when they are close
double sym_eig_small(double sum, double prod) {
  const double big = sym_eig(sum, prod);
  return big > 0.0 ? std::sqrt(std::max(prod, 0.0)) / big : 0.0;
}

}  // namespace

KeyParams KeyParams::from_xi_b(double va, double t, double xi_b, double eta, double v_el) {
  if (!(eta * t > 0.0)) throw DomainError("from_xi_b: eta*T must be positive");
  return KeyParams{va, t, eta, xi_b / (eta * t), v_el};
}

std::string to_string(InfoConvention c) {
  switch (c) {
    case InfoConvention::PerSymbol:
      return "heterodyne I_AB = log2(1+SNR) per symbol (1/2 log2(1+SNR) per quadrature); "
             "asymptotic key fraction 1";
    case InfoConvention::DoubledPerQuadrature:
      return "I_AB = 2 log2(1+SNR) per symbol (doubled per-quadrature); asymptotic key fraction 1";
  }
  return "unknown";
}

MutualInformation mutual_information(const KeyParams& p, InfoConvention c) {
  check(p);
  const double noise = 1.0 + p.v_el + p.eta * p.t * p.xi / 2.0;
  if (!(noise > 0.0)) throw DomainError("mutual_information: total noise must be positive");
  MutualInformation m;
  m.snr = p.eta * p.t / 2.0 * p.va / noise;
  m.i_ab = std::log2(1.0 + m.snr);
  if (c == InfoConvention::DoubledPerQuadrature) m.i_ab *= 2.0;
  return m;
}

double g_function(double nu) {
  if (nu < 1.0 - kEigTol || !std::isfinite(nu))
    throw DomainError("g_function: symplectic eigenvalue below 1");
  if (nu <= 1.0) return 0.0;
  const double a = (nu + 1.0) / 2.0;
  const double b = (nu - 1.0) / 2.0;
  return a * std::log2(a) - b * std::log2(b);
}

SymplecticSpectrum symplectic_spectrum(const KeyParams& p) {
  check(p);
  const double v = p.va + 1.0;
  const double t = p.t;
  const double chi_line = 1.0 / t - 1.0 + p.xi;
  const double a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line) * (v + chi_line);
  const double b = t * t * (v * chi_line + 1.0) * (v * chi_line + 1.0);
  // heterodyne with a trusted detector of efficiency eta and noise v_el
  const double chi_het = (1.0 + (1.0 - p.eta) + 2.0 * p.v_el) / p.eta;
  const double chi_tot = chi_line + chi_het / t;
  const double den = t * (v + chi_tot);
  const double sb = std::sqrt(b);
  const double c = (a * chi_het * chi_het + b + 1.0 + 2.0 * chi_het * (v * sb + t * (v + chi_line)) +
                    2.0 * t * (v * v - 1.0)) /
                   (den * den);
  const double d = ((v + sb * chi_het) / den) * ((v + sb * chi_het) / den);
  SymplecticSpectrum s;
  s.nu1 = sym_eig(a, b);
  s.nu2 = sym_eig_small(a, b);
  s.nu3 = sym_eig(c, d);
  s.nu4 = sym_eig_small(c, d);
  // a nearly degenerate pair at 1 splits by rounding; pin the small one and
  // keep the product
  auto pin = [](double& big, double& small, double prod) {
    if (small < 1.0 && small > 1.0 - 1e-6) {
      small = 1.0;
      big = std::max(std::sqrt(prod), 1.0);
    }
  };
  pin(s.nu1, s.nu2, b);
  pin(s.nu3, s.nu4, d);
  for (double nu : {s.nu1, s.nu2, s.nu3, s.nu4})
    if (!(nu >= 1.0 - 1e-6)) throw DomainError("holevo_bound: non-physical covariance matrix");
  return s;
}

double holevo_bound(const KeyParams& p) {
  const auto s = symplectic_spectrum(p);
  auto gc = [](double nu) { return g_function(std::max(nu, 1.0)); };
  return gc(s.nu1) + gc(s.nu2) - gc(s.nu3) - gc(s.nu4);
}

KeyRateReport asymptotic_skr(const KeyParams& p, const SecurityParams& sec, double symbol_rate) {
  if (!(sec.beta_ec >= 0.0 && sec.beta_ec <= 1.0)) throw DomainError("beta_ec must lie in [0, 1]");
  const auto mi = mutual_information(p, sec.convention);
  KeyRateReport r;
  r.snr = mi.snr;
  r.i_ab = mi.i_ab;
  r.chi_be = holevo_bound(p);
  r.k_raw = sec.beta_ec * r.i_ab - r.chi_be;
  r.k = std::max(r.k_raw, 0.0);
  r.key_fraction = 1.0;
  r.skr_raw_bps = r.k_raw * symbol_rate * r.key_fraction;
  r.skr_bps = r.k * symbol_rate * r.key_fraction;
  r.convention = to_string(sec.convention);
  return r;
}

KeyRateReport finite_size_skr(const KeyParams& p, const SecurityParams& sec, double n_block,
                              double symbol_rate) {
  check(p);
  const double f = sec.disclosure_fraction;
  if (!(f > 0.0 && f < 1.0)) throw DomainError("finite_size_skr: disclosure fraction in (0, 1)");
  if (!(sec.epsilon > 0.0 && sec.epsilon < 1.0)) throw DomainError("finite_size_skr: epsilon in (0, 1)");
  if (!(n_block >= 1.0)) throw DomainError("finite_size_skr: n_block must be >= 1");
  const auto mi = mutual_information(p, sec.convention);
  KeyRateReport r;
  r.snr = mi.snr;
  r.i_ab = mi.i_ab;
  r.n_block = n_block;
  r.key_fraction = 1.0 - f;
  r.convention = to_string(sec.convention);

  // Confidence intervals on the slope t = sqrt(eta T / 2) and the noise
  // variance sigma^2, each estimated from m = 2 n_block quadrature samples.
  const double m = 2.0 * n_block;
  const double z = std::sqrt(2.0) * boost::math::erfc_inv(sec.epsilon);
  const double slope = std::sqrt(p.eta * p.t / 2.0);
  const double sigma2 = 1.0 + p.v_el + p.eta * p.t * p.xi / 2.0;
  const double slope_min = p.va > 0.0 ? slope - z * std::sqrt(sigma2 / (m * p.va)) : 0.0;
  const double sigma2_max = sigma2 + z * sigma2 * std::sqrt(2.0) / std::sqrt(m);
  const double n_key = 2.0 * n_block * (1.0 - f) / f;
  r.delta = 7.0 * std::sqrt(std::log2(2.0 / sec.epsilon) / n_key);

  if (!(slope_min > 0.0)) {
    r.reason = "block too small: worst-case transmittance is zero";
    return r;
  }
  r.t_min = 2.0 * slope_min * slope_min / p.eta;
  if (r.t_min > 1.0) r.t_min = 1.0;
  r.xi_max = 2.0 * (sigma2_max - 1.0 - p.v_el) / (p.eta * r.t_min);
  KeyParams worst{p.va, r.t_min, p.eta, r.xi_max, p.v_el};
  r.chi_be = holevo_bound(worst);
  r.k_raw = sec.beta_ec * r.i_ab - r.chi_be - r.delta;
  r.k = std::max(r.k_raw, 0.0);
  r.skr_raw_bps = r.k_raw * symbol_rate * r.key_fraction;
  r.skr_bps = r.k * symbol_rate * r.key_fraction;
  if (r.k_raw <= 0.0) r.reason = "finite-size penalty exceeds the asymptotic rate";
  return r;
}

namespace {

double crossing(const std::vector<double>& d, const std::vector<double>& k) {
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (k[i - 1] > 0.0 && k[i] <= 0.0) {
      const double u = k[i - 1] / (k[i - 1] - k[i]);
      return d[i - 1] + u * (d[i] - d[i - 1]);
    }
  }
  return -1.0;
}

}  // namespace

SweepTable skr_sweep(const KeyParams& shape, const SecurityParams& sec,
                     const std::vector<double>& distances_km, double alpha_db_per_km,
                     const std::vector<double>& n_blocks, double symbol_rate) {
  SweepTable tab;
  tab.n_blocks = n_blocks;
  tab.rows.resize(distances_km.size());
  std::vector<double> raw_asym(distances_km.size());
  std::vector<std::vector<double>> raw_fin(n_blocks.size(), std::vector<double>(distances_km.size()));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(distances_km.size()); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    try {
    SweepRow& row = tab.rows[ii];
    row.distance_km = distances_km[ii];
    row.t = std::pow(10.0, -alpha_db_per_km * row.distance_km / 10.0);
    KeyParams p = shape;
    p.t = row.t;
    const auto a = asymptotic_skr(p, sec, symbol_rate);
    row.skr_asym = a.skr_bps;
    raw_asym[ii] = a.k_raw;
    row.skr_finite.resize(n_blocks.size());
    for (std::size_t j = 0; j < n_blocks.size(); ++j) {
      const auto fr = finite_size_skr(p, sec, n_blocks[j], symbol_rate);
      row.skr_finite[j] = fr.skr_bps;
      raw_fin[j][ii] = fr.t_min > 0.0 ? fr.k_raw : -1.0;
    }
    } catch (...) {
#pragma omp critical(cvqkd_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  tab.zero_crossing_asym_km = crossing(distances_km, raw_asym);
  for (const auto& col : raw_fin) tab.zero_crossing_finite_km.push_back(crossing(distances_km, col));
  return tab;
}

std::vector<VaSweepRow> va_sweep(const KeyParams& shape, const SecurityParams& sec,
                                 const std::vector<double>& distances_km, double alpha_db_per_km,
                                 const std::vector<double>& va_grid, double symbol_rate) {
  std::vector<VaSweepRow> rows(distances_km.size());
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    VaSweepRow& row = rows[i];
    row.distance_km = distances_km[i];
    KeyParams p = shape;
    p.t = std::pow(10.0, -alpha_db_per_km * row.distance_km / 10.0);
    row.best_skr = -1.0;
    for (double va : va_grid) {
      p.va = va;
      const double s = asymptotic_skr(p, sec, symbol_rate).skr_bps;
      row.skr_asym.push_back(s);
      if (s > row.best_skr) {
        row.best_skr = s;
        row.best_va = va;
      }
    }
  }
  return rows;
}

}  // namespace cvqkd
