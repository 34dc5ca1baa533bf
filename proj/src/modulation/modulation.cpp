#include "cvqkd/modulation.hpp"

#include <algorithm>
#include <cmath>

#include "cvqkd/errors.hpp"

namespace cvqkd {
namespace {

void check_common(std::size_t n, double va) {
  if (n == 0) throw DomainError("symbol count must be positive");
  if (!(va > 0.0) || !std::isfinite(va)) throw DomainError("va must be positive");
}

int square_side(int m) {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m))));
  if (m < 4 || k * k != m) throw DomainError("QAM order must be a square >= 4");
  return k;
}

}  // namespace

EntropySource::EntropySource(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  engine_.seed(seq);
}

SymbolFrame gen_gaussian(std::size_t n, double va, EntropySource& rng) {
  check_common(n, va);
  const double sd = std::sqrt(va / 2.0);
  std::vector<cplx> s(n);
  for (auto& v : s) {
    const double re = rng.normal();
    const double im = rng.normal();
    v = {sd * re, sd * im};
  }
  return SymbolFrame(std::move(s), {Modulation::Gaussian, 0, 0.0}, va);
}

SymbolFrame gen_psk(std::size_t n, int m, double va, EntropySource& rng) {
  check_common(n, va);
  if (m < 4 || (m & (m - 1)) != 0) throw DomainError("PSK order must be a power of two >= 4");
  const double a = std::sqrt(va);
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<cplx> s(n);
  for (auto& v : s) {
    const int k = pick(rng.engine());
    v = std::polar(a, kPi * (2 * k + 1) / m);
  }
  return SymbolFrame(std::move(s), {Modulation::Psk, m, 0.0}, va);
}

std::vector<cplx> qam_grid(int m) {
  const int k = square_side(m);
  std::vector<cplx> pts;
  pts.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) pts.emplace_back(2 * i - (k - 1), 2 * j - (k - 1));
  return pts;
}

SymbolFrame gen_qam(std::size_t n, int m, double va, EntropySource& rng) {
  check_common(n, va);
  const auto grid = qam_grid(m);
  const double e = 2.0 * (m - 1) / 3.0;  // mean |p|^2 of the unscaled grid
  const double a = std::sqrt(va / e);
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<cplx> s(n);
  for (auto& v : s) v = a * grid[static_cast<std::size_t>(pick(rng.engine()))];
  return SymbolFrame(std::move(s), {Modulation::Qam, m, 0.0}, va);
}

std::vector<double> pcs_probabilities(int m, double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("PCS shaping rate must be >= 0");
  const auto grid = qam_grid(m);
  // subtract the smallest energy before exponentiating to stay finite for large nu
  double emin = std::norm(grid.front());
  for (const auto& p : grid) emin = std::min(emin, std::norm(p));
  std::vector<double> w(grid.size());
  double z = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    w[i] = std::exp(-nu * (std::norm(grid[i]) - emin));
    z += w[i];
  }
  for (auto& v : w) v /= z;
  return w;
}

SymbolFrame gen_pcs_qam(std::size_t n, int m, double nu, double va, EntropySource& rng) {
  check_common(n, va);
  if (!(nu > 0.0)) throw DomainError("PCS shaping rate must be positive");
  const auto grid = qam_grid(m);
  const auto prob = pcs_probabilities(m, nu);
  std::vector<double> cdf(prob.size());
  double e = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    acc += prob[i];
    cdf[i] = acc;
    e += prob[i] * std::norm(grid[i]);
  }
  cdf.back() = 1.0;
  const double a = std::sqrt(va / e);
  std::vector<cplx> s(n);
  for (auto& v : s) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), grid.size() - 1);
    v = a * grid[idx];
  }
  return SymbolFrame(std::move(s), {Modulation::PcsQam, m, nu}, va);
}

SymbolFrame scale_to_va(const SymbolFrame& frame, double measured_power_ratio) {
  if (!(measured_power_ratio > 0.0) || !std::isfinite(measured_power_ratio))
    throw DomainError("scale_to_va: power ratio must be positive");
  const double new_va = 2.0 * measured_power_ratio;
  double old_va = frame.target_va();
  if (!(old_va > 0.0)) old_va = frame.second_moment();
  if (!(old_va > 0.0)) throw DomainError("scale_to_va: frame has zero power");
  const double g = std::sqrt(new_va / old_va);
  std::vector<cplx> s(frame.symbols().begin(), frame.symbols().end());
  for (auto& v : s) v *= g;
  return SymbolFrame(std::move(s), frame.modulation(), new_va);
}

}  // namespace cvqkd
