#include <cmath>
#include <numeric>
#include <sstream>

#include "cvqkd/core.hpp"
#include "cvqkd/errors.hpp"

namespace cvqkd {

int DspConfig::samples_per_symbol() const {
  return static_cast<int>(std::lround(dac_sample_rate_hz / symbol_rate_hz));
}

void DspConfig::validate() const {
  auto need = [](bool ok, const char* field, const std::string& msg) {
    if (!ok) throw ConfigError(field, msg);
  };
  need(symbol_rate_hz > 0.0, "symbol_rate_hz", "must be positive");
  need(roll_off > 0.0 && roll_off <= 1.0, "roll_off", "must lie in (0, 1]");
  need(num_symbols > 0, "num_symbols", "must be positive");
  need(dac_sample_rate_hz > 0.0, "dac_sample_rate_hz", "must be positive");
  need(adc_sample_rate_hz > 0.0, "adc_sample_rate_hz", "must be positive");
  // Clock mismatch is modelled as a ppm offset on top of equal nominal rates.
  need(dac_sample_rate_hz == adc_sample_rate_hz, "adc_sample_rate_hz",
       "nominal ADC rate must equal the DAC rate (model skew with clock_ppm)");
  const double ratio = dac_sample_rate_hz / symbol_rate_hz;
  need(std::abs(ratio - std::round(ratio)) < 1e-9 && std::round(ratio) >= 2.0,
       "dac_sample_rate_hz", "must be an integer multiple (>= 2) of the symbol rate");
  const double half_b = occupied_bandwidth_hz() / 2.0;
  need(freq_shift_hz > half_b, "freq_shift_hz",
       "must exceed half the occupied bandwidth (sideband overlap)");
  need(freq_shift_hz + half_b < adc_sample_rate_hz / 2.0, "freq_shift_hz",
       "shifted band exceeds Nyquist");
  need(pilot1_hz != pilot2_hz, "pilot2_hz", "pilot frequencies must differ");
  for (auto [f, name] : {std::pair{pilot1_hz, "pilot1_hz"}, std::pair{pilot2_hz, "pilot2_hz"}}) {
    // Table I places pilot 1 exactly on the upper band edge, so the edge is allowed.
    need(f >= freq_shift_hz + half_b - 1e-6, name, "pilot lies inside the signal band");
    need(f < adc_sample_rate_hz / 2.0, name, "pilot above Nyquist");
  }
  need(zc_length > 1 && zc_length % 2 == 1, "zc_length", "must be odd and > 1");
  need(zc_root > 0 && std::gcd(zc_root, zc_length) == 1, "zc_root",
       "must be positive and coprime with zc_length");
  need(filter_span >= 8 && filter_span % 2 == 0, "filter_span", "must be even and >= 8");
}

bool is_disclosed(std::size_t i, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("disclosure fraction must lie in [0, 1]");
  const auto d = static_cast<double>(i);
  return std::floor((d + 1.0) * fraction) > std::floor(d * fraction);
}

std::vector<std::size_t> disclosed_indices(std::size_t n, double fraction) {
  std::vector<std::size_t> idx;
  idx.reserve(static_cast<std::size_t>(static_cast<double>(n) * fraction) + 1);
  for (std::size_t i = 0; i < n; ++i)
    if (is_disclosed(i, fraction)) idx.push_back(i);
  return idx;
}

std::string to_string(const ModulationSpec& spec) {
  std::ostringstream os;
  switch (spec.kind) {
    case Modulation::Gaussian: return "gaussian";
    case Modulation::Psk: os << "psk" << spec.order; break;
    case Modulation::Qam: os << "qam" << spec.order; break;
    case Modulation::PcsQam: os << "pcs-qam" << spec.order << "(nu=" << spec.nu << ")"; break;
  }
  return os.str();
}

SymbolFrame::SymbolFrame(std::vector<cplx> symbols, ModulationSpec modulation, double target_va)
    : symbols_(std::move(symbols)), modulation_(modulation), target_va_(target_va) {
  if (!(target_va >= 0.0) || !std::isfinite(target_va))
    throw DomainError("SymbolFrame: target_va must be finite and >= 0");
  for (const auto& s : symbols_) {
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw DomainError("SymbolFrame: non-finite symbol");
  }
}

double SymbolFrame::second_moment() const {
  if (symbols_.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& s : symbols_) acc += std::norm(s);
  return acc / static_cast<double>(symbols_.size());
}

IQFrame::IQFrame(std::vector<cplx> samples, double sample_rate, Domain domain, double scale,
                 Units units)
    : samples_(std::move(samples)),
      sample_rate_(sample_rate),
      domain_(domain),
      scale_(scale),
      units_(units) {
  if (!(sample_rate > 0.0)) throw DomainError("IQFrame: sample_rate must be positive");
  if (samples_.empty()) throw DomainError("IQFrame: empty frame");
  if (!(scale > 0.0)) throw DomainError("IQFrame: scale must be positive");
  if (domain == Domain::Passband) {
    for (auto& s : samples_) s.imag(0.0);
  }
}

IQFrame IQFrame::with_samples(std::vector<cplx> samples) const {
  IQFrame f(std::move(samples), sample_rate_, domain_, scale_, units_);
  f.tags_ = tags_;
  f.image_warning_ = image_warning_;
  return f;
}

IQFrame IQFrame::tagged(std::string tag) const {
  IQFrame f = *this;
  f.tags_.push_back(std::move(tag));
  return f;
}

IQFrame IQFrame::with_image_warning(bool warn) const {
  IQFrame f = *this;
  f.image_warning_ = warn;
  return f;
}

IQFrame IQFrame::with_scale(double scale, Units units) const {
  if (!(scale > 0.0)) throw DomainError("IQFrame: scale must be positive");
  IQFrame f = *this;
  f.scale_ = scale;
  f.units_ = units;
  return f;
}

}  // namespace cvqkd
