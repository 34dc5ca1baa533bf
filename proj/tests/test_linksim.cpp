#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cvqkd/dsp.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/kernels.hpp"
#include "cvqkd/linksim.hpp"
#include "cvqkd/modulation.hpp"
#include "cvqkd/txdsp.hpp"

using namespace cvqkd;

namespace {

IQFrame shaped_frame(std::size_t nsym, std::uint64_t seed) {
  EntropySource rng(seed);
  return upsample_and_shape(gen_gaussian(nsym, 1.0, rng), rrc_taps(0.3, 5, 40), 100e6);
}

double peak_frequency(const IQFrame& f, double lo, double hi) {
  const std::size_t n = fft::next_pow2(f.size());
  const auto s = fft::forward(f.samples(), n);
  double best = 0.0, arg = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = fft::bin_frequency(k, n, f.sample_rate());
    if (fk < lo || fk > hi) continue;
    if (std::norm(s[k]) > best) {
      best = std::norm(s[k]);
      arg = fk;
    }
  }
  return arg;
}

}  // namespace

TEST_CASE("fiber transmittance from distance") {
  const auto ch = ChannelParams::from_distance(10.0, 0.2, 0.0);
  CHECK(ch.effective_transmittance() == doctest::Approx(0.631).epsilon(1e-3));
  CHECK(ch.effective_transmittance() == doctest::Approx(std::pow(10.0, -0.2)));
  ChannelParams bad;
  bad.transmittance = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("lossless noiseless channel is the identity") {
  DspConfig cfg;
  const auto f = shaped_frame(1000, 1);
  EntropySource rng(2);
  const auto g = apply_channel(f, ChannelParams{}, cfg, rng);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g.samples()[i] == f.samples()[i]);
}

TEST_CASE("channel excess noise adds T xi per symbol in band") {
  DspConfig cfg;
  ChannelParams ch;
  ch.transmittance = 0.5;
  ch.excess_noise = 0.02;
  EntropySource rng(3);
  const IQFrame zero(std::vector<cplx>(1'000'000, 0.0), 500e6, Domain::Baseband);
  const auto out = apply_channel(zero, ch, cfg, rng);
  // matched filter sampled on the symbol grid n = k*sps
  const auto taps = dsp::rrc_impulse(0.3, 5, 40);
  const auto bb = kernels::mix(out.samples(), -0.25, 0.0);
  const auto y = kernels::filter_decimate(bb, taps, 500, 5, 199'000);
  const double v = dsp::mean_power(y);
  const double se = 0.01 / std::sqrt(199'000.0);
  CHECK(std::abs(v - 0.01) < 5.0 * se);
}

TEST_CASE("laser impairments") {
  DspConfig cfg;
  ReceiverModel rx = ReceiverModel::ideal();
  const auto f = shaped_frame(2000, 4);
  EntropySource rng(5);
  const auto same = apply_laser_impairments(f, rx, rng);
  CHECK(same.samples()[10] == f.samples()[10]);

  SUBCASE("a 2 MHz beat moves the 190 MHz pilot to 192 MHz") {
    cfg.num_symbols = 20'000;
    EntropySource r(6);
    const auto tx = transmit(gen_gaussian(cfg.num_symbols, 4.1, r), cfg);
    ReceiverModel m = ReceiverModel::ideal();
    m.laser_offset_hz = 2e6;
    const auto shifted = apply_laser_impairments(tx.waveform, m, r);
    CHECK(std::abs(peak_frequency(shifted, 185e6, 195e6) - 192e6) < 10e3);
  }

  SUBCASE("Wiener phase increments have variance 2 pi linewidth tau") {
    ReceiverModel m = ReceiverModel::ideal();
    m.linewidth_hz = 1e5;
    const IQFrame ones(std::vector<cplx>(2'000'000, 1.0), 500e6, Domain::Baseband);
    EntropySource r(7);
    const auto ph = apply_laser_impairments(ones, m, r);
    std::vector<double> phi(ph.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::arg(ph.samples()[i]);
    dsp::unwrap(phi);
    const std::size_t tau = 100;
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i + tau < phi.size(); i += tau, ++n) {
      const double d = phi[i + tau] - phi[i];
      acc += d * d;
    }
    const double expect = 2.0 * kPi * m.linewidth_hz * static_cast<double>(tau) / 500e6;
    const double se = expect * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::abs(acc / static_cast<double>(n) - expect) < 5.0 * se);
  }
}

TEST_CASE("clock skew") {
  const auto f = shaped_frame(4000, 8);
  const auto id = apply_clock_skew(f, 0.0);
  CHECK(id.samples()[99] == f.samples()[99]);

  const double ppm = 20.0;
  const double back = (1.0 / (1.0 + ppm * 1e-6) - 1.0) * 1e6;
  const auto rt = apply_clock_skew(apply_clock_skew(f, ppm), back);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 200; i + 200 < rt.size(); ++i) {
    num += std::norm(rt.samples()[i] - f.samples()[i]);
    den += std::norm(f.samples()[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-4);
  CHECK_THROWS_AS(apply_clock_skew(f, 2000.0), DomainError);
}

TEST_CASE("detector noise levels in SNU") {
  DspConfig cfg;
  ReceiverModel rx = ReceiverModel::ideal();
  rx.shot_noise = true;
  rx.detector_gain = 2.5;
  const double g2 = rx.detector_gain * rx.detector_gain;
  EntropySource rng(9);
  const IQFrame zero(std::vector<cplx>(1'000'000, 0.0), 500e6, Domain::Baseband);
  const auto out = detect(zero, rx, cfg, rng);
  CHECK(out.domain() == Domain::Passband);
  CHECK(inband_variance(out, cfg) / g2 == doctest::Approx(1.0).epsilon(0.02));

  rx.v_el = 0.086;
  EntropySource r2(10);
  CHECK(inband_variance(dark_trace(1'000'000, rx, cfg, r2), cfg) / g2 ==
        doctest::Approx(0.086).epsilon(0.03));
}

TEST_CASE("shaped electronic noise keeps its in-band mean") {
  DspConfig cfg;
  ReceiverModel rx = ReceiverModel::ideal();
  rx.v_el = 0.1;
  rx.clearance_profile = {{10e6, 26.0}, {100e6, 14.0}, {150e6, 10.0}, {200e6, 9.0}, {300e6, 6.0}};
  EntropySource rng(11);
  CHECK(inband_variance(dark_trace(1'000'000, rx, cfg, rng), cfg) ==
        doctest::Approx(0.1).epsilon(0.03));
}

TEST_CASE("electronic to shot ratio from clearance") {
  CHECK(elec_to_shot_ratio(10.0 * std::log10(11.0)) == doctest::Approx(0.1));
  CHECK_THROWS_AS(elec_to_shot_ratio(0.0), DomainError);
}

TEST_CASE("image leakage warning") {
  DspConfig cfg;
  // a real baseband waveform has a mirror image of its band
  auto f = frequency_shift(shaped_frame(5000, 12), 125e6);
  std::vector<cplx> re(f.samples().begin(), f.samples().end());
  for (auto& v : re) v = {v.real(), 0.0};
  EntropySource rng(13);
  const auto warned = detect(f.with_samples(re), ReceiverModel::ideal(), cfg, rng);
  CHECK(warned.image_leakage_warning());
  const auto clean = detect(f, ReceiverModel::ideal(), cfg, rng);
  CHECK_FALSE(clean.image_leakage_warning());
}

TEST_CASE("simulate_link replays from the seed") {
  DspConfig cfg;
  cfg.num_symbols = 5000;
  EntropySource r0(14);
  const auto tx = transmit(gen_gaussian(cfg.num_symbols, 4.1, r0), cfg);
  ChannelParams ch;
  ch.transmittance = 0.6;
  ch.excess_noise = 0.1;
  ReceiverModel rx;
  rx.efficiency = 0.5;
  rx.v_el = 0.05;
  rx.clock_ppm = 20.0;
  EntropySource a(15), b(15);
  const auto la = simulate_link(tx.waveform, ch, rx, cfg, a);
  const auto lb = simulate_link(tx.waveform, ch, rx, cfg, b);
  REQUIRE(la.received.size() == lb.received.size());
  bool same = true;
  for (std::size_t i = 0; i < la.received.size(); ++i)
    same = same && la.received.samples()[i] == lb.received.samples()[i];
  CHECK(same);
  CHECK(la.truth.laser_offset_hz == lb.truth.laser_offset_hz);
  CHECK(la.truth.xi_b() == doctest::Approx(0.5 * 0.6 * 0.1));
}
