// Acceptance checks: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cvqkd/bench/config.hpp"
#include "cvqkd/bench/experiment.hpp"
#include "cvqkd/bench/report.hpp"
#include "cvqkd/characterization.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/modulation.hpp"
#include "cvqkd/rxdsp.hpp"
#include "cvqkd/txdsp.hpp"

using namespace cvqkd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::require(bool ok, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  if (!detail.empty()) detail += "; ";
  detail += buf;
  if (!ok) {
    detail += " [x]";
    pass = false;
  }
}

const std::string kConfigs = CVQKD_SOURCE_DIR "/configs/";

const KeyParams k10 = KeyParams::from_xi_b(4.10, 0.632, 0.014, 0.175, 0.086);
const KeyParams k23 = KeyParams::from_xi_b(5.45, 0.346, 0.009, 0.161, 0.097);

Outcome keyrate_anchor() {
  Outcome o;
  const auto r = asymptotic_skr(k10, SecurityParams{}, 100e6);
  o.require(std::abs(r.skr_bps / 2.4e6 - 1.0) <= 0.15, "SKR %.4f Mb/s vs 2.4", r.skr_bps / 1e6);
  o.require(!r.convention.empty(), "convention: %s", r.convention.c_str());
  return o;
}

Outcome finite_ladder() {
  Outcome o;
  const double n[] = {1e7, 1e8, 1e9, 1e10};
  const double target[] = {0.17, 0.88, 1.10, 1.18};
  for (int i = 0; i < 4; ++i) {
    const double s = finite_size_skr(k10, SecurityParams{}, n[i], 100e6).skr_bps / 1e6;
    o.require(std::abs(s / target[i] - 1.0) <= 0.15, "N=%.0e %.4f vs %.2f", n[i], s, target[i]);
  }
  const auto r6 = finite_size_skr(k10, SecurityParams{}, 1e6, 100e6);
  o.require(r6.skr_raw_bps <= 0.0, "N=1e6 raw %.4f Mb/s", r6.skr_raw_bps / 1e6);
  return o;
}

Outcome null_and_crossing() {
  Outcome o;
  const SecurityParams sec;
  const auto a10 = asymptotic_skr(k10, sec, 100e6);
  const auto a23 = asymptotic_skr(k23, sec, 100e6);
  // "null": clipped headline zero and the signed rate small next to the 10 km rate
  o.require(a23.skr_bps == 0.0 && std::abs(a23.skr_raw_bps) < 0.1 * a10.skr_bps,
            "23 km SKR %.4f Mb/s (raw %.4f)", a23.skr_bps / 1e6, a23.skr_raw_bps / 1e6);
  std::vector<double> d;
  for (int i = 0; i <= 160; ++i) d.push_back(0.25 * i);
  const auto tab = skr_sweep(k23, sec, d, 0.2, {}, 100e6);
  o.require(std::abs(tab.zero_crossing_asym_km - 20.0) <= 2.0, "zero crossing %.2f km",
            tab.zero_crossing_asym_km);
  return o;
}

Outcome loopback() {
  Outcome o;
  const auto cfg = bench::load_config(kConfigs + "loopback.json");
  const auto rec = bench::run_frame(cfg, 0);
  o.require(!rec.rejected, "accepted%s", rec.rejected ? (": " + rec.reject_reason).c_str() : "");
  o.require(rec.nmse < 1e-4, "NMSE %.3g over %zu symbols", rec.nmse, cfg.dsp.num_symbols);
  return o;
}

struct Errors {
  double rms_t = 0.0, rms_xib = 0.0;
};

Errors rms_errors(const bench::RunReport& r) {
  Errors e;
  std::size_t n = 0;
  for (const auto& f : r.frames) {
    if (f.rejected) continue;
    e.rms_t += std::pow(f.estimate.t_hat - f.true_transmittance, 2);
    e.rms_xib += std::pow(f.estimate.xi_b_hat - f.true_xi_b, 2);
    ++n;
  }
  e.rms_t = std::sqrt(e.rms_t / static_cast<double>(n));
  e.rms_xib = std::sqrt(e.rms_xib / static_cast<double>(n));
  return e;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(x.size());
  ym /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  return sxy / sxx;
}

Outcome closed_loop() {
  Outcome o;
  auto cfg = bench::load_config(kConfigs + "link_10km.json");
  cfg.frames = 100;
  cfg.dsp.num_symbols = 100'000;
  cfg.finite_n_blocks = {};
  const auto rep = bench::run_experiment(cfg);
  const double t_true = 0.632, xib_true = 0.014;
  const double zt = (rep.t.mean - t_true) / rep.t.std_error;
  const double zx = (rep.xi_b.mean - xib_true) / rep.xi_b.std_error;
  o.require(rep.n_frames - rep.n_rejected >= 90, "%zu/%zu frames accepted",
            rep.n_frames - rep.n_rejected, rep.n_frames);
  o.require(std::abs(zt) <= 3.0, "t_hat %.5f +/- %.5f (%.2f SE)", rep.t.mean, rep.t.std_error, zt);
  o.require(std::abs(zx) <= 3.0, "xi_b_hat %.5f +/- %.5f (%.2f SE)", rep.xi_b.mean,
            rep.xi_b.std_error, zx);

  // error scaling with the frame length
  std::vector<double> logn, lt, lx;
  const std::pair<std::size_t, std::size_t> runs[] = {{10'000, 100}, {100'000, 0}, {1'000'000, 20}};
  for (const auto& [n, frames] : runs) {
    Errors e;
    if (frames == 0) {
      e = rms_errors(rep);
    } else {
      auto c = cfg;
      c.dsp.num_symbols = n;
      c.frames = frames;
      c.seed = cfg.seed + n;
      e = rms_errors(bench::run_experiment(c));
    }
    logn.push_back(std::log(static_cast<double>(n)));
    lt.push_back(std::log(e.rms_t));
    lx.push_back(std::log(e.rms_xib));
  }
  const double st = slope(logn, lt), sx = slope(logn, lx);
  o.require(std::abs(st + 0.5) <= 0.1, "t error slope %.3f", st);
  o.require(std::abs(sx + 0.5) <= 0.1, "xi_b error slope %.3f", sx);
  return o;
}

Outcome dsp_invariants() {
  Outcome o;
  const auto t = rrc_taps(0.3, 5, 40).coefficients;
  std::vector<double> rc(2 * t.size() - 1, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) rc[i + j] += t[i] * t[j];
  const std::size_t mid = t.size() - 1;
  double isi = 0.0;
  for (std::size_t k = 5; k <= mid; k += 5)
    isi = std::max({isi, std::abs(rc[mid + k]), std::abs(rc[mid - k])});
  o.require(isi / rc[mid] < 1e-3, "ISI %.2e", isi / rc[mid]);

  DspConfig cfg;
  cfg.num_symbols = 1'000'000;
  EntropySource rng(6);
  const auto tx = transmit(gen_gaussian(cfg.num_symbols, 4.1, rng), cfg);
  const double img = image_band_ratio_db(tx.waveform, cfg.freq_shift_hz, cfg.occupied_bandwidth_hz());
  o.require(img < -40.0, "image %.1f dB", img);

  const auto zc = zadoff_chu(cfg.zc_root, cfg.zc_length);
  const auto z = zc.samples();
  double modulus = 0.0, ac = 0.0;
  for (const auto& v : z) modulus = std::max(modulus, std::abs(std::abs(v) - 1.0));
  for (std::size_t lag = 1; lag < z.size(); ++lag) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) acc += z[(k + lag) % z.size()] * std::conj(z[k]);
    ac = std::max(ac, std::abs(acc) / static_cast<double>(z.size()));
  }
  o.require(modulus < 1e-10 && ac < 1e-10, "ZC modulus %.1e, autocorrelation %.1e", modulus, ac);

  EntropySource r2(7);
  std::vector<cplx> x(10'000), y(10'000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = {r2.normal(), r2.normal()};
    y[i] = x[i] * std::polar(1.0, 2.2) + cplx(r2.normal(), r2.normal());
  }
  const double th = global_phase(x, y);
  double best = -1e300, arg = 0.0;
  for (int k = 0; k < 10'000; ++k) {
    const double a = -kPi + 2.0 * kPi * k / 10'000.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (std::conj(x[i]) * y[i] * std::polar(1.0, -a)).real();
    if (acc > best) {
      best = acc;
      arg = a;
    }
  }
  o.require(std::abs(th - arg) <= 2.0 * kPi / 10'000.0, "global phase %.5f vs grid %.5f", th, arg);

  const auto pe = estimate_pilots(tx.waveform, cfg);
  const double ferr = std::max(std::abs(pe.f1_hat - cfg.pilot1_hz), std::abs(pe.f2_hat - cfg.pilot2_hz));
  o.require(ferr < 1e3, "pilot error %.1f Hz", ferr);
  return o;
}

Outcome characterization() {
  Outcome o;
  EntropySource rng(8);
  const auto [ill, dark] = synthesize_clearance_traces(reference_clearance_profile(), 1 << 23, 1e9, 1.0, rng);
  const auto c = clearance_curve(compute_psd(ill, 1024), compute_psd(dark, 1024));
  const double f[] = {10e6, 100e6, 200e6, 300e6};
  const double want[] = {26.0, 14.0, 9.0, 6.0};
  for (int i = 0; i < 4; ++i) {
    const double got = clearance_near(c, f[i], 2e6);
    o.require(std::abs(got - want[i]) <= 0.5, "%.0f MHz %.2f dB", f[i] / 1e6, got);
  }
  const auto bw = bandwidth_at_clearance(c, 10.0);
  o.require(bw && std::abs(*bw / 150e6 - 1.0) <= 0.05, "10 dB bandwidth %.1f MHz", bw ? *bw / 1e6 : -1.0);

  std::vector<double> p, n;
  for (int i = 1; i <= 12; ++i) {
    const double mw = i * 1e-3;
    p.push_back(mw);
    n.push_back(mw <= 8e-3 ? 3e-6 * mw + 1e-9 : 3e-6 * 8e-3 + 1e-9 + 0.2 * 3e-6 * (mw - 8e-3));
  }
  const auto fit = linearity_fit(p, n);
  o.require(fit.saturation_point && std::abs(*fit.saturation_point - 8e-3) <= 1e-3 + 1e-12,
            "knee %.1f mW", fit.saturation_point ? *fit.saturation_point * 1e3 : -1.0);

  std::vector<double> plo, ip, im;
  for (int i = 1; i <= 10; ++i) {
    plo.push_back(i * 1e-3);
    ip.push_back(0.6 * 0.325 * i * 1e-3);
    im.push_back(0.4 * 0.325 * i * 1e-3);
  }
  const double eta = responsivity_efficiency(plo, ip, im);
  o.require(std::abs(eta - 0.26) < 1e-12, "eta %.12f", eta);
  return o;
}

Outcome determinism() {
  Outcome o;
  auto cfg = bench::load_config(kConfigs + "link_10km.json");
  cfg.frames = 4;
  cfg.dsp.num_symbols = 20'000;
  const auto a = bench::report_to_json(bench::run_experiment(cfg));
  const auto b = bench::report_to_json(bench::run_experiment(cfg));
  o.require(a == b, "%zu-byte reports %s", a.size(), a == b ? "identical" : "differ");
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"key-rate anchor, 10 km", keyrate_anchor},
      {"finite-size ladder", finite_ladder},
      {"23 km null and zero crossing", null_and_crossing},
      {"end-to-end loopback", loopback},
      {"closed-loop estimation", closed_loop},
      {"DSP invariants", dsp_invariants},
      {"characterization round trip", characterization},
      {"determinism", determinism},
  };
  int failed = 0, k = 0;
  for (const auto& [name, fn] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
