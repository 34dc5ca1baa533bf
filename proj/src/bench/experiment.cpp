#include "cvqkd/bench/experiment.hpp"

#include <cmath>
#include <filesystem>

#include <omp.h>

#include "cvqkd/bench/frame_io.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/linksim.hpp"
#include "cvqkd/modulation.hpp"
#include "cvqkd/rxdsp.hpp"
#include "cvqkd/txdsp.hpp"

namespace cvqkd::bench {

namespace {

// stream layout per frame
enum Substream : std::uint64_t { kSymbols = 0, kLink = 1, kCalibration = 2, kJitter = 3 };

SymbolFrame generate(const ExperimentConfig& cfg, EntropySource& rng) {
  const std::size_t n = cfg.dsp.num_symbols;
  const auto& m = cfg.modulation;
  switch (m.kind) {
    case Modulation::Gaussian: return gen_gaussian(n, cfg.va, rng);
    case Modulation::Psk: return gen_psk(n, m.order, cfg.va, rng);
    case Modulation::Qam: return gen_qam(n, m.order, cfg.va, rng);
    case Modulation::PcsQam: return gen_pcs_qam(n, m.order, m.nu, cfg.va, rng);
  }
  throw ConfigError("modulation.kind", "unsupported");
}

KeyRateReport zero_report(const SecurityParams& sec, std::string reason) {
  KeyRateReport r;
  r.convention = to_string(sec.convention);
  r.reason = std::move(reason);
  return r;
}

KeyRateReport safe_asymptotic(const KeyParams& p, const SecurityParams& sec, double rate) {
  try {
    return asymptotic_skr(p, sec, rate);
  } catch (const DomainError& e) {
    return zero_report(sec, std::string("estimates outside the physical range: ") + e.what());
  }
}

KeyRateReport safe_finite(const KeyParams& p, const SecurityParams& sec, double n, double rate) {
  try {
    return finite_size_skr(p, sec, n, rate);
  } catch (const DomainError& e) {
    return zero_report(sec, std::string("estimates outside the physical range: ") + e.what());
  }
}

}  // namespace

FrameRecord run_frame(const ExperimentConfig& cfg, std::size_t index, IQFrame* received) {
  FrameRecord rec;
  rec.index = index;
  const auto& dsp = cfg.dsp;
  const auto& rxm = cfg.receiver;

  EntropySource rs(cfg.seed, index, kSymbols);
  EntropySource rl(cfg.seed, index, kLink);
  EntropySource rc(cfg.seed, index, kCalibration);
  EntropySource rj(cfg.seed, index, kJitter);

  ChannelParams ch = cfg.channel;
  if (cfg.xi_jitter_rel > 0.0) {
    const double s = cfg.xi_jitter_rel;
    ch.excess_noise *= std::exp(s * rj.normal() - 0.5 * s * s);
  }

  const SymbolFrame sym = generate(cfg, rs);
  const TxFrame tx = transmit(sym, dsp);
  LinkOutput link = simulate_link(tx.waveform, ch, rxm, dsp, rl);
  rec.true_transmittance = link.truth.transmittance;
  rec.true_xi = link.truth.excess_noise;
  rec.true_xi_b = link.truth.xi_b();
  rec.true_offset_hz = link.truth.laser_offset_hz;
  rec.true_lead_samples = link.truth.lead_samples;
  rec.image_warning = link.received.image_leakage_warning();

  SnuCalibration calib;
  if (rxm.shot_noise) {
    const std::size_t ncal =
        cfg.calibration_samples ? cfg.calibration_samples : link.received.size();
    const IQFrame shot = shot_noise_trace(ncal, rxm, dsp, rc);
    const IQFrame dark = dark_trace(ncal, rxm, dsp, rc);
    calib = calibrate_noise(shot, dark, dsp);
  } else {
    calib = SnuCalibration::make(rxm.detector_gain * rxm.detector_gain, 0.0);
  }
  rec.shot_variance_raw = calib.shot_variance;
  rec.v_el_hat = calib.v_el();

  const double f = cfg.security.disclosure_fraction;
  const auto didx = disclosed_indices(sym.size(), f);
  std::vector<cplx> xd(didx.size());
  for (std::size_t i = 0; i < didx.size(); ++i) xd[i] = sym.symbols()[didx[i]];
  const SymbolFrame disclosed(xd, sym.modulation(), sym.target_va());

  ReceiverOptions ro;
  ro.sync_threshold = cfg.sync_threshold;
  ro.disclosure_fraction = f;

  try {
    const ReceiveResult res = receive_frame_detailed(link.received, dsp, calib, disclosed, ro);
    rec.sync_peak = res.sync.correlation_peak;
    rec.frame_start = res.sync.frame_start;
    rec.offset_hat_hz = res.pilots.f1_hat - dsp.pilot1_hz / res.pilots.clock_ratio;
    rec.clock_ppm_hat = (1.0 / res.pilots.clock_ratio - 1.0) * 1e6;
    rec.timing_samples = res.timing;
    rec.global_phase_rad = res.global_phase;

    const auto x = sym.symbols();
    const auto y = res.symbols.symbols();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (std::conj(x[i]) * y[i]).real();
      sxx += std::norm(x[i]);
    }
    const double g = sxy / sxx;
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err += std::norm(y[i] - g * x[i]);
    rec.nmse = err / (g * g * sxx);

    std::vector<cplx> yd(didx.size());
    for (std::size_t i = 0; i < didx.size(); ++i) yd[i] = y[didx[i]];
    double va_hat = 0.0;
    for (const auto& v : xd) va_hat += std::norm(v);
    va_hat /= static_cast<double>(xd.size());
    rec.estimate = estimate_parameters(xd, yd, rxm.efficiency, va_hat, rec.v_el_hat);
  } catch (const FrameRejected& e) {
    rec.rejected = true;
    rec.reject_stage = to_string(e.stage());
    rec.reject_reason = e.what();
  } catch (const DomainError& e) {
    rec.rejected = true;
    rec.reject_stage = "estimation";
    rec.reject_reason = e.what();
  }

  if (rec.rejected) {
    rec.key = zero_report(cfg.security, "frame rejected");
  } else {
    const auto& est = rec.estimate;
    if (est.t_hat > 0.0 && est.t_hat <= 1.0) {
      const KeyParams p =
          KeyParams::from_xi_b(est.va_hat, est.t_hat, est.xi_b_hat, est.eta, est.v_el);
      rec.key = safe_asymptotic(p, cfg.security, dsp.symbol_rate_hz);
    } else {
      rec.key = zero_report(cfg.security, "estimated transmittance outside (0, 1]");
    }
  }
  if (received) *received = std::move(link.received);
  return rec;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  rep.config = cfg;
  rep.seed = cfg.seed;
  rep.n_frames = cfg.frames;
  rep.info_convention = to_string(cfg.security.convention);
  rep.frames.resize(cfg.frames);

  std::string frame_path;
  if (cfg.save_frames) {
    std::filesystem::create_directories(cfg.out_dir);
    frame_path = (std::filesystem::path(cfg.out_dir) / "frames.cvqf").string();
  }
  std::vector<IQFrame> kept;

  // chunks bound the memory held for persistence; results do not depend on it
  const auto chunk = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  for (std::size_t base = 0; base < cfg.frames; base += chunk) {
    const std::size_t n = std::min(chunk, cfg.frames - base);
    std::vector<IQFrame> traces(cfg.save_frames ? n : 0);
    std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t k = 0; k < n; ++k) {
      try {
        rep.frames[base + k] = run_frame(cfg, base + k, cfg.save_frames ? &traces[k] : nullptr);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (auto& t : traces) kept.push_back(std::move(t));
  }
  if (cfg.save_frames) save_frames(kept, frame_path);

  std::vector<double> va, t, xi, xib, vel, skr;
  for (const auto& fr : rep.frames) {
    if (fr.rejected) {
      ++rep.n_rejected;
      continue;
    }
    va.push_back(fr.estimate.va_hat);
    t.push_back(fr.estimate.t_hat);
    xi.push_back(fr.estimate.xi_hat);
    xib.push_back(fr.estimate.xi_b_hat);
    vel.push_back(fr.v_el_hat);
    skr.push_back(fr.key.skr_bps);
  }
  rep.fer = static_cast<double>(rep.n_rejected) / static_cast<double>(rep.n_frames);
  rep.va = summarize(va);
  rep.t = summarize(t);
  rep.xi = summarize(xi);
  rep.xi_b = summarize(xib);
  rep.v_el = summarize(vel);
  rep.skr_frame_bps = summarize(skr);

  const double rate = cfg.dsp.symbol_rate_hz;
  if (t.empty()) {
    rep.key_from_means = zero_report(cfg.security, "no accepted frames");
    for (std::size_t i = 0; i < cfg.finite_n_blocks.size(); ++i)
      rep.finite_from_means.push_back(rep.key_from_means);
    return rep;
  }
  const double eta = cfg.receiver.efficiency;
  if (rep.t.mean > 0.0 && rep.t.mean <= 1.0) {
    const KeyParams p =
        KeyParams::from_xi_b(rep.va.mean, rep.t.mean, rep.xi_b.mean, eta, rep.v_el.mean);
    rep.key_from_means = safe_asymptotic(p, cfg.security, rate);
    for (double nb : cfg.finite_n_blocks)
      rep.finite_from_means.push_back(safe_finite(p, cfg.security, nb, rate));
  } else {
    rep.key_from_means = zero_report(cfg.security, "mean transmittance outside (0, 1]");
    for (std::size_t i = 0; i < cfg.finite_n_blocks.size(); ++i)
      rep.finite_from_means.push_back(rep.key_from_means);
  }
  return rep;
}

}  // namespace cvqkd::bench
