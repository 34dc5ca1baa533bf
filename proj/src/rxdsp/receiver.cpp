#include <cmath>

#include "cvqkd/errors.hpp"
#include "cvqkd/fft.hpp"
#include "cvqkd/rxdsp.hpp"

namespace cvqkd {

ReceiveResult receive_frame_detailed(const IQFrame& rx, const DspConfig& cfg,
                                     const SnuCalibration& calib, const SymbolFrame& disclosed,
                                     const ReceiverOptions& opts) {
  cfg.validate();
  const int sps = cfg.samples_per_symbol();
  const std::size_t n_sym = cfg.num_symbols;
  const auto didx = disclosed_indices(n_sym, opts.disclosure_fraction);
  if (disclosed.size() != didx.size())
    throw DomainError("receive_frame: disclosed symbol count does not match the pattern");
  const FilterTaps taps = rrc_taps(cfg.roll_off, sps, cfg.filter_span);
  const IQFrame preamble = make_preamble(cfg);
  const std::size_t lp = preamble.size();
  const std::size_t payload_len = n_sym * static_cast<std::size_t>(sps);

  IQFrame x = rx.domain() == Domain::Passband
                  ? IQFrame(fft::analytic_signal(rx.samples()), rx.sample_rate(), Domain::Baseband,
                            rx.scale(), rx.units())
                  : rx;

  ReceiveResult res;
  res.sync = synchronize(x, preamble, opts.sync_threshold, opts.sync);
  if (!res.sync.accepted) throw FrameRejected(RejectStage::Sync, "correlation below threshold");
  const std::size_t guard = 4 * static_cast<std::size_t>(sps);
  if (res.sync.frame_start + lp + payload_len + taps.size() + guard > x.size())
    throw FrameRejected(RejectStage::Sync, "frame truncated after the detected start");

  // start a few symbols late so the window never sees the preamble
  res.pilots = estimate_pilots(x, cfg, res.sync.frame_start + lp + guard, payload_len - guard,
                               opts.pilots);
  const double offset = res.pilots.f1_hat - cfg.pilot1_hz / res.pilots.clock_ratio;
  const double coarse_peak = res.sync.correlation_peak;
  res.sync = refine_sync(x, preamble, res.sync.frame_start, offset, guard);
  res.sync.correlation_peak = std::max(res.sync.correlation_peak, coarse_peak);
  const std::size_t s = res.sync.frame_start;
  if (s + lp + payload_len + taps.size() > x.size())
    throw FrameRejected(RejectStage::Sync, "frame truncated after the detected start");

  // after this point the time axis is the transmitter's, origin at the preamble start
  IQFrame z = correct_clock(x, res.pilots.clock_ratio, static_cast<double>(s));
  if (z.size() < lp + payload_len + taps.size())
    throw FrameRejected(RejectStage::Pilot, "clock correction left too few samples");
  z = carrier_recover(z, res.pilots, cfg);

  const std::size_t bl = opts.pilots.block_len;
  const PilotEstimate track = track_pilot_phase(z, cfg.pilot1_hz, lp, payload_len, bl);
  // pilots span the whole shaped payload, including the filter tail
  z = cancel_pilots(z, cfg, lp, payload_len + taps.size() - 1, bl);
  z = downconvert_and_match(z, cfg, taps);

  DownsampleOptions dso;
  dso.start = lp + taps.delay() - static_cast<std::size_t>(sps / 2);
  dso.count = n_sym;
  const auto ds = optimal_downsample(z, sps, dso);
  res.sample_phase = ds.phase;
  res.timing = ds.timing;

  auto y = phase_correct(ds.symbols, track, ds.timing, static_cast<double>(sps));
  // SNU frames are already normalised; raw frames go through the calibration
  const double k = rx.units() == Units::Snu ? 1.0 : rx.scale() * calib.conversion_factor();
  for (auto& v : y) v *= k;

  std::vector<cplx> yd(didx.size());
  for (std::size_t i = 0; i < didx.size(); ++i) yd[i] = y[didx[i]];
  res.global_phase = global_phase(disclosed.symbols(), yd);
  const cplx r = std::polar(1.0, -res.global_phase);
  for (auto& v : y) v *= r;
  res.symbols = SymbolFrame(std::move(y), disclosed.modulation(), disclosed.target_va());
  return res;
}

SymbolFrame receive_frame(const IQFrame& rx, const DspConfig& cfg, const SnuCalibration& calib,
                          const SymbolFrame& disclosed, const ReceiverOptions& opts) {
  return receive_frame_detailed(rx, cfg, calib, disclosed, opts).symbols;
}

}  // namespace cvqkd
