// Command line front end: run, sweep, keyrate, characterize, loopback.
//
// Exit codes: 0 success, 1 loopback self-test failed, 2 usage, 3 config,
// 4 runtime (I/O, numerical or pipeline failure).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvqkd/bench/config.hpp"
#include "cvqkd/bench/experiment.hpp"
#include "cvqkd/bench/frame_io.hpp"
#include "cvqkd/bench/report.hpp"
#include "cvqkd/characterization.hpp"
#include "cvqkd/errors.hpp"
#include "cvqkd/keyrate.hpp"

namespace {

using namespace cvqkd;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> frames;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "experiment config (JSON)");
  if (needs_config) opt->required();
  app->add_option("--seed", c.seed, "override batch.seed");
  app->add_option("--frames", c.frames, "override batch.frames");
  app->add_option("--out", c.out, "output directory (stdout when omitted)");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

bench::ExperimentConfig effective_config(const Common& c) {
  bench::ExperimentConfig cfg = c.config.empty() ? bench::ExperimentConfig{} : bench::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.frames) cfg.frames = *c.frames;
  if (!c.out.empty()) cfg.out_dir = c.out;
  cfg.validate();
  return cfg;
}

void emit(const std::string& text, const std::string& dir, const std::string& name) {
  if (dir.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(dir);
  const auto p = (std::filesystem::path(dir) / name).string();
  bench::write_text(p, text);
  std::cerr << "wrote " << p << "\n";
}

std::string mbps(double bps) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4f Mb/s", bps / 1e6);
  return b;
}

int cmd_run(const Common& c) {
  const auto cfg = effective_config(c);
  const auto rep = bench::run_experiment(cfg);
  const auto fmt = bench::parse_format(c.format);
  if (c.out.empty()) {
    if (fmt == bench::OutputFormat::Json) {
      std::cout << bench::report_to_json(rep);
    } else {
      std::cout << "quantity,mean,variance,std_error\n";
      for (const auto& [n, s] : {std::pair<const char*, const SeriesSummary*>{"t", &rep.t},
                                 {"xi_b", &rep.xi_b},
                                 {"v_el", &rep.v_el}})
        std::cout << n << ',' << s->mean << ',' << s->variance << ',' << s->std_error << '\n';
    }
  } else {
    for (const auto& p : bench::emit_results(rep, c.out, fmt)) std::cerr << "wrote " << p << "\n";
  }
  std::cerr << "frames " << rep.n_frames << ", rejected " << rep.n_rejected << " (FER "
            << rep.fer << ")\n"
            << "t_hat " << rep.t.mean << " +/- " << rep.t.std_error << ", xi_b_hat "
            << rep.xi_b.mean << " +/- " << rep.xi_b.std_error << "\n"
            << "SKR from means " << mbps(rep.key_from_means.skr_bps) << ", mean per-frame SKR "
            << mbps(rep.skr_frame_bps.mean) << " [" << rep.info_convention << "]\n";
  return 0;
}

struct SweepArgs {
  std::string mode = "distance";
  std::optional<double> va, eta, v_el, xi, alpha;
  double xi_b_ref = 0.009, t_ref = 0.346;
  double d_min = 0.0, d_max = 30.0, d_step = 0.5;
  std::vector<double> n_blocks{1e7, 1e8, 1e9, 1e10};
  std::vector<double> va_grid;
  std::vector<double> distances;
};

int cmd_sweep(const Common& c, const SweepArgs& a) {
  // defaults: the 23 km operating point, xi held at its channel-input value
  KeyParams shape;
  shape.va = 5.45;
  shape.eta = 0.161;
  shape.v_el = 0.097;
  shape.xi = a.xi_b_ref / (shape.eta * a.t_ref);
  double alpha = 0.2;
  SecurityParams sec;
  double rate = 100e6;
  if (!c.config.empty()) {
    const auto cfg = bench::load_config(c.config);
    shape.va = cfg.va;
    shape.eta = cfg.receiver.efficiency;
    shape.v_el = cfg.receiver.v_el;
    shape.xi = cfg.channel.excess_noise;
    alpha = cfg.channel.fiber_alpha_db_per_km;
    sec = cfg.security;
    rate = cfg.dsp.symbol_rate_hz;
  }
  if (a.va) shape.va = *a.va;
  if (a.eta) shape.eta = *a.eta;
  if (a.v_el) shape.v_el = *a.v_el;
  if (a.xi) shape.xi = *a.xi;
  if (a.alpha) alpha = *a.alpha;
  if (!(a.d_step > 0.0) || a.d_max < a.d_min) throw ConfigError("distance", "empty distance grid");

  std::vector<double> dist = a.distances;
  if (dist.empty())
    for (double d = a.d_min; d <= a.d_max + 1e-9; d += a.d_step) dist.push_back(d);
  const auto fmt = bench::parse_format(c.format);

  if (a.mode == "distance") {
    const auto table = skr_sweep(shape, sec, dist, alpha, a.n_blocks, rate);
    if (fmt == bench::OutputFormat::Csv) {
      emit(bench::sweep_csv(table), c.out, "sweep.csv");
    } else {
      json j{{"shape", {{"va_snu", shape.va}, {"eta", shape.eta}, {"v_el_snu", shape.v_el},
                        {"excess_noise_snu", shape.xi}, {"fiber_alpha_db_per_km", alpha}}},
             {"info_convention", to_string(sec.convention)},
             {"table", table}};
      emit(j.dump(2) + "\n", c.out, "sweep.json");
    }
    std::cerr << "asymptotic zero crossing: " << table.zero_crossing_asym_km << " km\n";
    return 0;
  }

  std::vector<double> grid = a.va_grid;
  if (grid.empty())
    for (double v = 1.0; v <= 10.0 + 1e-9; v += 0.25) grid.push_back(v);
  const auto rows = va_sweep(shape, sec, dist, alpha, grid, rate);
  if (fmt == bench::OutputFormat::Csv) {
    emit(bench::va_sweep_csv(rows, grid), c.out, "va_sweep.csv");
  } else {
    json j{{"va_grid", grid}, {"info_convention", to_string(sec.convention)}, {"rows", rows}};
    emit(j.dump(2) + "\n", c.out, "va_sweep.json");
  }
  return 0;
}

struct KeyArgs {
  double va = 4.10, t = 0.632, xi_b = 0.014, eta = 0.175, v_el = 0.086;
  double beta = 0.95, epsilon = 1e-10, fraction = 0.5, rate = 100e6;
  std::vector<double> n_blocks;
  std::string convention = "per_symbol";
};

int cmd_keyrate(const Common& c, const KeyArgs& a) {
  SecurityParams sec;
  sec.beta_ec = a.beta;
  sec.epsilon = a.epsilon;
  sec.disclosure_fraction = a.fraction;
  sec.convention = a.convention == "per_symbol" ? InfoConvention::PerSymbol
                                                : InfoConvention::DoubledPerQuadrature;
  const KeyParams p = KeyParams::from_xi_b(a.va, a.t, a.xi_b, a.eta, a.v_el);
  const auto asym = asymptotic_skr(p, sec, a.rate);
  std::vector<KeyRateReport> fin;
  for (double n : a.n_blocks) fin.push_back(finite_size_skr(p, sec, n, a.rate));

  if (bench::parse_format(c.format) == bench::OutputFormat::Csv) {
    std::ostringstream s;
    s << "n_block,k_raw,skr_bps,t_min,xi_max,delta\n";
    s << "inf," << asym.k_raw << ',' << asym.skr_bps << ",,,\n";
    for (const auto& r : fin)
      s << r.n_block << ',' << r.k_raw << ',' << r.skr_bps << ',' << r.t_min << ',' << r.xi_max
        << ',' << r.delta << '\n';
    emit(s.str(), c.out, "keyrate.csv");
  } else {
    json j{{"params", {{"va_snu", p.va}, {"t", p.t}, {"xi_snu", p.xi}, {"xi_b_snu", p.xi_b()},
                       {"eta", p.eta}, {"v_el_snu", p.v_el}}},
           {"symbol_rate_hz", a.rate},
           {"info_convention", to_string(sec.convention)},
           {"asymptotic", asym},
           {"finite", fin}};
    emit(j.dump(2) + "\n", c.out, "keyrate.json");
  }
  std::cerr << "asymptotic SKR " << mbps(asym.skr_bps) << " (I_AB " << asym.i_ab
            << " b/sym, chi_BE " << asym.chi_be << ")\n";
  for (const auto& r : fin) std::cerr << "N=" << r.n_block << ": " << mbps(r.skr_bps) << "\n";
  return 0;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open");
  std::vector<std::vector<double>> out(cols);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (lineno == 1) continue;  // header
      throw IoError(path, "non-numeric cell on line " + std::to_string(lineno));
    }
    if (row.size() != cols)
      throw IoError(path, "expected " + std::to_string(cols) + " columns on line " +
                              std::to_string(lineno));
    for (std::size_t k = 0; k < cols; ++k) out[k].push_back(row[k]);
  }
  return out;
}

struct CharArgs {
  std::string illuminated, dark;
  bool synthetic = false;
  std::size_t synthetic_samples = 1u << 21;
  std::size_t segment = 4096;
  double threshold_db = 10.0;
  double halfwidth_hz = 2e6;
  std::vector<double> at_hz{10e6, 100e6, 200e6, 300e6};
  std::string linearity, responsivity;
  double linearity_threshold = 0.02;
};

int cmd_characterize(const Common& c, const CharArgs& a) {
  json j;
  if (a.synthetic || !a.illuminated.empty()) {
    IQFrame ill, dark;
    if (a.synthetic) {
      EntropySource rng(c.seed.value_or(1), 0, 0);
      std::tie(ill, dark) = synthesize_clearance_traces(reference_clearance_profile(),
                                                        a.synthetic_samples, 1e9, 1.0, rng);
    } else {
      if (a.dark.empty()) throw ConfigError("dark", "required with --illuminated");
      ill = bench::load_frames(a.illuminated).at(0);
      dark = bench::load_frames(a.dark).at(0);
    }
    const auto curve =
        clearance_curve(compute_psd(ill, a.segment), compute_psd(dark, a.segment));
    json pts = json::array();
    for (double f : a.at_hz)
      pts.push_back({{"freq_hz", f}, {"clearance_db", clearance_near(curve, f, a.halfwidth_hz)}});
    const auto bw = bandwidth_at_clearance(curve, a.threshold_db);
    j["clearance"] = pts;
    j["threshold_db"] = a.threshold_db;
    j["bandwidth_hz"] = bw ? json(*bw) : json();
    if (bench::parse_format(c.format) == bench::OutputFormat::Csv) {
      std::ostringstream s;
      s << "freq_hz,clearance_db\n";
      for (std::size_t k = 0; k < curve.frequencies.size(); ++k)
        s << curve.frequencies[k] << ',' << curve.clearance_db[k] << '\n';
      emit(s.str(), c.out, "clearance.csv");
    }
  }
  if (!a.linearity.empty()) {
    const auto cols = read_numeric_csv(a.linearity, 2);
    const auto fit = linearity_fit(cols[0], cols[1], a.linearity_threshold);
    j["linearity"] = {{"slope", fit.slope},
                      {"intercept", fit.intercept},
                      {"relative_nonlinearity", fit.relative_nonlinearity},
                      {"saturation_point", fit.saturation_point ? json(*fit.saturation_point) : json()},
                      {"n_linear", fit.n_linear}};
  }
  if (!a.responsivity.empty()) {
    const auto cols = read_numeric_csv(a.responsivity, 3);
    j["efficiency"] = responsivity_efficiency(cols[0], cols[1], cols[2]);
  }
  if (j.empty()) throw ConfigError("characterize", "nothing to do: give traces, --synthetic, "
                                                   "--linearity or --responsivity");
  if (bench::parse_format(c.format) == bench::OutputFormat::Json)
    emit(j.dump(2) + "\n", c.out, "characterization.json");
  else
    std::cerr << j.dump(2) << "\n";
  return 0;
}

int cmd_loopback(const Common& c, std::size_t symbols) {
  bench::ExperimentConfig cfg;
  cfg.dsp.num_symbols = symbols;
  cfg.receiver = ReceiverModel::ideal();
  cfg.channel = ChannelParams{};
  cfg.va = 1.0;
  cfg.frames = 1;
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  const auto rec = bench::run_frame(cfg, 0);
  if (rec.rejected) {
    std::cout << "loopback FAIL: frame rejected at " << rec.reject_stage << ": "
              << rec.reject_reason << "\n";
    return 1;
  }
  const bool ok = rec.nmse < 1e-4;
  std::cout << "loopback " << (ok ? "PASS" : "FAIL") << ": NMSE " << rec.nmse << " over "
            << symbols << " symbols\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-variable QKD link simulator and analysis bench"};
  app.require_subcommand(1);

  Common run_c, sweep_c, key_c, char_c, loop_c;
  auto* run = app.add_subcommand("run", "run a batch experiment from a config");
  add_common(run, run_c, true);

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "key rate versus distance or V_A");
  add_common(sweep, sweep_c, false);
  sweep->add_option("--mode", sa.mode, "distance or va")->check(CLI::IsMember({"distance", "va"}));
  sweep->add_option("--va", sa.va, "modulation variance, SNU");
  sweep->add_option("--eta", sa.eta, "detector efficiency");
  sweep->add_option("--v-el", sa.v_el, "electronic noise, SNU");
  sweep->add_option("--xi", sa.xi, "excess noise at the channel input, SNU");
  sweep->add_option("--xi-b-ref", sa.xi_b_ref, "xi_B at the reference transmittance");
  sweep->add_option("--t-ref", sa.t_ref, "reference transmittance for --xi-b-ref");
  sweep->add_option("--alpha", sa.alpha, "fiber loss, dB/km");
  sweep->add_option("--d-min", sa.d_min, "km");
  sweep->add_option("--d-max", sa.d_max, "km");
  sweep->add_option("--d-step", sa.d_step, "km");
  sweep->add_option("--distances", sa.distances, "explicit distance list, km");
  sweep->add_option("--n-block", sa.n_blocks, "finite-size block sizes");
  sweep->add_option("--va-grid", sa.va_grid, "V_A grid for --mode va");

  KeyArgs ka;
  auto* key = app.add_subcommand("keyrate", "secret key rate for one parameter set");
  add_common(key, key_c, false);
  key->add_option("--va", ka.va, "modulation variance, SNU");
  key->add_option("--t", ka.t, "channel transmittance");
  key->add_option("--xi-b", ka.xi_b, "excess noise referred to Bob, SNU");
  key->add_option("--eta", ka.eta, "detector efficiency");
  key->add_option("--v-el", ka.v_el, "electronic noise, SNU");
  key->add_option("--beta", ka.beta, "reconciliation efficiency");
  key->add_option("--epsilon", ka.epsilon, "finite-size confidence");
  key->add_option("--disclosure", ka.fraction, "disclosed fraction");
  key->add_option("--symbol-rate", ka.rate, "Hz");
  key->add_option("--n-block", ka.n_blocks, "finite-size block sizes");
  key->add_option("--convention", ka.convention, "per_symbol or doubled_per_quadrature")
      ->check(CLI::IsMember({"per_symbol", "doubled_per_quadrature"}));

  CharArgs ca;
  auto* chr = app.add_subcommand("characterize", "receiver clearance, linearity, responsivity");
  add_common(chr, char_c, false);
  chr->add_option("--illuminated", ca.illuminated, "CVQF trace, LO on");
  chr->add_option("--dark", ca.dark, "CVQF trace, LO off");
  chr->add_flag("--synthetic", ca.synthetic, "use a synthetic reference receiver");
  chr->add_option("--segment", ca.segment, "Welch segment length");
  chr->add_option("--threshold-db", ca.threshold_db, "clearance threshold for the bandwidth");
  chr->add_option("--at", ca.at_hz, "frequencies to report, Hz");
  chr->add_option("--halfwidth", ca.halfwidth_hz, "averaging half-width, Hz");
  chr->add_option("--linearity", ca.linearity, "CSV: lo_power, noise_variance");
  chr->add_option("--linearity-threshold", ca.linearity_threshold, "relative residual limit");
  chr->add_option("--responsivity", ca.responsivity, "CSV: p_lo_w, i_plus_a, i_minus_a");

  std::size_t loop_symbols = 100000;
  auto* loop = app.add_subcommand("loopback", "impairment-free self test");
  add_common(loop, loop_c, false);
  loop->add_option("--symbols", loop_symbols, "symbols per frame");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_c);
    if (*sweep) return cmd_sweep(sweep_c, sa);
    if (*key) return cmd_keyrate(key_c, ka);
    if (*chr) return cmd_characterize(char_c, ca);
    if (*loop) return cmd_loopback(loop_c, loop_symbols);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
