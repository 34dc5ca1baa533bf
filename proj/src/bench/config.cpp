#include "cvqkd/bench/config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd::bench {

using nlohmann::json;

namespace {

// Reads one JSON object, tracking which keys were consumed so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (!root.contains(name)) return;
    j_ = &root.at(name);
    if (!j_->is_object()) throw ConfigError(name, "expected an object");
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(path(key), "must be finite");
    }
  }

  template <class Int>
  void integer(const char* key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(path(key), "expected an integer");
      if (v->is_number_unsigned()) {
        out = static_cast<Int>(v->get<std::uint64_t>());
        return;
      }
      const double d = v->get<double>();
      if (!(d >= 0.0) || std::floor(d) != d || d > 1.8e19)
        throw ConfigError(path(key), "expected a non-negative integer");
      out = static_cast<Int>(d);
    }
  }

  void signed_integer(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(path(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void optional_number(const char* key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      if (!v->is_number()) throw ConfigError(path(key), "expected a number or null");
      out = v->get<double>();
    }
  }

  const json* raw(const char* key) { return find(key); }

  void finish() const {
    if (!j_) return;
    for (const auto& item : j_->items())
      if (!used_.count(item.key())) throw ConfigError(path(item.key()), "unknown key");
  }

 private:
  const json* find(const char* key) {
    if (!j_) return nullptr;
    used_.insert(key);
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  std::string name_;
  const json* j_ = nullptr;
  std::set<std::string> used_;
};

const char* modulation_name(Modulation m) {
  switch (m) {
    case Modulation::Gaussian: return "gaussian";
    case Modulation::Psk: return "psk";
    case Modulation::Qam: return "qam";
    case Modulation::PcsQam: return "pcs_qam";
  }
  return "gaussian";
}

Modulation parse_modulation(const std::string& s) {
  if (s == "gaussian") return Modulation::Gaussian;
  if (s == "psk") return Modulation::Psk;
  if (s == "qam") return Modulation::Qam;
  if (s == "pcs_qam") return Modulation::PcsQam;
  throw ConfigError("modulation.kind", "expected gaussian, psk, qam or pcs_qam, got '" + s + "'");
}

const char* convention_key(InfoConvention c) {
  return c == InfoConvention::PerSymbol ? "per_symbol" : "doubled_per_quadrature";
}

InfoConvention parse_convention(const std::string& s) {
  if (s == "per_symbol") return InfoConvention::PerSymbol;
  if (s == "doubled_per_quadrature") return InfoConvention::DoubledPerQuadrature;
  throw ConfigError("security.info_convention",
                    "expected per_symbol or doubled_per_quadrature, got '" + s + "'");
}

// Re-raises a module-level ConfigError with its section prefix.
template <class F>
void in_section(const std::string& section, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    const std::string msg = what.substr(std::min(what.size(), e.field().size() + 2));
    throw ConfigError(section + "." + e.field(), msg);
  }
}

bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace

void ExperimentConfig::validate() const {
  in_section("dsp", [&] { dsp.validate(); });
  in_section("channel", [&] { channel.validate(); });
  in_section("receiver", [&] { receiver.validate(); });

  if (!(va > 0.0)) throw ConfigError("modulation.va_snu", "must be positive");
  switch (modulation.kind) {
    case Modulation::Gaussian: break;
    case Modulation::Psk:
      if (!is_pow2(modulation.order) || modulation.order < 4)
        throw ConfigError("modulation.order", "PSK needs a power of two >= 4");
      break;
    case Modulation::Qam:
    case Modulation::PcsQam: {
      const int k = static_cast<int>(std::lround(std::sqrt(modulation.order)));
      if (modulation.order < 4 || k * k != modulation.order)
        throw ConfigError("modulation.order", "QAM needs a square order >= 4");
      if (modulation.kind == Modulation::PcsQam && !(modulation.nu >= 0.0))
        throw ConfigError("modulation.nu", "must be >= 0");
      break;
    }
  }
  if (!(sync_threshold > 0.0 && sync_threshold < 1.0))
    throw ConfigError("receiver.sync_threshold", "must lie in (0, 1)");
  if (!(security.beta_ec >= 0.0 && security.beta_ec <= 1.0))
    throw ConfigError("security.beta_ec", "must lie in [0, 1]");
  if (!(security.epsilon > 0.0 && security.epsilon < 1.0))
    throw ConfigError("security.epsilon", "must lie in (0, 1)");
  if (!(security.disclosure_fraction > 0.0 && security.disclosure_fraction < 1.0))
    throw ConfigError("security.disclosure_fraction", "must lie in (0, 1)");
  if (frames == 0) throw ConfigError("batch.frames", "must be positive");
  if (!(xi_jitter_rel >= 0.0)) throw ConfigError("batch.xi_jitter_rel", "must be >= 0");
  for (double n : finite_n_blocks)
    if (!(n >= 1.0)) throw ConfigError("batch.finite_n_blocks", "entries must be >= 1");
  if (save_frames && out_dir.empty())
    throw ConfigError("output.save_frames", "requires output.dir");
}

void to_json(json& j, const ExperimentConfig& c) {
  const auto& d = c.dsp;
  j["dsp"] = {
      {"symbol_rate_hz", d.symbol_rate_hz},
      {"roll_off", d.roll_off},
      {"freq_shift_hz", d.freq_shift_hz},
      {"pilot1_hz", d.pilot1_hz},
      {"pilot2_hz", d.pilot2_hz},
      {"pilot_to_signal_db", d.pilot_to_signal_db},
      {"num_symbols", d.num_symbols},
      {"dac_sample_rate_hz", d.dac_sample_rate_hz},
      {"adc_sample_rate_hz", d.adc_sample_rate_hz},
      {"zc_root", d.zc_root},
      {"zc_length", d.zc_length},
      {"filter_span_symbols", d.filter_span},
      {"preamble_to_signal_db", d.preamble_to_signal_db},
      {"preamble_shaped", d.preamble_shaped},
  };
  j["modulation"] = {{"kind", modulation_name(c.modulation.kind)},
                     {"order", c.modulation.order},
                     {"nu", c.modulation.nu},
                     {"va_snu", c.va}};
  j["channel"] = {{"transmittance", c.channel.transmittance},
                  {"excess_noise_snu", c.channel.excess_noise},
                  {"fiber_alpha_db_per_km", c.channel.fiber_alpha_db_per_km},
                  {"distance_km", c.channel.distance_km ? json(*c.channel.distance_km) : json()}};
  const auto& r = c.receiver;
  json profile = json::array();
  for (const auto& p : r.clearance_profile)
    profile.push_back({{"freq_hz", p.freq_hz}, {"clearance_db", p.clearance_db}});
  j["receiver"] = {
      {"efficiency", r.efficiency},
      {"v_el_snu", r.v_el},
      {"random_offset", r.random_offset},
      {"laser_offset_hz", r.laser_offset_hz},
      {"offset_range_hz", r.offset_range_hz},
      {"linewidth_hz", r.linewidth_hz},
      {"random_initial_phase", r.random_initial_phase},
      {"clock_ppm", r.clock_ppm},
      {"clearance_profile", profile},
      {"detector_gain", r.detector_gain},
      {"shot_noise", r.shot_noise},
      {"clip_level", r.clip_level ? json(*r.clip_level) : json()},
      {"max_lead_samples", r.max_lead},
      {"tail_samples", r.tail},
      {"calibration_samples", c.calibration_samples},
      {"sync_threshold", c.sync_threshold},
  };
  j["security"] = {{"beta_ec", c.security.beta_ec},
                   {"epsilon", c.security.epsilon},
                   {"disclosure_fraction", c.security.disclosure_fraction},
                   {"info_convention", convention_key(c.security.convention)}};
  j["batch"] = {{"frames", c.frames},
                {"seed", c.seed},
                {"xi_jitter_rel", c.xi_jitter_rel},
                {"finite_n_blocks", c.finite_n_blocks}};
  j["output"] = {{"dir", c.out_dir}, {"save_frames", c.save_frames}};
}

void from_json(const json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  static const std::set<std::string> sections{"dsp",      "modulation", "channel", "receiver",
                                              "security", "batch",      "output"};
  for (const auto& item : j.items())
    if (!sections.count(item.key())) throw ConfigError(item.key(), "unknown section");

  c = ExperimentConfig{};

  Section d(j, "dsp");
  d.number("symbol_rate_hz", c.dsp.symbol_rate_hz);
  d.number("roll_off", c.dsp.roll_off);
  d.number("freq_shift_hz", c.dsp.freq_shift_hz);
  d.number("pilot1_hz", c.dsp.pilot1_hz);
  d.number("pilot2_hz", c.dsp.pilot2_hz);
  d.number("pilot_to_signal_db", c.dsp.pilot_to_signal_db);
  d.integer("num_symbols", c.dsp.num_symbols);
  d.number("dac_sample_rate_hz", c.dsp.dac_sample_rate_hz);
  d.number("adc_sample_rate_hz", c.dsp.adc_sample_rate_hz);
  d.signed_integer("zc_root", c.dsp.zc_root);
  d.signed_integer("zc_length", c.dsp.zc_length);
  d.signed_integer("filter_span_symbols", c.dsp.filter_span);
  d.number("preamble_to_signal_db", c.dsp.preamble_to_signal_db);
  d.boolean("preamble_shaped", c.dsp.preamble_shaped);
  d.finish();

  Section m(j, "modulation");
  std::string kind = modulation_name(c.modulation.kind);
  m.string("kind", kind);
  c.modulation.kind = parse_modulation(kind);
  m.signed_integer("order", c.modulation.order);
  m.number("nu", c.modulation.nu);
  m.number("va_snu", c.va);
  m.finish();

  Section ch(j, "channel");
  ch.number("transmittance", c.channel.transmittance);
  ch.number("excess_noise_snu", c.channel.excess_noise);
  ch.number("fiber_alpha_db_per_km", c.channel.fiber_alpha_db_per_km);
  ch.optional_number("distance_km", c.channel.distance_km);
  ch.finish();

  Section r(j, "receiver");
  auto& rx = c.receiver;
  r.number("efficiency", rx.efficiency);
  r.number("v_el_snu", rx.v_el);
  r.boolean("random_offset", rx.random_offset);
  r.number("laser_offset_hz", rx.laser_offset_hz);
  r.number("offset_range_hz", rx.offset_range_hz);
  r.number("linewidth_hz", rx.linewidth_hz);
  r.boolean("random_initial_phase", rx.random_initial_phase);
  r.number("clock_ppm", rx.clock_ppm);
  if (const json* p = r.raw("clearance_profile")) {
    if (!p->is_array()) throw ConfigError("receiver.clearance_profile", "expected an array");
    rx.clearance_profile.clear();
    for (const auto& e : *p) {
      if (!e.is_object() || e.size() != 2 || !e.contains("freq_hz") ||
          !e.contains("clearance_db") || !e["freq_hz"].is_number() ||
          !e["clearance_db"].is_number())
        throw ConfigError("receiver.clearance_profile",
                          "entries must be {\"freq_hz\": x, \"clearance_db\": y}");
      rx.clearance_profile.push_back({e["freq_hz"].get<double>(), e["clearance_db"].get<double>()});
    }
  }
  r.number("detector_gain", rx.detector_gain);
  r.boolean("shot_noise", rx.shot_noise);
  r.optional_number("clip_level", rx.clip_level);
  r.integer("max_lead_samples", rx.max_lead);
  r.integer("tail_samples", rx.tail);
  r.integer("calibration_samples", c.calibration_samples);
  r.number("sync_threshold", c.sync_threshold);
  r.finish();

  Section s(j, "security");
  s.number("beta_ec", c.security.beta_ec);
  s.number("epsilon", c.security.epsilon);
  s.number("disclosure_fraction", c.security.disclosure_fraction);
  std::string conv = convention_key(c.security.convention);
  s.string("info_convention", conv);
  c.security.convention = parse_convention(conv);
  s.finish();

  Section b(j, "batch");
  b.integer("frames", c.frames);
  b.integer("seed", c.seed);
  b.number("xi_jitter_rel", c.xi_jitter_rel);
  if (const json* n = b.raw("finite_n_blocks")) {
    if (!n->is_array()) throw ConfigError("batch.finite_n_blocks", "expected an array");
    c.finite_n_blocks.clear();
    for (const auto& e : *n) {
      if (!e.is_number()) throw ConfigError("batch.finite_n_blocks", "entries must be numbers");
      c.finite_n_blocks.push_back(e.get<double>());
    }
  }
  b.finish();

  Section o(j, "output");
  o.string("dir", c.out_dir);
  o.boolean("save_frames", c.save_frames);
  o.finish();

  c.validate();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return j.get<ExperimentConfig>();
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace cvqkd::bench
