#include "cvqkd/bench/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvqkd/errors.hpp"

namespace cvqkd::bench {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// 1e7 rather than 10000000 in column names
std::string compact(double n) {
  const double e = std::log10(n);
  if (n > 0.0 && std::abs(e - std::round(e)) < 1e-12) return "1e" + std::to_string(std::lround(e));
  return num(n);
}

void summary_row(std::ostringstream& s, const char* name, const SeriesSummary& v) {
  s << name << ',' << num(v.mean) << ',' << num(v.variance) << ',' << num(v.std_error) << '\n';
}

void histogram_rows(std::ostringstream& s, const char* name, const Histogram& h) {
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    s << name << ',' << b << ',' << num(h.edges[b]) << ',' << num(h.edges[b + 1]) << ','
      << h.counts[b] << '\n';
}

}  // namespace

OutputFormat parse_format(const std::string& s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  throw ConfigError("format", "expected json or csv, got '" + s + "'");
}

std::string report_to_json(const RunReport& report) {
  return nlohmann::json(report).dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text).get<RunReport>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("report_from_json: ") + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

std::vector<std::string> emit_results(const RunReport& report, const std::string& dir,
                                      OutputFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir, "cannot create output directory: " + ec.message());
  const std::filesystem::path base(dir);
  std::vector<std::string> written;

  if (format == OutputFormat::Json) {
    const auto p = (base / "report.json").string();
    write_text(p, report_to_json(report));
    written.push_back(p);
    return written;
  }

  std::ostringstream ts;
  ts << "frame,rejected,reject_stage,t_hat,xi_hat,xi_b_hat,va_hat,v_el_hat,skr_bps,nmse,"
        "sync_peak,offset_hat_hz,clock_ppm_hat\n";
  for (const auto& f : report.frames) {
    ts << f.index << ',' << (f.rejected ? 1 : 0) << ',' << f.reject_stage << ','
       << num(f.estimate.t_hat) << ',' << num(f.estimate.xi_hat) << ','
       << num(f.estimate.xi_b_hat) << ',' << num(f.estimate.va_hat) << ',' << num(f.v_el_hat)
       << ',' << num(f.key.skr_bps) << ',' << num(f.nmse) << ',' << num(f.sync_peak) << ','
       << num(f.offset_hat_hz) << ',' << num(f.clock_ppm_hat) << '\n';
  }

  std::ostringstream hs;
  hs << "quantity,bin,lower,upper,count\n";
  histogram_rows(hs, "va", report.va.histogram);
  histogram_rows(hs, "t", report.t.histogram);
  histogram_rows(hs, "xi", report.xi.histogram);
  histogram_rows(hs, "xi_b", report.xi_b.histogram);
  histogram_rows(hs, "v_el", report.v_el.histogram);
  histogram_rows(hs, "skr_bps", report.skr_frame_bps.histogram);

  std::ostringstream ss;
  ss << "quantity,mean,variance,std_error\n";
  summary_row(ss, "va", report.va);
  summary_row(ss, "t", report.t);
  summary_row(ss, "xi", report.xi);
  summary_row(ss, "xi_b", report.xi_b);
  summary_row(ss, "v_el", report.v_el);
  summary_row(ss, "skr_bps", report.skr_frame_bps);

  for (const auto& [name, text] : {std::pair<const char*, std::string>{"timeseries.csv", ts.str()},
                                   {"histograms.csv", hs.str()},
                                   {"summary.csv", ss.str()}}) {
    const auto p = (base / name).string();
    write_text(p, text);
    written.push_back(p);
  }
  return written;
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream s;
  s << "distance_km,t,skr_asym";
  for (double n : table.n_blocks) s << ",skr_N" << compact(n);
  s << '\n';
  for (const auto& r : table.rows) {
    s << num(r.distance_km) << ',' << num(r.t) << ',' << num(r.skr_asym);
    for (double v : r.skr_finite) s << ',' << num(v);
    s << '\n';
  }
  return s.str();
}

std::string va_sweep_csv(const std::vector<VaSweepRow>& rows, const std::vector<double>& va_grid) {
  std::ostringstream s;
  s << "distance_km,best_va,best_skr";
  for (double v : va_grid) s << ",skr_va" << num(v);
  s << '\n';
  for (const auto& r : rows) {
    s << num(r.distance_km) << ',' << num(r.best_va) << ',' << num(r.best_skr);
    for (double v : r.skr_asym) s << ',' << num(v);
    s << '\n';
  }
  return s.str();
}

}  // namespace cvqkd::bench
