#include "dgp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dgp/errors.hpp"

namespace dgp {

namespace {

using nlohmann::json;

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::ofstream open_out(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  return os;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Text / CSV.

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  auto os = open_out(path);
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns) {
  if (header.size() != columns.size() || columns.empty()) {
    throw ConfigError("csv header does not match the column count");
  }
  const Eigen::Index rows = columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw ConfigError("csv columns are ragged");
  }
  std::ostringstream os;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) os << ",";
    os << header[j];
  }
  os << "\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j > 0) os << ",";
      os << format_double(columns[j][i]);
    }
    os << "\n";
  }
  write_text_file(path, os.str());
}

CsvTable read_csv(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty csv: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  std::istringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  if (table.header.empty()) throw ConfigError("csv has no columns: " + path);

  std::vector<std::vector<double>> data(table.header.size());
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t j = 0;
    while (std::getline(ls, cell, ',')) {
      if (j >= data.size()) throw ConfigError("csv row too wide: " + path);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        throw ConfigError("csv cell is not a number: " + cell);
      }
      data[j++].push_back(v);
    }
    if (j != data.size()) throw ConfigError("csv row too short: " + path);
  }
  for (auto& col : data) {
    table.columns.push_back(Eigen::Map<const Eigen::VectorXd>(
        col.data(), static_cast<Eigen::Index>(col.size())));
  }
  return table;
}

// ---------------------------------------------------------------------------
// JSON artifacts.

std::string summary_to_json(const PosteriorSummary& summary,
                            const ExperimentSpec& spec) {
  json j;
  j["kind"] = "posterior_summary";
  j["spec_digest"] = summary.spec_digest;
  j["seed"] = summary.seed;
  j["spec"] = json::parse(serialize_experiment_config(spec));
  j["samples"] = summary.samples;
  j["burn_in"] = summary.burn_in;
  j["acceptance_rate"] = summary.acceptance_rate;
  j["l1_error"] = summary.l1_error;
  j["l2_error"] = summary.l2_error;
  j["beta_final"] = to_std(summary.beta_final);
  j["quantile_convention"] = "pointwise";
  j["obs_placement"] = "interior equispaced (cell centers)";
  j["mean"] = to_std(summary.mean);
  j["q05"] = to_std(summary.q05);
  j["q50"] = to_std(summary.q50);
  j["q95"] = to_std(summary.q95);
  json bands = json::array();
  for (const auto& f : summary.mean_sqrt_f) bands.push_back(to_std(f));
  j["mean_sqrt_f"] = bands;
  return j.dump(2) + "\n";
}

std::string report_to_json(const ErrorReport& report,
                           const ExperimentSpec& base, std::uint64_t digest) {
  json j;
  j["kind"] = "error_report";
  j["spec_digest"] = digest;
  j["seed"] = base.seed;
  j["noise_std"] = report.noise_std;
  j["truth"] = truth_name(report.truth);
  j["spec"] = json::parse(serialize_experiment_config(base));
  json rows = json::array();
  for (const ErrorRow& r : report.rows) {
    rows.push_back({{"J", r.J},
                    {"n_layers", r.n_layers},
                    {"l1", r.l1},
                    {"l2", r.l2},
                    {"acceptance_rate", r.acceptance_rate},
                    {"seed", r.seed}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

ErrorReport report_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("kind").get<std::string>() != "error_report") {
      throw ConfigError("not an error report");
    }
    ErrorReport report;
    report.noise_std = j.at("noise_std").get<double>();
    report.truth = truth_from_name(j.at("truth").get<std::string>());
    for (const json& r : j.at("rows")) {
      ErrorRow row;
      row.J = r.at("J").get<int>();
      row.n_layers = r.at("n_layers").get<int>();
      row.l1 = r.at("l1").get<double>();
      row.l2 = r.at("l2").get<double>();
      row.acceptance_rate = r.at("acceptance_rate").get<double>();
      row.seed = r.at("seed").get<std::uint64_t>();
      report.rows.push_back(row);
    }
    return report;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report field error: ") + e.what());
  }
}

std::string manifest_to_json(const ExperimentSpec& spec,
                             const std::vector<std::string>& files) {
  json j;
  j["kind"] = "manifest";
  j["spec_digest"] = spec_hash(spec);
  j["seed"] = spec.seed;
  j["spec"] = json::parse(serialize_experiment_config(spec));
  j["files"] = files;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// SVG.

namespace {

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* kSeriesColors[] = {"#1f6feb", "#d1242f", "#1a7f37",
                               "#8250df", "#bf8700", "#57606a"};

}  // namespace

std::string svg_line_plot(const std::string& title, const Eigen::VectorXd& x,
                          const std::vector<Eigen::VectorXd>& series,
                          const std::vector<std::string>& names) {
  if (series.empty()) throw ConfigError("line plot needs at least one series");
  if (names.size() != series.size()) {
    throw ConfigError("series names do not match the series count");
  }
  for (const auto& s : series) {
    if (s.size() != x.size()) throw ConfigError("series length mismatch");
  }
  const double W = 800, H = 500, ml = 60, mr = 20, mt = 40, mb = 40;
  double ymin = series[0].minCoeff(), ymax = series[0].maxCoeff();
  for (const auto& s : series) {
    ymin = std::min(ymin, s.minCoeff());
    ymax = std::max(ymax, s.maxCoeff());
  }
  if (ymax - ymin < 1e-12) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double xmin = x.minCoeff(), xmax = x.maxCoeff();
  const double xspan = xmax - xmin < 1e-12 ? 1.0 : xmax - xmin;
  auto px = [&](double v) {
    return ml + (v - xmin) / xspan * (W - ml - mr);
  };
  auto py = [&](double v) {
    return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";
  // Axes.
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
     << "\" y2=\"" << H - mb << "\" stroke=\"#444\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << H - mb << "\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + xspan * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << svg_num(xv) << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"11\">"
       << svg_num(yv) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kSeriesColors[s % 6];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (i > 0) os << " ";
      os << svg_num(px(x[i])) << "," << svg_num(py(series[s][i]));
    }
    os << "\"/>\n";
    os << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 * (double(s) + 1)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
          "fill=\""
       << color << "\">" << names[s] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_heatmap(const std::string& title, int n,
                        const Eigen::VectorXd& values) {
  if (n < 1 || values.size() != Eigen::Index(n) * n) {
    throw ConfigError("heat map needs n*n values");
  }
  const double W = 560, H = 600, ml = 20, mt = 40;
  const double cell = (W - 2 * ml) / n;
  const double vmin = values.minCoeff(), vmax = values.maxCoeff();
  const double span = vmax - vmin < 1e-12 ? 1.0 : vmax - vmin;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const double t = (values[Eigen::Index(ix) * n + iy] - vmin) / span;
      // Blue -> white -> red.
      int r, g, b;
      if (t < 0.5) {
        const double s = t * 2.0;
        r = static_cast<int>(std::lround(255 * s * 0.9 + 20 * (1 - s)));
        g = static_cast<int>(std::lround(255 * s * 0.95 + 80 * (1 - s)));
        b = static_cast<int>(std::lround(255 * s + 200 * (1 - s)));
      } else {
        const double s = (t - 0.5) * 2.0;
        r = static_cast<int>(std::lround(255.0));
        g = static_cast<int>(std::lround(255 * (1 - s) * 0.95 + 40 * s));
        b = static_cast<int>(std::lround(255 * (1 - s) + 30 * s));
      }
      // y grows upward: row iy = 0 at the bottom.
      os << "<rect x=\"" << svg_num(ml + ix * cell) << "\" y=\""
         << svg_num(mt + (n - 1 - iy) * cell) << "\" width=\""
         << svg_num(cell + 0.5) << "\" height=\"" << svg_num(cell + 0.5)
         << "\" fill=\"rgb(" << r << "," << g << "," << b << ")\"/>\n";
    }
  }
  os << "<text x=\"" << ml << "\" y=\"" << H - 20
     << "\" font-family=\"sans-serif\" font-size=\"12\">min "
     << svg_num(vmin) << "  max " << svg_num(vmax) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {

constexpr char kMagic[4] = {'D', 'G', 'P', 'K'};

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}
void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}
void put_f64(std::string& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}
void put_vec(std::string& out, const Eigen::VectorXd& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}
void put_dvec(std::string& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double x : v) put_f64(out, x);
}
void put_str(std::string& out, const std::string& s) {
  put_u64(out, s.size());
  out.append(s);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw ConfigError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, buf.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf.data() + pos, 8);
    pos += 8;
    return v;
  }
  double f64() {
    need(8);
    double v;
    std::memcpy(&v, buf.data() + pos, 8);
    pos += 8;
    return v;
  }
  Eigen::VectorXd vec() {
    const auto n = static_cast<Eigen::Index>(u64());
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  std::vector<double> dvec() {
    const std::size_t n = u64();
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  std::string str() {
    const std::size_t n = u64();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const ChainCheckpoint& ckpt) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, ckpt.version);
  put_u64(out, ckpt.spec_digest);
  put_u64(out, ckpt.seed);
  put_u64(out, ckpt.step);
  put_u32(out, static_cast<std::uint32_t>(ckpt.xi.size()));
  for (const auto& layer : ckpt.xi) put_vec(out, layer);
  put_vec(out, ckpt.beta);
  put_u64(out, ckpt.proposals);
  put_vec(out, ckpt.accepts);
  put_u64(out, ckpt.post_accepts);
  put_str(out, ckpt.rng_state);
  put_u64(out, ckpt.retained);
  put_vec(out, ckpt.mean_accum);
  put_u32(out, static_cast<std::uint32_t>(ckpt.sqrt_f_accum.size()));
  for (const auto& layer : ckpt.sqrt_f_accum) put_vec(out, layer);
  put_u64(out, ckpt.reservoir_seen.size());
  for (std::uint64_t s : ckpt.reservoir_seen) put_u64(out, s);
  put_u64(out, ckpt.reservoirs.size());
  for (const auto& res : ckpt.reservoirs) put_dvec(out, res);
  put_dvec(out, ckpt.potential_trace);
  put_dvec(out, ckpt.window_acceptance);
  put_u64(out, ckpt.window_count);
  put_vec(out, ckpt.window_accepts);
  write_text_file(path, out);
}

ChainCheckpoint load_checkpoint(const std::string& path) {
  const std::string buf = read_text_file(path);
  if (buf.size() < 8 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw ConfigError("not a chain checkpoint: " + path);
  }
  Reader r{buf, 4};
  ChainCheckpoint ck;
  ck.version = r.u32();
  if (ck.version != 1) {
    throw ConfigError("unsupported checkpoint version: " + path);
  }
  ck.spec_digest = r.u64();
  ck.seed = r.u64();
  ck.step = r.u64();
  const std::uint32_t n_xi = r.u32();
  for (std::uint32_t i = 0; i < n_xi; ++i) ck.xi.push_back(r.vec());
  ck.beta = r.vec();
  ck.proposals = r.u64();
  ck.accepts = r.vec();
  ck.post_accepts = r.u64();
  ck.rng_state = r.str();
  ck.retained = r.u64();
  ck.mean_accum = r.vec();
  const std::uint32_t n_f = r.u32();
  for (std::uint32_t i = 0; i < n_f; ++i) ck.sqrt_f_accum.push_back(r.vec());
  const std::uint64_t n_seen = r.u64();
  for (std::uint64_t i = 0; i < n_seen; ++i) {
    ck.reservoir_seen.push_back(r.u64());
  }
  const std::uint64_t n_res = r.u64();
  for (std::uint64_t i = 0; i < n_res; ++i) ck.reservoirs.push_back(r.dvec());
  ck.potential_trace = r.dvec();
  ck.window_acceptance = r.dvec();
  ck.window_count = r.u64();
  ck.window_accepts = r.vec();
  return ck;
}

}  // namespace dgp
