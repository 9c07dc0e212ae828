#include "crater/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crater::io {

using nlohmann::json;

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

int pgm_next_token(std::istream& in) {
  // Skips whitespace and '#' comments, returns the next integer token.
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  in >> value;
  if (!in) throw std::runtime_error("malformed PGM header");
  return value;
}

}  // namespace

GrayRaster read_pgm(const std::string& path) {
  std::ifstream in = open_in(path, true);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') throw std::runtime_error("not a binary PGM (P5): " + path);
  const int width = pgm_next_token(in);
  const int height = pgm_next_token(in);
  const int maxval = pgm_next_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535)
    throw std::runtime_error("bad PGM dimensions in " + path);
  in.get();  // single whitespace after maxval

  GrayRaster raster(height, width);
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (maxval < 256) {
    std::vector<unsigned char> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
    if (!in) throw std::runtime_error("truncated PGM data in " + path);
    for (std::size_t i = 0; i < count; ++i) raster.data()[i] = buf[i];
  } else {
    std::vector<unsigned char> buf(2 * count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * count));
    if (!in) throw std::runtime_error("truncated PGM data in " + path);
    for (std::size_t i = 0; i < count; ++i)
      raster.data()[i] = 256.0 * buf[2 * i] + buf[2 * i + 1];  // big-endian
  }
  return raster;
}

void write_pgm(const std::string& path, const GrayRaster& raster, int maxval) {
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
  std::ofstream out = open_out(path, true);
  out << "P5\n" << raster.cols() << " " << raster.rows() << "\n" << maxval << "\n";
  const std::size_t count = static_cast<std::size_t>(raster.size());
  if (maxval == 255) {
    std::vector<unsigned char> buf(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double v = std::clamp(std::round(raster.data()[i]), 0.0, 255.0);
      buf[i] = static_cast<unsigned char>(v);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(count));
  } else {
    std::vector<unsigned char> buf(2 * count);
    for (std::size_t i = 0; i < count; ++i) {
      const double v = std::clamp(std::round(raster.data()[i]), 0.0, 65535.0);
      const unsigned int u = static_cast<unsigned int>(v);
      buf[2 * i] = static_cast<unsigned char>(u >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(u & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(2 * count));
  }
  if (!out) throw std::runtime_error("failed writing PGM: " + path);
}

std::vector<Annotation> read_annotations_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty annotations CSV: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "id" || header[1] != "x" || header[2] != "y" ||
      header[3] != "diameter_px" || header[4] != "label")
    throw std::runtime_error("bad annotations CSV header in " + path);
  const bool with_counter = header.size() >= 6 && header[5] == "counter";

  std::vector<Annotation> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() < 5) throw std::runtime_error("short annotations row in " + path);
    Annotation a;
    a.id = std::stoll(f[0]);
    a.x = std::stod(f[1]);
    a.y = std::stod(f[2]);
    a.diameter_px = std::stod(f[3]);
    a.label = label_from_string(f[4]);
    if (with_counter && f.size() >= 6) a.counter = f[5];
    out.push_back(std::move(a));
  }
  return out;
}

void write_annotations_csv(const std::string& path, std::span<const Annotation> annotations,
                           bool with_counter) {
  std::ofstream out = open_out(path);
  out << "id,x,y,diameter_px,label" << (with_counter ? ",counter" : "") << "\n";
  for (const Annotation& a : annotations) {
    out << a.id << ',' << num17(a.x) << ',' << num17(a.y) << ',' << num17(a.diameter_px) << ','
        << to_string(a.label);
    if (with_counter) out << ',' << a.counter;
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

std::vector<MatchResult> read_match_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty match CSV: " + path);
  if (split_csv_line(line) !=
      std::vector<std::string>{"id", "label", "measure", "template_kind", "best_score",
                               "best_sigma"})
    throw std::runtime_error("bad match CSV header in " + path);
  std::vector<MatchResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 6) throw std::runtime_error("short match row in " + path);
    MatchResult r;
    r.annotation_id = std::stoll(f[0]);
    r.label = label_from_string(f[1]);
    r.measure = measure_from_string(f[2]);
    r.template_kind = template_kind_from_string(f[3]);
    r.best_score = std::stod(f[4]);
    r.best_sigma = std::stod(f[5]);
    out.push_back(r);
  }
  return out;
}

void write_match_csv(const std::string& path, std::span<const MatchResult> results) {
  std::ofstream out = open_out(path);
  out << "id,label,measure,template_kind,best_score,best_sigma\n";
  for (const MatchResult& r : results) {
    out << r.annotation_id << ',' << to_string(r.label) << ',' << to_string(r.measure) << ','
        << to_string(r.template_kind) << ',' << num17(r.best_score) << ','
        << num17(r.best_sigma) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

void write_regions_csv(const std::string& path, std::span<const RegionDraw> draws) {
  std::ofstream out = open_out(path);
  out << "n_true,n_false,p_true,p_false,n_detected\n";
  for (const RegionDraw& d : draws) {
    out << d.n_true << ',' << d.n_false << ',' << num17(d.p_true) << ',' << num17(d.p_false)
        << ',' << d.n_detected << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

void write_sfd_csv(const std::string& path, std::span<const SfdBin> bins) {
  std::ofstream out = open_out(path);
  out << "band_lo,band_hi,count,sigma\n";
  for (const SfdBin& b : bins) {
    out << num17(b.band_lo) << ',' << num17(b.band_hi) << ',' << num17(b.count) << ','
        << num17(std::sqrt(std::max(0.0, b.variance))) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV: " + path);
}

namespace {

json axis_to_json(const AxisSpec& a) {
  return json{{"measure", to_string(a.measure)},
              {"template_kind", to_string(a.template_kind)},
              {"bin_count", a.bin_count},
              {"range_lo", a.range_lo},
              {"range_hi", a.range_hi}};
}

AxisSpec axis_from_json(const json& j) {
  AxisSpec a;
  a.measure = measure_from_string(j.at("measure").get<std::string>());
  a.template_kind = template_kind_from_string(j.at("template_kind").get<std::string>());
  a.bin_count = j.at("bin_count").get<int>();
  a.range_lo = j.at("range_lo").get<double>();
  a.range_hi = j.at("range_hi").get<double>();
  return a;
}

json spec_to_json(const HistogramSpec& spec) {
  json axes = json::array();
  for (const AxisSpec& a : spec.axes) axes.push_back(axis_to_json(a));
  return json{{"dims", spec.dims()}, {"axes", axes}};
}

HistogramSpec spec_from_json(const json& j) {
  HistogramSpec spec;
  for (const json& a : j.at("axes")) spec.axes.push_back(axis_from_json(a));
  spec.validate();
  return spec;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json hist_to_json(const ScoreHistogram& h) {
  return json{{"spec", spec_to_json(h.spec)},
              {"counts", vector_to_json(h.counts)},
              {"overflow_count", h.overflow_count}};
}

ScoreHistogram hist_from_json(const json& j) {
  ScoreHistogram h;
  h.spec = spec_from_json(j.at("spec"));
  h.counts = vector_from_json(j.at("counts"));
  if (h.counts.size() != h.spec.total_bins())
    throw std::runtime_error("histogram JSON: counts size does not match spec");
  h.total = h.counts.sum();
  h.overflow_count = j.at("overflow_count").get<long long>();
  return h;
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(1, '\t') << '\n';
  if (!out) throw std::runtime_error("failed writing JSON: " + path);
}

json parse_json(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  in >> j;
  return j;
}

}  // namespace

void save_template(const std::string& path, const Template& tpl) {
  json values = json::array();
  for (Eigen::Index r = 0; r < tpl.values.rows(); ++r)
    for (Eigen::Index c = 0; c < tpl.values.cols(); ++c) values.push_back(tpl.values(r, c));
  dump_json(path, json{{"kind", to_string(tpl.kind)},
                       {"width", tpl.width},
                       {"height", tpl.height},
                       {"n_examples", tpl.n_examples},
                       {"target_diameter", tpl.target_diameter},
                       {"values", values}});
}

Template load_template(const std::string& path) {
  const json j = parse_json(path);
  Template tpl;
  tpl.kind = template_kind_from_string(j.at("kind").get<std::string>());
  tpl.width = j.at("width").get<int>();
  tpl.height = j.at("height").get<int>();
  tpl.n_examples = j.at("n_examples").get<int>();
  tpl.target_diameter = j.value("target_diameter", 0.0);
  const json& values = j.at("values");
  if (static_cast<Eigen::Index>(values.size()) !=
      static_cast<Eigen::Index>(tpl.width) * tpl.height)
    throw std::runtime_error("template JSON: values size mismatch in " + path);
  tpl.values.resize(tpl.height, tpl.width);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < tpl.values.rows(); ++r)
    for (Eigen::Index c = 0; c < tpl.values.cols(); ++c)
      tpl.values(r, c) = values[i++].get<double>();
  return tpl;
}

void save_histogram(const std::string& path, const ScoreHistogram& hist) {
  dump_json(path, hist_to_json(hist));
}

ScoreHistogram load_histogram(const std::string& path) {
  return hist_from_json(parse_json(path));
}

void save_model(const std::string& path, const lpm::LpmModel& model) {
  json classes = json::array();
  for (const lpm::ClassModel& c : model.classes) {
    json comps = json::array();
    json raw = json::array();
    for (Eigen::Index k = 0; k < c.components.cols(); ++k) {
      comps.push_back(vector_to_json(c.components.col(k)));
      raw.push_back(vector_to_json(c.raw_attributed.col(k)));
    }
    classes.push_back(json{{"name", c.name},
                           {"components", comps},
                           {"raw_attributed", raw},
                           {"training_weights", vector_to_json(c.training_weights)},
                           {"pseudocount", vector_to_json(c.pseudocount)}});
  }
  json training = json::array();
  for (const auto& hists : model.training_histograms) {
    json arr = json::array();
    for (const ScoreHistogram& h : hists) arr.push_back(hist_to_json(h));
    training.push_back(arr);
  }
  json chi2 = json::array();
  for (const auto& trace : model.meta.chi2_trace) chi2.push_back(trace);
  dump_json(path, json{{"spec", spec_to_json(model.spec)},
                       {"classes", classes},
                       {"training_histograms", training},
                       {"meta", json{{"seed", model.meta.seed},
                                     {"restarts", model.meta.restarts},
                                     {"chi2_trace", chi2}}}});
}

lpm::LpmModel load_model(const std::string& path) {
  const json j = parse_json(path);
  lpm::LpmModel model;
  model.spec = spec_from_json(j.at("spec"));
  const Eigen::Index bins = model.spec.total_bins();
  for (const json& cj : j.at("classes")) {
    lpm::ClassModel c;
    c.name = cj.at("name").get<std::string>();
    const json& comps = cj.at("components");
    const json& raw = cj.at("raw_attributed");
    c.components.resize(bins, static_cast<Eigen::Index>(comps.size()));
    c.raw_attributed.resize(bins, static_cast<Eigen::Index>(raw.size()));
    for (Eigen::Index k = 0; k < c.components.cols(); ++k) {
      c.components.col(k) = vector_from_json(comps[static_cast<std::size_t>(k)]);
      c.raw_attributed.col(k) = vector_from_json(raw[static_cast<std::size_t>(k)]);
    }
    c.training_weights = vector_from_json(cj.at("training_weights"));
    c.pseudocount = vector_from_json(cj.at("pseudocount"));
    model.classes.push_back(std::move(c));
  }
  for (const json& hists : j.at("training_histograms")) {
    std::vector<ScoreHistogram> set;
    for (const json& h : hists) set.push_back(hist_from_json(h));
    model.training_histograms.push_back(std::move(set));
  }
  const json& meta = j.at("meta");
  model.meta.seed = meta.at("seed").get<std::uint64_t>();
  model.meta.restarts = meta.at("restarts").get<int>();
  for (const json& t : meta.at("chi2_trace"))
    model.meta.chi2_trace.push_back(t.get<std::vector<double>>());
  return model;
}

void save_scaling_factors(const std::string& path, std::span<const ScalingFactor> factors,
                          double success_prob, const std::vector<double>& chi2_report) {
  json arr = json::array();
  for (const ScalingFactor& f : factors) {
    arr.push_back(json{{"band_lo", f.band_lo},
                       {"band_hi", f.band_hi},
                       {"overall", f.overall()},
                       {"s", f.s},
                       {"var_s", f.var_s}});
  }
  json j{{"factors", arr}, {"success_prob", success_prob}};
  if (chi2_report.size() == 3) {
    j["chi2_per_dof"] = json{{"uncorrected", chi2_report[0]},
                             {"overall_scaled", chi2_report[1]},
                             {"band_scaled", chi2_report[2]}};
  }
  dump_json(path, j);
}

std::vector<ScalingFactor> load_scaling_factors(const std::string& path) {
  const json j = parse_json(path);
  std::vector<ScalingFactor> out;
  for (const json& f : j.at("factors")) {
    ScalingFactor sf;
    sf.band_lo = f.at("band_lo").get<double>();
    sf.band_hi = f.at("band_hi").get<double>();
    sf.s = f.at("s").get<double>();
    sf.var_s = f.at("var_s").get<double>();
    out.push_back(sf);
  }
  return out;
}

}  // namespace crater::io
