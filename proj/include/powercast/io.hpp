// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "powercast/climatology.hpp"
#include "powercast/error.hpp"
#include "powercast/experiment.hpp"
#include "powercast/grid.hpp"
#include "powercast/metrics.hpp"
#include "powercast/tuner.hpp"

namespace powercast {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Flat binary field files. Layout: 4 magic bytes "CSF1", then three
// little-endian u32 (N, T, C), then T*C*6*N*N little-endian IEEE f32,
// ordered time, channel, face 0..5, row-major within a face. No padding.

struct FieldStack {
  int n = 0;  // face resolution
  int t = 1;  // time steps
  int c = 1;  // channels
  std::vector<float> data;

  std::size_t block() const {
    return 6u * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  float* at(int ti, int ci) {
    return data.data() + (static_cast<std::size_t>(ti) * c + ci) * block();
  }
  const float* at(int ti, int ci) const {
    return data.data() + (static_cast<std::size_t>(ti) * c + ci) * block();
  }
};

inline void validate_stack(const FieldStack& s) {
  require(s.n >= 1, "field stack needs a positive resolution");
  require(s.t >= 1, "field stack needs at least one time step");
  require(s.c >= 1, "field stack needs at least one channel");
  require(s.data.size() == static_cast<std::size_t>(s.t) * s.c * s.block(),
          "field stack data does not match its shape");
}

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

}  // namespace detail

inline void write_text_file(const std::string& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string content{std::istreambuf_iterator<char>(in),
                      std::istreambuf_iterator<char>()};
  if (in.bad()) throw IoError("read failed: " + path);
  return content;
}

// Metadata, when given, lands in a JSON sidecar next to the field file.
inline void write_field_file(const std::string& path, const FieldStack& s,
                             const Json& metadata = Json()) {
  validate_stack(s);
  std::string bytes;
  bytes.reserve(16 + s.data.size() * 4);
  bytes += "CSF1";
  detail::put_u32(bytes, static_cast<uint32_t>(s.n));
  detail::put_u32(bytes, static_cast<uint32_t>(s.t));
  detail::put_u32(bytes, static_cast<uint32_t>(s.c));
  for (float f : s.data) detail::put_u32(bytes, std::bit_cast<uint32_t>(f));
  write_text_file(path, bytes);
  if (!metadata.is_null()) write_text_file(path + ".json", metadata.dump(2));
}

inline FieldStack read_field_file(const std::string& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < 16)
    throw FormatError(path + ": header needs 16 bytes, file has " +
                      std::to_string(bytes.size()));
  if (bytes.compare(0, 4, "CSF1") != 0)
    throw FormatError(path + ": bad magic at byte offset 0");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  FieldStack s;
  s.n = static_cast<int>(detail::get_u32(p + 4));
  s.t = static_cast<int>(detail::get_u32(p + 8));
  s.c = static_cast<int>(detail::get_u32(p + 12));
  if (s.n < 1 || s.t < 1 || s.c < 1)
    throw FormatError(path + ": header at byte offset 4 declares an empty shape");
  const uint64_t count = 6ull * s.n * s.n * s.t * s.c;
  const uint64_t expected = 16 + count * 4;
  if (bytes.size() != expected)
    throw FormatError(path + ": payload at byte offset 16: expected " +
                      std::to_string(expected) + " bytes total, got " +
                      std::to_string(bytes.size()));
  s.data.resize(count);
  for (uint64_t i = 0; i < count; ++i)
    s.data[i] = std::bit_cast<float>(detail::get_u32(p + 16 + i * 4));
  return s;
}

// ---------------------------------------------------------------------------
// Bridges between stacks and in-memory types. Field values narrow to f32 on
// write; computation stays in f64 elsewhere.

inline FieldStack stack_of_fields(const std::vector<Field>& fields) {
  require(!fields.empty(), "no fields to stack");
  FieldStack s;
  s.n = fields[0].spec.n;
  s.t = static_cast<int>(fields.size());
  s.c = 1;
  s.data.resize(static_cast<std::size_t>(s.t) * s.block());
  for (int ti = 0; ti < s.t; ++ti) {
    require(fields[ti].spec.n == s.n, "fields disagree on resolution");
    float* dst = s.at(ti, 0);
    for (std::size_t i = 0; i < s.block(); ++i)
      dst[i] = static_cast<float>(fields[ti].v[i]);
  }
  return s;
}

inline FieldStack stack_of_series(const std::vector<DatedField>& series) {
  require(!series.empty(), "no fields to stack");
  std::vector<Field> plain;
  plain.reserve(series.size());
  for (const DatedField& d : series) plain.push_back(d.field);
  return stack_of_fields(plain);
}

inline Field field_of_stack(const FieldStack& s, int ti, int ci = 0) {
  validate_stack(s);
  require(ti >= 0 && ti < s.t, "time index out of range");
  require(ci >= 0 && ci < s.c, "channel index out of range");
  Field f(GridSpec(s.n));
  const float* src = s.at(ti, ci);
  for (std::size_t i = 0; i < s.block(); ++i) f.v[i] = src[i];
  return f;
}

// Climatology files hold 365 time steps and two channels: mean, then std.
inline FieldStack stack_of_climatology(const Climatology& clim) {
  FieldStack s;
  s.n = clim.spec.n;
  s.t = 365;
  s.c = 2;
  s.data.resize(static_cast<std::size_t>(s.t) * 2 * s.block());
  for (int doy = 0; doy < 365; ++doy) {
    float* mu = s.at(doy, 0);
    float* sd = s.at(doy, 1);
    for (std::size_t i = 0; i < s.block(); ++i) {
      mu[i] = static_cast<float>(clim.mu_at(doy, i));
      sd[i] = static_cast<float>(clim.sigma_at(doy, i));
    }
  }
  return s;
}

inline Climatology climatology_of_stack(const FieldStack& s,
                                        int window_days = 31) {
  validate_stack(s);
  require(s.t == 365 && s.c == 2,
          "a climatology file needs 365 time steps and 2 channels");
  Climatology clim{GridSpec(s.n), window_days,
                   std::vector<double>(365 * s.block()),
                   std::vector<double>(365 * s.block())};
  for (int doy = 0; doy < 365; ++doy) {
    const float* mu = s.at(doy, 0);
    const float* sd = s.at(doy, 1);
    for (std::size_t i = 0; i < s.block(); ++i) {
      clim.mu[doy * s.block() + i] = mu[i];
      clim.sigma[doy * s.block() + i] = sd[i];
      require(sd[i] > 0.0f, "climatology file holds a non-positive std");
    }
  }
  return clim;
}

// ---------------------------------------------------------------------------
// Number formatting: shortest text that parses back to the same bits.

inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV emission. Column schemas are part of the tool's contract.

inline std::string sweep_csv(const std::vector<SweepReport>& sweeps) {
  std::string out = "q,p,auc\n";
  for (const SweepReport& rep : sweeps)
    for (const auto& [p, a] : rep.auc_by_p) {
      out += fmt_double(rep.q);
      out += ',';
      out += fmt_double(p);
      out += ',';
      out += fmt_double(a);
      out += '\n';
    }
  return out;
}

inline std::string lead_csv(const LeadCurve& curve) {
  std::string out = "method,lead,auc\n";
  const auto emit = [&](const char* method, const std::vector<double>& auc) {
    for (std::size_t i = 0; i < curve.leads.size(); ++i) {
      out += method;
      out += ',';
      out += std::to_string(curve.leads[i]);
      out += ',';
      out += fmt_double(auc[i]);
      out += '\n';
    }
  };
  emit("power_mean", curve.power_mean_auc);
  emit("mean_prediction", curve.mean_pred_auc);
  emit("persistence", curve.persistence_auc);
  emit("climatology", curve.climatology_auc);
  return out;
}

// ---------------------------------------------------------------------------
// JSON report bodies.

inline Json summary_json(const ReportBundle& rb) {
  Json j;
  j["sweeps"] = Json::array();
  for (const SweepReport& rep : rb.sweeps) {
    Json s;
    s["q"] = rep.q;
    s["p_opt"] = rep.p_opt;
    s["auc_opt"] = rep.auc_opt;
    s["auc_mean_pred"] = rep.auc_mean_pred;
    s["ri_opt"] = rep.ri_opt;
    j["sweeps"].push_back(std::move(s));
  }
  // a fit over quantiles only exists once there are at least two of them
  if (rb.sweeps.size() >= 2)
    j["fit"] = {
        {"a", rb.fit.a}, {"b", rb.fit.b}, {"r_squared", rb.fit.r_squared}};
  if (!rb.refined.empty()) {
    j["refined"] = Json::array();
    for (const RefineResult& r : rb.refined)
      j["refined"].push_back({{"p", r.p}, {"auc", r.auc}});
  }
  if (!rb.lead_curve.leads.empty()) {
    j["leads"] = rb.lead_curve.leads;
    j["auc"] = {{"power_mean", rb.lead_curve.power_mean_auc},
                {"mean_prediction", rb.lead_curve.mean_pred_auc},
                {"persistence", rb.lead_curve.persistence_auc},
                {"climatology", rb.lead_curve.climatology_auc}};
    j["rmse"] = {{"ensemble", rb.rmse_curve.ensemble},
                 {"persistence", rb.rmse_curve.persistence},
                 {"climatology", rb.rmse_curve.climatology}};
  }
  return j;
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(what + ": malformed JSON at byte " +
                      std::to_string(e.byte) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// ROC rendering: a self-contained SVG with unit-square axes, the chance
// diagonal, the curve polyline, and the area printed to four decimals.

inline void render_roc_svg(const std::vector<RocPoint>& curve,
                           const std::string& path) {
  require(curve.size() >= 2, "curve needs at least two vertices");
  const double m = 40, w = 400;
  const auto px = [&](double fpr) { return m + fpr * w; };
  const auto py = [&](double tpr) { return m + (1.0 - tpr) * w; };

  std::string svg =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
      "viewBox=\"0 0 480 480\">\n"
      "  <rect x=\"40\" y=\"40\" width=\"400\" height=\"400\" fill=\"white\" "
      "stroke=\"black\"/>\n"
      "  <line x1=\"40\" y1=\"440\" x2=\"440\" y2=\"40\" stroke=\"gray\" "
      "stroke-dasharray=\"6 4\"/>\n";

  svg += "  <polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\" "
         "points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i) svg += ' ';
    svg += fmt_double(px(curve[i].fpr));
    svg += ',';
    svg += fmt_double(py(curve[i].tpr));
  }
  svg += "\"/>\n";

  char label[48];
  std::snprintf(label, sizeof(label), "AUC = %.4f", trapezoid_auc(curve));
  svg += "  <text x=\"60\" y=\"70\" font-family=\"sans-serif\" "
         "font-size=\"16\">";
  svg += label;
  svg += "</text>\n";
  svg += "  <text x=\"220\" y=\"470\" font-family=\"sans-serif\" "
         "font-size=\"13\">FPR</text>\n";
  svg += "  <text x=\"14\" y=\"244\" font-family=\"sans-serif\" "
         "font-size=\"13\">TPR</text>\n";
  svg += "</svg>\n";
  write_text_file(path, svg);
}

// ---------------------------------------------------------------------------
// Lat-lon CSV import for people bringing external gridded data: rows of
// lat,lon,value regrid onto the cube-sphere by inverse great-circle distance
// over the k nearest samples.

struct LatLonSample {
  LatLon pos;
  double value = 0;
};

inline std::vector<LatLonSample> parse_latlon_csv(const std::string& text) {
  std::vector<LatLonSample> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;
    if (line.empty()) continue;
    if (line_no == 1 && line == "lat,lon,value") continue;

    double v[3];
    const char* cur = line.data();
    const char* stop = line.data() + line.size();
    for (int i = 0; i < 3; ++i) {
      const auto res = std::from_chars(cur, stop, v[i]);
      if (res.ec != std::errc())
        throw FormatError("line " + std::to_string(line_no) +
                          ": expected lat,lon,value");
      cur = res.ptr;
      if (i < 2) {
        if (cur == stop || *cur != ',')
          throw FormatError("line " + std::to_string(line_no) +
                            ": expected lat,lon,value");
        ++cur;
      }
    }
    if (cur != stop)
      throw FormatError("line " + std::to_string(line_no) +
                        ": trailing characters after value");
    out.push_back({LatLon{v[0], v[1]}, v[2]});
  }
  require(!out.empty(), "the CSV holds no samples");
  return out;
}

inline Field import_latlon(const std::vector<LatLonSample>& samples,
                           const GridSpec& spec, int k = 4) {
  require(!samples.empty(), "no samples to import");
  require(k >= 1 && k <= static_cast<int>(samples.size()),
          "k must be between 1 and the sample count");
  std::vector<Vec3> pts(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    validate_latlon(samples[i].pos);
    pts[i] = unit_vector(samples[i].pos);
  }

  Field out(spec);
  std::vector<std::pair<double, std::size_t>> dist(samples.size());
  std::size_t idx = 0;
  for (int f = 0; f < 6; ++f)
    for (int r = 0; r < spec.n; ++r)
      for (int col = 0; col < spec.n; ++col, ++idx) {
        const Vec3 center = cell_center_vec(spec, {f, r, col});
        for (std::size_t i = 0; i < samples.size(); ++i)
          dist[i] = {great_circle_angle(center, pts[i]), i};
        std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
        std::sort(dist.begin(), dist.begin() + k);
        if (dist[0].first < 1e-12) {
          out.v[idx] = samples[dist[0].second].value;
          continue;
        }
        double total = 0, acc = 0;
        for (int j = 0; j < k; ++j) total += 1.0 / dist[j].first;
        for (int j = 0; j < k; ++j)
          acc += samples[dist[j].second].value / dist[j].first;
        out.v[idx] = acc / total;
      }
  return out;
}

}  // namespace powercast
