// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "powercast/io.hpp"
#include "powercast/rng.hpp"

using namespace powercast;

namespace {

std::string temp_path(const std::string& name) {
  static const std::string dir = [] {
    const auto d = std::filesystem::temp_directory_path() / "powercast_io_test";
    std::filesystem::create_directories(d);
    return d.string();
  }();
  return dir + "/" + name;
}

FieldStack random_stack(int n, int t, int c, uint64_t seed) {
  Rng rng = Rng::keyed(seed, 51, 0, 0);
  FieldStack s;
  s.n = n;
  s.t = t;
  s.c = c;
  s.data.resize(static_cast<std::size_t>(t) * c * s.block());
  for (float& f : s.data) f = static_cast<float>(rng.gaussian());
  return s;
}

// Minimal well-formedness scan: prolog allowed, one root, every opened tag
// closed in order, attribute values quoted.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  int roots = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?') {
      if (tag.back() != '?') return false;
      continue;
    }
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    if (self_closing) tag.pop_back();
    std::size_t quotes = 0;
    for (char ch : tag) quotes += ch == '"';
    if (quotes % 2) return false;
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
    if (name.empty()) return false;
    if (stack.empty()) {
      if (++roots > 1) return false;
    }
    if (!self_closing) stack.push_back(name);
  }
  return stack.empty() && roots == 1;
}

}  // namespace

TEST_CASE("zero field file size", "[io]") {
  FieldStack s;
  s.n = 4;
  s.t = 1;
  s.c = 1;
  s.data.assign(s.block(), 0.0f);
  const std::string path = temp_path("zero.csf");
  write_field_file(path, s);
  REQUIRE(std::filesystem::file_size(path) == 400);
}

TEST_CASE("field file round-trip is bitwise", "[io]") {
  const FieldStack s = random_stack(5, 3, 2, 1);
  const std::string path = temp_path("rt.csf");
  write_field_file(path, s);
  const FieldStack r = read_field_file(path);
  REQUIRE(r.n == s.n);
  REQUIRE(r.t == s.t);
  REQUIRE(r.c == s.c);
  REQUIRE(r.data == s.data);
}

TEST_CASE("field file error reporting", "[io]") {
  const FieldStack s = random_stack(3, 2, 1, 2);
  const std::string path = temp_path("err.csf");
  write_field_file(path, s);
  std::string bytes = read_text_file(path);

  SECTION("truncated payload names both lengths") {
    write_text_file(path, bytes.substr(0, bytes.size() - 1));
    try {
      read_field_file(path);
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      const std::string msg = e.what();
      REQUIRE(msg.find(std::to_string(bytes.size())) != std::string::npos);
      REQUIRE(msg.find(std::to_string(bytes.size() - 1)) != std::string::npos);
    }
  }
  SECTION("extra bytes are a shape mismatch") {
    write_text_file(path, bytes + "xx");
    REQUIRE_THROWS_AS(read_field_file(path), FormatError);
  }
  SECTION("bad magic points at offset zero") {
    bytes[0] = 'X';
    write_text_file(path, bytes);
    try {
      read_field_file(path);
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      REQUIRE(std::string(e.what()).find("offset 0") != std::string::npos);
    }
  }
  SECTION("short header") {
    write_text_file(path, "CSF1\x03");
    REQUIRE_THROWS_AS(read_field_file(path), FormatError);
  }
  SECTION("zero in the shape") {
    std::string hdr = bytes.substr(0, 16);
    hdr[8] = hdr[9] = hdr[10] = hdr[11] = '\0';  // T = 0
    write_text_file(path, hdr);
    REQUIRE_THROWS_AS(read_field_file(path), FormatError);
  }
  SECTION("missing file is an io error") {
    REQUIRE_THROWS_AS(read_field_file(temp_path("nope.csf")), IoError);
  }
  SECTION("unwritable path is an io error") {
    REQUIRE_THROWS_AS(write_field_file("/nonexistent_dir_zz/x.csf", s),
                      IoError);
  }
}

TEST_CASE("metadata sidecar", "[io]") {
  const FieldStack s = random_stack(2, 1, 1, 3);
  const std::string path = temp_path("meta.csf");
  Json meta;
  meta["seed"] = 42;
  meta["rho"] = 0.8;
  write_field_file(path, s, meta);
  const Json back = parse_json(read_text_file(path + ".json"), "sidecar");
  REQUIRE(back["seed"] == 42);
  REQUIRE(back["rho"] == 0.8);
}

TEST_CASE("stack bridges preserve narrowed values", "[io]") {
  Rng rng = Rng::keyed(4, 51, 0, 0);
  const GridSpec spec(3);
  std::vector<Field> fields(4, Field(spec));
  for (Field& f : fields)
    for (double& v : f.v) v = rng.gaussian();
  const FieldStack s = stack_of_fields(fields);
  REQUIRE(s.t == 4);
  for (int ti = 0; ti < 4; ++ti) {
    const Field back = field_of_stack(s, ti);
    for (std::size_t i = 0; i < back.v.size(); ++i)
      REQUIRE(back.v[i] == static_cast<double>(
                               static_cast<float>(fields[ti].v[i])));
  }
  REQUIRE_THROWS_AS(field_of_stack(s, 4), ValidationError);
  REQUIRE_THROWS_AS(field_of_stack(s, 0, 1), ValidationError);
}

TEST_CASE("climatology stack round-trip", "[io]") {
  Rng rng = Rng::keyed(5, 51, 0, 0);
  const GridSpec spec(2);
  const std::size_t cells = spec.cells();
  Climatology clim{spec, 31, std::vector<double>(365 * cells),
                   std::vector<double>(365 * cells)};
  for (std::size_t i = 0; i < clim.mu.size(); ++i) {
    clim.mu[i] = rng.gaussian();
    clim.sigma[i] = 0.5 + rng.uniform();
  }
  const FieldStack s = stack_of_climatology(clim);
  REQUIRE(s.t == 365);
  REQUIRE(s.c == 2);
  const Climatology back = climatology_of_stack(s, 31);
  for (std::size_t i = 0; i < clim.mu.size(); ++i) {
    REQUIRE(back.mu[i] == static_cast<double>(static_cast<float>(clim.mu[i])));
    REQUIRE(back.sigma[i] ==
            static_cast<double>(static_cast<float>(clim.sigma[i])));
  }
  FieldStack wrong = s;
  wrong.t = 364;
  wrong.data.resize(static_cast<std::size_t>(364) * 2 * wrong.block());
  REQUIRE_THROWS_AS(climatology_of_stack(wrong), ValidationError);
}

TEST_CASE("shortest round-trip formatting", "[io]") {
  REQUIRE(fmt_double(0.5) == "0.5");
  REQUIRE(fmt_double(0.0) == "0");
  Rng rng = Rng::keyed(6, 51, 0, 0);
  for (int i = 0; i < 2000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::exp(20.0 * rng.gaussian());
    const std::string text = fmt_double(v);
    double back = 0;
    const auto res =
        std::from_chars(text.data(), text.data() + text.size(), back);
    REQUIRE(res.ec == std::errc());
    REQUIRE(back == v);
  }
}

TEST_CASE("sweep csv schema", "[io]") {
  SweepReport rep;
  rep.q = 0.9;
  rep.auc_by_p = {{1.0, 0.5}, {2.0, 0.625}};
  const std::string csv = sweep_csv({rep});
  REQUIRE(csv == "q,p,auc\n0.9,1,0.5\n0.9,2,0.625\n");
}

TEST_CASE("lead csv schema", "[io]") {
  LeadCurve c;
  c.leads = {1, 2};
  c.power_mean_auc = {0.75, 0.5};
  c.mean_pred_auc = {0.625, 0.5};
  c.persistence_auc = {0.5, 0.25};
  c.climatology_auc = {0.5, 0.5};
  const std::string csv = lead_csv(c);
  REQUIRE(csv.substr(0, 16) == "method,lead,auc\n");
  REQUIRE(csv.find("power_mean,1,0.75\n") != std::string::npos);
  REQUIRE(csv.find("mean_prediction,2,0.5\n") != std::string::npos);
  REQUIRE(csv.find("persistence,2,0.25\n") != std::string::npos);
  REQUIRE(csv.find("climatology,1,0.5\n") != std::string::npos);
}

TEST_CASE("summary json carries values bit-exactly", "[io]") {
  ReportBundle rb;
  SweepReport rep;
  rep.q = 0.9;
  rep.auc_by_p = {{1.0, 0.512345678901234}};
  rep.p_opt = 1.0;
  rep.auc_opt = 0.512345678901234;
  rep.auc_mean_pred = 0.5023456789012345;
  rep.ri_opt = 100.0 * (rep.auc_opt - rep.auc_mean_pred) / rep.auc_mean_pred;
  SweepReport rep2 = rep;
  rep2.q = 0.95;
  rep2.p_opt = 3.1622776601683795;
  rb.sweeps = {rep, rep2};
  rb.fit = {2.5, -0.125, 0.9876543210987654};
  rb.lead_curve.leads = {1};
  rb.lead_curve.power_mean_auc = {0.7071067811865476};
  rb.lead_curve.mean_pred_auc = {0.6};
  rb.lead_curve.persistence_auc = {0.55};
  rb.lead_curve.climatology_auc = {0.5};
  rb.rmse_curve.leads = {1};
  rb.rmse_curve.ensemble = {0.6324555320336759};
  rb.rmse_curve.persistence = {0.6324555320336759};
  rb.rmse_curve.climatology = {1.0000000000000002};

  const Json j = summary_json(rb);
  const Json back = parse_json(j.dump(), "summary");
  REQUIRE(back["sweeps"][0]["auc_opt"].get<double>() == rep.auc_opt);
  REQUIRE(back["sweeps"][0]["ri_opt"].get<double>() == rep.ri_opt);
  REQUIRE(back["fit"]["r_squared"].get<double>() == rb.fit.r_squared);
  REQUIRE(back["auc"]["power_mean"][0].get<double>() ==
          rb.lead_curve.power_mean_auc[0]);
  REQUIRE(back["rmse"]["climatology"][0].get<double>() ==
          rb.rmse_curve.climatology[0]);
}

TEST_CASE("json parse errors carry a byte offset", "[io]") {
  try {
    parse_json("{\"a\": 1,}", "config");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("config") != std::string::npos);
    REQUIRE(msg.find("byte") != std::string::npos);
  }
}

TEST_CASE("roc svg output", "[io]") {
  const std::string path = temp_path("roc.svg");

  SECTION("perfect classifier passes through the corner") {
    const auto curve =
        roc_curve({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1});
    render_roc_svg(curve, path);
    const std::string svg = read_text_file(path);
    REQUIRE(well_formed_xml(svg));
    // (fpr 0, tpr 1) maps to pixel (40, 40)
    REQUIRE(svg.find("40,40") != std::string::npos);
    REQUIRE(svg.find("AUC = 1.0000") != std::string::npos);
  }
  SECTION("constant scores hug the diagonal") {
    const auto curve = roc_curve({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1});
    render_roc_svg(curve, path);
    const std::string svg = read_text_file(path);
    REQUIRE(well_formed_xml(svg));
    // the only polyline vertices are the corners of the diagonal
    REQUIRE(svg.find("points=\"40,440 440,40\"") != std::string::npos);
    REQUIRE(svg.find("AUC = 0.5000") != std::string::npos);
  }
  SECTION("unwritable path") {
    const auto curve = roc_curve({0.1, 0.9}, {0, 1});
    REQUIRE_THROWS_AS(render_roc_svg(curve, "/nonexistent_dir_zz/roc.svg"),
                      IoError);
  }
}

TEST_CASE("latlon csv parsing", "[io]") {
  const std::string good =
      "lat,lon,value\n10.5,-20.25,1.5\r\n-45,150,2\n\n0,0,-3.25\n";
  const std::vector<LatLonSample> s = parse_latlon_csv(good);
  REQUIRE(s.size() == 3);
  REQUIRE(s[0].pos.lat == 10.5);
  REQUIRE(s[0].pos.lon == -20.25);
  REQUIRE(s[2].value == -3.25);

  REQUIRE_THROWS_AS(parse_latlon_csv("lat,lon,value\n1,2\n"), FormatError);
  REQUIRE_THROWS_AS(parse_latlon_csv("a,b,c\n"), FormatError);
  REQUIRE_THROWS_AS(parse_latlon_csv("1,2,3,4\n"), FormatError);
  REQUIRE_THROWS_AS(parse_latlon_csv(""), ValidationError);
  try {
    parse_latlon_csv("lat,lon,value\n5,5,1\nbroken\n");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("latlon import", "[io]") {
  const GridSpec spec(4);

  SECTION("constant samples give a constant field") {
    Rng rng = Rng::keyed(8, 51, 0, 0);
    std::vector<LatLonSample> samples;
    for (int i = 0; i < 60; ++i) {
      const double lat = (rng.uniform() - 0.5) * 170.0;
      const double lon = (rng.uniform() - 0.5) * 350.0;
      samples.push_back({LatLon{lat, lon}, 7.25});
    }
    const Field f = import_latlon(samples, spec, 4);
    for (double v : f.v)
      REQUIRE_THAT(v, Catch::Matchers::WithinAbs(7.25, 1e-12));
  }
  SECTION("a sample on a cell center lands exactly") {
    const LatLon center = cell_center(spec, {0, 1, 2});
    std::vector<LatLonSample> samples = {{center, 3.5},
                                         {LatLon{80.0, 10.0}, -1.0},
                                         {LatLon{-40.0, 100.0}, 0.5}};
    const Field f = import_latlon(samples, spec, 2);
    REQUIRE(f.at({0, 1, 2}) == 3.5);
  }
  SECTION("validation") {
    std::vector<LatLonSample> one = {{LatLon{0.0, 0.0}, 1.0}};
    REQUIRE_THROWS_AS(import_latlon(one, spec, 2), ValidationError);
    REQUIRE_THROWS_AS(import_latlon({}, spec, 1), ValidationError);
  }
}
