// powercast: power-mean pooling of ensemble forecasts on a cube-sphere grid.
// Copyright (c) 2026 powercast contributors. MIT license; see LICENSE.
//
// Command-line front end. Every subcommand resolves its options (flags beat
// the --config file, which beats built-in defaults), runs, and leaves a
// timestamped run directory under --out containing its outputs plus a
// manifest echoing the resolved configuration. The run directory's path is
// the single line printed to stdout.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "powercast/experiment.hpp"
#include "powercast/io.hpp"
#include "powercast/synth.hpp"

namespace fs = std::filesystem;
using namespace powercast;

namespace {

// ---------------------------------------------------------------------------
// Option plumbing: every option registered through OptSet can also be fed
// from the --config JSON under the flag's own name (sans dashes).

struct OptSet {
  std::vector<std::function<void(const Json&)>> mergers;

  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& var,
                   const std::string& desc) {
    CLI::Option* o = app->add_option(flag, var, desc);
    const std::string key = flag.substr(2);
    mergers.push_back([o, &var, key](const Json& cfg) {
      if (!o->count() && cfg.contains(key)) var = cfg.at(key).get<T>();
    });
    return o;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, bool& var,
                        const std::string& desc) {
    CLI::Option* o = app->add_flag(flag, var, desc);
    const std::string key = flag.substr(2);
    mergers.push_back([o, &var, key](const Json& cfg) {
      if (!o->count() && cfg.contains(key)) var = cfg.at(key).get<bool>();
    });
    return o;
  }

  void apply(const Json& cfg) const {
    for (const auto& m : mergers) m(cfg);
  }
};

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  return parse_json(read_text_file(path), path);
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// ---------------------------------------------------------------------------
// Run directories: <out>/<command>-<utc stamp>[-k], never reused.

std::string utc_stamp(const char* format) {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), format, &tm);
  return buf;
}

fs::path make_run_dir(const std::string& out, const std::string& command) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory: " + out);
  const std::string stem = command + "-" + utc_stamp("%Y%m%dT%H%M%SZ");
  for (int k = 1; k < 10000; ++k) {
    fs::path dir = fs::path(out) /
                   (k == 1 ? stem : stem + "-" + std::to_string(k));
    if (fs::create_directory(dir, ec)) return dir;
    if (ec) throw IoError("cannot create run directory: " + dir.string());
  }
  throw IoError("cannot find a fresh run directory name under " + out);
}

void write_manifest(const fs::path& dir, const std::string& command,
                    int threads, const Json& config) {
  Json m;
  m["command"] = command;
  m["created_utc"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
  m["threads"] = threads;
  m["config"] = config;
  write_text_file((dir / "manifest.json").string(), m.dump(2) + "\n");
}

void finish_run(const fs::path& dir) {
  std::printf("%s\n", dir.string().c_str());
}

// ---------------------------------------------------------------------------
// Shared loaders.

Json read_sidecar(const std::string& path) {
  return parse_json(read_text_file(path + ".json"), path + ".json");
}

struct LoadedTruth {
  TruthSeries series;
  Json meta;
};

LoadedTruth load_truth(const std::string& path) {
  const FieldStack s = read_field_file(path);
  const Json meta = read_sidecar(path);
  if (!meta.contains("kind") || meta.at("kind") != "truth")
    throw ValidationError(path + ": sidecar does not describe a truth series");
  if (s.c != 2)
    throw ValidationError(path +
                          ": truth files carry two channels (state, vol)");
  TruthSeries t;
  t.grid = GridSpec(s.n);
  t.rho = meta.at("rho").get<double>();
  Date date = parse_date(meta.at("start").get<std::string>());
  t.x.reserve(s.t);
  t.vol.reserve(s.t);
  for (int ti = 0; ti < s.t; ++ti) {
    t.x.push_back({date, field_of_stack(s, ti, 0)});
    t.vol.push_back(field_of_stack(s, ti, 1));
    date = next_day(date);
  }
  return {std::move(t), meta};
}

Climatology load_climatology(const std::string& path) {
  const FieldStack s = read_field_file(path);
  const Json meta = read_sidecar(path);
  int window = 31;
  if (meta.contains("window-days")) window = meta.at("window-days").get<int>();
  return climatology_of_stack(s, window);
}

void check_quantiles(const std::vector<double>& qs) {
  require(!qs.empty(), "need at least one quantile");
  for (double q : qs)
    require(q >= 0.5 && q < 1.0, "quantiles must lie in [0.5, 1)");
}

std::vector<std::pair<double, uint8_t>> parse_score_csv(
    const std::string& text, const std::string& what) {
  std::vector<std::pair<double, uint8_t>> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;
    if (line.empty()) continue;
    if (line_no == 1 && line == "score,label") continue;
    double score = 0;
    const char* stop = line.data() + line.size();
    auto res = std::from_chars(line.data(), stop, score);
    if (res.ec != std::errc() || res.ptr == stop || *res.ptr != ',')
      throw FormatError(what + ": line " + std::to_string(line_no) +
                        ": expected score,label");
    const char* cur = res.ptr + 1;
    int label = -1;
    res = std::from_chars(cur, stop, label);
    if (res.ec != std::errc() || res.ptr != stop || (label != 0 && label != 1))
      throw FormatError(what + ": line " + std::to_string(line_no) +
                        ": label must be 0 or 1");
    out.emplace_back(score, static_cast<uint8_t>(label));
  }
  require(!out.empty(), what + " holds no samples");
  return out;
}

std::string score_csv(const std::vector<double>& scores,
                      const std::vector<uint8_t>& labels) {
  std::string out = "score,label\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out += fmt_double(scores[i]);
    out += ',';
    out += labels[i] ? "1\n" : "0\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// gen-truth

struct GenTruthCmd {
  uint64_t seed = 0;
  int days = 4000;
  int grid_n = 8;
  double rho = 0.8;
  double vol_strength = 0.6;
  double vol_persist = 0.95;
  int base_frequency = 4;
  int octaves = 3;
  double sigma_ln = 0.5;
  std::string start = "2000-01-01";
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    opts.add(app, "--seed", seed, "process seed");
    opts.add(app, "--days", days, "series length in days");
    opts.add(app, "--grid-n", grid_n, "cube face resolution");
    opts.add(app, "--rho", rho, "daily autocorrelation");
    opts.add(app, "--vol-strength", vol_strength, "volatility amplitude");
    opts.add(app, "--vol-persist", vol_persist, "volatility persistence");
    opts.add(app, "--base-frequency", base_frequency, "noise base frequency");
    opts.add(app, "--octaves", octaves, "noise octaves");
    opts.add(app, "--sigma-ln", sigma_ln, "log-normal gradient spread");
    opts.add(app, "--start", start, "first day, YYYY-MM-DD");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["seed"] = seed;
    j["days"] = days;
    j["grid-n"] = grid_n;
    j["rho"] = rho;
    j["vol-strength"] = vol_strength;
    j["vol-persist"] = vol_persist;
    j["base-frequency"] = base_frequency;
    j["octaves"] = octaves;
    j["sigma-ln"] = sigma_ln;
    j["start"] = start;
    j["out"] = out;
    return j;
  }

  int run() {
    opts.apply(load_config(config));
    const int nthreads = resolve_threads(threads);
    TruthProcess proc;
    proc.grid = GridSpec(grid_n);
    proc.rho = rho;
    proc.spatial = standard_fractal(base_frequency, octaves, sigma_ln);
    proc.vol_strength = vol_strength;
    proc.vol_persist = vol_persist;
    proc.seed = seed;
    proc.days = days;
    proc.start = parse_date(start);
    const TruthSeries truth = gen_truth(proc, nthreads);

    FieldStack s;
    s.n = grid_n;
    s.t = days;
    s.c = 2;
    s.data.resize(static_cast<std::size_t>(days) * 2 * s.block());
    for (int d = 0; d < days; ++d) {
      float* x = s.at(d, 0);
      float* vol = s.at(d, 1);
      for (std::size_t i = 0; i < s.block(); ++i) {
        x[i] = static_cast<float>(truth.x[d].field.v[i]);
        vol[i] = static_cast<float>(truth.vol[d].v[i]);
      }
    }

    Json meta = echo();
    meta["kind"] = "truth";
    meta["channels"] = {"state", "vol"};

    const fs::path dir = make_run_dir(out, "gen-truth");
    write_field_file((dir / "truth.csf").string(), s, meta);
    write_manifest(dir, "gen-truth", nthreads, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// gen-forecast

struct GenForecastCmd {
  std::string truth;
  int day = -1;
  int lead = 1;
  int members = 50;
  double beta = 1.0;
  int perturb_frequency = 4;
  int perturb_octaves = 1;
  double perturb_sigma_ln = 0.5;
  uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;
  CLI::Option* seed_opt = nullptr;

  void bind(CLI::App* app) {
    opts.add(app, "--truth", truth, "truth field file")->required();
    opts.add(app, "--day", day, "issue day index")->required();
    opts.add(app, "--lead", lead, "lead in days");
    opts.add(app, "--members", members, "ensemble size");
    opts.add(app, "--beta", beta, "spread calibration");
    opts.add(app, "--perturb-frequency", perturb_frequency,
             "perturbation base frequency");
    opts.add(app, "--perturb-octaves", perturb_octaves,
             "perturbation octaves");
    opts.add(app, "--perturb-sigma-ln", perturb_sigma_ln,
             "perturbation gradient spread");
    seed_opt = opts.add(app, "--seed", seed,
                        "member seed (default derives from the truth seed)");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["truth"] = truth;
    j["day"] = day;
    j["lead"] = lead;
    j["members"] = members;
    j["beta"] = beta;
    j["perturb-frequency"] = perturb_frequency;
    j["perturb-octaves"] = perturb_octaves;
    j["perturb-sigma-ln"] = perturb_sigma_ln;
    j["seed"] = seed;
    j["out"] = out;
    return j;
  }

  int run() {
    const Json cfg = load_config(config);
    opts.apply(cfg);
    const int nthreads = resolve_threads(threads);
    const LoadedTruth loaded = load_truth(truth);
    if (!seed_opt->count() && !cfg.contains("seed"))
      seed = derive_seed(loaded.meta.at("seed").get<uint64_t>(), kStreamMember,
                         0, 0);

    ForecastConfig fc;
    fc.n_members = members;
    fc.beta = beta;
    fc.perturbation =
        standard_fractal(perturb_frequency, perturb_octaves, perturb_sigma_ln);
    fc.seed = seed;
    const Forecaster forecaster(loaded.series, fc);
    const EnsembleForecast ens = forecaster.members(day, lead, nthreads);

    Json meta = echo();
    meta["kind"] = "forecast";

    const fs::path dir = make_run_dir(out, "gen-forecast");
    write_field_file((dir / "forecast.csf").string(),
                     stack_of_fields(ens.members), meta);
    write_manifest(dir, "gen-forecast", nthreads, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// fit-clim

struct FitClimCmd {
  std::string truth;
  int train_days = 0;  // 0 = whole series
  int window = 31;
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    opts.add(app, "--truth", truth, "truth field file")->required();
    opts.add(app, "--train-days", train_days,
             "days to fit on, 0 = whole series");
    opts.add(app, "--window", window, "day-of-year window width");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["truth"] = truth;
    j["train-days"] = train_days;
    j["window"] = window;
    j["out"] = out;
    return j;
  }

  int run() {
    opts.apply(load_config(config));
    const int nthreads = resolve_threads(threads);
    const LoadedTruth loaded = load_truth(truth);
    const int use = train_days > 0 ? train_days : loaded.series.days();
    require(use <= loaded.series.days(),
            "train-days exceeds the series length");
    const Climatology clim = fit_climatology(
        {loaded.series.x.begin(), loaded.series.x.begin() + use}, window,
        nthreads);

    Json meta = echo();
    meta["kind"] = "climatology";
    meta["window-days"] = window;

    const fs::path dir = make_run_dir(out, "fit-clim");
    write_field_file((dir / "clim.csf").string(), stack_of_climatology(clim),
                     meta);
    write_manifest(dir, "fit-clim", nthreads, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// label

struct LabelCmd {
  std::string truth;
  std::string clim;
  double q = 0.98;
  int from = 0;
  int to = 0;  // 0 = series end
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    opts.add(app, "--truth", truth, "truth field file")->required();
    opts.add(app, "--clim", clim, "climatology field file")->required();
    opts.add(app, "--q", q, "exceedance quantile");
    opts.add(app, "--from", from, "first day index");
    opts.add(app, "--to", to, "one past the last day index, 0 = series end");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["truth"] = truth;
    j["clim"] = clim;
    j["q"] = q;
    j["from"] = from;
    j["to"] = to;
    j["out"] = out;
    return j;
  }

  int run() {
    opts.apply(load_config(config));
    check_quantiles({q});
    const LoadedTruth loaded = load_truth(truth);
    const Climatology climatology = load_climatology(clim);
    const int end = to > 0 ? to : loaded.series.days();
    require(0 <= from && from < end && end <= loaded.series.days(),
            "day range does not fit the series");

    std::vector<Field> labels;
    labels.reserve(end - from);
    for (int d = from; d < end; ++d) {
      const Field anoms = standardize(loaded.series.x[d].field,
                                      loaded.series.x[d].date, climatology);
      labels.push_back(label_extreme(anoms, q).y);
    }

    Json meta = echo();
    meta["kind"] = "labels";

    const fs::path dir = make_run_dir(out, "label");
    write_field_file((dir / "labels.csf").string(), stack_of_fields(labels),
                     meta);
    write_manifest(dir, "label", resolve_threads(threads), echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// Dataset assembly shared by sweep-p and eval-leads.

struct DatasetOpts {
  std::string truth;
  std::string clim;
  int train_days = 3000;
  int valid_days = 1000;
  int members = 50;
  double beta = 0.6;
  int perturb_frequency = 4;
  int perturb_octaves = 1;
  double perturb_sigma_ln = 0.5;
  uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void bind(CLI::App* app, OptSet& opts) {
    opts.add(app, "--truth", truth, "truth field file")->required();
    opts.add(app, "--clim", clim, "climatology field file")->required();
    opts.add(app, "--train-days", train_days,
             "days reserved for training; validation starts after them");
    opts.add(app, "--valid-days", valid_days, "validation days");
    opts.add(app, "--members", members, "ensemble size");
    opts.add(app, "--beta", beta, "spread calibration");
    opts.add(app, "--perturb-frequency", perturb_frequency,
             "perturbation base frequency");
    opts.add(app, "--perturb-octaves", perturb_octaves,
             "perturbation octaves");
    opts.add(app, "--perturb-sigma-ln", perturb_sigma_ln,
             "perturbation gradient spread");
    seed_opt = opts.add(app, "--seed", seed,
                        "member seed (default derives from the truth seed)");
  }

  void echo_into(Json& j) const {
    j["truth"] = truth;
    j["clim"] = clim;
    j["train-days"] = train_days;
    j["valid-days"] = valid_days;
    j["members"] = members;
    j["beta"] = beta;
    j["perturb-frequency"] = perturb_frequency;
    j["perturb-octaves"] = perturb_octaves;
    j["perturb-sigma-ln"] = perturb_sigma_ln;
    j["seed"] = seed;
  }

  struct Prepared {
    LoadedTruth truth;
    Climatology clim;
  };

  // Loads both inputs and settles the member seed.
  Prepared prepare(const Json& cfg) {
    Prepared p{load_truth(truth), load_climatology(clim)};
    if (!seed_opt->count() && !cfg.contains("seed"))
      seed = derive_seed(p.truth.meta.at("seed").get<uint64_t>(),
                         kStreamMember, 0, 0);
    return p;
  }

  ForecastConfig forecast_config() const {
    ForecastConfig fc;
    fc.n_members = members;
    fc.beta = beta;
    fc.perturbation =
        standard_fractal(perturb_frequency, perturb_octaves, perturb_sigma_ln);
    fc.seed = seed;
    return fc;
  }
};

// ---------------------------------------------------------------------------
// sweep-p

struct SweepCmd {
  DatasetOpts data;
  int lead = 7;
  std::vector<double> quantiles = {0.8, 0.85, 0.9, 0.95, 0.98};
  std::vector<double> p_grid;
  bool dump_scores = false;
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    data.bind(app, opts);
    opts.add(app, "--lead", lead, "lead to sweep at");
    opts.add(app, "--quantiles", quantiles, "exceedance quantiles");
    opts.add(app, "--p", p_grid,
             "exponent grid (default: 61 log-spaced points, 1 to 1000)");
    opts.add_flag(app, "--dump-scores", dump_scores,
                  "also write pooled score,label CSVs at each optimum");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    data.echo_into(j);
    j["lead"] = lead;
    j["quantiles"] = quantiles;
    j["p"] = p_grid;
    j["dump-scores"] = dump_scores;
    j["out"] = out;
    return j;
  }

  int run() {
    const Json cfg = load_config(config);
    opts.apply(cfg);
    if (p_grid.empty()) p_grid = default_p_grid();
    check_quantiles(quantiles);
    const int nthreads = resolve_threads(threads);

    const DatasetOpts::Prepared prep = data.prepare(cfg);
    const Forecaster forecaster(prep.truth.series, data.forecast_config());
    const BuiltDataset built =
        build_dataset(prep.truth.series, prep.clim,
                      live_member_source(forecaster, nthreads), lead,
                      data.train_days, data.valid_days, quantiles, nthreads);

    ReportBundle rb;
    rb.sweeps = sweep_all(built.scores, p_grid, nthreads);
    if (rb.sweeps.size() >= 2) {
      std::vector<std::pair<double, double>> pts;
      for (const SweepReport& rep : rb.sweeps)
        pts.emplace_back(rep.q, rep.p_opt);
      rb.fit = fit_exponential(pts);
    }

    const fs::path dir = make_run_dir(out, "sweep-p");
    write_text_file((dir / "sweep.csv").string(), sweep_csv(rb.sweeps));
    write_text_file((dir / "summary.json").string(),
                    summary_json(rb).dump(2) + "\n");
    if (dump_scores) {
      std::vector<double> pooled;
      for (const SweepReport& rep : rb.sweeps) {
        pooled_scores(built.scores, rep.p_opt, pooled, nthreads);
        const std::string name = "scores_q" + fmt_double(rep.q) + ".csv";
        write_text_file((dir / name).string(),
                        score_csv(pooled, built.scores.labels_for(rep.q)));
      }
    }
    write_manifest(dir, "sweep-p", nthreads, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// fit-exponent

struct FitExponentCmd {
  std::string summary;
  std::string out = "out";
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    opts.add(app, "--summary", summary, "summary.json from sweep-p")
        ->required();
    opts.add(app, "--out", out, "output directory");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["summary"] = summary;
    j["out"] = out;
    return j;
  }

  int run() {
    opts.apply(load_config(config));
    const Json j = parse_json(read_text_file(summary), summary);
    if (!j.contains("sweeps") || !j.at("sweeps").is_array())
      throw ValidationError(summary + ": no sweeps array to fit");
    std::vector<std::pair<double, double>> points;
    for (const Json& s : j.at("sweeps"))
      points.emplace_back(s.at("q").get<double>(),
                          s.at("p_opt").get<double>());
    const ExponentialFit fit = fit_exponential(points);

    Json out_json;
    out_json["a"] = fit.a;
    out_json["b"] = fit.b;
    out_json["r_squared"] = fit.r_squared;

    const fs::path dir = make_run_dir(out, "fit-exponent");
    write_text_file((dir / "fit.json").string(), out_json.dump(2) + "\n");
    write_manifest(dir, "fit-exponent", 1, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// eval-leads

struct EvalLeadsCmd {
  DatasetOpts data;
  std::vector<int> leads = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  double lead_q = 0.98;
  double p = 0;  // 0 = take p_opt from --summary
  std::string summary;
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    data.bind(app, opts);
    opts.add(app, "--leads", leads, "leads to evaluate");
    opts.add(app, "--lead-q", lead_q, "quantile for the lead curve");
    opts.add(app, "--p", p, "pooling exponent (omit to read --summary)");
    opts.add(app, "--summary", summary,
             "summary.json holding p_opt for --lead-q");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    data.echo_into(j);
    j["leads"] = leads;
    j["lead-q"] = lead_q;
    j["p"] = p;
    j["summary"] = summary;
    j["out"] = out;
    return j;
  }

  int run() {
    const Json cfg = load_config(config);
    opts.apply(cfg);
    check_quantiles({lead_q});
    const int nthreads = resolve_threads(threads);

    if (p <= 0) {
      require(!summary.empty(), "give --p or --summary");
      const Json j = parse_json(read_text_file(summary), summary);
      require(j.contains("sweeps"), summary + ": no sweeps array");
      for (const Json& s : j.at("sweeps"))
        if (s.at("q").get<double>() == lead_q) p = s.at("p_opt").get<double>();
      require(p > 0, summary + ": no sweep entry for the requested quantile");
    }
    require(p >= 1.0, "the pooling exponent must be at least 1");

    const DatasetOpts::Prepared prep = data.prepare(cfg);
    const Forecaster forecaster(prep.truth.series, data.forecast_config());
    const MemberSource source = live_member_source(forecaster, nthreads);

    ReportBundle rb;
    rb.lead_curve.leads = leads;
    rb.rmse_curve.leads = leads;
    for (int lead : leads) {
      const BuiltDataset built =
          build_dataset(prep.truth.series, prep.clim, source, lead,
                        data.train_days, data.valid_days, {lead_q}, nthreads);
      const LeadPoint pt =
          evaluate_lead_point(built.scores, lead_q, p, nthreads);
      rb.lead_curve.power_mean_auc.push_back(pt.power_mean);
      rb.lead_curve.mean_pred_auc.push_back(pt.mean_pred);
      rb.lead_curve.persistence_auc.push_back(pt.persistence);
      rb.lead_curve.climatology_auc.push_back(pt.climatology);
      rb.rmse_curve.ensemble.push_back(built.rmse_ensemble);
      rb.rmse_curve.persistence.push_back(built.rmse_persistence);
      rb.rmse_curve.climatology.push_back(built.rmse_climatology);
    }

    const fs::path dir = make_run_dir(out, "eval-leads");
    write_text_file((dir / "leads.csv").string(), lead_csv(rb.lead_curve));
    write_text_file((dir / "summary.json").string(),
                    summary_json(rb).dump(2) + "\n");
    write_manifest(dir, "eval-leads", nthreads, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// report: the whole pipeline in memory, no intermediate files.

struct ReportCmd {
  ExperimentConfig exp;
  std::string start = "2000-01-01";
  bool svg = false;
  std::string out = "out";
  int threads = 0;
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    opts.add(app, "--seed", exp.seed, "experiment seed");
    opts.add(app, "--grid-n", exp.grid_n, "cube face resolution");
    opts.add(app, "--train-days", exp.train_days, "training days");
    opts.add(app, "--valid-days", exp.valid_days, "validation days");
    opts.add(app, "--rho", exp.rho, "daily autocorrelation");
    opts.add(app, "--vol-strength", exp.vol_strength, "volatility amplitude");
    opts.add(app, "--vol-persist", exp.vol_persist, "volatility persistence");
    opts.add(app, "--base-frequency", exp.base_frequency,
             "noise base frequency");
    opts.add(app, "--octaves", exp.octaves, "truth noise octaves");
    opts.add(app, "--sigma-ln", exp.sigma_ln, "log-normal gradient spread");
    opts.add(app, "--perturb-octaves", exp.perturb_octaves,
             "perturbation octaves");
    opts.add(app, "--members", exp.n_members, "ensemble size");
    opts.add(app, "--beta", exp.beta, "spread calibration");
    opts.add(app, "--window", exp.window_days, "climatology window");
    opts.add(app, "--leads", exp.leads, "leads for the lead curve");
    opts.add(app, "--sweep-lead", exp.sweep_lead, "lead the sweep runs at");
    opts.add(app, "--quantiles", exp.quantiles, "sweep quantiles");
    opts.add(app, "--lead-q", exp.lead_q, "quantile for the lead curve");
    opts.add(app, "--p", exp.p_grid,
             "exponent grid (default: 61 log-spaced points, 1 to 1000)");
    opts.add_flag(app, "--refine", exp.refine,
                  "golden-section refinement around each optimum");
    opts.add(app, "--start", start, "first day, YYYY-MM-DD");
    opts.add_flag(app, "--svg", svg, "also render ROC SVGs at the sweep lead");
    opts.add(app, "--out", out, "output directory");
    opts.add(app, "--threads", threads, "worker threads, 0 = auto");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["seed"] = exp.seed;
    j["grid-n"] = exp.grid_n;
    j["train-days"] = exp.train_days;
    j["valid-days"] = exp.valid_days;
    j["rho"] = exp.rho;
    j["vol-strength"] = exp.vol_strength;
    j["vol-persist"] = exp.vol_persist;
    j["base-frequency"] = exp.base_frequency;
    j["octaves"] = exp.octaves;
    j["sigma-ln"] = exp.sigma_ln;
    j["perturb-octaves"] = exp.perturb_octaves;
    j["members"] = exp.n_members;
    j["beta"] = exp.beta;
    j["window"] = exp.window_days;
    j["leads"] = exp.leads;
    j["sweep-lead"] = exp.sweep_lead;
    j["quantiles"] = exp.quantiles;
    j["lead-q"] = exp.lead_q;
    j["p"] = exp.p_grid;
    j["refine"] = exp.refine;
    j["start"] = start;
    j["svg"] = svg;
    j["out"] = out;
    return j;
  }

  int run() {
    opts.apply(load_config(config));
    exp.start = parse_date(start);
    const int nthreads = resolve_threads(threads);
    const ReportBundle rb = run_report(exp, nthreads);

    const fs::path dir = make_run_dir(out, "report");
    write_text_file((dir / "sweep.csv").string(), sweep_csv(rb.sweeps));
    write_text_file((dir / "leads.csv").string(), lead_csv(rb.lead_curve));
    write_text_file((dir / "summary.json").string(),
                    summary_json(rb).dump(2) + "\n");

    if (svg) {
      // rebuild the sweep dataset (deterministic, same bits) to get scores
      const TruthSeries truth = gen_truth(truth_process_of(exp), nthreads);
      const Climatology clim = fit_climatology(
          {truth.x.begin(), truth.x.begin() + exp.train_days},
          exp.window_days, nthreads);
      const Forecaster forecaster(truth, forecast_config_of(exp));
      const BuiltDataset built = build_dataset(
          truth, clim, live_member_source(forecaster, nthreads),
          exp.sweep_lead, exp.train_days, exp.valid_days, exp.quantiles,
          nthreads);
      double p_fixed = 1.0;
      for (const SweepReport& rep : rb.sweeps)
        if (rep.q == exp.lead_q) p_fixed = rep.p_opt;
      std::vector<double> pooled;
      pooled_scores(built.scores, p_fixed, pooled, nthreads);
      const std::vector<uint8_t>& labels = built.scores.labels_for(exp.lead_q);
      render_roc_svg(roc_curve(pooled, labels),
                     (dir / "roc_power_mean.svg").string());
      render_roc_svg(roc_curve(built.scores.mean_pred, labels),
                     (dir / "roc_mean_pred.svg").string());
    }
    write_manifest(dir, "report", nthreads, echo());
    finish_run(dir);
    return 0;
  }
};

// ---------------------------------------------------------------------------
// roc-svg

struct RocSvgCmd {
  std::string input;
  std::string out = "out";
  std::string config;
  OptSet opts;

  void bind(CLI::App* app) {
    opts.add(app, "--input", input, "CSV of score,label rows")->required();
    opts.add(app, "--out", out, "output directory");
    app->add_option("--config", config, "JSON config file");
  }

  Json echo() const {
    Json j;
    j["input"] = input;
    j["out"] = out;
    return j;
  }

  int run() {
    opts.apply(load_config(config));
    const auto rows = parse_score_csv(read_text_file(input), input);
    std::vector<double> scores(rows.size());
    std::vector<uint8_t> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      scores[i] = rows[i].first;
      labels[i] = rows[i].second;
    }
    const fs::path dir = make_run_dir(out, "roc-svg");
    render_roc_svg(roc_curve(scores, labels), (dir / "roc.svg").string());
    write_manifest(dir, "roc-svg", 1, echo());
    finish_run(dir);
    return 0;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"powercast: power-mean pooling experiments on synthetic "
               "cube-sphere weather"};
  app.require_subcommand(1);

  GenTruthCmd gen_truth_cmd;
  GenForecastCmd gen_forecast_cmd;
  FitClimCmd fit_clim_cmd;
  LabelCmd label_cmd;
  SweepCmd sweep_cmd;
  FitExponentCmd fit_exponent_cmd;
  EvalLeadsCmd eval_leads_cmd;
  ReportCmd report_cmd;
  RocSvgCmd roc_svg_cmd;

  gen_truth_cmd.bind(
      app.add_subcommand("gen-truth", "generate a synthetic truth series"));
  gen_forecast_cmd.bind(app.add_subcommand(
      "gen-forecast", "generate one ensemble forecast from a truth file"));
  fit_clim_cmd.bind(
      app.add_subcommand("fit-clim", "fit a day-of-year climatology"));
  label_cmd.bind(
      app.add_subcommand("label", "label quantile exceedances per cell"));
  sweep_cmd.bind(app.add_subcommand(
      "sweep-p", "sweep the pooling exponent and report optima"));
  fit_exponent_cmd.bind(app.add_subcommand(
      "fit-exponent", "fit ln(p_opt) against q from a sweep summary"));
  eval_leads_cmd.bind(app.add_subcommand(
      "eval-leads", "evaluate AUC and RMSE across lead times"));
  report_cmd.bind(app.add_subcommand(
      "report", "run the full experiment pipeline in one go"));
  roc_svg_cmd.bind(
      app.add_subcommand("roc-svg", "render a ROC curve from a score CSV"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "powercast: %s\n", e.what());
    return 1;
  }

  try {
    if (app.got_subcommand("gen-truth")) return gen_truth_cmd.run();
    if (app.got_subcommand("gen-forecast")) return gen_forecast_cmd.run();
    if (app.got_subcommand("fit-clim")) return fit_clim_cmd.run();
    if (app.got_subcommand("label")) return label_cmd.run();
    if (app.got_subcommand("sweep-p")) return sweep_cmd.run();
    if (app.got_subcommand("fit-exponent")) return fit_exponent_cmd.run();
    if (app.got_subcommand("eval-leads")) return eval_leads_cmd.run();
    if (app.got_subcommand("report")) return report_cmd.run();
    if (app.got_subcommand("roc-svg")) return roc_svg_cmd.run();
  } catch (const FormatError& e) {
    std::fprintf(stderr, "powercast: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "powercast: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "powercast: %s\n", e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "powercast: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "powercast: %s\n", e.what());
    return 1;
  }
  return 0;
}
