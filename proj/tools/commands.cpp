#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "ibtrack/config.hpp"
#include "ibtrack/formats.hpp"
#include "ibtrack/metrics.hpp"
#include "ibtrack/pipeline.hpp"
#include "ibtrack/report.hpp"
#include "ibtrack/simulator.hpp"

namespace ibtrack::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Stopwatch
{
public:
  Stopwatch()
    : start_(std::chrono::steady_clock::now()), started_utc_(std::chrono::system_clock::now())
  {
  }

  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  std::string started_utc() const
  {
    const std::time_t t = std::chrono::system_clock::to_time_t(started_utc_);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

private:
  std::chrono::steady_clock::time_point start_;
  std::chrono::system_clock::time_point started_utc_;
};

void write_file(const fs::path& path, const std::string& content)
{
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw FileError("cannot write " + path.string());
  }
  f << content;
}

json manifest(std::string command, const json& inputs, const std::vector<std::string>& config,
              std::optional<std::uint64_t> seed, const Stopwatch& clock, json extra = json::object())
{
  json m;
  m["command"] = std::move(command);
  m["tool_version"] = kToolVersion;
  m["inputs"] = inputs;
  m["config"] = config;
  m["seed"] = seed ? json(*seed) : json(nullptr);
  m["wall_clock"] = {{"started_utc", clock.started_utc()}, {"elapsed_seconds", clock.seconds()}};
  for (auto& [k, v] : extra.items()) {
    m[k] = v;
  }
  return m;
}

void write_manifest(const fs::path& path, const json& m) { write_file(path, m.dump(2) + "\n"); }

fs::path with_suffix(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

TrackerConfig load_tracker_config(const std::optional<fs::path>& path)
{
  if (!path) {
    return {};
  }
  std::ifstream in(*path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config " + path->string());
  }
  return parse_tracker_config(in);
}

std::vector<DetectionRecord> load_detections(const fs::path& path)
{
  auto in = open_input(path);
  try {
    return parse_detections(in);
  } catch (const MalformedLine& e) {
    throw MalformedLine(e.line(), path.string() + ": " + e.reason());
  }
}

std::vector<TrackRecord> load_tracks(const fs::path& path)
{
  auto in = open_input(path);
  try {
    return parse_tracks(in);
  } catch (const MalformedLine& e) {
    throw MalformedLine(e.line(), path.string() + ": " + e.reason());
  }
}

json path_list(const std::vector<fs::path>& paths)
{
  json a = json::array();
  for (const auto& p : paths) a.push_back(p.string());
  return a;
}

/// Maps the error taxonomy onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body)
{
  try {
    return body();
  } catch (const FormatError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const FileError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParseError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FrameRangeMismatch& e) {
    err << "data mismatch: " << e.what() << '\n';
    return kDataMismatch;
  } catch (const EmptyGroundTruth& e) {
    err << "data mismatch: " << e.what() << '\n';
    return kDataMismatch;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

TrackerKind tracker_kind(const std::string& name)
{
  try {
    return parse_tracker_kind(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::vector<std::string> track_header(TrackerKind kind, const TrackerConfig& cfg)
{
  std::vector<std::string> h{"tracker = " + std::string(to_string(kind))};
  for (auto& line : cfg.to_lines()) h.push_back(std::move(line));
  return h;
}

}  // namespace

int cmd_track(const TrackOptions& opt, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    const Stopwatch clock;
    const TrackerKind kind = tracker_kind(opt.tracker);
    const TrackerConfig cfg = load_tracker_config(opt.config);
    const auto dets = load_detections(opt.dets);
    const auto records = run_tracker(kind, dets, cfg);
    write_file(opt.out, write_tracks(records, track_header(kind, cfg)));
    json inputs{{"detections", opt.dets.string()},
                {"config", opt.config ? json(opt.config->string()) : json(nullptr)}};
    write_manifest(with_suffix(opt.out, ".manifest.json"),
                   manifest("track", inputs, track_header(kind, cfg), std::nullopt, clock,
                            {{"outputs", {opt.out.string()}}, {"records", records.size()}}));
    out << "wrote " << records.size() << " track records to " << opt.out.string() << '\n';
    return kOk;
  });
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    const Stopwatch clock;
    if (opt.match_iou < 0.0 || opt.match_iou > 1.0) {
      throw ConfigError("--match-iou must lie in [0,1]");
    }
    const auto gt = load_ground_truth(opt.gt);
    const auto tracks = load_tracks(opt.tracks);
    ibtrack::EvalOptions eo;
    eo.match_iou = opt.match_iou;
    eo.mota_id = opt.mota_id;
    eo.include_inferred = opt.include_inferred;
    const EvalReport rep = evaluate(gt, tracks, eo);
    out << format_table(rep);
    for (int c : rep.skipped_classes) {
      out << "skipped class " << c << " (" << class_name(c) << "): no ground truth\n";
    }
    const fs::path csv = opt.out ? *opt.out : with_suffix(opt.tracks, ".eval.csv");
    write_file(csv, format_csv(rep));
    json inputs{{"ground_truth", path_list(opt.gt)}, {"tracks", opt.tracks.string()}};
    std::vector<std::string> settings{
      "match_iou = " + format_double(opt.match_iou),
      std::string("mota_mode = ") + (opt.mota_id ? "identity" : "clear"),
      std::string("inferred = ") + (opt.include_inferred ? "include" : "exclude")};
    write_manifest(with_suffix(csv, ".manifest.json"),
                   manifest("eval", inputs, settings, std::nullopt, clock, {{"outputs", {csv.string()}}}));
    return kOk;
  });
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    const Stopwatch clock;
    SceneConfig cfg;
    if (opt.config) {
      std::ifstream in(*opt.config, std::ios::binary);
      if (!in) {
        throw ConfigError("cannot open config " + opt.config->string());
      }
      cfg = parse_scene_config(in);
    }
    if (opt.seed) {
      cfg.seed = *opt.seed;
    }
    cfg.validate();
    const SimResult sim = simulate(cfg);

    std::string scene_line = "scene";
    for (const auto& l : cfg.to_lines()) {
      std::string compact = l;
      compact.erase(std::remove(compact.begin(), compact.end(), ' '), compact.end());
      scene_line += " " + compact;
    }
    const fs::path gt_path = opt.out_dir / "gt.txt";
    const fs::path det_path = opt.out_dir / "dets.txt";
    write_file(gt_path, write_ground_truth(sim.gt, {scene_line}));
    write_file(det_path, write_detections(sim.dets, {scene_line}));
    json inputs{{"config", opt.config ? json(opt.config->string()) : json(nullptr)}};
    write_manifest(opt.out_dir / "manifest.json",
                   manifest("simulate", inputs, cfg.to_lines(), cfg.seed, clock,
                            {{"outputs", {gt_path.string(), det_path.string()}},
                             {"gt_records", sim.gt.size()},
                             {"detection_records", sim.dets.size()}}));
    out << "wrote " << sim.gt.size() << " ground-truth and " << sim.dets.size()
        << " detection records to " << opt.out_dir.string() << '\n';
    return kOk;
  });
}

int cmd_detect_eval(const DetectEvalOptions& opt, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    const Stopwatch clock;
    const auto gt = load_ground_truth(opt.gt);
    const auto dets = load_detections(opt.dets);
    const ApResult ap = average_precision(dets, gt, 0.5);
    std::string csv = "class,ap50\n";
    char buf[64];
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& v = ap.ap[static_cast<std::size_t>(c)];
      if (!v) {
        out << "AP50 " << class_name(c) << ": skipped (no ground truth)\n";
        continue;
      }
      std::snprintf(buf, sizeof buf, "%.4f", *v);
      out << "AP50 " << class_name(c) << ": " << buf << '\n';
      csv += std::string(class_name(c)) + "," + format_double(*v) + "\n";
    }
    if (ap.map) {
      std::snprintf(buf, sizeof buf, "%.4f", *ap.map);
      out << "mAP50: " << buf << '\n';
      csv += "All," + format_double(*ap.map) + "\n";
    } else {
      out << "mAP50: undefined (no ground truth)\n";
    }
    const fs::path csv_path = opt.out ? *opt.out : with_suffix(opt.dets, ".ap.csv");
    write_file(csv_path, csv);
    json inputs{{"ground_truth", path_list(opt.gt)}, {"detections", opt.dets.string()}};
    write_manifest(with_suffix(csv_path, ".manifest.json"),
                   manifest("detect-eval", inputs, {"iou_threshold = 0.5"}, std::nullopt, clock,
                            {{"outputs", {csv_path.string()}}}));
    return kOk;
  });
}

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    const Stopwatch clock;
    if (opt.repeats < 1) {
      throw ConfigError("--repeats must be >= 1");
    }
    const TrackerKind kind = tracker_kind(opt.tracker);
    const TrackerConfig cfg = load_tracker_config(opt.config);
    const auto dets = load_detections(opt.dets);
    const FrameTable table = FrameTable::build(dets);

    json runs = json::array();
    std::vector<double> all_steps;
    double fps_sum = 0.0;
    char buf[160];
    for (int r = 0; r < opt.repeats; ++r) {
      StepTimes times;
      run_tracker(kind, table, cfg, &times);
      if (times.empty()) {
        throw FormatError("no frames to benchmark");
      }
      // Guard against clock granularity on trivially small frames.
      for (double& t : times) t = std::max(t, 1e-9);
      const double f = fps(times);
      fps_sum += f;
      std::vector<double> sorted = times;
      std::sort(sorted.begin(), sorted.end());
      auto pct = [&](double q) {
        return sorted[static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1))];
      };
      const double total = std::accumulate(times.begin(), times.end(), 0.0);
      std::snprintf(buf, sizeof buf,
                    "run %d: frames=%zu total=%.6fs mean=%.3fms p50=%.3fms p95=%.3fms max=%.3fms FPS=%.1f",
                    r + 1, times.size(), total, 1e3 * total / static_cast<double>(times.size()),
                    1e3 * pct(0.5), 1e3 * pct(0.95), 1e3 * sorted.back(), f);
      out << buf << '\n';
      runs.push_back({{"frames", times.size()}, {"total_seconds", total}, {"fps", f},
                      {"p50_ms", 1e3 * pct(0.5)}, {"p95_ms", 1e3 * pct(0.95)}});
      all_steps.insert(all_steps.end(), times.begin(), times.end());
    }
    const double mean_fps = fps_sum / opt.repeats;
    std::snprintf(buf, sizeof buf, "mean FPS over %d run(s): %.1f (pooled 1/mean step: %.1f)",
                  opt.repeats, mean_fps, fps(all_steps));
    out << buf << '\n';
    if (opt.out) {
      json inputs{{"detections", opt.dets.string()},
                  {"config", opt.config ? json(opt.config->string()) : json(nullptr)}};
      write_manifest(*opt.out, manifest("bench", inputs, track_header(kind, cfg), std::nullopt, clock,
                                        {{"runs", runs}, {"mean_fps", mean_fps}}));
    }
    return kOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Tracking-by-detection toolkit: IBTA, SORT and centroid trackers, evaluation, simulation",
               "ibtrack"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  TrackOptions track;
  auto* sc_track = app.add_subcommand("track", "run a tracker over a detection file");
  sc_track->add_option("--tracker", track.tracker, "ibta, sort or cta")->capture_default_str();
  sc_track->add_option("--dets", track.dets, "detection file")->required();
  sc_track->add_option("--config", track.config, "tracker config (key = value)");
  sc_track->add_option("--out", track.out, "track output file")->required();

  EvalOptions ev;
  auto* sc_eval = app.add_subcommand("eval", "score a track file against ground truth");
  sc_eval->add_option("--gt", ev.gt, "ground truth: one combined file or per-class _cN files")
    ->required()
    ->expected(1, 3);
  sc_eval->add_option("--tracks", ev.tracks, "track file")->required();
  sc_eval->add_option("--match-iou", ev.match_iou, "IOU for a match")->capture_default_str();
  sc_eval->add_flag("--mota-id", ev.mota_id, "MOTA from IDFN + IDFP + IDs");
  sc_eval->add_flag("--include-inferred,!--exclude-inferred", ev.include_inferred,
                    "count inferred (status I) boxes");
  sc_eval->add_option("--out", ev.out, "CSV output (default <tracks>.eval.csv)");

  SimulateOptions sim;
  auto* sc_sim = app.add_subcommand("simulate", "generate a synthetic scene");
  sc_sim->add_option("--config", sim.config, "scene config (key = value)");
  sc_sim->add_option("--seed", sim.seed, "overrides the config seed");
  sc_sim->add_option("--out", sim.out_dir, "output directory")->required();

  DetectEvalOptions de;
  auto* sc_de = app.add_subcommand("detect-eval", "AP and mAP@0.5 of a detection file");
  sc_de->add_option("--gt", de.gt, "ground truth")->required()->expected(1, 3);
  sc_de->add_option("--dets", de.dets, "detection file")->required();
  sc_de->add_option("--out", de.out, "CSV output (default <dets>.ap.csv)");

  BenchOptions bench;
  auto* sc_bench = app.add_subcommand("bench", "time tracker steps and report FPS");
  sc_bench->add_option("--tracker", bench.tracker, "ibta, sort or cta")->capture_default_str();
  sc_bench->add_option("--dets", bench.dets, "detection file")->required();
  sc_bench->add_option("--config", bench.config, "tracker config (key = value)");
  sc_bench->add_option("--repeats", bench.repeats, "number of timed runs")->capture_default_str();
  sc_bench->add_option("--out", bench.out, "JSON report / manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  if (sc_track->parsed()) return cmd_track(track, out, err);
  if (sc_eval->parsed()) return cmd_eval(ev, out, err);
  if (sc_sim->parsed()) return cmd_simulate(sim, out, err);
  if (sc_de->parsed()) return cmd_detect_eval(de, out, err);
  if (sc_bench->parsed()) return cmd_bench(bench, out, err);
  return kUsage;
}

}  // namespace ibtrack::cli
