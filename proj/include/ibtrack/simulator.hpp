#pragma once

// Deterministic scene generator: a camera translating over a static field of
// objects. All objects share one drawn speed per frame (rigid scene). Detections
// are the ground-truth boxes minus random misses and scripted occlusions, plus
// Poisson false positives, with Gaussian centre noise.
//
// Randomness: std::mt19937_64, one engine per purpose, each seeded through
// std::seed_seq from (seed low word, seed high word, stream tag).

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ibtrack/config.hpp"
#include "ibtrack/formats.hpp"
#include "ibtrack/geometry.hpp"

namespace ibtrack {

inline constexpr std::string_view kSimulatorRng = "mt19937_64";

class ConfigInvalid : public ConfigError
{
public:
  using ConfigError::ConfigError;
};

struct SimObject
{
  int id = 1;
  int class_id = 0;
  BBox bbox{0, 0, 1, 1};  // at frame 1
};

/// Suppresses the detections of `small_id` over [first_frame, last_frame] while it
/// sits behind `large_id` (same class).
struct OcclusionSpec
{
  int class_id = 0;
  int small_id = 1;
  int large_id = 2;
  int first_frame = 1;
  int last_frame = 1;
};

struct SizeRange
{
  double min = 30.0;
  double max = 60.0;
};

struct SceneConfig
{
  double image_width = 1280.0;
  double image_height = 720.0;
  int frames = 60;
  std::array<int, kNumClasses> object_counts{8, 8, 6};
  std::array<SizeRange, kNumClasses> sizes{SizeRange{30, 50}, SizeRange{30, 55}, SizeRange{40, 70}};
  double v_avg = 12.0;
  double v_max = 15.0;
  MotionAxis motion_axis = MotionAxis::pos_y;
  /// Per-frame speed is uniform in [v_avg - speed_jitter, v_avg + speed_jitter];
  /// at most v_max - v_avg.
  double speed_jitter = 3.0;
  double miss_prob = 0.0;
  double fp_rate = 0.0;
  double center_noise_sigma = 0.0;
  /// Random placement rejects same-class pairs overlapping more than this.
  double max_pair_iou = 0.3;
  std::vector<OcclusionSpec> occlusions;
  /// When non-empty, replaces random placement; ids are kept as given.
  std::vector<SimObject> objects;
  std::uint64_t seed = 1;

  void validate() const
  {
    if (!(image_width > 0.0) || !(image_height > 0.0)) throw ConfigInvalid("image size must be positive");
    if (frames < 0) throw ConfigInvalid("frames must be >= 0");
    if (v_avg < 0.0) throw ConfigInvalid("v_avg must be >= 0");
    if (v_max < v_avg) throw ConfigInvalid("v_max must be >= v_avg");
    if (speed_jitter < 0.0 || speed_jitter > v_max - v_avg) {
      throw ConfigInvalid("speed_jitter must lie in [0, v_max - v_avg]");
    }
    if (miss_prob < 0.0 || miss_prob > 1.0) throw ConfigInvalid("miss_prob must lie in [0,1]");
    if (fp_rate < 0.0) throw ConfigInvalid("fp_rate must be >= 0");
    if (center_noise_sigma < 0.0) throw ConfigInvalid("center_noise_sigma must be >= 0");
    if (max_pair_iou < 0.0 || max_pair_iou > 1.0) throw ConfigInvalid("max_pair_iou must lie in [0,1]");
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& s = sizes[static_cast<std::size_t>(c)];
      if (object_counts[static_cast<std::size_t>(c)] < 0) throw ConfigInvalid("object counts must be >= 0");
      if (!(s.min > 0.0) || s.max < s.min) throw ConfigInvalid("size range must satisfy 0 < min <= max");
      if (s.max > std::min(image_width, image_height)) throw ConfigInvalid("object size exceeds the image");
    }
    std::set<std::pair<int, int>> ids;
    for (const auto& o : objects) {
      if (!valid_class(o.class_id) || o.id < 1) throw ConfigInvalid("object needs class 0..2 and id >= 1");
      if (!ids.emplace(o.class_id, o.id).second) throw ConfigInvalid("duplicate object id");
    }
    for (const auto& oc : occlusions) {
      if (!valid_class(oc.class_id) || oc.small_id < 1 || oc.large_id < 1 ||
          oc.first_frame < 1 || oc.last_frame < oc.first_frame) {
        throw ConfigInvalid("malformed occlusion spec");
      }
    }
  }

  std::vector<std::string> to_lines() const
  {
    std::vector<std::string> out{
      "rng = " + std::string(kSimulatorRng),
      "seed = " + std::to_string(seed),
      "image_width = " + format_double(image_width),
      "image_height = " + format_double(image_height),
      "frames = " + std::to_string(frames),
    };
    for (int c = 0; c < kNumClasses; ++c) {
      const auto k = static_cast<std::size_t>(c);
      const std::string sfx = "_c" + std::to_string(c);
      out.push_back("count" + sfx + " = " + std::to_string(object_counts[k]));
      out.push_back("size_min" + sfx + " = " + format_double(sizes[k].min));
      out.push_back("size_max" + sfx + " = " + format_double(sizes[k].max));
    }
    out.push_back("v_avg = " + format_double(v_avg));
    out.push_back("v_max = " + format_double(v_max));
    out.push_back("motion_axis = " + std::string(to_string(motion_axis)));
    out.push_back("speed_jitter = " + format_double(speed_jitter));
    out.push_back("miss_prob = " + format_double(miss_prob));
    out.push_back("fp_rate = " + format_double(fp_rate));
    out.push_back("center_noise_sigma = " + format_double(center_noise_sigma));
    out.push_back("max_pair_iou = " + format_double(max_pair_iou));
    for (const auto& o : objects) {
      out.push_back("object = " + std::to_string(o.class_id) + " " + std::to_string(o.id) + " " +
                    format_double(o.bbox.x_min()) + " " + format_double(o.bbox.y_min()) + " " +
                    format_double(o.bbox.width()) + " " + format_double(o.bbox.height()));
    }
    for (const auto& oc : occlusions) {
      out.push_back("occlusion = " + std::to_string(oc.class_id) + " " + std::to_string(oc.small_id) +
                    " " + std::to_string(oc.large_id) + " " + std::to_string(oc.first_frame) + " " +
                    std::to_string(oc.last_frame));
    }
    return out;
  }
};

/// Parses a scene config (`key = value`). `object` and `occlusion` may repeat:
///   object = <class> <id> <x_min> <y_min> <width> <height>
///   occlusion = <class> <small_id> <large_id> <first_frame> <last_frame>
inline SceneConfig parse_scene_config(std::istream& in)
{
  SceneConfig c;
  std::set<std::string> seen;
  for (const auto& kv : parse_key_values(in)) {
    const std::string& k = kv.key;
    if (k != "object" && k != "occlusion" && !seen.insert(k).second) {
      throw ConfigInvalid("line " + std::to_string(kv.line) + ": repeated key '" + k + "'");
    }
    auto class_suffix = [&](std::string_view prefix) -> std::optional<std::size_t> {
      if (k.size() == prefix.size() + 3 && k.starts_with(prefix) && k[prefix.size()] == '_' &&
          k[prefix.size() + 1] == 'c') {
        const int cls = k.back() - '0';
        if (valid_class(cls)) return static_cast<std::size_t>(cls);
      }
      return std::nullopt;
    };
    if (k == "image_width") c.image_width = config_double(kv);
    else if (k == "image_height") c.image_height = config_double(kv);
    else if (k == "frames") c.frames = static_cast<int>(config_int(kv));
    else if (auto i = class_suffix("count")) c.object_counts[*i] = static_cast<int>(config_int(kv));
    else if (auto i = class_suffix("size_min")) c.sizes[*i].min = config_double(kv);
    else if (auto i = class_suffix("size_max")) c.sizes[*i].max = config_double(kv);
    else if (k == "v_avg") c.v_avg = config_double(kv);
    else if (k == "v_max") c.v_max = config_double(kv);
    else if (k == "motion_axis") c.motion_axis = parse_motion_axis(kv.value);
    else if (k == "speed_jitter") c.speed_jitter = config_double(kv);
    else if (k == "miss_prob") c.miss_prob = config_double(kv);
    else if (k == "fp_rate") c.fp_rate = config_double(kv);
    else if (k == "center_noise_sigma") c.center_noise_sigma = config_double(kv);
    else if (k == "max_pair_iou") c.max_pair_iou = config_double(kv);
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(config_int(kv));
    else if (k == "rng") {
      if (kv.value != kSimulatorRng) throw ConfigInvalid("unsupported rng '" + kv.value + "'");
    }
    else if (k == "object" || k == "occlusion") {
      std::istringstream fields(kv.value);
      fields.imbue(std::locale::classic());
      if (k == "object") {
        SimObject o;
        double x = 0, y = 0, w = 0, h = 0;
        if (!(fields >> o.class_id >> o.id >> x >> y >> w >> h) || !(fields >> std::ws).eof() ||
            !(w > 0.0) || !(h > 0.0)) {
          throw ConfigInvalid("line " + std::to_string(kv.line) + ": object expects class id x y w h");
        }
        o.bbox = BBox(x, y, w, h);
        c.objects.push_back(o);
      } else {
        OcclusionSpec oc;
        if (!(fields >> oc.class_id >> oc.small_id >> oc.large_id >> oc.first_frame >> oc.last_frame) ||
            !(fields >> std::ws).eof()) {
          throw ConfigInvalid("line " + std::to_string(kv.line) +
                              ": occlusion expects class small large first last");
        }
        c.occlusions.push_back(oc);
      }
    } else {
      throw ConfigInvalid("line " + std::to_string(kv.line) + ": unknown key '" + k + "'");
    }
  }
  c.validate();
  return c;
}

struct SimResult
{
  std::vector<GtRecord> gt;
  std::vector<DetectionRecord> dets;
};

namespace detail {

enum class SimStream : std::uint32_t { placement = 1, speed, miss, noise, confidence, false_pos };

inline std::mt19937_64 make_engine(std::uint64_t seed, SimStream stream)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline bool inside_image(const BBox& b, double width, double height)
{
  return b.x_min() >= 0.0 && b.y_min() >= 0.0 && b.x_max() <= width && b.y_max() <= height;
}

inline std::vector<SimObject> place_objects(const SceneConfig& cfg)
{
  auto rng = make_engine(cfg.seed, SimStream::placement);
  const Point dir = axis_direction(cfg.motion_axis);
  // Span the strip the camera will sweep so objects enter throughout the run.
  const double travel = cfg.v_avg * std::max(cfg.frames - 1, 0);
  std::vector<SimObject> out;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto& size = cfg.sizes[static_cast<std::size_t>(c)];
    std::vector<BBox> placed;
    for (int k = 0; k < cfg.object_counts[static_cast<std::size_t>(c)]; ++k) {
      std::optional<BBox> box;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        std::uniform_real_distribution<double> size_dist(size.min, size.max);
        const double w = size_dist(rng);
        const double h = size_dist(rng);
        auto span = [&](double extent, double image, double d) {
          double lo = 0.0;
          double hi = image - extent;
          if (d > 0.0) lo -= travel;
          if (d < 0.0) hi += travel;
          return std::uniform_real_distribution<double>(lo, hi)(rng);
        };
        const double x = span(w, cfg.image_width, dir.cx);
        const double y = span(h, cfg.image_height, dir.cy);
        box = BBox(x, y, w, h);
        const bool crowded = std::any_of(placed.begin(), placed.end(), [&](const BBox& p) {
          return iou(p, *box) > cfg.max_pair_iou;
        });
        if (!crowded) {
          break;
        }
      }
      placed.push_back(*box);
      out.push_back({k + 1, c, *box});
    }
  }
  return out;
}

}  // namespace detail

inline SimResult simulate(const SceneConfig& cfg)
{
  cfg.validate();
  SimResult res;
  if (cfg.frames == 0) {
    return res;
  }

  const bool explicit_objects = !cfg.objects.empty();
  std::vector<SimObject> objects = explicit_objects ? cfg.objects : detail::place_objects(cfg);

  // Frame-to-frame speed, one draw per transition.
  auto speed_rng = detail::make_engine(cfg.seed, detail::SimStream::speed);
  std::vector<double> speed(static_cast<std::size_t>(cfg.frames), 0.0);
  std::uniform_real_distribution<double> speed_dist(cfg.v_avg - cfg.speed_jitter,
                                                    cfg.v_avg + cfg.speed_jitter);
  for (int f = 2; f <= cfg.frames; ++f) {
    speed[static_cast<std::size_t>(f - 1)] = cfg.speed_jitter > 0.0 ? speed_dist(speed_rng) : cfg.v_avg;
  }

  // Trajectories: boxes[object][frame - 1], advanced by repeated translation.
  const Point dir = axis_direction(cfg.motion_axis);
  std::vector<std::vector<BBox>> boxes(objects.size());
  for (std::size_t o = 0; o < objects.size(); ++o) {
    BBox b = objects[o].bbox;
    boxes[o].reserve(static_cast<std::size_t>(cfg.frames));
    boxes[o].push_back(b);
    for (int f = 2; f <= cfg.frames; ++f) {
      const double s = speed[static_cast<std::size_t>(f - 1)];
      b = translate(b, dir.cx * s, dir.cy * s);
      boxes[o].push_back(b);
    }
  }
  auto visible = [&](std::size_t o, int f) {
    return detail::inside_image(boxes[o][static_cast<std::size_t>(f - 1)], cfg.image_width,
                                cfg.image_height);
  };

  // Random objects are numbered per class by first appearance; never-visible ones drop out.
  std::vector<std::size_t> order;
  std::vector<int> first_seen(objects.size(), 0);
  for (std::size_t o = 0; o < objects.size(); ++o) {
    for (int f = 1; f <= cfg.frames; ++f) {
      if (visible(o, f)) {
        first_seen[o] = f;
        break;
      }
    }
    if (first_seen[o] > 0) {
      order.push_back(o);
    }
  }
  if (!explicit_objects) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(objects[a].class_id, first_seen[a]) < std::tie(objects[b].class_id, first_seen[b]);
    });
    std::array<int, kNumClasses> next{1, 1, 1};
    for (const std::size_t o : order) {
      objects[o].id = next[static_cast<std::size_t>(objects[o].class_id)]++;
    }
  }

  std::set<std::tuple<int, int, int>> suppressed;  // (class, id, frame)
  for (const auto& oc : cfg.occlusions) {
    for (int f = oc.first_frame; f <= oc.last_frame; ++f) {
      suppressed.emplace(oc.class_id, oc.small_id, f);
    }
  }

  auto miss_rng = detail::make_engine(cfg.seed, detail::SimStream::miss);
  auto noise_rng = detail::make_engine(cfg.seed, detail::SimStream::noise);
  auto conf_rng = detail::make_engine(cfg.seed, detail::SimStream::confidence);
  auto fp_rng = detail::make_engine(cfg.seed, detail::SimStream::false_pos);
  std::bernoulli_distribution miss_dist(cfg.miss_prob);
  std::normal_distribution<double> noise_dist(0.0, std::max(cfg.center_noise_sigma, 1e-300));
  std::uniform_real_distribution<double> tp_conf(0.5, 1.0);
  std::uniform_real_distribution<double> fp_conf(0.05, 0.6);
  std::poisson_distribution<int> fp_count(cfg.fp_rate > 0.0 ? cfg.fp_rate : 1.0);

  std::vector<int> fp_classes;
  for (int c = 0; c < kNumClasses; ++c) {
    if (cfg.object_counts[static_cast<std::size_t>(c)] > 0 || explicit_objects) {
      fp_classes.push_back(c);
    }
  }

  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(objects[a].class_id, objects[a].id) < std::tie(objects[b].class_id, objects[b].id);
  });

  for (int f = 1; f <= cfg.frames; ++f) {
    for (const std::size_t o : order) {
      if (!visible(o, f)) {
        continue;
      }
      const SimObject& obj = objects[o];
      const BBox& b = boxes[o][static_cast<std::size_t>(f - 1)];
      res.gt.push_back({f, obj.id, obj.class_id, b});

      if (cfg.miss_prob > 0.0 && miss_dist(miss_rng)) {
        continue;
      }
      if (suppressed.count({obj.class_id, obj.id, f})) {
        continue;
      }
      BBox det = b;
      if (cfg.center_noise_sigma > 0.0) {
        const double dx = noise_dist(noise_rng);
        const double dy = noise_dist(noise_rng);
        det = translate(b, dx, dy);
      }
      res.dets.push_back({f, obj.class_id, tp_conf(conf_rng), det});
    }
    if (cfg.fp_rate > 0.0 && !fp_classes.empty()) {
      const int n = fp_count(fp_rng);
      for (int k = 0; k < n; ++k) {
        const int c = fp_classes[std::uniform_int_distribution<std::size_t>(0, fp_classes.size() - 1)(fp_rng)];
        const auto& size = cfg.sizes[static_cast<std::size_t>(c)];
        std::uniform_real_distribution<double> size_dist(size.min, size.max);
        const double w = size_dist(fp_rng);
        const double h = size_dist(fp_rng);
        const double x = std::uniform_real_distribution<double>(0.0, cfg.image_width - w)(fp_rng);
        const double y = std::uniform_real_distribution<double>(0.0, cfg.image_height - h)(fp_rng);
        res.dets.push_back({f, c, fp_conf(fp_rng), BBox(x, y, w, h)});
      }
    }
  }
  return res;
}

}  // namespace ibtrack
