#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ibtrack/geometry.hpp"
#include "ibtrack/kalman.hpp"

namespace ibtrack {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Direction in which objects travel through the image.
enum class MotionAxis { pos_x, neg_x, pos_y, neg_y };

inline std::string_view to_string(MotionAxis a)
{
  switch (a) {
    case MotionAxis::pos_x: return "+x";
    case MotionAxis::neg_x: return "-x";
    case MotionAxis::pos_y: return "+y";
    case MotionAxis::neg_y: return "-y";
  }
  return "+y";
}

inline MotionAxis parse_motion_axis(std::string_view s)
{
  if (s == "+x" || s == "x") return MotionAxis::pos_x;
  if (s == "-x") return MotionAxis::neg_x;
  if (s == "+y" || s == "y") return MotionAxis::pos_y;
  if (s == "-y") return MotionAxis::neg_y;
  throw ConfigError("motion_axis must be one of +x, -x, +y, -y (got '" + std::string(s) + "')");
}

/// Unit displacement vector for an axis.
inline Point axis_direction(MotionAxis a)
{
  switch (a) {
    case MotionAxis::pos_x: return {1.0, 0.0};
    case MotionAxis::neg_x: return {-1.0, 0.0};
    case MotionAxis::pos_y: return {0.0, 1.0};
    case MotionAxis::neg_y: return {0.0, -1.0};
  }
  return {0.0, 1.0};
}

struct KeyValue
{
  std::string key;
  std::string value;
  int line = 0;
};

/// Reads `key = value` lines; '#' starts a comment, blank lines are skipped.
inline std::vector<KeyValue> parse_key_values(std::istream& in)
{
  std::vector<KeyValue> out;
  std::string raw;
  int line_no = 0;
  auto trim = [](std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return std::string_view{};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
                line_no};
    if (kv.key.empty() || kv.value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
    }
    out.push_back(std::move(kv));
  }
  return out;
}

inline double config_double(const KeyValue& kv)
{
  double v = 0.0;
  const char* end = kv.value.data() + kv.value.size();
  const auto [ptr, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ConfigError("line " + std::to_string(kv.line) + ": " + kv.key + " expects a number");
  }
  return v;
}

inline long long config_int(const KeyValue& kv)
{
  long long v = 0;
  const char* end = kv.value.data() + kv.value.size();
  const auto [ptr, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("line " + std::to_string(kv.line) + ": " + kv.key + " expects an integer");
  }
  return v;
}

inline std::string format_double(double v)
{
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

struct TrackerConfig
{
  double iou_threshold = 0.3;           // match gate
  double neighbor_iou_threshold = 0.1;  // location-score pairing gate
  double v_avg = 12.0;                  // pixels/frame along motion_axis
  double v_max = 15.0;
  MotionAxis motion_axis = MotionAxis::pos_y;
  int max_age = 3;
  int min_hits = 1;
  int reactivation_window = 5;
  // Image size; 0 means unbounded. Inferred boxes must stay fully inside the frame.
  double frame_width = 0.0;
  double frame_height = 0.0;
  KalmanParams kalman;

  /// Throws ConfigError when an invariant is violated.
  void validate() const
  {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(iou_threshold)) throw ConfigError("iou_threshold must lie in [0,1]");
    if (!unit(neighbor_iou_threshold)) throw ConfigError("neighbor_iou_threshold must lie in [0,1]");
    if (v_avg < 0.0) throw ConfigError("v_avg must be >= 0");
    if (v_max < v_avg) throw ConfigError("v_max must be >= v_avg");
    if (max_age < 0) throw ConfigError("max_age must be >= 0");
    if (min_hits < 1) throw ConfigError("min_hits must be >= 1");
    if (reactivation_window < 0) throw ConfigError("reactivation_window must be >= 0");
    if (frame_width < 0.0 || frame_height < 0.0) throw ConfigError("frame size must be >= 0");
    const KalmanParams& k = kalman;
    for (double v : {k.init_position_var, k.init_velocity_var, k.measurement_center_var,
                     k.measurement_shape_var}) {
      if (!(v > 0.0)) throw ConfigError("kalman initial/measurement variances must be > 0");
    }
    for (double v : {k.process_position_var, k.process_velocity_var,
                     k.process_scale_velocity_var}) {
      if (v < 0.0) throw ConfigError("kalman process variances must be >= 0");
    }
  }

  /// `key = value` lines, one per field, in a fixed order.
  std::vector<std::string> to_lines() const
  {
    return {
      "iou_threshold = " + format_double(iou_threshold),
      "neighbor_iou_threshold = " + format_double(neighbor_iou_threshold),
      "v_avg = " + format_double(v_avg),
      "v_max = " + format_double(v_max),
      "motion_axis = " + std::string(to_string(motion_axis)),
      "max_age = " + std::to_string(max_age),
      "min_hits = " + std::to_string(min_hits),
      "reactivation_window = " + std::to_string(reactivation_window),
      "frame_width = " + format_double(frame_width),
      "frame_height = " + format_double(frame_height),
      "kf_init_position_var = " + format_double(kalman.init_position_var),
      "kf_init_velocity_var = " + format_double(kalman.init_velocity_var),
      "kf_process_position_var = " + format_double(kalman.process_position_var),
      "kf_process_velocity_var = " + format_double(kalman.process_velocity_var),
      "kf_process_scale_velocity_var = " + format_double(kalman.process_scale_velocity_var),
      "kf_measurement_center_var = " + format_double(kalman.measurement_center_var),
      "kf_measurement_shape_var = " + format_double(kalman.measurement_shape_var),
    };
  }
};

inline void apply_tracker_key(TrackerConfig& c, const KeyValue& kv)
{
  auto as_int = [&] { return static_cast<int>(config_int(kv)); };
  const std::string& k = kv.key;
  if (k == "iou_threshold") c.iou_threshold = config_double(kv);
  else if (k == "neighbor_iou_threshold") c.neighbor_iou_threshold = config_double(kv);
  else if (k == "v_avg") c.v_avg = config_double(kv);
  else if (k == "v_max") c.v_max = config_double(kv);
  else if (k == "motion_axis") c.motion_axis = parse_motion_axis(kv.value);
  else if (k == "max_age") c.max_age = as_int();
  else if (k == "min_hits") c.min_hits = as_int();
  else if (k == "reactivation_window") c.reactivation_window = as_int();
  else if (k == "frame_width") c.frame_width = config_double(kv);
  else if (k == "frame_height") c.frame_height = config_double(kv);
  else if (k == "kf_init_position_var") c.kalman.init_position_var = config_double(kv);
  else if (k == "kf_init_velocity_var") c.kalman.init_velocity_var = config_double(kv);
  else if (k == "kf_process_position_var") c.kalman.process_position_var = config_double(kv);
  else if (k == "kf_process_velocity_var") c.kalman.process_velocity_var = config_double(kv);
  else if (k == "kf_process_scale_velocity_var") c.kalman.process_scale_velocity_var = config_double(kv);
  else if (k == "kf_measurement_center_var") c.kalman.measurement_center_var = config_double(kv);
  else if (k == "kf_measurement_shape_var") c.kalman.measurement_shape_var = config_double(kv);
  else throw ConfigError("line " + std::to_string(kv.line) + ": unknown key '" + k + "'");
}

/// Parses a tracker config; unknown or repeated keys are errors. The result is validated.
inline TrackerConfig parse_tracker_config(std::istream& in)
{
  TrackerConfig c;
  std::map<std::string, int> seen;
  for (const auto& kv : parse_key_values(in)) {
    if (auto [it, fresh] = seen.emplace(kv.key, kv.line); !fresh) {
      throw ConfigError("line " + std::to_string(kv.line) + ": repeated key '" + kv.key + "'");
    }
    apply_tracker_key(c, kv);
  }
  c.validate();
  return c;
}

inline TrackerConfig parse_tracker_config(std::string_view text)
{
  std::istringstream in{std::string(text)};
  return parse_tracker_config(in);
}

}  // namespace ibtrack
