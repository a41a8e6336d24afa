#pragma once

// Line formats for the three on-disk streams (all comma separated, ASCII, LF):
//
//   detections   frame,class_id,confidence,x_min,y_min,width,height
//   ground truth frame,track_id,class_id,x_min,y_min,width,height
//   tracks       frame,track_id,class_id,x_min,y_min,width,height,status   (status M or I)
//
// Lines starting with '#' and blank lines are ignored. Frames are 1-based.
// Class ids: 0 flower, 1 immature fruit, 2 mature fruit.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "ibtrack/geometry.hpp"

namespace ibtrack {

inline constexpr int kNumClasses = 3;

inline bool valid_class(int class_id) { return class_id >= 0 && class_id < kNumClasses; }

inline std::string_view class_name(int class_id)
{
  static constexpr std::array<std::string_view, kNumClasses> names{
    "Flower", "Immature fruit", "Mature fruit"};
  return valid_class(class_id) ? names[static_cast<std::size_t>(class_id)] : "Unknown";
}

enum class TrackStatus { matched, inferred };

struct DetectionRecord
{
  int frame = 1;
  int class_id = 0;
  double confidence = 1.0;
  BBox bbox{0, 0, 1, 1};

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct GtRecord
{
  int frame = 1;
  int track_id = 1;
  int class_id = 0;
  BBox bbox{0, 0, 1, 1};

  friend bool operator==(const GtRecord&, const GtRecord&) = default;
};

struct TrackRecord
{
  int frame = 1;
  int track_id = 1;
  int class_id = 0;
  BBox bbox{0, 0, 1, 1};
  TrackStatus status = TrackStatus::matched;

  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class MalformedLine : public FormatError
{
public:
  MalformedLine(int line, std::string reason)
    : FormatError("line " + std::to_string(line) + ": " + reason), line_(line),
      reason_(std::move(reason))
  {
  }

  int line() const { return line_; }
  const std::string& reason() const { return reason_; }

private:
  int line_;
  std::string reason_;
};

class DuplicateIdentity : public FormatError
{
public:
  DuplicateIdentity(int frame, int class_id, int track_id)
    : FormatError("duplicate identity: frame " + std::to_string(frame) + ", class " +
                  std::to_string(class_id) + ", id " + std::to_string(track_id)),
      frame_(frame), class_id_(class_id), track_id_(track_id)
  {
  }

  int frame() const { return frame_; }
  int class_id() const { return class_id_; }
  int track_id() const { return track_id_; }

private:
  int frame_;
  int class_id_;
  int track_id_;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
  constexpr std::string_view ws = " \t\r";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

inline int parse_int(std::string_view field, int line, std::string_view name)
{
  int value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw MalformedLine(line, std::string(name) + " is not an integer");
  }
  return value;
}

inline double parse_double(std::string_view field, int line, std::string_view name)
{
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value, std::chars_format::general);
  if (field.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw MalformedLine(line, std::string(name) + " is not a finite number");
  }
  return value;
}

inline BBox parse_box(std::span<const std::string_view> f, int line)
{
  const double x = parse_double(f[0], line, "x_min");
  const double y = parse_double(f[1], line, "y_min");
  const double w = parse_double(f[2], line, "width");
  const double h = parse_double(f[3], line, "height");
  if (!(w > 0.0) || !(h > 0.0)) {
    throw MalformedLine(line, "width and height must be positive");
  }
  return {x, y, w, h};
}

inline int parse_frame(std::string_view field, int line)
{
  const int frame = parse_int(field, line, "frame");
  if (frame < 1) {
    throw MalformedLine(line, "frame must be >= 1");
  }
  return frame;
}

inline int parse_class(std::string_view field, int line)
{
  const int class_id = parse_int(field, line, "class_id");
  if (!valid_class(class_id)) {
    throw MalformedLine(line, "class_id out of range");
  }
  return class_id;
}

inline int parse_track_id(std::string_view field, int line)
{
  const int id = parse_int(field, line, "track_id");
  if (id < 1) {
    throw MalformedLine(line, "track_id must be >= 1");
  }
  return id;
}

/// Calls fn(fields, line_number) for every data line.
template <typename Fn>
void for_each_data_line(std::istream& in, Fn&& fn)
{
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto fields = split_fields(line);
    fn(fields, line_no);
  }
}

inline void append_double(std::string& out, double v)
{
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

inline void append_box(std::string& out, const BBox& b)
{
  append_double(out, b.x_min());
  out += ',';
  append_double(out, b.y_min());
  out += ',';
  append_double(out, b.width());
  out += ',';
  append_double(out, b.height());
}

inline void append_header(std::string& out, const std::vector<std::string>& header)
{
  for (const auto& h : header) {
    out += "# ";
    out += h;
    out += '\n';
  }
}

}  // namespace detail

inline std::vector<DetectionRecord> parse_detections(std::istream& in)
{
  std::vector<DetectionRecord> out;
  detail::for_each_data_line(in, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() != 7) {
      throw MalformedLine(line, "expected 7 fields, got " + std::to_string(f.size()));
    }
    DetectionRecord rec;
    rec.frame = detail::parse_frame(f[0], line);
    rec.class_id = detail::parse_class(f[1], line);
    rec.confidence = detail::parse_double(f[2], line, "confidence");
    if (rec.confidence < 0.0 || rec.confidence > 1.0) {
      throw MalformedLine(line, "confidence outside [0,1]");
    }
    rec.bbox = detail::parse_box(std::span(f).subspan(3, 4), line);
    out.push_back(rec);
  });
  return out;
}

inline std::vector<DetectionRecord> parse_detections(std::string_view text)
{
  std::istringstream in{std::string(text)};
  return parse_detections(in);
}

/// Ground truth. When `file_class` is set the stream is a per-class file: lines may
/// omit the class column (6 fields) or must carry that class. An 8th status column
/// is accepted only as `M`, so track files written with all-matched records parse.
inline std::vector<GtRecord> parse_ground_truth(std::istream& in,
                                                std::optional<int> file_class = std::nullopt)
{
  std::vector<GtRecord> out;
  std::set<std::tuple<int, int, int>> seen;
  detail::for_each_data_line(in, [&](const std::vector<std::string_view>& f, int line) {
    GtRecord rec;
    std::size_t box_at = 3;
    if (f.size() == 6 && file_class) {
      rec.frame = detail::parse_frame(f[0], line);
      rec.track_id = detail::parse_track_id(f[1], line);
      rec.class_id = *file_class;
      box_at = 2;
    } else if (f.size() == 7 || f.size() == 8) {
      rec.frame = detail::parse_frame(f[0], line);
      rec.track_id = detail::parse_track_id(f[1], line);
      rec.class_id = detail::parse_class(f[2], line);
      if (file_class && rec.class_id != *file_class) {
        throw MalformedLine(line, "class_id does not match per-class file");
      }
      if (f.size() == 8 && f[7] != "M") {
        throw MalformedLine(line, "ground truth status column must be M");
      }
    } else {
      throw MalformedLine(line, "expected 7 fields, got " + std::to_string(f.size()));
    }
    rec.bbox = detail::parse_box(std::span(f).subspan(box_at, 4), line);
    if (!seen.emplace(rec.frame, rec.class_id, rec.track_id).second) {
      throw DuplicateIdentity(rec.frame, rec.class_id, rec.track_id);
    }
    out.push_back(rec);
  });
  return out;
}

inline std::vector<GtRecord> parse_ground_truth(std::string_view text,
                                                std::optional<int> file_class = std::nullopt)
{
  std::istringstream in{std::string(text)};
  return parse_ground_truth(in, file_class);
}

inline std::vector<TrackRecord> parse_tracks(std::istream& in)
{
  std::vector<TrackRecord> out;
  std::set<std::tuple<int, int, int>> seen;
  detail::for_each_data_line(in, [&](const std::vector<std::string_view>& f, int line) {
    if (f.size() != 8) {
      throw MalformedLine(line, "expected 8 fields, got " + std::to_string(f.size()));
    }
    TrackRecord rec;
    rec.frame = detail::parse_frame(f[0], line);
    rec.track_id = detail::parse_track_id(f[1], line);
    rec.class_id = detail::parse_class(f[2], line);
    rec.bbox = detail::parse_box(std::span(f).subspan(3, 4), line);
    if (f[7] == "M") {
      rec.status = TrackStatus::matched;
    } else if (f[7] == "I") {
      rec.status = TrackStatus::inferred;
    } else {
      throw MalformedLine(line, "status must be M or I");
    }
    if (!seen.emplace(rec.frame, rec.class_id, rec.track_id).second) {
      throw DuplicateIdentity(rec.frame, rec.class_id, rec.track_id);
    }
    out.push_back(rec);
  });
  return out;
}

inline std::vector<TrackRecord> parse_tracks(std::string_view text)
{
  std::istringstream in{std::string(text)};
  return parse_tracks(in);
}

/// Writes track records sorted by (frame, class_id, track_id). Doubles use the
/// shortest representation that round-trips.
inline std::string write_tracks(std::vector<TrackRecord> records,
                                const std::vector<std::string>& header = {})
{
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.class_id, a.track_id) < std::tie(b.frame, b.class_id, b.track_id);
  });
  std::string out;
  detail::append_header(out, header);
  for (const auto& r : records) {
    out += std::to_string(r.frame);
    out += ',';
    out += std::to_string(r.track_id);
    out += ',';
    out += std::to_string(r.class_id);
    out += ',';
    detail::append_box(out, r.bbox);
    out += r.status == TrackStatus::matched ? ",M\n" : ",I\n";
  }
  return out;
}

inline std::string write_ground_truth(std::vector<GtRecord> records,
                                      const std::vector<std::string>& header = {})
{
  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.frame, a.class_id, a.track_id) < std::tie(b.frame, b.class_id, b.track_id);
  });
  std::string out;
  detail::append_header(out, header);
  for (const auto& r : records) {
    out += std::to_string(r.frame);
    out += ',';
    out += std::to_string(r.track_id);
    out += ',';
    out += std::to_string(r.class_id);
    out += ',';
    detail::append_box(out, r.bbox);
    out += '\n';
  }
  return out;
}

/// Detections are written in the given order.
inline std::string write_detections(const std::vector<DetectionRecord>& records,
                                    const std::vector<std::string>& header = {})
{
  std::string out;
  detail::append_header(out, header);
  for (const auto& r : records) {
    out += std::to_string(r.frame);
    out += ',';
    out += std::to_string(r.class_id);
    out += ',';
    detail::append_double(out, r.confidence);
    out += ',';
    detail::append_box(out, r.bbox);
    out += '\n';
  }
  return out;
}

/// Class encoded in a per-class file name: `<stem>_c0.txt` -> 0.
inline std::optional<int> class_from_filename(const std::filesystem::path& path)
{
  const std::string stem = path.stem().string();
  if (stem.size() >= 3 && stem[stem.size() - 3] == '_' && stem[stem.size() - 2] == 'c') {
    const int c = stem.back() - '0';
    if (valid_class(c)) {
      return c;
    }
  }
  return std::nullopt;
}

class FileError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline std::ifstream open_input(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FileError("cannot open " + path.string());
  }
  return in;
}

/// Loads ground truth from one combined file or several per-class `_cN` files.
inline std::vector<GtRecord> load_ground_truth(const std::vector<std::filesystem::path>& paths)
{
  std::vector<GtRecord> all;
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& p : paths) {
    auto in = open_input(p);
    std::vector<GtRecord> part;
    try {
      part = parse_ground_truth(in, class_from_filename(p));
    } catch (const MalformedLine& e) {
      throw MalformedLine(e.line(), p.string() + ": " + e.reason());
    }
    for (const auto& r : part) {
      if (!seen.emplace(r.frame, r.class_id, r.track_id).second) {
        throw DuplicateIdentity(r.frame, r.class_id, r.track_id);
      }
    }
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace ibtrack
