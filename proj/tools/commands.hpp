#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ibtrack::cli {

inline constexpr const char* kToolVersion = "0.3.0";

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParseError = 2,
  kConfigError = 3,
  kDataMismatch = 4,
};

struct TrackOptions
{
  std::string tracker = "ibta";
  std::filesystem::path dets;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
};

struct EvalOptions
{
  std::vector<std::filesystem::path> gt;
  std::filesystem::path tracks;
  double match_iou = 0.5;
  bool mota_id = false;
  bool include_inferred = true;
  std::optional<std::filesystem::path> out;  // CSV; defaults to <tracks>.eval.csv
};

struct SimulateOptions
{
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
};

struct DetectEvalOptions
{
  std::vector<std::filesystem::path> gt;
  std::filesystem::path dets;
  std::optional<std::filesystem::path> out;
};

struct BenchOptions
{
  std::string tracker = "ibta";
  std::filesystem::path dets;
  std::optional<std::filesystem::path> config;
  int repeats = 1;
  std::optional<std::filesystem::path> out;
};

int cmd_track(const TrackOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_detect_eval(const DetectEvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ibtrack::cli
