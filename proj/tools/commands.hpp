#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qou::cli {

/// Every flag of every command; each command reads only its own fields.
struct RunConfig {
  std::string command;
  double q = 0.0;
  bool allow_extreme_q = false;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string format = "csv";
  unsigned threads = 0;  // 0: QOU_THREADS or hardware concurrency

  // density / sample
  std::string kind;
  double x = 1.0;
  double t = 1.0;
  double eps = 0.1;
  std::string grid;
  double x0 = std::numeric_limits<double>::quiet_NaN();
  bool binary = false;

  // tangent / pickands / excursion
  std::vector<double> w_list{2.0, 8.0, 32.0};
  std::vector<double> T_list{1.0, 2.0, 4.0, 8.0};
  double level = 1.0;
  double grid_step = 1.0 / 32.0;
  std::size_t n = 20000;
  std::string method = "lastexit";
  double w_max = 1e6;
  double L = 1.0;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  double sandwich_T = 0.0;  // 0: skip the double-sum sandwich

  // minproc
  std::size_t reps = 1;
  double report_level = 3.0;

  // verify
  double scale = 1.0;
  std::vector<int> only;
};

/// Thrown for invalid configurations; maps to exit status 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Checks cross-field constraints that flag validators cannot express.
void validate(const RunConfig& cfg);

/// The fields that determine the command's numeric output, as JSON with
/// sorted keys; its dump is what config_hash digests.
[[nodiscard]] nlohmann::json canonical_config(const RunConfig& cfg);

/// Runs the command, writes its files and manifest.json into out_dir and
/// returns the exit status (0, or 2 when a numerical result is flagged).
[[nodiscard]] int run(const RunConfig& cfg);

/// "a:b:step" into a uniform grid.
[[nodiscard]] std::vector<double> parse_grid(const std::string& text);

}  // namespace qou::cli
