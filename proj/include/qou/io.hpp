#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qou/minproc.hpp"
#include "qou/samplers.hpp"
#include "qou/stats.hpp"

namespace qou {

inline constexpr const char* kVersion = "1.0.0";

/// Ordered key=value pairs written as '#'-prefixed metadata lines.
using Meta = std::vector<std::pair<std::string, std::string>>;

/// 17 significant digits, '.' decimal regardless of locale; inf and nan
/// spelled "inf", "-inf", "nan".
[[nodiscard]] std::string format_double(double x);
[[nodiscard]] double parse_double(const std::string& s);

struct CsvTable {
  Meta meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Value of a metadata key; throws DomainError when absent.
  [[nodiscard]] const std::string& get(const std::string& key) const;
};

/// All metadata on one comment line ("# k=v k=v"), then the header row.
void write_csv(std::ostream& os, const CsvTable& table);
[[nodiscard]] CsvTable read_csv(std::istream& is);

/// Header carries q, eps and seed; columns time,value.
void write_path_csv(std::ostream& os, const PathSkeleton& path, double q, double eps,
                    std::uint64_t seed, const Meta& extra = {});
[[nodiscard]] PathSkeleton read_path_csv(std::istream& is, double* q = nullptr,
                                         double* eps = nullptr, std::uint64_t* seed = nullptr);

/// One text header line "qou-path q=.. eps=.. seed=.. origin=.." plus any
/// extra keys, then a
/// little-endian uint64 length followed by the time and value columns as
/// little-endian float64.
void write_path_binary(std::ostream& os, const PathSkeleton& path, double q, double eps,
                       std::uint64_t seed, const Meta& extra = {});
[[nodiscard]] PathSkeleton read_path_binary(std::istream& is, double* q = nullptr,
                                            double* eps = nullptr, std::uint64_t* seed = nullptr);

/// {value, stderr, n, seed, params, ...}; refinement_delta and warnings when set.
[[nodiscard]] nlohmann::json to_json(const MonteCarloEstimate& e,
                                     const nlohmann::json& params = nlohmann::json::object());

/// Columns time,value; header carries n_atoms, truncation_bound and report_level.
void write_min_process_csv(std::ostream& os, const MinProcessPath& path, const Meta& extra = {});

/// FNV-1a 64 of the text, as 16 hex digits.
[[nodiscard]] std::string config_hash(const std::string& canonical);

}  // namespace qou
