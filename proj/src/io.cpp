#include "qou/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "qou/error.hpp"

namespace qou {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000ffffffffULL) << 32) | (v >> 32);
    v = ((v & 0x0000ffff0000ffffULL) << 16) | ((v >> 16) & 0x0000ffff0000ffffULL);
    v = ((v & 0x00ff00ff00ff00ffULL) << 8) | ((v >> 8) & 0x00ff00ff00ff00ffULL);
  }
  return v;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_le(v);
  std::array<char, 8> b;
  std::memcpy(b.data(), &v, 8);
  os.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
  std::array<char, 8> b;
  if (!is.read(b.data(), 8)) throw DomainError("read_path_binary: truncated data");
  std::uint64_t v;
  std::memcpy(&v, b.data(), 8);
  return to_le(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Meta path_meta(double q, double eps, std::uint64_t seed, std::size_t origin) {
  return {{"q", format_double(q)},
          {"eps", format_double(eps)},
          {"seed", std::to_string(seed)},
          {"origin", std::to_string(origin)}};
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t == "nan") return std::nan("");
  if (t == "inf") return INFINITY;
  if (t == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw DomainError("parse_double: not a number: '" + t + "'");
  }
  return v;
}

const std::string& CsvTable::get(const std::string& key) const {
  for (const auto& kv : meta) {
    if (kv.first == key) return kv.second;
  }
  throw DomainError("CsvTable: missing metadata key '" + key + "'");
}

void write_csv(std::ostream& os, const CsvTable& table) {
  if (!table.meta.empty()) {
    os << '#';
    for (const auto& [k, v] : table.meta) os << ' ' << k << '=' << v;
    os << '\n';
  }
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    os << (i ? "," : "") << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw DomainError("write_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& tok : split(line.substr(1), ' ')) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) t.meta.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (!header) {
      for (const auto& c : cells) t.columns.push_back(trim(c));
      header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) throw DomainError("read_csv: row width mismatch");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  if (!header) throw DomainError("read_csv: no header row");
  return t;
}

void write_path_csv(std::ostream& os, const PathSkeleton& path, double q, double eps,
                    std::uint64_t seed, const Meta& extra) {
  path.validate();
  CsvTable t;
  t.meta = path_meta(q, eps, seed, path.origin_index);
  t.meta.insert(t.meta.end(), extra.begin(), extra.end());
  t.columns = {"time", "value"};
  for (std::size_t i = 0; i < path.times.size(); ++i) t.rows.push_back({path.times[i], path.values[i]});
  write_csv(os, t);
}

PathSkeleton read_path_csv(std::istream& is, double* q, double* eps, std::uint64_t* seed) {
  const CsvTable t = read_csv(is);
  if (t.columns != std::vector<std::string>{"time", "value"}) {
    throw DomainError("read_path_csv: expected columns time,value");
  }
  PathSkeleton p;
  for (const auto& r : t.rows) {
    p.times.push_back(r[0]);
    p.values.push_back(r[1]);
  }
  p.origin_index = std::stoull(t.get("origin"));
  if (q) *q = parse_double(t.get("q"));
  if (eps) *eps = parse_double(t.get("eps"));
  if (seed) *seed = std::stoull(t.get("seed"));
  p.validate();
  return p;
}

void write_path_binary(std::ostream& os, const PathSkeleton& path, double q, double eps,
                       std::uint64_t seed, const Meta& extra) {
  path.validate();
  os << "qou-path";
  for (const auto& [k, v] : path_meta(q, eps, seed, path.origin_index)) os << ' ' << k << '=' << v;
  for (const auto& [k, v] : extra) os << ' ' << k << '=' << v;
  os << '\n';
  put_u64(os, path.times.size());
  for (double x : path.times) put_u64(os, std::bit_cast<std::uint64_t>(x));
  for (double x : path.values) put_u64(os, std::bit_cast<std::uint64_t>(x));
}

PathSkeleton read_path_binary(std::istream& is, double* q, double* eps, std::uint64_t* seed) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("qou-path", 0) != 0) {
    throw DomainError("read_path_binary: bad header");
  }
  CsvTable meta;
  for (const auto& tok : split(line.substr(8), ' ')) {
    const auto e = tok.find('=');
    if (e != std::string::npos) meta.meta.emplace_back(tok.substr(0, e), tok.substr(e + 1));
  }
  const std::uint64_t n = get_u64(is);
  if (n > (1ULL << 40)) throw DomainError("read_path_binary: implausible length");
  PathSkeleton p;
  p.times.resize(n);
  p.values.resize(n);
  for (auto& x : p.times) x = std::bit_cast<double>(get_u64(is));
  for (auto& x : p.values) x = std::bit_cast<double>(get_u64(is));
  p.origin_index = std::stoull(meta.get("origin"));
  if (q) *q = parse_double(meta.get("q"));
  if (eps) *eps = parse_double(meta.get("eps"));
  if (seed) *seed = std::stoull(meta.get("seed"));
  p.validate();
  return p;
}

nlohmann::json to_json(const MonteCarloEstimate& e, const nlohmann::json& params) {
  nlohmann::json j;
  j["value"] = e.value;
  j["stderr"] = e.std_error;
  j["n"] = e.n;
  j["seed"] = e.seed;
  j["params"] = params;
  if (!std::isnan(e.refinement_delta)) j["refinement_delta"] = e.refinement_delta;
  if (!e.warnings.empty()) j["warnings"] = e.warnings;
  return j;
}

void write_min_process_csv(std::ostream& os, const MinProcessPath& path, const Meta& extra) {
  CsvTable t;
  t.meta = {{"n_atoms", std::to_string(path.n_atoms)},
            {"truncation_bound", format_double(path.truncation_bound)},
            {"report_level", format_double(path.report_level)}};
  t.meta.insert(t.meta.end(), extra.begin(), extra.end());
  t.columns = {"time", "value"};
  for (std::size_t i = 0; i < path.times.size(); ++i) t.rows.push_back({path.times[i], path.values[i]});
  write_csv(os, t);
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::array<char, 17> buf;
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

}  // namespace qou
