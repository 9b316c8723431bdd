#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "qou/error.hpp"
#include "qou/io.hpp"

using namespace qou;

namespace {

PathSkeleton sample_path() {
  PathSkeleton p;
  p.times = {-0.5, 0.0, 0.1, 1.0 / 3.0};
  p.values = {2.0, 1e-300, 0.1 + 0.2, 12345.678901234567};
  p.origin_index = 1;
  return p;
}

}  // namespace

TEST(Io, DoubleRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-310, 6.02214076e23, 0.0}) {
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_TRUE(std::isnan(parse_double("nan")));
  EXPECT_THROW((void)parse_double("1.0x"), DomainError);
}

TEST(Io, PathCsvRoundTrip) {
  const auto p = sample_path();
  std::stringstream ss;
  write_path_csv(ss, p, -0.25, 0.05, 42, {{"config_hash", "abc"}});
  EXPECT_EQ(ss.str().rfind("# q=-0.25 eps=0.050000000000000003 seed=42", 0), 0u);
  double q = 0, eps = 0;
  std::uint64_t seed = 0;
  const auto r = read_path_csv(ss, &q, &eps, &seed);
  EXPECT_EQ(r.times, p.times);
  EXPECT_EQ(r.values, p.values);
  EXPECT_EQ(r.origin_index, 1u);
  EXPECT_EQ(q, -0.25);
  EXPECT_EQ(eps, 0.05);
  EXPECT_EQ(seed, 42u);
}

TEST(Io, PathBinaryRoundTrip) {
  const auto p = sample_path();
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_path_binary(ss, p, 0.5, 0.1, 18446744073709551615ULL);
  const std::string bytes = ss.str();
  const auto nl = bytes.find('\n');
  ASSERT_NE(nl, std::string::npos);
  EXPECT_EQ(bytes.size(), nl + 1 + 8 + 16 * p.times.size());
  // the length prefix is little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[nl + 1]), 4u);
  double q = 0, eps = 0;
  std::uint64_t seed = 0;
  const auto r = read_path_binary(ss, &q, &eps, &seed);
  EXPECT_EQ(r.times, p.times);
  EXPECT_EQ(r.values, p.values);
  EXPECT_EQ(seed, 18446744073709551615ULL);
  EXPECT_EQ(q, 0.5);
  std::stringstream bad("nope\n");
  EXPECT_THROW((void)read_path_binary(bad), DomainError);
}

TEST(Io, MinProcessCsv) {
  MinProcessPath m;
  m.times = {0.0, 0.5};
  m.values = {0.7, 1.1};
  m.n_atoms = 12;
  m.truncation_bound = 2.5e-4;
  m.report_level = 2.0;
  std::stringstream ss;
  write_min_process_csv(ss, m, {{"seed", "3"}});
  const auto t = read_csv(ss);
  EXPECT_EQ(t.get("n_atoms"), "12");
  EXPECT_EQ(parse_double(t.get("truncation_bound")), 2.5e-4);
  EXPECT_EQ(t.get("seed"), "3");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][1], 1.1);
}

TEST(Io, JsonRecord) {
  MonteCarloEstimate e;
  e.value = 0.25;
  e.std_error = 0.01;
  e.n = 100;
  e.seed = 9;
  const auto j = to_json(e, {{"q", 0.0}});
  EXPECT_EQ(j["value"], 0.25);
  EXPECT_EQ(j["stderr"], 0.01);
  EXPECT_EQ(j["n"], 100);
  EXPECT_EQ(j["seed"], 9);
  EXPECT_EQ(j["params"]["q"], 0.0);
  EXPECT_FALSE(j.contains("refinement_delta"));
}

TEST(Io, ConfigHash) {
  EXPECT_EQ(config_hash(""), "cbf29ce484222325");
  EXPECT_EQ(config_hash("a"), "af63dc4c8601ec8c");
  EXPECT_NE(config_hash("q=0"), config_hash("q=0.1"));
}
