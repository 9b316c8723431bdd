// One pass/fail line per acceptance criterion.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qou/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-10"};
  qou::AcceptanceOptions opt;
  app.add_option("--scale", opt.scale, "Monte Carlo size multiplier")->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "Master seed");
  app.add_option("--only", opt.only, "Criterion ids to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  int failed = 0;
  const auto results = qou::run_acceptance(opt, [&](const qou::CriterionResult& r) {
    std::printf("[%s] criterion %d (%s): %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    failed += r.pass ? 0 : 1;
  });
  std::printf("%zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? 0 : 1;
}
