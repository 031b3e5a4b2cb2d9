#include "pmed/bench.hpp"

#include <gtest/gtest.h>

#include <chrono>

using namespace pmed;

// The toy-size harness self-check: a full grid at small keys finishes well
// under a minute and emits a row for every protocol.
TEST(Bench, ToySizeGridCompletesQuicklyWithAllProtocols) {
  BenchConfig config;
  config.protocol_kappas = {32, 64};
  config.trials = 2;
  config.tpw_kappa = 32;
  config.seed = 77;
  auto start = std::chrono::steady_clock::now();
  BenchReport report = run_bench(config);
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(elapsed, 60.0);

  const char* protocols[] = {"SAD", "SMD", "SGE", "SLE", "SLT", "SGT", "SET", "SUT", "SRC"};
  for (const char* op : protocols) {
    int rows = 0;
    for (const auto& r : report.rows)
      if (r.op == op) ++rows;
    EXPECT_EQ(rows, 2) << op;
  }
}
