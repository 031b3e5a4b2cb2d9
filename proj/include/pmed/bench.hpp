#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmed {

struct BenchRow {
  std::string op;     // protocol or pipeline stage
  std::string param;  // parameter point, e.g. "L(N)=1024" or "len=8,m=2"
  double mean_ms = 0;
  int trials = 0;
};

struct BenchConfig {
  std::vector<unsigned> protocol_kappas{256, 512};  // L(N) = 512, 1024
  int trials = 5;
  unsigned tpw_kappa = 32;  // reduced size for the pipeline grid
  std::vector<int> tpw_lengths{10, 12};
  std::vector<int> tpw_ms{1, 2, 3};
  uint64_t seed = 1;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::string> violations;  // empty iff growth is monotone
  bool monotone() const { return violations.empty(); }
};

/// Times every protocol at each key size and the TPW pipeline over the
/// (path length × m) grid, then checks that means grow with L(N) and m.
BenchReport run_bench(const BenchConfig& config);

}  // namespace pmed
