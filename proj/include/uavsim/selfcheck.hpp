#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace uavsim {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast invariant/oracle sweep used by the `validate` CLI subcommand:
// radio formula values and guard properties, LoS raycast vs dense sampling,
// reward banding, backprop vs finite differences, GAE vs Monte-Carlo.
// `scale` multiplies the sample counts (1 = quick desk run).
std::vector<CheckResult> run_selfchecks(std::uint64_t seed, int scale = 1);

}  // namespace uavsim
