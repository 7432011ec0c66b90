#pragma once

#include <utility>
#include <vector>

namespace uavsim {

// 3GPP A3-style rule: a candidate must beat the serving cell by the
// hysteresis margin for time_to_trigger consecutive measurements.
struct A3Config {
  double hysteresis_db = 3.0;
  int time_to_trigger = 3;
};

struct BaselineState {
  int serving = 0;  // gbs id
  std::vector<std::pair<int, int>> trigger_counters;  // (gbs id, count)

  void reset(int serving_id) {
    serving = serving_id;
    trigger_counters.clear();
  }
};

// Feed one measurement round (per-gbs RSRP in dBm); returns the serving id
// after applying the rule. Ties between ready candidates break to lowest id.
int baseline_select_gbs(BaselineState& state,
                        const std::vector<std::pair<int, double>>& rsrps,
                        const A3Config& cfg);

}  // namespace uavsim
