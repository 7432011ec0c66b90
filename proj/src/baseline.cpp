#include "uavsim/baseline.hpp"

#include <algorithm>
#include <stdexcept>

namespace uavsim {

namespace {

int counter_index(BaselineState& st, int id) {
  for (std::size_t i = 0; i < st.trigger_counters.size(); ++i)
    if (st.trigger_counters[i].first == id) return static_cast<int>(i);
  st.trigger_counters.emplace_back(id, 0);
  return static_cast<int>(st.trigger_counters.size()) - 1;
}

}  // namespace

int baseline_select_gbs(BaselineState& state,
                        const std::vector<std::pair<int, double>>& rsrps,
                        const A3Config& cfg) {
  if (rsrps.empty())
    throw std::invalid_argument("baseline_select_gbs: empty measurement set");

  double serving_rsrp = 0.0;
  bool serving_found = false;
  for (const auto& [id, val] : rsrps) {
    if (id == state.serving) {
      serving_rsrp = val;
      serving_found = true;
      break;
    }
  }
  if (!serving_found) {
    // Serving cell not measurable; snap to the strongest candidate.
    int best_id = rsrps[0].first;
    double best = rsrps[0].second;
    for (const auto& [id, val] : rsrps)
      if (val > best || (val == best && id < best_id)) {
        best_id = id;
        best = val;
      }
    state.reset(best_id);
    return state.serving;
  }

  int ready_id = -1;
  double ready_rsrp = 0.0;
  for (const auto& [id, val] : rsrps) {
    if (id == state.serving) continue;
    const int ci = counter_index(state, id);
    auto& count = state.trigger_counters[ci].second;
    if (val > serving_rsrp + cfg.hysteresis_db) {
      count = std::min(count + 1, cfg.time_to_trigger);
      if (count >= cfg.time_to_trigger) {
        if (ready_id < 0 || val > ready_rsrp ||
            (val == ready_rsrp && id < ready_id)) {
          ready_id = id;
          ready_rsrp = val;
        }
      }
    } else {
      count = 0;
    }
  }

  if (ready_id >= 0) {
    state.reset(ready_id);
    return ready_id;
  }
  return state.serving;
}

}  // namespace uavsim
