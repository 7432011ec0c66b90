#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavsim/geometry.hpp"
#include "uavsim/vec3.hpp"

namespace uavsim {

// Antenna and carrier parameters shared by every GBS in a scenario.
struct RadioConfig {
  double fc_ghz = 2.0;
  double p_ref_dbm = 15.2;
  double ge_max_dbi = 8.0;
  double a_m_db = 30.0;
  double sla_v_db = 30.0;
  double theta_3db_deg = 65.0;
  double phi_3db_deg = 65.0;
  int n_elements = 8;
  double element_spacing = 0.5;  // wavelengths
  double downtilt_deg = 10.0;
};

enum class GbsClass { micro, macro };

struct GbsConfig {
  int id = 0;
  Vec3 position;
  GbsClass cls = GbsClass::macro;
  double sector_azimuths_deg[3] = {0.0, 120.0, 240.0};
};

struct Scenario {
  double area_w = 0.0;  // x in [0, area_w]
  double area_h = 0.0;  // y in [0, area_h]
  double z_min = 0.0;
  double z_max = 0.0;
  int time_limit_steps = 0;
  Vec3 source;
  Vec3 destination;
  std::vector<Building> buildings;
  std::vector<GbsConfig> gbs;
  RadioConfig radio;
  std::uint64_t seed = 0;

  bool in_area(const Vec3& p) const {
    return p.x >= 0.0 && p.x <= area_w && p.y >= 0.0 && p.y <= area_h;
  }
  bool inside_any_building(const Vec3& p) const {
    for (const auto& b : buildings)
      if (b.contains_strict(p)) return true;
    return false;
  }
  // Index into gbs[] for an id; throws std::invalid_argument on unknown id.
  int gbs_slot(int id) const;
};

// Throws std::invalid_argument describing the first violated invariant.
void validate_scenario(const Scenario& s);

bool is_los(const Scenario& s, const Vec3& a, const Vec3& b);

// Casts n_rays rays from p against buildings, the ground plane and the four
// area-bound walls; returns the shortest hit and its ray direction, or
// (max_range, (0,0,-1)) when nothing is hit in range. Throws
// std::invalid_argument if p sits inside a building (collided state).
ObstacleReading nearest_obstacle(const Scenario& s, const Vec3& p,
                                 double max_range, int n_rays);

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

struct ScenarioGenParams {
  double area_w = 1400.0;
  double area_h = 1400.0;
  int n_buildings = 30;
  double height_min = 20.0;
  double height_max = 80.0;
  int n_gbs = 30;
  double micro_fraction = 0.3;
  double z_min = 30.0;
  double z_max = 150.0;
};

// Deterministic for a fixed seed. Buildings are non-overlapping; macro GBS
// sit on rooftop masts, micro GBS at 10 m on facades; source/destination are
// placed in free space. Throws std::runtime_error when placement fails after
// bounded retries.
Scenario generate_synthetic_scenario(const ScenarioGenParams& params,
                                     std::uint64_t seed);

// Free-space point at the given straight-line range from the source, azimuth
// drawn from rng (re-drawn until the point is inside the area and outside
// all buildings). Keeps the source altitude.
class Rng;
Vec3 place_destination_at_range(const Scenario& s, double distance, Rng& rng);

}  // namespace uavsim
