#include "uavsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "uavsim/radio.hpp"
#include "uavsim/rng.hpp"

namespace uavsim {

using json = nlohmann::ordered_json;

int Scenario::gbs_slot(int id) const {
  for (std::size_t i = 0; i < gbs.size(); ++i)
    if (gbs[i].id == id) return static_cast<int>(i);
  throw std::invalid_argument("unknown GBS id " + std::to_string(id));
}

void validate_scenario(const Scenario& s) {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("scenario: " + msg);
  };
  if (!(s.area_w > 0.0) || !(s.area_h > 0.0)) fail("area extents must be positive");
  if (!(s.z_min < s.z_max)) fail("z_min must be < z_max");
  if (s.z_min < 1.5 || s.z_max > 300.0)
    fail("altitude range must lie within the modeled [1.5, 300] m band");
  if (s.time_limit_steps <= 0) fail("time_limit_steps must be > 0");
  if (!s.source.finite() || !s.destination.finite()) fail("non-finite endpoint");
  if (!s.in_area(s.source)) fail("source outside area bounds");
  if (!s.in_area(s.destination)) fail("destination outside area bounds");
  for (const auto& b : s.buildings) {
    if (!(b.min_corner.x < b.max_corner.x) || !(b.min_corner.y < b.max_corner.y) ||
        !(b.min_corner.z < b.max_corner.z))
      fail("building must satisfy min_corner < max_corner componentwise");
    if (b.min_corner.z != 0.0) fail("building base must sit on the ground plane");
  }
  if (s.inside_any_building(s.source)) fail("source lies inside a building");
  if (s.inside_any_building(s.destination)) fail("destination lies inside a building");
  for (std::size_t i = 0; i < s.gbs.size(); ++i) {
    const auto& g = s.gbs[i];
    for (std::size_t j = i + 1; j < s.gbs.size(); ++j)
      if (s.gbs[j].id == g.id) fail("duplicate GBS id " + std::to_string(g.id));
    const double* az = g.sector_azimuths_deg;
    if (az[0] == az[1] || az[0] == az[2] || az[1] == az[2])
      fail("sector azimuths must be mutually distinct");
  }
  if (s.radio.fc_ghz <= 0.0) fail("carrier frequency must be positive");
  if (s.radio.n_elements < 1) fail("n_elements must be >= 1");
  if (s.radio.theta_3db_deg <= 0.0 || s.radio.phi_3db_deg <= 0.0)
    fail("beamwidths must be positive");
}

bool is_los(const Scenario& s, const Vec3& a, const Vec3& b) {
  if (a == b) return true;
  for (const auto& bld : s.buildings)
    if (segment_intersects_building(a, b, bld)) return false;
  return true;
}

ObstacleReading nearest_obstacle(const Scenario& s, const Vec3& p,
                                 double max_range, int n_rays) {
  if (s.inside_any_building(p))
    throw std::invalid_argument("nearest_obstacle: position inside a building");
  double best_t = std::numeric_limits<double>::infinity();
  Vec3 best_dir{0.0, 0.0, -1.0};
  for (const auto& dir : ray_directions(n_rays)) {
    double t = std::numeric_limits<double>::infinity();
    for (const auto& b : s.buildings) {
      if (auto d = ray_box_distance(p, dir, b)) t = std::min(t, *d);
    }
    // ground plane
    if (dir.z < 0.0) t = std::min(t, p.z / -dir.z);
    // area-bound walls
    if (dir.x > 0.0) t = std::min(t, (s.area_w - p.x) / dir.x);
    if (dir.x < 0.0) t = std::min(t, p.x / -dir.x);
    if (dir.y > 0.0) t = std::min(t, (s.area_h - p.y) / dir.y);
    if (dir.y < 0.0) t = std::min(t, p.y / -dir.y);
    if (t < best_t) {  // first ray in table order wins ties
      best_t = t;
      best_dir = dir;
    }
  }
  if (best_t > max_range) return {max_range, {0.0, 0.0, -1.0}};
  return {best_t, best_dir};
}

namespace {

Vec3 vec3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw std::runtime_error(std::string("scenario parse: ") + what +
                             " must be a [x, y, z] array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw std::runtime_error(std::string("scenario parse: missing \"") + key +
                             "\" field");
  return *it;
}

RadioConfig radio_from_json(const json& j) {
  RadioConfig r;
  r.fc_ghz = j.value("fc_ghz", r.fc_ghz);
  r.p_ref_dbm = j.value("p_ref_dbm", r.p_ref_dbm);
  r.ge_max_dbi = j.value("ge_max_dbi", r.ge_max_dbi);
  r.a_m_db = j.value("a_m_db", r.a_m_db);
  r.sla_v_db = j.value("sla_v_db", r.sla_v_db);
  r.theta_3db_deg = j.value("theta_3db", r.theta_3db_deg);
  r.phi_3db_deg = j.value("phi_3db", r.phi_3db_deg);
  r.n_elements = j.value("n_elements", r.n_elements);
  r.element_spacing = j.value("element_spacing", r.element_spacing);
  r.downtilt_deg = j.value("downtilt_deg", r.downtilt_deg);
  return r;
}

json radio_to_json(const RadioConfig& r) {
  json j;
  j["fc_ghz"] = r.fc_ghz;
  j["p_ref_dbm"] = r.p_ref_dbm;
  j["ge_max_dbi"] = r.ge_max_dbi;
  j["a_m_db"] = r.a_m_db;
  j["sla_v_db"] = r.sla_v_db;
  j["theta_3db"] = r.theta_3db_deg;
  j["phi_3db"] = r.phi_3db_deg;
  j["n_elements"] = r.n_elements;
  j["element_spacing"] = r.element_spacing;
  j["downtilt_deg"] = r.downtilt_deg;
  return j;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("scenario parse: invalid JSON: ") +
                             e.what());
  }
  Scenario s;
  const json& area = require(j, "area");
  if (!area.is_array() || area.size() != 2)
    throw std::runtime_error("scenario parse: \"area\" must be [w, h]");
  s.area_w = area[0].get<double>();
  s.area_h = area[1].get<double>();
  s.z_min = require(j, "z_min").get<double>();
  s.z_max = require(j, "z_max").get<double>();
  s.time_limit_steps = require(j, "time_limit_steps").get<int>();
  s.source = vec3_from_json(require(j, "source"), "source");
  s.destination = vec3_from_json(require(j, "destination"), "destination");
  for (const auto& bj : require(j, "buildings")) {
    Building b;
    b.min_corner = vec3_from_json(require(bj, "min"), "building min");
    b.max_corner = vec3_from_json(require(bj, "max"), "building max");
    s.buildings.push_back(b);
  }
  for (const auto& gj : require(j, "gbs")) {
    GbsConfig g;
    g.id = require(gj, "id").get<int>();
    g.position = vec3_from_json(require(gj, "position"), "gbs position");
    const std::string cls = require(gj, "class").get<std::string>();
    if (cls == "micro")
      g.cls = GbsClass::micro;
    else if (cls == "macro")
      g.cls = GbsClass::macro;
    else
      throw std::runtime_error("scenario parse: gbs class must be micro|macro");
    const json& az = require(gj, "sector_azimuths");
    if (!az.is_array() || az.size() != 3)
      throw std::runtime_error(
          "scenario parse: sector_azimuths must hold 3 angles");
    for (int k = 0; k < 3; ++k) g.sector_azimuths_deg[k] = az[k].get<double>();
    s.gbs.push_back(g);
  }
  if (j.contains("radio")) s.radio = radio_from_json(j["radio"]);
  s.seed = j.value("seed", 0ULL);
  try {
    validate_scenario(s);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("scenario parse: ") + e.what());
  }
  return s;
}

std::string scenario_to_json_text(const Scenario& s) {
  validate_scenario(s);
  json j;
  j["area"] = json::array({s.area_w, s.area_h});
  j["z_min"] = s.z_min;
  j["z_max"] = s.z_max;
  j["time_limit_steps"] = s.time_limit_steps;
  j["source"] = vec3_to_json(s.source);
  j["destination"] = vec3_to_json(s.destination);
  j["buildings"] = json::array();
  for (const auto& b : s.buildings)
    j["buildings"].push_back(
        {{"min", vec3_to_json(b.min_corner)}, {"max", vec3_to_json(b.max_corner)}});
  j["gbs"] = json::array();
  for (const auto& g : s.gbs) {
    json gj;
    gj["id"] = g.id;
    gj["position"] = vec3_to_json(g.position);
    gj["class"] = g.cls == GbsClass::micro ? "micro" : "macro";
    gj["sector_azimuths"] =
        json::array({g.sector_azimuths_deg[0], g.sector_azimuths_deg[1],
                     g.sector_azimuths_deg[2]});
    j["gbs"].push_back(gj);
  }
  j["radio"] = radio_to_json(s.radio);
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json_text(s);
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

bool boxes_overlap(const Building& a, const Building& b) {
  return a.min_corner.x < b.max_corner.x && b.min_corner.x < a.max_corner.x &&
         a.min_corner.y < b.max_corner.y && b.min_corner.y < a.max_corner.y;
}

}  // namespace

Scenario generate_synthetic_scenario(const ScenarioGenParams& p,
                                     std::uint64_t seed) {
  if (p.area_w <= 0.0 || p.area_h <= 0.0 || p.n_buildings < 0 || p.n_gbs < 0 ||
      p.height_min <= 0.0 || p.height_max < p.height_min ||
      p.micro_fraction < 0.0 || p.micro_fraction > 1.0)
    throw std::invalid_argument("generate_synthetic_scenario: bad params");

  Rng rng(seed);
  Scenario s;
  s.area_w = p.area_w;
  s.area_h = p.area_h;
  s.z_min = p.z_min;
  s.z_max = p.z_max;
  s.seed = seed;

  const int max_tries = 200;

  // Non-overlapping rectangular footprints with a small margin to the edges.
  for (int i = 0; i < p.n_buildings; ++i) {
    bool placed = false;
    for (int t = 0; t < max_tries && !placed; ++t) {
      const double w = rng.uniform(20.0, 60.0);
      const double d = rng.uniform(20.0, 60.0);
      const double x = rng.uniform(10.0, std::max(10.0, p.area_w - w - 10.0));
      const double y = rng.uniform(10.0, std::max(10.0, p.area_h - d - 10.0));
      const double h = rng.uniform(p.height_min, p.height_max);
      Building b{{x, y, 0.0}, {x + w, y + d, h}};
      bool clash = false;
      for (const auto& other : s.buildings)
        if (boxes_overlap(b, other)) {
          clash = true;
          break;
        }
      if (!clash) {
        s.buildings.push_back(b);
        placed = true;
      }
    }
    if (!placed)
      throw std::runtime_error(
          "generate_synthetic_scenario: could not place requested building "
          "count, area too crowded");
  }

  // GBS: macro on rooftop masts, micro on facades at 10 m. With no buildings
  // available, fall back to free-standing masts (macro 25 m, micro 10 m).
  const int n_micro = static_cast<int>(std::lround(p.micro_fraction * p.n_gbs));
  for (int i = 0; i < p.n_gbs; ++i) {
    GbsConfig g;
    g.id = i;
    const bool micro = i < n_micro;
    g.cls = micro ? GbsClass::micro : GbsClass::macro;
    if (!s.buildings.empty()) {
      for (int t = 0; t < max_tries; ++t) {
        const auto& b = s.buildings[rng.uniform_int(s.buildings.size())];
        if (micro) {
          // push the antenna 0.5 m off a random facade
          const int face = static_cast<int>(rng.uniform_int(4));
          const double fx = rng.uniform(b.min_corner.x, b.max_corner.x);
          const double fy = rng.uniform(b.min_corner.y, b.max_corner.y);
          switch (face) {
            case 0: g.position = {b.min_corner.x - 0.5, fy, 10.0}; break;
            case 1: g.position = {b.max_corner.x + 0.5, fy, 10.0}; break;
            case 2: g.position = {fx, b.min_corner.y - 0.5, 10.0}; break;
            default: g.position = {fx, b.max_corner.y + 0.5, 10.0}; break;
          }
        } else {
          g.position = {0.5 * (b.min_corner.x + b.max_corner.x),
                        0.5 * (b.min_corner.y + b.max_corner.y),
                        b.max_corner.z + 5.0};
        }
        if (!s.inside_any_building(g.position)) break;
      }
    } else {
      g.position = {rng.uniform(20.0, p.area_w - 20.0),
                    rng.uniform(20.0, p.area_h - 20.0), micro ? 10.0 : 25.0};
    }
    g.position.x = std::clamp(g.position.x, 0.0, p.area_w);
    g.position.y = std::clamp(g.position.y, 0.0, p.area_h);
    const double base_az = rng.uniform(0.0, 360.0);
    for (int k = 0; k < 3; ++k)
      g.sector_azimuths_deg[k] = std::fmod(base_az + 120.0 * k, 360.0);
    s.gbs.push_back(g);
  }

  // Source and destination in free space, source biased toward the middle so
  // evaluation-time azimuth re-sampling has room, destination well separated.
  const double mid_z = std::clamp(60.0, p.z_min, p.z_max);
  auto free_at = [&](const Vec3& v) {
    return s.in_area(v) && !s.inside_any_building(v);
  };
  bool ok = false;
  for (int t = 0; t < max_tries && !ok; ++t) {
    s.source = {rng.uniform(0.2 * p.area_w, 0.8 * p.area_w),
                rng.uniform(0.2 * p.area_h, 0.8 * p.area_h), mid_z};
    if (!free_at(s.source)) continue;
    const double want = 0.45 * std::min(p.area_w, p.area_h);
    for (int u = 0; u < max_tries && !ok; ++u) {
      const double az = rng.uniform(0.0, 6.283185307179586);
      s.destination = {s.source.x + want * std::cos(az),
                       s.source.y + want * std::sin(az), mid_z};
      ok = free_at(s.destination);
    }
  }
  if (!ok)
    throw std::runtime_error(
        "generate_synthetic_scenario: could not place source/destination");

  const double dist = distance_3d(s.source, s.destination);
  s.time_limit_steps =
      std::max(150, static_cast<int>(std::ceil(6.0 * dist / 20.83)));

  validate_scenario(s);
  return s;
}

Vec3 place_destination_at_range(const Scenario& s, double distance, Rng& rng) {
  for (int t = 0; t < 10000; ++t) {
    const double az = rng.uniform(0.0, 6.283185307179586);
    const Vec3 dest{s.source.x + distance * std::cos(az),
                    s.source.y + distance * std::sin(az), s.source.z};
    if (s.in_area(dest) && !s.inside_any_building(dest)) return dest;
  }
  throw std::runtime_error("no valid destination at range " +
                           std::to_string(distance));
}

}  // namespace uavsim
