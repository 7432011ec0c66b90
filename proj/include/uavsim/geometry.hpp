#pragma once

#include <optional>
#include <vector>

#include "uavsim/vec3.hpp"

namespace uavsim {

// Axis-aligned box standing on the ground plane (min_corner.z == 0).
struct Building {
  Vec3 min_corner;
  Vec3 max_corner;

  bool contains_strict(const Vec3& p) const {
    return p.x > min_corner.x && p.x < max_corner.x && p.y > min_corner.y &&
           p.y < max_corner.y && p.z > min_corner.z && p.z < max_corner.z;
  }
};

struct ObstacleReading {
  double distance = 0.0;  // meters, clamped to the sensing range
  Vec3 direction{0.0, 0.0, -1.0};
};

// True iff the open segment p0->p1 passes through the strict interior of the
// box. Endpoints resting on a face, edge/corner grazes, and segments sliding
// along a face all return false.
bool segment_intersects_building(const Vec3& p0, const Vec3& p1,
                                 const Building& b);

// Parametric distance to the first strict-interior entry of a ray into the
// closed box, or nullopt when the ray misses. Used by the obstacle sensor.
std::optional<double> ray_box_distance(const Vec3& origin, const Vec3& dir,
                                       const Building& b);

// Fixed deterministic ray table: 6 axis directions, 8 corner diagonals,
// 12 edge diagonals, then Fibonacci-sphere fill for n > 26. Always contains
// +z/-z and the horizontal cardinals for n >= 6.
std::vector<Vec3> ray_directions(int n_rays);

}  // namespace uavsim
