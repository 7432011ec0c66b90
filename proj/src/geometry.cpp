#include "uavsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uavsim {

namespace {

// Clip the parametric interval [t0, t1] of p0 + t*(p1-p0) against one slab.
// Returns false when the segment cannot touch the strict interior.
bool clip_axis(double origin, double dir, double lo, double hi, double& t0,
               double& t1) {
  if (dir == 0.0) {
    // Parallel to the slab: interior contact requires strictly inside it.
    return origin > lo && origin < hi;
  }
  double ta = (lo - origin) / dir;
  double tb = (hi - origin) / dir;
  if (ta > tb) std::swap(ta, tb);
  t0 = std::max(t0, ta);
  t1 = std::min(t1, tb);
  return t0 < t1;
}

}  // namespace

bool segment_intersects_building(const Vec3& p0, const Vec3& p1,
                                 const Building& b) {
  const Vec3 d = p1 - p0;
  double t0 = 0.0;
  double t1 = 1.0;
  if (!clip_axis(p0.x, d.x, b.min_corner.x, b.max_corner.x, t0, t1))
    return false;
  if (!clip_axis(p0.y, d.y, b.min_corner.y, b.max_corner.y, t0, t1))
    return false;
  if (!clip_axis(p0.z, d.z, b.min_corner.z, b.max_corner.z, t0, t1))
    return false;
  // Strict inequality rejects face/edge/corner touches and endpoint contact.
  return t0 < t1;
}

std::optional<double> ray_box_distance(const Vec3& origin, const Vec3& dir,
                                       const Building& b) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo[3] = {b.min_corner.x, b.min_corner.y, b.min_corner.z};
  const double hi[3] = {b.max_corner.x, b.max_corner.y, b.max_corner.z};
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] <= lo[i] || o[i] >= hi[i]) return std::nullopt;
      continue;
    }
    double ta = (lo[i] - o[i]) / d[i];
    double tb = (hi[i] - o[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return std::nullopt;
  }
  return t0;
}

std::vector<Vec3> ray_directions(int n_rays) {
  static const double s2 = 1.0 / std::sqrt(2.0);
  static const double s3 = 1.0 / std::sqrt(3.0);
  static const Vec3 table[26] = {
      // axis directions (ground ray last so -z is always present early)
      {0, 0, -1},
      {0, 0, 1},
      {1, 0, 0},
      {-1, 0, 0},
      {0, 1, 0},
      {0, -1, 0},
      // corner diagonals
      {s3, s3, s3},
      {s3, s3, -s3},
      {s3, -s3, s3},
      {s3, -s3, -s3},
      {-s3, s3, s3},
      {-s3, s3, -s3},
      {-s3, -s3, s3},
      {-s3, -s3, -s3},
      // edge diagonals
      {s2, s2, 0},
      {-s2, -s2, 0},
      {s2, -s2, 0},
      {-s2, s2, 0},
      {s2, 0, s2},
      {-s2, 0, -s2},
      {s2, 0, -s2},
      {-s2, 0, s2},
      {0, s2, s2},
      {0, -s2, -s2},
      {0, s2, -s2},
      {0, -s2, s2},
  };
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(std::max(n_rays, 0)));
  const int from_table = std::min(n_rays, 26);
  for (int i = 0; i < from_table; ++i) dirs.push_back(table[i]);
  // Fibonacci sphere for any extra rays beyond the fixed table.
  const double golden = 2.399963229728653;  // pi * (3 - sqrt(5))
  for (int i = 26; i < n_rays; ++i) {
    const int k = i - 26;
    const int extra = n_rays - 26;
    const double zc = 1.0 - 2.0 * (k + 0.5) / extra;
    const double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double a = golden * k;
    dirs.push_back({r * std::cos(a), r * std::sin(a), zc});
  }
  return dirs;
}

}  // namespace uavsim
