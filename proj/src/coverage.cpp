#include "uavsim/coverage.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "uavsim/radio.hpp"
#include "uavsim/util.hpp"

namespace uavsim {

double CoverageGrid::mean_rsrp() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const double v : values) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n;
}

CoverageGrid compute_coverage_grid(const Scenario& s, double altitude,
                                   double cell_size, int workers) {
  if (cell_size <= 0.0)
    throw std::invalid_argument("compute_coverage_grid: cell_size must be > 0");
  if (altitude < 1.5 || altitude > 300.0)
    throw std::invalid_argument(
        "compute_coverage_grid: altitude outside [1.5, 300] m");
  CoverageGrid g;
  g.altitude = altitude;
  g.origin_x = 0.0;
  g.origin_y = 0.0;
  g.cell_size = cell_size;
  g.width = static_cast<int>(std::ceil(s.area_w / cell_size));
  g.height = static_cast<int>(std::ceil(s.area_h / cell_size));
  g.values.assign(static_cast<std::size_t>(g.width) * g.height,
                  -std::numeric_limits<double>::infinity());
  g.best_gbs_ids.assign(g.values.size(), -1);

  parallel_for(static_cast<std::size_t>(g.height), workers, [&](std::size_t row) {
    for (int col = 0; col < g.width; ++col) {
      const Vec3 center{g.origin_x + (col + 0.5) * cell_size,
                        g.origin_y + (row + 0.5) * cell_size, altitude};
      if (!s.in_area(center) || s.inside_any_building(center)) continue;
      const auto [id, val] = best_gbs(s, center);
      g.values[row * g.width + col] = val;
      g.best_gbs_ids[row * g.width + col] = id;
    }
  });
  return g;
}

namespace {

void export_csv(const CoverageGrid& g, const std::string& path) {
  std::string out;
  out.reserve(g.values.size() * 12 + 256);
  out += "altitude,origin_x,origin_y,cell_size,width,height\n";
  out += format_double(g.altitude) + "," + format_double(g.origin_x) + "," +
         format_double(g.origin_y) + "," + format_double(g.cell_size) + "," +
         std::to_string(g.width) + "," + std::to_string(g.height) + "\n";
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) {
      if (col) out += ',';
      out += format_double(g.at(row, col));
    }
    out += '\n';
  }
  write_file(path, out);
}

unsigned char dbm_to_pixel(double v) {
  if (!std::isfinite(v)) return 0;  // blocked cell sentinel
  const double scaled = (std::clamp(v, -120.0, -60.0) + 120.0) / 60.0 * 255.0;
  // nearbyint under the default FE_TONEAREST mode rounds half to even
  return static_cast<unsigned char>(std::nearbyint(scaled));
}

void export_pgm(const CoverageGrid& g, const std::string& path) {
  std::string out = "P5\n" + std::to_string(g.width) + " " +
                    std::to_string(g.height) + "\n255\n";
  out.reserve(out.size() + g.values.size());
  for (int row = 0; row < g.height; ++row)
    for (int col = 0; col < g.width; ++col)
      out.push_back(static_cast<char>(dbm_to_pixel(g.at(row, col))));
  write_file(path, out);
}

}  // namespace

void export_grid(const CoverageGrid& grid, const std::string& path,
                 GridFormat format) {
  if (format == GridFormat::csv)
    export_csv(grid, path);
  else
    export_pgm(grid, path);
}

}  // namespace uavsim
