#pragma once

#include <string>
#include <vector>

#include "uavsim/scenario.hpp"

namespace uavsim {

// Horizontal slice of best-server RSRP. Cells whose center lies strictly
// inside a building carry -infinity and best_gbs_id -1.
struct CoverageGrid {
  double altitude = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 0.0;
  int width = 0;
  int height = 0;
  std::vector<double> values;     // row-major dBm, values[row * width + col]
  std::vector<int> best_gbs_ids;  // same layout

  double at(int row, int col) const { return values[row * width + col]; }
  // Mean over free cells; NaN when every cell is blocked.
  double mean_rsrp() const;
};

CoverageGrid compute_coverage_grid(const Scenario& s, double altitude,
                                   double cell_size, int workers = 1);

enum class GridFormat { csv, pgm };

// CSV: one metadata header block, then height rows of width values.
// PGM: binary 8-bit grayscale, [-120, -60] dBm mapped to [0, 255] with
// half-to-even rounding; blocked cells are 0. Both byte-deterministic.
void export_grid(const CoverageGrid& grid, const std::string& path,
                 GridFormat format);

}  // namespace uavsim
