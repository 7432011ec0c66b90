#pragma once

#include <utility>
#include <vector>

#include "uavsim/scenario.hpp"

namespace uavsim {

// theta: zenith angle in degrees (0 = straight up, 90 = horizon).
// phi: azimuth relative to the sector boresight, wrapped to (-180, 180].
struct AnglePair {
  double theta_deg = 90.0;
  double phi_deg = 0.0;
};

// 3GPP parabolic element pattern; result lies in
// [ge_max - a_m, ge_max], maximum at boresight (theta=90, phi=0).
double element_gain_db(const AnglePair& angles, const RadioConfig& cfg);

// Vertical uniform linear array steered to the configured downtilt,
// phi-independent. Peaks at 10*log10(n_elements); floor-clamped at -30 dB.
double array_factor_db(const AnglePair& angles, const RadioConfig& cfg);

// Max over the three sectors of element gain + array factor.
// Throws std::invalid_argument for coincident positions.
double antenna_gain_db(const GbsConfig& gbs, const RadioConfig& cfg,
                       const Vec3& uav_pos);

// Free-space path loss, d clamped to >= 1 m.
double fspl_db(double d_m, double fc_ghz);

// LoS path loss (four branches over class x altitude bracket).
// Throws std::invalid_argument when z is outside [1.5, 300].
double path_loss_los_db(GbsClass cls, double d_m, double z_m, double fc_ghz);

struct NlosPathLoss {
  double db = 0.0;
  bool z_clamped = false;  // macro NLoS evaluated with z clamped to 100 m
};

NlosPathLoss path_loss_nlos_db(GbsClass cls, double d_m, double z_m,
                               double fc_ghz);

double rsrp_dbm(const Scenario& s, const GbsConfig& gbs, const Vec3& uav_pos);

std::vector<std::pair<int, double>> all_rsrp(const Scenario& s,
                                             const Vec3& uav_pos);

// Argmax RSRP, ties broken toward the lowest id. Throws on empty GBS list.
std::pair<int, double> best_gbs(const Scenario& s, const Vec3& uav_pos);

}  // namespace uavsim
