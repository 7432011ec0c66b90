#include "uavsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uavsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kAfFloorDb = -30.0;

double log10_clamped_distance(double d_m) {
  return std::log10(std::max(d_m, 1.0));
}

double wrap_deg(double a) {
  double w = std::fmod(a + 180.0, 360.0);
  if (w <= 0.0) w += 360.0;
  return w - 180.0;  // (-180, 180]
}

void check_altitude(double z_m) {
  if (z_m < 1.5 || z_m > 300.0)
    throw std::invalid_argument(
        "path loss: altitude outside the modeled [1.5, 300] m range");
}

}  // namespace

double element_gain_db(const AnglePair& angles, const RadioConfig& cfg) {
  const double tv = (angles.theta_deg - 90.0) / cfg.theta_3db_deg;
  const double th = angles.phi_deg / cfg.phi_3db_deg;
  const double a_v = -std::min(12.0 * tv * tv, cfg.sla_v_db);
  const double a_h = -std::min(12.0 * th * th, cfg.a_m_db);
  return cfg.ge_max_dbi - std::min(-(a_v + a_h), cfg.a_m_db);
}

double array_factor_db(const AnglePair& angles, const RadioConfig& cfg) {
  const int n = cfg.n_elements;
  if (n <= 1) return 0.0;
  // Phase progression between the observation angle and the steering angle
  // of a vertical ULA; phi plays no role.
  const double steer = (90.0 + cfg.downtilt_deg) * kDegToRad;
  const double psi = 2.0 * kPi * cfg.element_spacing *
                     (std::cos(angles.theta_deg * kDegToRad) - std::cos(steer));
  double re = 0.0;
  double im = 0.0;
  for (int k = 0; k < n; ++k) {
    re += std::cos(k * psi);
    im += std::sin(k * psi);
  }
  const double power = (re * re + im * im) / n;
  if (power <= 0.0) return kAfFloorDb;
  return std::max(10.0 * std::log10(power), kAfFloorDb);
}

double antenna_gain_db(const GbsConfig& gbs, const RadioConfig& cfg,
                       const Vec3& uav_pos) {
  const Vec3 d = uav_pos - gbs.position;
  const double dist = d.norm();
  if (dist == 0.0)
    throw std::invalid_argument("antenna_gain: UAV coincides with the GBS");
  const double theta =
      std::acos(std::clamp(d.z / dist, -1.0, 1.0)) / kDegToRad;
  const double azimuth = std::atan2(d.y, d.x) / kDegToRad;
  double best = -std::numeric_limits<double>::infinity();
  for (double sector_az : gbs.sector_azimuths_deg) {
    const AnglePair a{theta, wrap_deg(azimuth - sector_az)};
    best = std::max(best, element_gain_db(a, cfg) + array_factor_db(a, cfg));
  }
  return best;
}

double fspl_db(double d_m, double fc_ghz) {
  return 32.4 + 20.0 * log10_clamped_distance(d_m) + 20.0 * std::log10(fc_ghz);
}

double path_loss_los_db(GbsClass cls, double d_m, double z_m, double fc_ghz) {
  check_altitude(z_m);
  const double ld = log10_clamped_distance(d_m);
  const double lf = std::log10(fc_ghz);
  const bool low = z_m <= 22.5;
  if (cls == GbsClass::micro) {
    if (low) return 32.4 + 21.0 * ld + 20.0 * lf;  // w1
    const double w2 = 30.9 + (22.25 - 0.5 * std::log10(z_m)) * ld + 20.0 * lf;
    return std::max(fspl_db(d_m, fc_ghz), w2);
  }
  if (low) return 32.4 + 20.0 * ld + 20.0 * lf;  // w3
  return 28.0 + 22.0 * ld + 20.0 * lf;           // w4
}

NlosPathLoss path_loss_nlos_db(GbsClass cls, double d_m, double z_m,
                               double fc_ghz) {
  check_altitude(z_m);
  const double ld = log10_clamped_distance(d_m);
  const double lf = std::log10(fc_ghz);
  const bool low = z_m <= 22.5;
  NlosPathLoss out;
  if (cls == GbsClass::micro) {
    const double w = low ? 22.4 + 35.3 * ld + 21.3 * lf - 0.3 * (z_m - 1.5)
                         : 32.4 + (43.2 - 7.6 * std::log10(z_m)) * ld + 20.0 * lf;
    out.db = std::max(path_loss_los_db(cls, d_m, z_m, fc_ghz), w);
    return out;
  }
  if (low) {
    const double w7 = 13.54 + 39.08 * ld + 20.0 * lf - 0.6 * (z_m - 1.5);
    out.db = std::max(path_loss_los_db(cls, d_m, z_m, fc_ghz), w7);
    return out;
  }
  // The macro NLoS bracket is only printed up to 100 m; above that the
  // expression is evaluated with z clamped and the flag raised.
  const double z_eff = std::min(z_m, 100.0);
  out.z_clamped = z_m > 100.0;
  out.db = -17.5 + (46.0 - 7.0 * std::log10(z_eff)) * ld +
           20.0 * std::log10(40.0 * kPi * fc_ghz / 3.0);
  return out;
}

double rsrp_dbm(const Scenario& s, const GbsConfig& gbs, const Vec3& uav_pos) {
  const double d = distance_3d(gbs.position, uav_pos);
  const double gain = antenna_gain_db(gbs, s.radio, uav_pos);
  const double loss =
      is_los(s, gbs.position, uav_pos)
          ? path_loss_los_db(gbs.cls, d, uav_pos.z, s.radio.fc_ghz)
          : path_loss_nlos_db(gbs.cls, d, uav_pos.z, s.radio.fc_ghz).db;
  return s.radio.p_ref_dbm + gain - loss;
}

std::vector<std::pair<int, double>> all_rsrp(const Scenario& s,
                                             const Vec3& uav_pos) {
  std::vector<std::pair<int, double>> out;
  out.reserve(s.gbs.size());
  for (const auto& g : s.gbs) out.emplace_back(g.id, rsrp_dbm(s, g, uav_pos));
  return out;
}

std::pair<int, double> best_gbs(const Scenario& s, const Vec3& uav_pos) {
  if (s.gbs.empty())
    throw std::invalid_argument("best_gbs: scenario has no GBS");
  int best_id = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (const auto& [id, val] : all_rsrp(s, uav_pos)) {
    if (first || val > best_val || (val == best_val && id < best_id)) {
      best_id = id;
      best_val = val;
      first = false;
    }
  }
  return {best_id, best_val};
}

}  // namespace uavsim
