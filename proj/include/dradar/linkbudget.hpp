#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dradar/array.hpp"
#include "dradar/errors.hpp"
#include "dradar/units.hpp"

namespace dradar {

// Every symbol of the radar range equation plus the distance-scaling law.
// Gains and noise factor are linear; losses live in WallMaterial.
struct LinkBudgetParams {
  double tx_power_w = 1e-3;
  double tx_gain = 10.0;
  double rx_gain = 10.0;
  double wavelength_m = wavelength_from_frequency(140e9);
  double rcs_m2 = 0.01;
  double measurement_time_s = 1e-3;
  double temperature_k = 290.0;
  double noise_factor = 10.0;
  double reference_distance_m = 1.0;
  double p_exponent = 2.0;

  void validate() const {
    if (tx_power_w <= 0.0 || tx_gain <= 0.0 || rx_gain <= 0.0 || wavelength_m <= 0.0 ||
        rcs_m2 <= 0.0 || measurement_time_s <= 0.0 || temperature_k <= 0.0 ||
        noise_factor <= 0.0 || reference_distance_m <= 0.0) {
      throw std::domain_error("link budget parameters must be positive");
    }
    if (p_exponent < 0.0 || p_exponent > 4.0) {
      throw std::domain_error("scaling exponent must lie in [0, 4]");
    }
  }
};

// One-way penetration loss of an indoor material at the carrier frequency.
struct WallMaterial {
  std::string name;
  double thickness_cm = 0.0;
  double loss_db = 0.0;
};

// Free-space received SNR (linear):
//   P G_tx G_rx lambda^2 sigma T_meas / ((4 pi)^3 k T F d^4).
inline double rx_snr(const LinkBudgetParams& p, double distance_m) {
  p.validate();
  if (distance_m <= 0.0) throw std::domain_error("distance must be positive");
  const double four_pi_cubed = std::pow(4.0 * pi, 3);
  const double numerator = p.tx_power_w * p.tx_gain * p.rx_gain * p.wavelength_m *
                           p.wavelength_m * p.rcs_m2 * p.measurement_time_s;
  const double denominator = four_pi_cubed * boltzmann * p.temperature_k * p.noise_factor *
                             std::pow(distance_m, 4);
  return numerator / denominator;
}

// SNR scaling with distance: SNR(d) = SNR(d0) * (d0/d)^p in dB form.
inline double scaled_snr_db(double snr0_db, double d0_m, double d_m, double p_exponent) {
  if (d0_m <= 0.0 || d_m <= 0.0) throw std::domain_error("distances must be positive");
  return snr0_db + 10.0 * p_exponent * std::log10(d0_m / d_m);
}

// TX power scaling with distance: P(d) = P(d0) * (d/d0)^(4-p) in dBm form.
// p = 4 keeps the TX power constant, p = 0 keeps the SNR constant.
inline double scaled_tx_power_dbm(double p0_dbm, double d0_m, double d_m, double p_exponent) {
  if (d0_m <= 0.0 || d_m <= 0.0) throw std::domain_error("distances must be positive");
  return p0_dbm + 10.0 * (4.0 - p_exponent) * std::log10(d_m / d0_m);
}

// TX power needed at distance d so that the scaled SNR law holds with the
// given per-element SNR target at the reference distance:
//   (4 pi)^3 k T F d0^p SNR(d0) / (G_tx G_rx lambda^2 sigma T_meas) * d^(4-p).
inline double required_tx_power_w(const LinkBudgetParams& p, double snr_target_db_at_d0,
                                  double distance_m) {
  p.validate();
  if (distance_m <= 0.0) throw std::domain_error("distance must be positive");
  const double four_pi_cubed = std::pow(4.0 * pi, 3);
  const double snr0 = db_to_linear(snr_target_db_at_d0);
  const double numerator = four_pi_cubed * boltzmann * p.temperature_k * p.noise_factor *
                           std::pow(p.reference_distance_m, p.p_exponent) * snr0;
  const double denominator = p.tx_gain * p.rx_gain * p.wavelength_m * p.wavelength_m *
                             p.rcs_m2 * p.measurement_time_s;
  return numerator / denominator * std::pow(distance_m, 4.0 - p.p_exponent);
}

// Convenience wrapper: the SNR target is quoted for the combined MIMO array
// at the evaluation distance. Removes the array combining gain and rescales
// the per-element target back to the reference distance.
inline double required_tx_power_w_system(const LinkBudgetParams& p,
                                         double system_snr_db_at_d, int n_tx, int n_rx,
                                         double distance_m) {
  const double per_element_at_d = system_snr_db_at_d - mimo_snr_gain_db(n_tx, n_rx);
  const double per_element_at_d0 =
      scaled_snr_db(per_element_at_d, distance_m, p.reference_distance_m, p.p_exponent);
  return required_tx_power_w(p, per_element_at_d0, distance_m);
}

// Wall penalty: the one-way loss applies on the way out and again on the
// way back.
inline double through_wall_snr_db(double snr_db, const WallMaterial& material) {
  return snr_db - 2.0 * material.loss_db;
}

// Indoor material losses measured at 140 GHz, extensible with user entries.
class MaterialTable {
 public:
  MaterialTable() = default;

  static MaterialTable builtin() {
    MaterialTable t;
    t.materials_ = {{"Clear Glass", 0.6, 8.6}, {"Drywall", 14.5, 15.0}, {"Wood Door", 3.5, 25.5}};
    return t;
  }

  void add(const WallMaterial& m) {
    if (m.loss_db < 0.0) throw config_error("material loss must be nonnegative: " + m.name);
    for (const auto& existing : materials_) {
      if (existing.name == m.name) {
        throw config_error("duplicate wall material: " + m.name);
      }
    }
    materials_.push_back(m);
  }

  const WallMaterial& find(const std::string& name) const {
    for (const auto& m : materials_) {
      if (m.name == name) return m;
    }
    throw config_error("unknown wall material: " + name);
  }

  const std::vector<WallMaterial>& all() const { return materials_; }

 private:
  std::vector<WallMaterial> materials_;
};

inline std::vector<WallMaterial> material_db() { return MaterialTable::builtin().all(); }

}  // namespace dradar
