#pragma once

#include <cmath>
#include <numbers>

namespace dradar {

// Nominal radio constants. The speed of light is the rounded engineering
// value so that quantities quoted in round numbers (range bins, time of
// flight) come out exact.
inline constexpr double speed_of_light = 3.0e8;      // m/s
inline constexpr double boltzmann = 1.38e-23;        // J/K
inline constexpr double pi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / pi; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watt_to_dbm(double w) { return linear_to_db(w / 1e-3); }

inline double wavelength_from_frequency(double frequency_hz) {
  return speed_of_light / frequency_hz;
}

}  // namespace dradar
