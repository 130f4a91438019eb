#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "dradar/errors.hpp"
#include "dradar/units.hpp"

namespace dradar {

// Arrival direction, front hemisphere. theta is elevation, phi is azimuth.
struct Direction {
  double theta_deg = 0.0;
  double phi_deg = 0.0;

  void validate() const {
    if (std::abs(theta_deg) > 90.0 || std::abs(phi_deg) > 90.0) {
      throw std::domain_error("direction outside the front hemisphere");
    }
  }
};

// Uniform planar (virtual) array, nx columns by ny rows. Element (m, n) sits
// at (m*dx, n*dy); the flattened element index is n*nx + m, i.e. row-major
// over rows n. Steering vectors and covariance matrices all use this order.
struct ArrayGeometry {
  int nx = 1;
  int ny = 1;
  double dx_m = 0.0;
  double dy_m = 0.0;
  double wavelength_m = 0.0;

  int size() const { return nx * ny; }

  void validate() const {
    if (nx < 1 || ny < 1) throw std::domain_error("array needs at least one element per axis");
    if (dx_m <= 0.0 || dy_m <= 0.0) throw std::domain_error("element spacing must be positive");
    if (wavelength_m <= 0.0) throw std::domain_error("wavelength must be positive");
  }
};

// TX/RX counts plus the virtual grid they tile. grid_nx * grid_ny must equal
// n_tx * n_rx.
struct MimoSpec {
  int n_tx = 1;
  int n_rx = 1;
  int grid_nx = 1;
  int grid_ny = 1;

  void validate() const {
    if (n_tx < 1 || n_rx < 1) throw config_error("TX/RX counts must be at least 1");
    if (grid_nx < 1 || grid_ny < 1) throw config_error("virtual grid dimensions must be at least 1");
    if (grid_nx * grid_ny != n_tx * n_rx) {
      throw config_error("virtual grid " + std::to_string(grid_nx) + "x" +
                         std::to_string(grid_ny) + " does not tile " +
                         std::to_string(n_tx) + " TX x " + std::to_string(n_rx) + " RX");
    }
  }
};

// Virtual grid with one row per RX and one column per TX.
inline MimoSpec make_mimo_spec(int n_tx, int n_rx) {
  MimoSpec spec{n_tx, n_rx, n_tx, n_rx};
  spec.validate();
  return spec;
}

// Explicit rectangular virtual grid, e.g. 16x4 from 8 TX x 8 RX.
inline MimoSpec make_mimo_spec(int n_tx, int n_rx, int grid_nx, int grid_ny) {
  MimoSpec spec{n_tx, n_rx, grid_nx, grid_ny};
  spec.validate();
  return spec;
}

// Half-wavelength uniform virtual array for the given MIMO spec.
inline ArrayGeometry virtual_array(const MimoSpec& spec, double wavelength_m) {
  spec.validate();
  if (wavelength_m <= 0.0) throw std::domain_error("wavelength must be positive");
  ArrayGeometry geom;
  geom.nx = spec.grid_nx;
  geom.ny = spec.grid_ny;
  geom.dx_m = wavelength_m / 2.0;
  geom.dy_m = wavelength_m / 2.0;
  geom.wavelength_m = wavelength_m;
  return geom;
}

namespace detail {

// Per-axis phase increments for a plane wave arriving from azimuth phi
// (tilt toward +x) and elevation theta (tilt toward +y):
//   psi_x = (2 pi / lambda) dx sin(phi) cos(theta)
//   psi_y = (2 pi / lambda) dy sin(theta)
// This azimuth-over-elevation parameterization is one-to-one with physical
// directions over the whole front hemisphere, so every (theta, phi) pair a
// spectrum search visits is a distinct direction. (A polar parameterization
// collapses at boresight, where the azimuth of a theta = 0 target would be
// unidentifiable from array data.)
struct PhaseIncrements {
  double psi_x;
  double psi_y;
};

inline PhaseIncrements phase_increments_rad(double beta_dx, double beta_dy, double theta_rad,
                                            double phi_rad) {
  return {beta_dx * std::sin(phi_rad) * std::cos(theta_rad), beta_dy * std::sin(theta_rad)};
}

inline PhaseIncrements phase_increments(const ArrayGeometry& geom, const Direction& dir) {
  const double wave_number = 2.0 * pi / geom.wavelength_m;
  return phase_increments_rad(wave_number * geom.dx_m, wave_number * geom.dy_m,
                              deg_to_rad(dir.theta_deg), deg_to_rad(dir.phi_deg));
}

}  // namespace detail

// Unit-modulus per-element phases of a plane wave from `dir`, in the
// flattened element order of ArrayGeometry.
inline Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, const Direction& dir) {
  geom.validate();
  dir.validate();
  const auto [psi_x, psi_y] = detail::phase_increments(geom, dir);
  Eigen::VectorXcd v(geom.size());
  for (int n = 0; n < geom.ny; ++n) {
    for (int m = 0; m < geom.nx; ++m) {
      const double phase = m * psi_x + n * psi_y;
      v(n * geom.nx + m) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
  }
  return v;
}

// Coherent sum of the steering phases, optionally weighted.
inline std::complex<double> array_factor(const ArrayGeometry& geom, const Direction& dir,
                                         const Eigen::VectorXcd* weights = nullptr) {
  const Eigen::VectorXcd v = steering_vector(geom, dir);
  if (weights == nullptr) return v.sum();
  if (weights->size() != v.size()) {
    throw std::invalid_argument("weight vector length does not match element count");
  }
  // Eigen's dot conjugates its first operand, which is exactly the w^H a
  // beamforming convention.
  return weights->dot(v);
}

// |AF| over a theta x phi grid; row i is theta_grid[i], column j is
// phi_grid[j].
inline Eigen::MatrixXd array_factor_map(const ArrayGeometry& geom,
                                        const std::vector<double>& theta_grid_deg,
                                        const std::vector<double>& phi_grid_deg) {
  if (theta_grid_deg.empty() || phi_grid_deg.empty()) {
    throw std::invalid_argument("array factor grid must be nonempty");
  }
  Eigen::MatrixXd map(theta_grid_deg.size(), phi_grid_deg.size());
  for (std::size_t i = 0; i < theta_grid_deg.size(); ++i) {
    for (std::size_t j = 0; j < phi_grid_deg.size(); ++j) {
      map(i, j) = std::abs(array_factor(geom, {theta_grid_deg[i], phi_grid_deg[j]}));
    }
  }
  return map;
}

struct AngularResolution {
  double azimuth_deg;
  double elevation_deg;
};

// Null-to-null angular resolution of the uniform array, widened by the
// cosine of the steering limit: 2/(N cos(limit)) radians per axis.
inline AngularResolution angular_resolution(const ArrayGeometry& geom, double phi_max_deg,
                                            double theta_max_deg) {
  geom.validate();
  if (phi_max_deg < 0.0 || phi_max_deg >= 90.0 || theta_max_deg < 0.0 ||
      theta_max_deg >= 90.0) {
    throw std::domain_error("steering limits must lie in [0, 90) degrees");
  }
  const double az = 2.0 / (geom.nx * std::cos(deg_to_rad(phi_max_deg)));
  const double el = 2.0 / (geom.ny * std::cos(deg_to_rad(theta_max_deg)));
  return {rad_to_deg(az), rad_to_deg(el)};
}

// SNR improvement of coherent MIMO combining over a single element:
// 10 log10(n_tx * n_rx).
inline double mimo_snr_gain_db(int n_tx, int n_rx) {
  if (n_tx < 1 || n_rx < 1) throw std::domain_error("element counts must be at least 1");
  return 10.0 * std::log10(static_cast<double>(n_tx) * static_cast<double>(n_rx));
}

}  // namespace dradar
