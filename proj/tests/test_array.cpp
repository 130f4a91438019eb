#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "dradar/array.hpp"
#include "dradar/units.hpp"

using namespace dradar;
using Catch::Approx;

namespace {

ArrayGeometry half_wave_array(int nx, int ny) {
  return virtual_array(make_mimo_spec(nx, ny), wavelength_from_frequency(140e9));
}

}  // namespace

TEST_CASE("virtual array spacing is half a wavelength", "[array]") {
  const ArrayGeometry geom = half_wave_array(8, 8);
  REQUIRE(geom.nx == 8);
  REQUIRE(geom.ny == 8);
  REQUIRE(geom.dx_m == Approx(1.0714285714285714e-3).epsilon(1e-12));
  REQUIRE(geom.dy_m == geom.dx_m);
  REQUIRE(geom.size() == 64);
}

TEST_CASE("mimo spec demands a consistent virtual tiling", "[array]") {
  REQUIRE_NOTHROW(make_mimo_spec(8, 8));
  REQUIRE_NOTHROW(make_mimo_spec(8, 8, 16, 4));
  REQUIRE_THROWS_AS(make_mimo_spec(8, 8, 16, 3), config_error);
  REQUIRE_THROWS_AS(make_mimo_spec(0, 4), config_error);
  const MimoSpec spec = make_mimo_spec(4, 2);
  REQUIRE(spec.grid_nx == 4);
  REQUIRE(spec.grid_ny == 2);
}

TEST_CASE("steering vector encodes the per-axis phase gradient", "[array]") {
  const ArrayGeometry geom = half_wave_array(4, 3);
  const Direction dir{25.0, 40.0};
  const Eigen::VectorXcd v = steering_vector(geom, dir);
  REQUIRE(v.size() == 12);

  const double beta = 2.0 * pi / geom.wavelength_m;
  const double psi_x =
      beta * geom.dx_m * std::sin(deg_to_rad(40.0)) * std::cos(deg_to_rad(25.0));
  const double psi_y = beta * geom.dy_m * std::sin(deg_to_rad(25.0));
  for (int n = 0; n < 3; ++n) {
    for (int m = 0; m < 4; ++m) {
      const double phase = m * psi_x + n * psi_y;
      const std::complex<double> expected(std::cos(phase), std::sin(phase));
      REQUIRE(std::abs(v(n * 4 + m) - expected) < 1e-12);
    }
  }
}

TEST_CASE("steering vector is all ones at broadside", "[array]") {
  const ArrayGeometry geom = half_wave_array(5, 5);
  const Eigen::VectorXcd v = steering_vector(geom, {0.0, 0.0});
  for (int i = 0; i < v.size(); ++i) {
    REQUIRE(std::abs(v(i) - std::complex<double>(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("directions outside the hemisphere are rejected", "[array]") {
  const ArrayGeometry geom = half_wave_array(2, 2);
  REQUIRE_THROWS_AS(steering_vector(geom, {91.0, 0.0}), std::domain_error);
  REQUIRE_THROWS_AS(steering_vector(geom, {0.0, -91.0}), std::domain_error);
  REQUIRE_NOTHROW(steering_vector(geom, {90.0, -90.0}));
}

TEST_CASE("array factor peaks at broadside with value N", "[array]") {
  const ArrayGeometry geom = half_wave_array(6, 4);
  REQUIRE(std::abs(array_factor(geom, {0.0, 0.0})) == Approx(24.0).epsilon(1e-12));
  // Any steered direction stays at or below the coherent sum.
  for (double theta : {10.0, 30.0, 55.0}) {
    REQUIRE(std::abs(array_factor(geom, {theta, 20.0})) <= 24.0 + 1e-9);
  }
}

TEST_CASE("uniform unit weights reproduce the plain array factor", "[array]") {
  const ArrayGeometry geom = half_wave_array(3, 3);
  const Eigen::VectorXcd w = Eigen::VectorXcd::Ones(9);
  const Direction dir{18.0, -33.0};
  REQUIRE(std::abs(array_factor(geom, dir, &w) - array_factor(geom, dir)) < 1e-12);
  const Eigen::VectorXcd bad = Eigen::VectorXcd::Ones(4);
  REQUIRE_THROWS_AS(array_factor(geom, dir, &bad), std::invalid_argument);
}

TEST_CASE("steering weights move the array factor peak", "[array]") {
  const ArrayGeometry geom = half_wave_array(8, 8);
  const Direction steer{20.0, 10.0};
  const Eigen::VectorXcd w = steering_vector(geom, steer);
  REQUIRE(std::abs(array_factor(geom, steer, &w)) == Approx(64.0).epsilon(1e-12));
  REQUIRE(std::abs(array_factor(geom, {0.0, 0.0}, &w)) < 64.0);
}

TEST_CASE("array factor map matches pointwise evaluation", "[array]") {
  const ArrayGeometry geom = half_wave_array(4, 4);
  const std::vector<double> theta{-30.0, 0.0, 30.0};
  const std::vector<double> phi{-45.0, 45.0};
  const Eigen::MatrixXd map = array_factor_map(geom, theta, phi);
  REQUIRE(map.rows() == 3);
  REQUIRE(map.cols() == 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      REQUIRE(map(i, j) ==
              Approx(std::abs(array_factor(geom, {theta[i], phi[j]}))).epsilon(1e-12));
    }
  }
}

TEST_CASE("angular resolution widens with the steering limit", "[array]") {
  ArrayGeometry geom = half_wave_array(8, 8);
  geom.nx = 25;
  geom.ny = 25;
  const AngularResolution res = angular_resolution(geom, 22.5, 22.5);
  REQUIRE(res.azimuth_deg == Approx(4.961320388370643).epsilon(1e-9));
  REQUIRE(res.elevation_deg == res.azimuth_deg);

  const AngularResolution broadside = angular_resolution(geom, 0.0, 0.0);
  REQUIRE(broadside.azimuth_deg < res.azimuth_deg);
  REQUIRE_THROWS_AS(angular_resolution(geom, 90.0, 0.0), std::domain_error);
}

TEST_CASE("mimo combining gain is 10 log10 of the element product", "[array]") {
  REQUIRE(mimo_snr_gain_db(8, 8) == Approx(18.061799739838872).epsilon(1e-12));
  REQUIRE(mimo_snr_gain_db(4, 4) == Approx(12.041199826559248).epsilon(1e-12));
  REQUIRE(mimo_snr_gain_db(2, 2) == Approx(6.020599913279624).epsilon(1e-12));
  REQUIRE_THROWS_AS(mimo_snr_gain_db(0, 4), std::domain_error);
}
