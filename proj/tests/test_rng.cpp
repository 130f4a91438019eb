#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "dradar/rng.hpp"

using namespace dradar;

TEST_CASE("identical seeds reproduce identical streams", "[rng]") {
  GaussianSource a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    REQUIRE(a.normal_pair() == b.normal_pair());
    REQUIRE(a.complex_gaussian(2.0) == b.complex_gaussian(2.0));
    REQUIRE(a.uniform(-3.0, 7.0) == b.uniform(-3.0, 7.0));
  }
}

TEST_CASE("different seeds give different streams", "[rng]") {
  GaussianSource a(1), b(2);
  REQUIRE(a.normal_pair() != b.normal_pair());
}

TEST_CASE("derived seeds are distinct across indices and masters", "[rng]") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master = 0; master < 8; ++master) {
    for (std::uint64_t index = 0; index < 256; ++index) {
      seen.insert(derive_seed(master, index));
    }
  }
  REQUIRE(seen.size() == 8 * 256);
}

TEST_CASE("uniform_pos stays inside (0, 1]", "[rng]") {
  GaussianSource g(7);
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform_pos();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
  }
}

TEST_CASE("normal pairs have standard moments", "[rng]") {
  GaussianSource g(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n / 2; ++i) {
    const auto [x, y] = g.normal_pair();
    sum += x + y;
    sum_sq += x * x + y * y;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("complex gaussian hits the requested power", "[rng]") {
  GaussianSource g(5);
  const double variance = 3.5;
  const int n = 100000;
  double power = 0.0;
  for (int i = 0; i < n; ++i) {
    power += std::norm(g.complex_gaussian(variance));
  }
  REQUIRE(std::abs(power / n - variance) < 0.1);
}

TEST_CASE("uniform respects its bounds", "[rng]") {
  GaussianSource g(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = g.uniform(-60.0, 60.0);
    REQUIRE(u >= -60.0);
    REQUIRE(u < 60.0);
  }
}
