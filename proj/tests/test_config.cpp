#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dradar/config.hpp"

using namespace dradar;
using Catch::Approx;

namespace {

std::string write_temp_config(const json& doc) {
  const std::string path = "tmp_config_test.json";
  std::ofstream out(path);
  out << doc.dump(2);
  return path;
}

}  // namespace

TEST_CASE("defaults parse and validate end to end", "[config]") {
  const RunConfig cfg = RunConfig::defaults();
  REQUIRE_NOTHROW(cfg.validate_all());
  REQUIRE(cfg.frequency_hz() == Approx(140e9));
  REQUIRE(cfg.mimo().n_tx == 8);
  REQUIRE(cfg.targets().count() == 3);
  REQUIRE(cfg.monte_carlo_runs() == 100);
  REQUIRE(cfg.master_seed() == 1);
  REQUIRE(cfg.algorithms().size() == 2);
  REQUIRE(cfg.output_directory() == "out");
  REQUIRE_FALSE(cfg.doa_material().has_value());
}

TEST_CASE("default chirp derives its sampling rate from max range", "[config]") {
  const RunConfig cfg = RunConfig::defaults();
  const ChirpConfig chirp = cfg.chirp();
  REQUIRE(chirp.sampling_rate_hz == Approx(266.66666666666667e6).epsilon(1e-12));
  REQUIRE(chirp.slope() == Approx(1e15).epsilon(1e-12));
}

TEST_CASE("user values override defaults, key by key", "[config]") {
  const json user = {{"array", {{"n_tx", 4}}}, {"doa", {{"master_seed", 777}}}};
  const RunConfig cfg = RunConfig::from_json(user);
  REQUIRE(cfg.mimo().n_tx == 4);
  REQUIRE(cfg.mimo().n_rx == 8);  // untouched default
  REQUIRE(cfg.master_seed() == 777);
  REQUIRE(cfg.monte_carlo_runs() == 100);  // untouched default
}

TEST_CASE("unknown keys are rejected with their full path", "[config]") {
  const json user = {{"doa", {{"masterseed", 7}}}};
  try {
    RunConfig::from_json(user);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    REQUIRE(std::string(e.what()).find("/doa/masterseed") != std::string::npos);
  }
  REQUIRE_THROWS_AS(RunConfig::from_json({{"radr", json::object()}}), config_error);
}

TEST_CASE("type mismatches are rejected", "[config]") {
  REQUIRE_THROWS_AS(RunConfig::from_json({{"doa", {{"master_seed", "one"}}}}), config_error);
  REQUIRE_THROWS_AS(RunConfig::from_json({{"targets", 3}}), config_error);
  REQUIRE_THROWS_AS(RunConfig::from_json({{"doa", {{"algorithms", {1, 2}}}}}), config_error);
}

TEST_CASE("overrides outrank file values", "[config]") {
  RunConfig cfg = RunConfig::from_json({{"doa", {{"master_seed", 5}}}});
  cfg.set_override("/doa/master_seed", 9);
  REQUIRE(cfg.master_seed() == 9);
  REQUIRE_THROWS_AS(cfg.set_override("/doa/no_such_key", 1), config_error);
}

TEST_CASE("config files load from disk and reject bad JSON", "[config]") {
  const std::string path =
      write_temp_config({{"link_budget", {{"materials", {"Drywall"}}}}});
  const RunConfig cfg = RunConfig::from_file(path);
  REQUIRE(cfg.link_material_names() == std::vector<std::string>{"Drywall"});
  std::remove(path.c_str());

  std::ofstream bad("tmp_bad_config.json");
  bad << "{ not json";
  bad.close();
  REQUIRE_THROWS_AS(RunConfig::from_file("tmp_bad_config.json"), config_error);
  std::remove("tmp_bad_config.json");
  REQUIRE_THROWS_AS(RunConfig::from_file("no_such_file.json"), config_error);
}

TEST_CASE("sweep ranges expand inclusively", "[config]") {
  const json user = {{"doa", {{"snr_db", {{"start", 0.0}, {"stop", 10.0}, {"step", 5.0}}}}}};
  const RunConfig cfg = RunConfig::from_json(user);
  REQUIRE(cfg.doa_snr_values() == std::vector<double>{0.0, 5.0, 10.0});

  const json single = {{"doa", {{"snr_db", {{"start", 7.0}, {"stop", 7.0}, {"step", 0.0}}}}}};
  REQUIRE(RunConfig::from_json(single).doa_snr_values() == std::vector<double>{7.0});

  const json bad = {{"doa", {{"snr_db", {{"start", 10.0}, {"stop", 0.0}, {"step", 5.0}}}}}};
  REQUIRE_THROWS_AS(RunConfig::from_json(bad).doa_snr_values(), config_error);
}

TEST_CASE("semantic validation turns bad values into config errors", "[config]") {
  const auto reject = [](const json& user) {
    REQUIRE_THROWS_AS(RunConfig::from_json(user).validate_all(), config_error);
  };
  reject({{"doa", {{"algorithms", json::array({"esprit"})}}}});
  reject({{"doa", {{"material", "Brick"}}}});
  reject({{"doa", {{"degenerate_policy", "ignore"}}}});
  reject({{"doa", {{"monte_carlo_runs", 0}}}});
  reject({{"power", {{"sweep_n_elements", json::array({3})}}}});
  reject({{"array", {{"n_tx", 8}, {"n_rx", 8}, {"grid_nx", 16}, {"grid_ny", 3}}}});
  reject({{"chirp_demo", {{"target_ranges_m", json::array({-1.0})}}}});
}

TEST_CASE("scaling exponent is bounded", "[config]") {
  REQUIRE_THROWS_AS(
      RunConfig::from_json({{"scaling", {{"p_exponent", 4.5}}}}).p_exponent(),
      config_error);
  REQUIRE(RunConfig::from_json({{"scaling", {{"p_exponent", 0.0}}}}).p_exponent() == 0.0);
  REQUIRE(RunConfig::from_json({{"scaling", {{"p_exponent", 4.0}}}}).p_exponent() == 4.0);
}

TEST_CASE("extra materials extend the builtin table", "[config]") {
  const json user = {
      {"link_budget",
       {{"extra_materials",
         json::array({{{"name", "Brick"}, {"thickness_cm", 10.0}, {"loss_db", 40.0}}})},
        {"materials", json::array({"Brick", "Clear Glass"})}}}};
  const RunConfig cfg = RunConfig::from_json(user);
  REQUIRE(cfg.materials().find("Brick").loss_db == Approx(40.0));
  REQUIRE(cfg.link_material_names().size() == 2);

  // Re-declaring a builtin name is a duplicate.
  const json dup = {
      {"link_budget",
       {{"extra_materials",
         json::array({{{"name", "Drywall"}, {"thickness_cm", 1.0}, {"loss_db", 1.0}}})}}}};
  REQUIRE_THROWS_AS(RunConfig::from_json(dup).materials(), config_error);
}

TEST_CASE("more than six targets are rejected", "[config]") {
  json targets = json::array();
  for (int i = 0; i < 7; ++i) {
    targets.push_back({{"theta_deg", static_cast<double>(i)}, {"phi_deg", 0.0},
                       {"amplitude", 1.0}});
  }
  REQUIRE_THROWS_AS(RunConfig::from_json({{"targets", targets}}).targets(), config_error);
}

TEST_CASE("scenario assembles the config pieces", "[config]") {
  const json user = {{"doa", {{"material", "Wood Door"}, {"n_snapshots", 64}}},
                     {"scaling", {{"p_exponent", 3.0}}}};
  const Scenario sc = RunConfig::from_json(user).scenario();
  REQUIRE(sc.n_snapshots == 64);
  REQUIRE(sc.p_exponent == 3.0);
  REQUIRE(sc.material.has_value());
  REQUIRE(sc.material->loss_db == Approx(25.5));
  REQUIRE(sc.geometry.nx == 8);
}

TEST_CASE("effective document echoes every merged value", "[config]") {
  RunConfig cfg = RunConfig::from_json({{"output", {{"directory", "results"}}}});
  cfg.set_override("/doa/monte_carlo_runs", 7);
  const json& doc = cfg.doc();
  REQUIRE(doc.at("output").at("directory") == "results");
  REQUIRE(doc.at("doa").at("monte_carlo_runs") == 7);
  REQUIRE(doc.at("radar").at("frequency_hz") == Approx(140e9));
}
