#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dradar/array.hpp"
#include "dradar/errors.hpp"
#include "dradar/eval.hpp"
#include "dradar/linkbudget.hpp"
#include "dradar/power.hpp"
#include "dradar/units.hpp"
#include "dradar/waveform.hpp"

namespace dradar {

using json = nlohmann::json;

// Complete default configuration. Doubles as the schema: any key a user
// file supplies must exist here with a matching value type.
inline json default_config() {
  return json{
      {"radar",
       {{"frequency_hz", 140e9},
        {"chirp_bandwidth_hz", 10e9},
        {"chirp_duration_s", 10e-6},
        {"chirps_per_frame", 100},
        {"sampling_rate_hz", 0.0},  // 0 = choose from max_range_m
        {"max_range_m", 10.0}}},
      {"array", {{"n_tx", 8}, {"n_rx", 8}, {"grid_nx", 0}, {"grid_ny", 0}}},
      {"scaling", {{"p_exponent", 2.0}, {"reference_distance_m", 1.0}}},
      {"targets",
       json::array({{{"theta_deg", -20.0}, {"phi_deg", -30.0}, {"amplitude", 1.0}},
                    {{"theta_deg", 0.0}, {"phi_deg", 10.0}, {"amplitude", 1.0}},
                    {{"theta_deg", 25.0}, {"phi_deg", 40.0}, {"amplitude", 1.0}}})},
      {"search_grid",
       {{"theta_min_deg", -60.0},
        {"theta_max_deg", 60.0},
        {"phi_min_deg", -60.0},
        {"phi_max_deg", 60.0},
        {"coarse_step_deg", 1.0},
        {"refine_step_deg", 0.05},
        {"refine_window_deg", 1.0}}},
      {"doa",
       {{"algorithms", json::array({"music", "mvdr"})},
        {"n_snapshots", 100},
        {"monte_carlo_runs", 100},
        {"master_seed", 1},
        {"snr_db", {{"start", 0.0}, {"stop", 30.0}, {"step", 5.0}}},
        {"distance_m", {{"start", 1.0}, {"stop", 5.0}, {"step", 2.0}}},
        {"material", ""},  // empty = free space
        {"randomize_targets", false},
        {"min_separation_deg", 2.0},
        {"degenerate_policy", "clamp"},
        {"threads", 0}}},  // 0 = hardware concurrency
      {"link_budget",
       {{"tx_gain_db", 10.0},
        {"rx_gain_db", 10.0},
        {"rcs_m2", 0.01},
        {"measurement_time_s", 1e-3},
        {"noise_figure_db", 10.0},
        {"temperature_k", 290.0},
        {"snr_system_db", {{"start", 0.0}, {"stop", 30.0}, {"step", 5.0}}},
        {"distance_m", {{"start", 1.0}, {"stop", 10.0}, {"step", 1.0}}},
        {"materials", json::array()},  // wall names to add next to free space
        {"extra_materials", json::array()}}},
      {"power",
       {{"lo_reference_power_dbm", 0.0},
        {"lo_target_ratio_db", 10.0},
        {"lo_path_loss_db", 2.0},
        {"lo_divider_loss_db", 1.0},
        {"gamma_tx_per_mw", 0.4},
        {"gamma_rx_per_mw", 0.4},
        {"multiplier_power_mw", 50.0},
        {"tx_element_power_dbm", 10.0},
        {"tx_efficiency", 0.1},
        {"rx_tx_dc_ratio", 0.75},
        {"sweep_n_elements", json::array({2, 4, 8, 16, 32})},
        {"lo_window_min_dbm", 0.0},  // min == max disables the window check
        {"lo_window_max_dbm", 0.0}}},
      {"chirp_demo", {{"target_ranges_m", json::array({1.5, 4.0})}, {"n_samples", 0}}},
      {"output", {{"directory", "out"}}}};
}

namespace detail {

inline bool is_number(const json& j) { return j.is_number_integer() || j.is_number_float(); }

inline std::string type_name(const json& j) {
  if (is_number(j)) return "number";
  return j.type_name();
}

// Element template for arrays whose default is empty.
inline json array_element_template(const std::string& path) {
  if (path == "/link_budget/materials") return json("");
  if (path == "/link_budget/extra_materials") {
    return json{{"name", ""}, {"thickness_cm", 0.0}, {"loss_db", 0.0}};
  }
  throw config_error("no element schema for array at " + path);
}

// Reject unknown keys and type mismatches, recursively, quoting the full
// path of the offending entry.
inline void check_schema(const json& user, const json& schema, const std::string& path) {
  if (schema.is_object()) {
    if (!user.is_object()) {
      throw config_error("config entry " + (path.empty() ? "<root>" : path) +
                         " must be an object");
    }
    for (const auto& [key, value] : user.items()) {
      const std::string child = path + "/" + key;
      if (!schema.contains(key)) throw config_error("unknown config key: " + child);
      check_schema(value, schema.at(key), child);
    }
    return;
  }
  if (schema.is_array()) {
    if (!user.is_array()) throw config_error("config entry " + path + " must be an array");
    const json elem = schema.empty() ? array_element_template(path) : schema.front();
    for (std::size_t i = 0; i < user.size(); ++i) {
      check_schema(user.at(i), elem, path + "/" + std::to_string(i));
    }
    return;
  }
  if (is_number(schema)) {
    if (!is_number(user)) {
      throw config_error("config entry " + path + " must be a number, got " +
                         type_name(user));
    }
    return;
  }
  if (user.type() != schema.type()) {
    throw config_error("config entry " + path + " must be a " + type_name(schema) +
                       ", got " + type_name(user));
  }
}

// Deep merge: objects merge key by key, everything else (including arrays)
// is replaced wholesale by the user value.
inline json merge_config(json base, const json& user) {
  if (!base.is_object() || !user.is_object()) return user;
  for (const auto& [key, value] : user.items()) {
    if (base.contains(key) && base.at(key).is_object() && value.is_object()) {
      base[key] = merge_config(base.at(key), value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

// Inclusive start..stop sweep; step <= 0 is only allowed for a single point.
inline std::vector<double> range_values(const json& r, const std::string& path) {
  const double start = r.at("start").get<double>();
  const double stop = r.at("stop").get<double>();
  const double step = r.at("step").get<double>();
  if (stop < start) throw config_error("config entry " + path + ": stop < start");
  if (step <= 0.0) {
    if (start == stop) return {start};
    throw config_error("config entry " + path + ": step must be positive");
  }
  return SearchGrid::points(start, stop, step);
}

inline int checked_int(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<int>();
  const double v = j.get<double>();
  if (v != std::floor(v)) throw config_error("config entry " + path + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace detail

// Parsed and merged run configuration. Values resolve with the precedence
// command-line flag > config file > built-in default; flags arrive through
// set_override after the file is loaded.
class RunConfig {
 public:
  static RunConfig defaults() { return RunConfig(default_config()); }

  static RunConfig from_json(const json& user) {
    detail::check_schema(user, default_config(), "");
    return RunConfig(detail::merge_config(default_config(), user));
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    json user;
    try {
      user = json::parse(in);
    } catch (const json::parse_error& e) {
      throw config_error("config file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(user);
  }

  // Replace one entry by JSON pointer, e.g. "/doa/master_seed". The path
  // must exist in the schema.
  void set_override(const std::string& pointer, json value) {
    const json::json_pointer p(pointer);
    json probe = json::object();
    probe[p] = value;
    detail::check_schema(probe, default_config(), "");
    doc_[p] = std::move(value);
  }

  const json& doc() const { return doc_; }

  // --- typed views -------------------------------------------------------

  double frequency_hz() const { return doc_.at("radar").at("frequency_hz").get<double>(); }
  double wavelength_m() const { return wavelength_from_frequency(frequency_hz()); }

  ChirpConfig chirp() const {
    const json& r = doc_.at("radar");
    ChirpConfig c;
    c.start_frequency_hz = r.at("frequency_hz").get<double>();
    c.bandwidth_hz = r.at("chirp_bandwidth_hz").get<double>();
    c.duration_s = r.at("chirp_duration_s").get<double>();
    c.chirps_per_frame = detail::checked_int(r.at("chirps_per_frame"), "/radar/chirps_per_frame");
    c.sampling_rate_hz = r.at("sampling_rate_hz").get<double>();
    if (c.sampling_rate_hz == 0.0) {
      ChirpConfig probe = c;
      probe.sampling_rate_hz = 1.0;  // satisfy validation inside the helper
      c.sampling_rate_hz = default_sampling_rate(probe, max_range_m());
    }
    c.validate();
    return c;
  }

  double max_range_m() const {
    const double v = doc_.at("radar").at("max_range_m").get<double>();
    if (v <= 0.0) throw config_error("config entry /radar/max_range_m must be positive");
    return v;
  }

  MimoSpec mimo() const {
    const json& a = doc_.at("array");
    const int n_tx = detail::checked_int(a.at("n_tx"), "/array/n_tx");
    const int n_rx = detail::checked_int(a.at("n_rx"), "/array/n_rx");
    const int gx = detail::checked_int(a.at("grid_nx"), "/array/grid_nx");
    const int gy = detail::checked_int(a.at("grid_ny"), "/array/grid_ny");
    if (gx == 0 && gy == 0) return make_mimo_spec(n_tx, n_rx);
    return make_mimo_spec(n_tx, n_rx, gx, gy);
  }

  ArrayGeometry geometry() const { return virtual_array(mimo(), wavelength_m()); }

  TargetSet targets() const {
    TargetSet set;
    for (const json& t : doc_.at("targets")) {
      Target target;
      target.direction = {t.at("theta_deg").get<double>(), t.at("phi_deg").get<double>()};
      target.amplitude = {t.at("amplitude").get<double>(), 0.0};
      set.targets.push_back(target);
    }
    set.validate();
    if (set.count() > 6) throw config_error("at most 6 targets are supported");
    return set;
  }

  SearchGrid search_grid() const {
    const json& g = doc_.at("search_grid");
    SearchGrid grid;
    grid.theta_min_deg = g.at("theta_min_deg").get<double>();
    grid.theta_max_deg = g.at("theta_max_deg").get<double>();
    grid.phi_min_deg = g.at("phi_min_deg").get<double>();
    grid.phi_max_deg = g.at("phi_max_deg").get<double>();
    grid.coarse_step_deg = g.at("coarse_step_deg").get<double>();
    grid.refine_step_deg = g.at("refine_step_deg").get<double>();
    grid.refine_window_deg = g.at("refine_window_deg").get<double>();
    grid.validate();
    return grid;
  }

  std::vector<DoaAlgorithm> algorithms() const {
    std::vector<DoaAlgorithm> out;
    for (const json& a : doc_.at("doa").at("algorithms")) {
      const std::string name = a.get<std::string>();
      if (name == "music") {
        out.push_back(DoaAlgorithm::music);
      } else if (name == "mvdr") {
        out.push_back(DoaAlgorithm::mvdr);
      } else {
        throw config_error("unknown DOA algorithm: " + name);
      }
    }
    if (out.empty()) throw config_error("config entry /doa/algorithms must be nonempty");
    return out;
  }

  DegeneratePolicy degenerate_policy() const {
    const std::string p = doc_.at("doa").at("degenerate_policy").get<std::string>();
    if (p == "clamp") return DegeneratePolicy::clamp;
    if (p == "fail") return DegeneratePolicy::fail;
    throw config_error("unknown degenerate policy: " + p);
  }

  int monte_carlo_runs() const {
    const int m = detail::checked_int(doc_.at("doa").at("monte_carlo_runs"),
                                      "/doa/monte_carlo_runs");
    if (m < 1) throw config_error("config entry /doa/monte_carlo_runs must be at least 1");
    return m;
  }

  std::uint64_t master_seed() const {
    return doc_.at("doa").at("master_seed").get<std::uint64_t>();
  }

  int threads() const {
    const int t = detail::checked_int(doc_.at("doa").at("threads"), "/doa/threads");
    if (t < 0) throw config_error("config entry /doa/threads must be nonnegative");
    return t;
  }

  std::vector<double> doa_snr_values() const {
    return detail::range_values(doc_.at("doa").at("snr_db"), "/doa/snr_db");
  }

  std::vector<double> doa_distance_values() const {
    const auto v = detail::range_values(doc_.at("doa").at("distance_m"), "/doa/distance_m");
    for (double d : v) {
      if (d <= 0.0) throw config_error("config entry /doa/distance_m must be positive");
    }
    return v;
  }

  MaterialTable materials() const {
    MaterialTable table = MaterialTable::builtin();
    for (const json& m : doc_.at("link_budget").at("extra_materials")) {
      table.add({m.at("name").get<std::string>(), m.at("thickness_cm").get<double>(),
                 m.at("loss_db").get<double>()});
    }
    return table;
  }

  std::optional<WallMaterial> doa_material() const {
    const std::string name = doc_.at("doa").at("material").get<std::string>();
    if (name.empty()) return std::nullopt;
    return materials().find(name);
  }

  double p_exponent() const {
    const double p = doc_.at("scaling").at("p_exponent").get<double>();
    if (p < 0.0 || p > 4.0) {
      throw config_error("config entry /scaling/p_exponent must lie in [0, 4]");
    }
    return p;
  }

  double reference_distance_m() const {
    const double d = doc_.at("scaling").at("reference_distance_m").get<double>();
    if (d <= 0.0) {
      throw config_error("config entry /scaling/reference_distance_m must be positive");
    }
    return d;
  }

  // Base scenario for the DOA sweep; SNR, distance, algorithm, and geometry
  // are overwritten per sweep cell.
  Scenario scenario() const {
    const json& d = doc_.at("doa");
    Scenario sc;
    sc.geometry = geometry();
    sc.targets = targets();
    sc.reference_distance_m = reference_distance_m();
    sc.p_exponent = p_exponent();
    sc.n_snapshots = detail::checked_int(d.at("n_snapshots"), "/doa/n_snapshots");
    sc.grid = search_grid();
    sc.material = doa_material();
    sc.randomize_targets = d.at("randomize_targets").get<bool>();
    sc.min_separation_deg = d.at("min_separation_deg").get<double>();
    sc.degenerate_policy = degenerate_policy();
    sc.algorithm = algorithms().front();
    sc.validate();
    return sc;
  }

  SweepAxes doa_axes() const {
    SweepAxes axes;
    axes.arrays = {mimo()};
    axes.algorithms = algorithms();
    axes.snr_db = doa_snr_values();
    axes.distance_m = doa_distance_values();
    axes.validate();
    return axes;
  }

  LinkBudgetParams link_params() const {
    const json& l = doc_.at("link_budget");
    LinkBudgetParams p;
    p.tx_power_w = 1e-3;  // placeholder; required-power queries ignore it
    p.tx_gain = db_to_linear(l.at("tx_gain_db").get<double>());
    p.rx_gain = db_to_linear(l.at("rx_gain_db").get<double>());
    p.wavelength_m = wavelength_m();
    p.rcs_m2 = l.at("rcs_m2").get<double>();
    p.measurement_time_s = l.at("measurement_time_s").get<double>();
    p.temperature_k = l.at("temperature_k").get<double>();
    p.noise_factor = db_to_linear(l.at("noise_figure_db").get<double>());
    p.reference_distance_m = reference_distance_m();
    p.p_exponent = p_exponent();
    p.validate();
    return p;
  }

  std::vector<double> link_snr_values() const {
    return detail::range_values(doc_.at("link_budget").at("snr_system_db"),
                                "/link_budget/snr_system_db");
  }

  std::vector<double> link_distance_values() const {
    const auto v = detail::range_values(doc_.at("link_budget").at("distance_m"),
                                        "/link_budget/distance_m");
    for (double d : v) {
      if (d <= 0.0) throw config_error("config entry /link_budget/distance_m must be positive");
    }
    return v;
  }

  std::vector<std::string> link_material_names() const {
    std::vector<std::string> out;
    const MaterialTable table = materials();
    for (const json& m : doc_.at("link_budget").at("materials")) {
      out.push_back(table.find(m.get<std::string>()).name);  // resolves or throws
    }
    return out;
  }

  LoNetworkParams lo_params() const {
    const json& p = doc_.at("power");
    LoNetworkParams lo;
    lo.reference_power_w = dbm_to_watt(p.at("lo_reference_power_dbm").get<double>());
    lo.path_loss_db = p.at("lo_path_loss_db").get<double>();
    lo.divider_loss_db = p.at("lo_divider_loss_db").get<double>();
    const double target_w =
        lo.reference_power_w * db_to_linear(p.at("lo_target_ratio_db").get<double>());
    lo.target_lo_tx_w = target_w;
    lo.target_lo_rx_w = target_w;
    lo.gamma_tx_per_w = p.at("gamma_tx_per_mw").get<double>() * 1e3;
    lo.gamma_rx_per_w = p.at("gamma_rx_per_mw").get<double>() * 1e3;
    lo.multiplier_power_w = p.at("multiplier_power_mw").get<double>() * 1e-3;
    lo.validate();
    return lo;
  }

  TxRxPowerParams front_end() const {
    const json& p = doc_.at("power");
    const MimoSpec spec = mimo();
    TxRxPowerParams fe;
    fe.n_tx = spec.n_tx;
    fe.n_rx = spec.n_rx;
    fe.tx_element_power_w = dbm_to_watt(p.at("tx_element_power_dbm").get<double>());
    fe.tx_efficiency = p.at("tx_efficiency").get<double>();
    fe.rx_tx_dc_ratio = p.at("rx_tx_dc_ratio").get<double>();
    fe.validate();
    return fe;
  }

  std::vector<int> power_sweep_elements() const {
    std::vector<int> out;
    for (const json& n : doc_.at("power").at("sweep_n_elements")) {
      const int v = detail::checked_int(n, "/power/sweep_n_elements");
      if (!is_power_of_two(v)) {
        throw config_error("config entry /power/sweep_n_elements must hold powers of two");
      }
      out.push_back(v);
    }
    if (out.empty()) {
      throw config_error("config entry /power/sweep_n_elements must be nonempty");
    }
    return out;
  }

  // LO window in watts; nullopt when min == max (check disabled).
  std::optional<std::pair<double, double>> lo_window_w() const {
    const json& p = doc_.at("power");
    const double lo = p.at("lo_window_min_dbm").get<double>();
    const double hi = p.at("lo_window_max_dbm").get<double>();
    if (lo == hi) return std::nullopt;
    if (lo > hi) throw config_error("config entry /power: LO window is inverted");
    return std::make_pair(dbm_to_watt(lo), dbm_to_watt(hi));
  }

  std::vector<double> chirp_demo_ranges() const {
    std::vector<double> out;
    for (const json& r : doc_.at("chirp_demo").at("target_ranges_m")) {
      const double v = r.get<double>();
      if (v <= 0.0 || v > max_range_m()) {
        throw config_error("config entry /chirp_demo/target_ranges_m must lie in (0, max_range_m]");
      }
      out.push_back(v);
    }
    return out;
  }

  std::size_t chirp_demo_samples() const {
    const int n = detail::checked_int(doc_.at("chirp_demo").at("n_samples"),
                                      "/chirp_demo/n_samples");
    if (n < 0) throw config_error("config entry /chirp_demo/n_samples must be nonnegative");
    if (n == 0) {
      const ChirpConfig c = chirp();
      return static_cast<std::size_t>(std::floor(c.sampling_rate_hz * c.duration_s));
    }
    return static_cast<std::size_t>(n);
  }

  std::string output_directory() const {
    return doc_.at("output").at("directory").get<std::string>();
  }

  // Construct every typed view once so bad values surface as config errors
  // before any computation starts.
  void validate_all() const {
    chirp();
    geometry();
    targets();
    search_grid();
    scenario();
    doa_axes();
    monte_carlo_runs();
    threads();
    link_params();
    link_snr_values();
    link_distance_values();
    link_material_names();
    lo_params();
    front_end();
    power_sweep_elements();
    lo_window_w();
    chirp_demo_ranges();
    chirp_demo_samples();
    output_directory();
  }

 private:
  explicit RunConfig(json doc) : doc_(std::move(doc)) {}

  json doc_;
};

}  // namespace dradar
