#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dradar/config.hpp"
#include "dradar/eval.hpp"
#include "dradar/linkbudget.hpp"
#include "dradar/power.hpp"
#include "dradar/waveform.hpp"

namespace dradar {

namespace detail {

// Shortest representation that round-trips a double; the same value always
// prints the same bytes, which keeps output files reproducible.
inline std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing output file: " + path.string());
}

inline std::filesystem::path prepare_output_dir(const RunConfig& cfg) {
  const std::filesystem::path dir(cfg.output_directory());
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_effective_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  write_text_file(dir / "effective_config.json", cfg.doc().dump(2) + "\n");
}

inline std::string array_label(int n_tx, int n_rx) {
  return std::to_string(n_tx) + "x" + std::to_string(n_rx);
}

}  // namespace detail

// DOA accuracy sweep over algorithm x SNR x distance for the configured
// array. Writes doa_sweep.csv / doa_sweep.json plus the effective config.
inline SweepResult run_doa_sweep(const RunConfig& cfg) {
  cfg.validate_all();
  const Scenario base = cfg.scenario();
  const SweepAxes axes = cfg.doa_axes();
  const SweepResult result =
      sweep(base, axes, cfg.monte_carlo_runs(), cfg.master_seed(), cfg.threads());

  const auto dir = detail::prepare_output_dir(cfg);
  std::string csv = "array,algorithm,snr_db,distance_m,rmse_deg,degenerate_runs,m_runs,seed\n";
  json rows = json::array();
  for (const SweepCell& c : result.cells) {
    const std::string label = detail::array_label(c.n_tx, c.n_rx);
    csv += label;
    csv += ',';
    csv += to_string(c.algorithm);
    csv += ',';
    csv += detail::csv_number(c.snr_db);
    csv += ',';
    csv += detail::csv_number(c.distance_m);
    csv += ',';
    csv += detail::csv_number(c.rmse_deg);
    csv += ',';
    csv += std::to_string(c.degenerate_runs);
    csv += ',';
    csv += std::to_string(c.m_runs);
    csv += ',';
    csv += std::to_string(c.cell_seed);
    csv += '\n';
    rows.push_back({{"array", label},
                    {"algorithm", to_string(c.algorithm)},
                    {"snr_db", c.snr_db},
                    {"distance_m", c.distance_m},
                    {"rmse_deg", c.rmse_deg},
                    {"degenerate_runs", c.degenerate_runs},
                    {"m_runs", c.m_runs},
                    {"seed", c.cell_seed}});
  }
  detail::write_text_file(dir / "doa_sweep.csv", csv);
  detail::write_text_file(
      dir / "doa_sweep.json",
      json{{"master_seed", result.master_seed}, {"m_runs", result.m_runs}, {"cells", rows}}
              .dump(2) +
          "\n");
  detail::write_effective_config(cfg, dir);
  return result;
}

struct LinkBudgetRow {
  std::string material;  // "free_space" or a wall material name
  double snr_system_db = 0.0;
  double distance_m = 0.0;
  double tx_power_dbm = 0.0;
};

// Required TX power per element so the full array reaches a system SNR at
// each distance, in free space and through each configured wall. Writes
// link_budget.csv / link_budget.json.
inline std::vector<LinkBudgetRow> run_link_budget(const RunConfig& cfg) {
  cfg.validate_all();
  const LinkBudgetParams params = cfg.link_params();
  const MimoSpec spec = cfg.mimo();
  const MaterialTable table = cfg.materials();

  std::vector<std::pair<std::string, double>> media = {{"free_space", 0.0}};
  for (const std::string& name : cfg.link_material_names()) {
    media.emplace_back(name, table.find(name).loss_db);
  }

  std::vector<LinkBudgetRow> rows;
  for (const auto& [name, loss_db] : media) {
    for (const double snr : cfg.link_snr_values()) {
      for (const double dist : cfg.link_distance_values()) {
        const double free_space_dbm = watt_to_dbm(
            required_tx_power_w_system(params, snr, spec.n_tx, spec.n_rx, dist));
        rows.push_back({name, snr, dist, free_space_dbm + 2.0 * loss_db});
      }
    }
  }

  const auto dir = detail::prepare_output_dir(cfg);
  std::string csv = "material,snr_system_db,distance_m,tx_power_dbm\n";
  json jrows = json::array();
  for (const LinkBudgetRow& r : rows) {
    csv += r.material;
    csv += ',';
    csv += detail::csv_number(r.snr_system_db);
    csv += ',';
    csv += detail::csv_number(r.distance_m);
    csv += ',';
    csv += detail::csv_number(r.tx_power_dbm);
    csv += '\n';
    jrows.push_back({{"material", r.material},
                     {"snr_system_db", r.snr_system_db},
                     {"distance_m", r.distance_m},
                     {"tx_power_dbm", r.tx_power_dbm}});
  }
  detail::write_text_file(dir / "link_budget.csv", csv);
  detail::write_text_file(dir / "link_budget.json",
                          json{{"mimo_gain_db", mimo_snr_gain_db(spec.n_tx, spec.n_rx)},
                               {"rows", jrows}}
                                  .dump(2) +
                              "\n");
  detail::write_effective_config(cfg, dir);
  return rows;
}

struct PowerBudgetRow {
  int n_tx = 0;
  int n_rx = 0;
  double lo_gain_tx_db = 0.0;
  double lo_gain_rx_db = 0.0;
  int lo_amplifiers = 0;  // both trees combined
  double lo_delivered_dbm = 0.0;
  int lo_window_pass = -1;  // -1 when no window is configured
  double lo_window_margin_db = 0.0;
  double dc_lo_w = 0.0;
  double dc_tx_w = 0.0;
  double dc_rx_w = 0.0;
  double dc_total_w = 0.0;
};

// DC budget sweep over symmetric array sizes, splitting LO-network, TX, and
// RX draw. Writes power_budget.csv / power_budget.json.
inline std::vector<PowerBudgetRow> run_power_budget(const RunConfig& cfg) {
  cfg.validate_all();
  const LoNetworkParams lo = cfg.lo_params();
  const TxRxPowerParams base_fe = cfg.front_end();
  const auto window = cfg.lo_window_w();

  std::vector<PowerBudgetRow> rows;
  for (const int n : cfg.power_sweep_elements()) {
    TxRxPowerParams fe = base_fe;
    fe.n_tx = n;
    fe.n_rx = n;
    const LoPowerBreakdown lob = lo_power_breakdown(lo, n, n);
    const PowerBudget budget = total_power_budget(fe, lo);

    PowerBudgetRow row;
    row.n_tx = n;
    row.n_rx = n;
    row.lo_gain_tx_db = linear_to_db(lob.gain_tx);
    row.lo_gain_rx_db = linear_to_db(lob.gain_rx);
    row.lo_amplifiers = lob.amp_count_tx + lob.amp_count_rx;
    row.lo_delivered_dbm = watt_to_dbm(lob.delivered_tx_w);
    if (window) {
      const LoWindowCheck check =
          check_lo_window(lob.delivered_tx_w, window->first, window->second);
      row.lo_window_pass = check.pass ? 1 : 0;
      row.lo_window_margin_db = check.margin_db;
    }
    row.dc_lo_w = budget.lo_dc_w;
    row.dc_tx_w = budget.tx_dc_w;
    row.dc_rx_w = budget.rx_dc_w;
    row.dc_total_w = budget.total_dc_w;
    rows.push_back(row);
  }

  const auto dir = detail::prepare_output_dir(cfg);
  std::string csv =
      "n_tx,n_rx,lo_gain_tx_db,lo_gain_rx_db,lo_amplifiers,lo_delivered_dbm,"
      "lo_window_pass,lo_window_margin_db,dc_lo_w,dc_tx_w,dc_rx_w,dc_total_w\n";
  json jrows = json::array();
  for (const PowerBudgetRow& r : rows) {
    csv += std::to_string(r.n_tx);
    csv += ',';
    csv += std::to_string(r.n_rx);
    csv += ',';
    csv += detail::csv_number(r.lo_gain_tx_db);
    csv += ',';
    csv += detail::csv_number(r.lo_gain_rx_db);
    csv += ',';
    csv += std::to_string(r.lo_amplifiers);
    csv += ',';
    csv += detail::csv_number(r.lo_delivered_dbm);
    csv += ',';
    csv += (r.lo_window_pass < 0 ? std::string() : std::to_string(r.lo_window_pass));
    csv += ',';
    csv += (r.lo_window_pass < 0 ? std::string() : detail::csv_number(r.lo_window_margin_db));
    csv += ',';
    csv += detail::csv_number(r.dc_lo_w);
    csv += ',';
    csv += detail::csv_number(r.dc_tx_w);
    csv += ',';
    csv += detail::csv_number(r.dc_rx_w);
    csv += ',';
    csv += detail::csv_number(r.dc_total_w);
    csv += '\n';
    json jr = {{"n_tx", r.n_tx},
               {"n_rx", r.n_rx},
               {"lo_gain_tx_db", r.lo_gain_tx_db},
               {"lo_gain_rx_db", r.lo_gain_rx_db},
               {"lo_amplifiers", r.lo_amplifiers},
               {"lo_delivered_dbm", r.lo_delivered_dbm},
               {"dc_lo_w", r.dc_lo_w},
               {"dc_tx_w", r.dc_tx_w},
               {"dc_rx_w", r.dc_rx_w},
               {"dc_total_w", r.dc_total_w}};
    if (r.lo_window_pass >= 0) {
      jr["lo_window_pass"] = r.lo_window_pass == 1;
      jr["lo_window_margin_db"] = r.lo_window_margin_db;
    }
    jrows.push_back(jr);
  }
  detail::write_text_file(dir / "power_budget.csv", csv);
  detail::write_text_file(dir / "power_budget.json", json{{"rows", jrows}}.dump(2) + "\n");
  detail::write_effective_config(cfg, dir);
  return rows;
}

// |AF| of the configured virtual array over the coarse search grid, plus
// derived aperture figures. Writes array_factor.csv / array_factor.json.
inline Eigen::MatrixXd run_array_factor(const RunConfig& cfg) {
  cfg.validate_all();
  const ArrayGeometry geom = cfg.geometry();
  const SearchGrid grid = cfg.search_grid();
  const std::vector<double> theta = grid.theta_points();
  const std::vector<double> phi = grid.phi_points();
  const Eigen::MatrixXd map = array_factor_map(geom, theta, phi);

  const auto dir = detail::prepare_output_dir(cfg);
  std::string csv = "theta_deg,phi_deg,af_abs\n";
  for (std::size_t i = 0; i < theta.size(); ++i) {
    for (std::size_t j = 0; j < phi.size(); ++j) {
      csv += detail::csv_number(theta[i]);
      csv += ',';
      csv += detail::csv_number(phi[j]);
      csv += ',';
      csv += detail::csv_number(map(i, j));
      csv += '\n';
    }
  }
  detail::write_text_file(dir / "array_factor.csv", csv);

  const MimoSpec spec = cfg.mimo();
  const double steer_limit = std::min(std::abs(grid.theta_max_deg), 89.0);
  const AngularResolution res = angular_resolution(geom, steer_limit, steer_limit);
  detail::write_text_file(dir / "array_factor.json",
                          json{{"n_tx", spec.n_tx},
                               {"n_rx", spec.n_rx},
                               {"grid_nx", geom.nx},
                               {"grid_ny", geom.ny},
                               {"element_spacing_m", geom.dx_m},
                               {"wavelength_m", geom.wavelength_m},
                               {"azimuth_resolution_deg", res.azimuth_deg},
                               {"elevation_resolution_deg", res.elevation_deg},
                               {"mimo_gain_db", mimo_snr_gain_db(spec.n_tx, spec.n_rx)}}
                                  .dump(2) +
                              "\n");
  detail::write_effective_config(cfg, dir);
  return map;
}

struct ChirpDemoRow {
  int target_index = 0;
  double range_true_m = 0.0;
  double if_frequency_hz = 0.0;
  double range_est_m = 0.0;
  double abs_error_m = 0.0;
};

// Noise-free range recovery: synthesize echoes for each configured range,
// dechirp, and estimate ranges back from the beat spectrum. Writes
// chirp_demo.csv and the combined spectrum as chirp_spectrum.csv.
inline std::vector<ChirpDemoRow> run_chirp_demo(const RunConfig& cfg) {
  cfg.validate_all();
  const ChirpConfig chirp = cfg.chirp();
  const std::size_t n_samples = cfg.chirp_demo_samples();
  const std::vector<double> ranges = cfg.chirp_demo_ranges();

  const ComplexSampleSeries tx = tx_chirp(chirp, n_samples);
  std::vector<ChirpDemoRow> rows;
  ComplexSampleSeries combined = tx;
  for (auto& s : combined.samples) s = {0.0, 0.0};

  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const ComplexSampleSeries echo = rx_echo(chirp, ranges[i], 1.0, n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) combined.samples[k] += echo.samples[k];
    const ComplexSampleSeries beat = dechirp(tx, echo);
    ChirpDemoRow row;
    row.target_index = static_cast<int>(i);
    row.range_true_m = ranges[i];
    row.if_frequency_hz = if_frequency(chirp, ranges[i]);
    row.range_est_m = estimate_range(beat, chirp);
    row.abs_error_m = std::abs(row.range_est_m - row.range_true_m);
    rows.push_back(row);
  }

  const auto dir = detail::prepare_output_dir(cfg);
  std::string csv = "target_index,range_true_m,if_frequency_hz,range_est_m,abs_error_m\n";
  for (const ChirpDemoRow& r : rows) {
    csv += std::to_string(r.target_index);
    csv += ',';
    csv += detail::csv_number(r.range_true_m);
    csv += ',';
    csv += detail::csv_number(r.if_frequency_hz);
    csv += ',';
    csv += detail::csv_number(r.range_est_m);
    csv += ',';
    csv += detail::csv_number(r.abs_error_m);
    csv += '\n';
  }
  detail::write_text_file(dir / "chirp_demo.csv", csv);

  if (!rows.empty()) {
    const ComplexSampleSeries beat_all = dechirp(tx, combined);
    std::size_t n_fft = 0;
    const std::vector<double> mag = detail::padded_magnitude_spectrum(beat_all, &n_fft);
    std::string spectrum_csv = "frequency_hz,magnitude\n";
    for (std::size_t k = 0; k < n_fft; ++k) {
      const double freq =
          static_cast<double>(k) / static_cast<double>(n_fft) * chirp.sampling_rate_hz;
      spectrum_csv += detail::csv_number(freq);
      spectrum_csv += ',';
      spectrum_csv += detail::csv_number(mag[k]);
      spectrum_csv += '\n';
    }
    detail::write_text_file(dir / "chirp_spectrum.csv", spectrum_csv);
  }
  detail::write_effective_config(cfg, dir);
  return rows;
}

}  // namespace dradar
