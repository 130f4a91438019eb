#pragma once

#include <cmath>
#include <stdexcept>

#include "dradar/errors.hpp"
#include "dradar/units.hpp"

namespace dradar {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace detail {

inline void require_tree_size(int n) {
  if (!is_power_of_two(n)) {
    throw config_error("LO distribution tree requires a power-of-two element count");
  }
}

}  // namespace detail

// Corporate (binary tree) LO distribution network feeding n elements from a
// single reference source. Each tree level has one amplifier per branch, a
// splitter, and interconnect, so power seen at a leaf is
//   P_LO = L_D (G L_P)^log2(n) / n * P_REF
// with L_P the per-stage path loss and L_D the final divider loss, both
// linear (< 1). Losses are stored in dB and converted on use.
struct LoNetworkParams {
  double reference_power_w = 1e-3;
  double path_loss_db = 2.0;     // per tree stage
  double divider_loss_db = 1.0;  // final division stage
  double target_lo_tx_w = 10e-3;
  double target_lo_rx_w = 10e-3;
  double gamma_tx_per_w = 400.0;  // amplifier gain per watt of DC drawn
  double gamma_rx_per_w = 400.0;
  double multiplier_power_w = 50e-3;

  void validate() const {
    if (reference_power_w <= 0.0 || target_lo_tx_w <= 0.0 || target_lo_rx_w <= 0.0 ||
        gamma_tx_per_w <= 0.0 || gamma_rx_per_w <= 0.0 || multiplier_power_w < 0.0) {
      throw std::domain_error("LO network powers and efficiencies must be positive");
    }
    if (path_loss_db < 0.0 || divider_loss_db < 0.0) {
      throw std::domain_error("LO losses must be nonnegative dB");
    }
  }
};

// LO power delivered to each of n leaves for a given per-stage gain.
inline double lo_power_delivered_w(double reference_power_w, int n, double gain,
                                   double path_loss_db, double divider_loss_db) {
  detail::require_tree_size(n);
  if (reference_power_w <= 0.0 || gain <= 0.0) {
    throw std::domain_error("reference power and gain must be positive");
  }
  const double l_p = 1.0 / db_to_linear(path_loss_db);
  const double l_d = 1.0 / db_to_linear(divider_loss_db);
  const double stages = std::log2(static_cast<double>(n));
  return l_d * std::pow(gain * l_p, stages) / static_cast<double>(n) * reference_power_w;
}

// Per-stage gain needed so each leaf receives target_w. Inverse of
// lo_power_delivered_w; n = 1 has no stage to put the gain in.
inline double required_lo_gain(double target_w, double reference_power_w, int n,
                               double path_loss_db, double divider_loss_db) {
  detail::require_tree_size(n);
  if (n < 2) throw std::domain_error("LO gain is defined for trees with at least one stage");
  if (target_w <= 0.0 || reference_power_w <= 0.0) {
    throw std::domain_error("LO target and reference power must be positive");
  }
  const double l_p = 1.0 / db_to_linear(path_loss_db);
  const double l_d = 1.0 / db_to_linear(divider_loss_db);
  const double stages = std::log2(static_cast<double>(n));
  const double ratio = static_cast<double>(n) / l_d * target_w / reference_power_w;
  return std::pow(ratio, 1.0 / stages) / l_p;
}

// A binary tree over n leaves contains 2n - 1 amplifiers (one per node).
inline int lo_amp_count(int n) {
  detail::require_tree_size(n);
  return 2 * n - 1;
}

struct LoWindowCheck {
  bool pass = false;
  double margin_db = 0.0;  // distance to the nearest bound; negative if outside
};

// Does the delivered LO power land inside the multiplier's usable input
// window? Margin is the dB headroom to the nearest edge.
inline LoWindowCheck check_lo_window(double delivered_w, double lo_min_w, double lo_max_w) {
  if (delivered_w <= 0.0 || lo_min_w <= 0.0 || lo_max_w <= 0.0) {
    throw std::domain_error("LO window check requires positive powers");
  }
  if (lo_min_w > lo_max_w) throw std::domain_error("LO window is inverted");
  const double lower_db = linear_to_db(delivered_w / lo_min_w);
  const double upper_db = linear_to_db(lo_max_w / delivered_w);
  LoWindowCheck out;
  out.margin_db = std::min(lower_db, upper_db);
  out.pass = out.margin_db >= 0.0;
  return out;
}

// Largest stable amplifier gain for a device with Mason's invariant U:
//   G_max = (sqrt(U) + sqrt(U - 1))^2, U given linear and >= 1.
inline double max_gain_from_u(double u) {
  if (u < 1.0) throw std::domain_error("Mason invariant must be at least 1");
  return std::pow(std::sqrt(u) + std::sqrt(u - 1.0), 2);
}

// DC cost of the LO network: every tree amplifier draws gain/gamma, plus a
// fixed frequency-multiplier budget shared by both trees.
struct LoPowerBreakdown {
  double gain_tx = 0.0;  // linear per-stage gain, TX tree
  double gain_rx = 0.0;
  int amp_count_tx = 0;
  int amp_count_rx = 0;
  double delivered_tx_w = 0.0;  // LO power at each leaf, for window checks
  double delivered_rx_w = 0.0;
  double amplifier_dc_w = 0.0;
  double multiplier_dc_w = 0.0;
  double total_dc_w = 0.0;
};

inline LoPowerBreakdown lo_power_breakdown(const LoNetworkParams& p, int n_tx, int n_rx) {
  p.validate();
  LoPowerBreakdown out;
  out.gain_tx = required_lo_gain(p.target_lo_tx_w, p.reference_power_w, n_tx, p.path_loss_db,
                                 p.divider_loss_db);
  out.gain_rx = required_lo_gain(p.target_lo_rx_w, p.reference_power_w, n_rx, p.path_loss_db,
                                 p.divider_loss_db);
  out.amp_count_tx = lo_amp_count(n_tx);
  out.amp_count_rx = lo_amp_count(n_rx);
  out.delivered_tx_w = lo_power_delivered_w(p.reference_power_w, n_tx, out.gain_tx,
                                            p.path_loss_db, p.divider_loss_db);
  out.delivered_rx_w = lo_power_delivered_w(p.reference_power_w, n_rx, out.gain_rx,
                                            p.path_loss_db, p.divider_loss_db);
  out.amplifier_dc_w = out.amp_count_tx * out.gain_tx / p.gamma_tx_per_w +
                       out.amp_count_rx * out.gain_rx / p.gamma_rx_per_w;
  out.multiplier_dc_w = p.multiplier_power_w;
  out.total_dc_w = out.amplifier_dc_w + out.multiplier_dc_w;
  return out;
}

inline double lo_dc_power_w(const LoNetworkParams& p, int n_tx, int n_rx) {
  return lo_power_breakdown(p, n_tx, n_rx).total_dc_w;
}

// Front-end DC model: TX elements burn radiated power over PA efficiency;
// the RX side is pegged to a fraction of the TX DC draw at the reference
// distance, where both sides were sized.
struct TxRxPowerParams {
  int n_tx = 8;
  int n_rx = 8;
  double tx_element_power_w = 10e-3;  // radiated per TX element at the reference distance
  double tx_efficiency = 0.1;
  double rx_tx_dc_ratio = 0.75;  // RX element DC / TX element DC at the reference distance

  void validate() const {
    if (n_tx < 1 || n_rx < 1) throw config_error("element counts must be positive");
    if (tx_element_power_w <= 0.0) throw std::domain_error("TX element power must be positive");
    if (tx_efficiency <= 0.0 || tx_efficiency > 1.0) {
      throw std::domain_error("TX efficiency must lie in (0, 1]");
    }
    if (rx_tx_dc_ratio < 0.0) throw std::domain_error("RX/TX DC ratio must be nonnegative");
  }
};

// DC drawn by the TX array when each element radiates tx_element_power_w.
inline double tx_dc_power_w(const TxRxPowerParams& p, double tx_element_power_w) {
  p.validate();
  if (tx_element_power_w <= 0.0) throw std::domain_error("TX element power must be positive");
  return p.n_tx * tx_element_power_w / p.tx_efficiency;
}

// DC drawn by the RX array, anchored to the reference-distance TX DC draw.
inline double rx_dc_power_w(const TxRxPowerParams& p) {
  p.validate();
  const double tx_dc_ref = tx_dc_power_w(p, p.tx_element_power_w);
  return p.n_rx * p.rx_tx_dc_ratio * tx_dc_ref / p.n_tx;
}

struct PowerBudget {
  double tx_dc_w = 0.0;
  double rx_dc_w = 0.0;
  double lo_dc_w = 0.0;
  double total_dc_w = 0.0;
};

// Full DC budget with the TX side evaluated at a (possibly distance-scaled)
// per-element radiated power; RX and LO do not scale with distance.
inline PowerBudget total_power_budget(const TxRxPowerParams& front_end,
                                      const LoNetworkParams& lo,
                                      double tx_element_power_at_d_w) {
  PowerBudget out;
  out.tx_dc_w = tx_dc_power_w(front_end, tx_element_power_at_d_w);
  out.rx_dc_w = rx_dc_power_w(front_end);
  out.lo_dc_w = lo_dc_power_w(lo, front_end.n_tx, front_end.n_rx);
  out.total_dc_w = out.tx_dc_w + out.rx_dc_w + out.lo_dc_w;
  return out;
}

inline PowerBudget total_power_budget(const TxRxPowerParams& front_end,
                                      const LoNetworkParams& lo) {
  return total_power_budget(front_end, lo, front_end.tx_element_power_w);
}

}  // namespace dradar
