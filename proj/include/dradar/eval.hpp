#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dradar/doa.hpp"
#include "dradar/linkbudget.hpp"
#include "dradar/rng.hpp"

namespace dradar {

// What to do with a Monte-Carlo run whose spectrum yields fewer peaks than
// targets: score it with missing estimates clamped to the far grid corner
// (a worst-case penalty), or abort the whole evaluation.
enum class DegeneratePolicy { clamp, fail };

// One Monte-Carlo configuration: an array observing a target set at some
// distance, with the per-element SNR quoted at a reference distance and
// scaled to the evaluation distance by the (d0/d)^p law, optionally
// attenuated twice by a wall.
struct Scenario {
  ArrayGeometry geometry;
  TargetSet targets;
  double snr_nominal_db = 20.0;  // per element, at the reference distance
  double reference_distance_m = 1.0;
  double distance_m = 1.0;
  double p_exponent = 2.0;
  int n_snapshots = 100;
  DoaAlgorithm algorithm = DoaAlgorithm::music;
  SearchGrid grid;
  std::optional<WallMaterial> material;
  bool randomize_targets = false;
  double min_separation_deg = 2.0;
  DegeneratePolicy degenerate_policy = DegeneratePolicy::clamp;

  void validate() const {
    geometry.validate();
    targets.validate();
    grid.validate();
    if (targets.count() > 6) {
      throw std::invalid_argument("at most 6 targets are supported");
    }
    if (reference_distance_m <= 0.0 || distance_m <= 0.0) {
      throw std::domain_error("distances must be positive");
    }
    if (p_exponent < 0.0 || p_exponent > 4.0) {
      throw std::domain_error("scaling exponent must lie in [0, 4]");
    }
    if (n_snapshots < 1) throw std::invalid_argument("need at least one snapshot");
    if (randomize_targets && min_separation_deg <= 0.0) {
      throw std::domain_error("minimum target separation must be positive");
    }
  }
};

// Per-element SNR actually simulated for the scenario.
inline double scenario_snr_db(const Scenario& sc) {
  double snr = scaled_snr_db(sc.snr_nominal_db, sc.reference_distance_m, sc.distance_m,
                             sc.p_exponent);
  if (sc.material) snr = through_wall_snr_db(snr, *sc.material);
  return snr;
}

inline double angular_sq_error(const Direction& a, const Direction& b) {
  const double dt = a.theta_deg - b.theta_deg;
  const double dp = a.phi_deg - b.phi_deg;
  return dt * dt + dp * dp;
}

// Map estimates onto ground-truth targets: returns the permutation perm with
// estimates[perm[i]] paired to truth[i] that minimizes the total squared
// angular error. Brute force over K! orderings; K is capped at 6, where 720
// candidates are still trivial. Ties resolve to the lexicographically
// smallest permutation.
inline std::vector<std::size_t> assign_targets(const std::vector<Direction>& estimates,
                                               const std::vector<Direction>& truth) {
  if (estimates.size() != truth.size()) {
    throw std::invalid_argument("estimate and truth counts must match");
  }
  if (truth.empty()) throw std::invalid_argument("assignment needs at least one target");
  if (truth.size() > 6) throw std::invalid_argument("at most 6 targets are supported");

  std::vector<std::size_t> perm(truth.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      cost += angular_sq_error(estimates[perm[i]], truth[i]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Total squared angular error of the optimal estimate-to-truth pairing.
inline double assigned_sq_error(const std::vector<Direction>& estimates,
                                const std::vector<Direction>& truth) {
  const std::vector<std::size_t> perm = assign_targets(estimates, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    sum += angular_sq_error(estimates[perm[i]], truth[i]);
  }
  return sum;
}

// RMSE over M runs of K estimates each, with per-run optimal assignment:
// sqrt( (1 / (M K)) sum_m sum_k [(theta_err)^2 + (phi_err)^2] ) in degrees.
inline double rmse(const std::vector<std::vector<Direction>>& estimate_runs,
                   const std::vector<Direction>& truth) {
  if (estimate_runs.empty()) throw std::invalid_argument("RMSE needs at least one run");
  double total = 0.0;
  for (const auto& run : estimate_runs) {
    total += assigned_sq_error(run, truth);
  }
  return std::sqrt(total / (static_cast<double>(estimate_runs.size()) * truth.size()));
}

struct RunRecord {
  std::vector<Direction> estimates;
  std::vector<Direction> truth;
  double sq_error_sum = 0.0;
  bool degenerate = false;
};

struct MonteCarloResult {
  double rmse_deg = 0.0;
  int degenerate_runs = 0;
  int m_runs = 0;
  std::vector<RunRecord> runs;
};

namespace detail {

// Rejection-sample a target set with pairwise separation of at least
// min_separation_deg in the (theta, phi) plane, inside the search bounds.
inline TargetSet draw_targets(std::size_t count, const SearchGrid& grid,
                              double min_separation_deg, GaussianSource& rng) {
  TargetSet set;
  const int max_attempts = 10000;
  for (std::size_t i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      Direction cand{rng.uniform(grid.theta_min_deg, grid.theta_max_deg),
                     rng.uniform(grid.phi_min_deg, grid.phi_max_deg)};
      placed = true;
      for (const Target& t : set.targets) {
        if (std::sqrt(angular_sq_error(cand, t.direction)) < min_separation_deg) {
          placed = false;
          break;
        }
      }
      if (placed) set.targets.push_back({cand, {1.0, 0.0}});
    }
    if (!placed) {
      throw std::runtime_error("could not place separated targets inside the search bounds");
    }
  }
  return set;
}

inline std::vector<Direction> run_estimate(const Scenario& sc, const SnapshotMatrix& x,
                                           RunRecord& rec) {
  const int k = static_cast<int>(sc.targets.count());
  try {
    return estimate_doa(x, sc.geometry, k, sc.algorithm, sc.grid).directions;
  } catch (const degenerate_spectrum_error& e) {
    if (sc.degenerate_policy == DegeneratePolicy::fail) throw;
    rec.degenerate = true;
    std::vector<Direction> padded = e.found();
    while (padded.size() < static_cast<std::size_t>(k)) {
      padded.push_back({sc.grid.theta_max_deg, sc.grid.phi_max_deg});
    }
    return padded;
  }
}

// One Monte-Carlo run, fully determined by its seed. Draw slot 0 seeds
// random target placement, slot 1 the snapshot noise, so toggling
// randomization does not disturb the noise stream.
inline RunRecord run_once(const Scenario& sc, double snr_sim_db, std::uint64_t run_seed) {
  RunRecord rec;
  if (sc.randomize_targets) {
    GaussianSource placement(derive_seed(run_seed, 0));
    rec.truth.clear();
    TargetSet drawn =
        draw_targets(sc.targets.count(), sc.grid, sc.min_separation_deg, placement);
    for (const Target& t : drawn.targets) rec.truth.push_back(t.direction);
    const SnapshotMatrix x = synthesize_snapshots(sc.geometry, drawn, snr_sim_db,
                                                  sc.n_snapshots, derive_seed(run_seed, 1));
    rec.estimates = run_estimate(sc, x, rec);
  } else {
    for (const Target& t : sc.targets.targets) rec.truth.push_back(t.direction);
    const SnapshotMatrix x = synthesize_snapshots(sc.geometry, sc.targets, snr_sim_db,
                                                  sc.n_snapshots, derive_seed(run_seed, 1));
    rec.estimates = run_estimate(sc, x, rec);
  }
  rec.sq_error_sum = assigned_sq_error(rec.estimates, rec.truth);
  return rec;
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace detail

// M independent runs of the scenario. Run r draws its own generator seeded
// by derive_seed(master_seed, r), so the result is a pure function of
// (scenario, m_runs, master_seed) regardless of thread count or scheduling:
// workers fill a per-run slot table and aggregation walks it in run order.
inline MonteCarloResult run_monte_carlo(const Scenario& sc, int m_runs,
                                        std::uint64_t master_seed, int n_threads = 1) {
  sc.validate();
  if (m_runs < 1) throw std::invalid_argument("need at least one run");
  const double snr_sim_db = scenario_snr_db(sc);

  MonteCarloResult result;
  result.m_runs = m_runs;
  result.runs.resize(m_runs);
  std::vector<std::exception_ptr> failures(m_runs);

  const int workers = std::min(detail::resolve_threads(n_threads), m_runs);
  std::atomic<int> next_run{0};
  const auto work = [&]() {
    for (int r = next_run.fetch_add(1); r < m_runs; r = next_run.fetch_add(1)) {
      try {
        result.runs[r] = detail::run_once(sc, snr_sim_db, derive_seed(master_seed, r));
      } catch (...) {
        failures[r] = std::current_exception();
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (int r = 0; r < m_runs; ++r) {
    if (failures[r]) std::rethrow_exception(failures[r]);
  }

  double total = 0.0;
  for (const RunRecord& rec : result.runs) {
    total += rec.sq_error_sum;
    if (rec.degenerate) ++result.degenerate_runs;
  }
  result.rmse_deg =
      std::sqrt(total / (static_cast<double>(m_runs) * sc.targets.count()));
  return result;
}

// Cartesian sweep axes, iterated array-major, then algorithm, SNR, distance.
struct SweepAxes {
  std::vector<MimoSpec> arrays;
  std::vector<DoaAlgorithm> algorithms;
  std::vector<double> snr_db;
  std::vector<double> distance_m;

  void validate() const {
    if (arrays.empty() || algorithms.empty() || snr_db.empty() || distance_m.empty()) {
      throw std::invalid_argument("sweep axes must be nonempty");
    }
    for (const MimoSpec& a : arrays) a.validate();
  }
};

struct SweepCell {
  int n_tx = 0;
  int n_rx = 0;
  DoaAlgorithm algorithm = DoaAlgorithm::music;
  double snr_db = 0.0;
  double distance_m = 0.0;
  double rmse_deg = 0.0;
  int degenerate_runs = 0;
  int m_runs = 0;
  std::uint64_t cell_seed = 0;
};

struct SweepResult {
  SweepAxes axes;
  int m_runs = 0;
  std::uint64_t master_seed = 0;
  std::vector<SweepCell> cells;
};

// Monte-Carlo RMSE over every axis combination. Each cell reseeds from
// (master_seed, cell index), so adding or removing cells elsewhere in the
// sweep does not change a given cell's result, and per-cell runs parallelize
// without affecting values.
inline SweepResult sweep(const Scenario& base, const SweepAxes& axes, int m_runs,
                         std::uint64_t master_seed, int n_threads = 1) {
  axes.validate();
  SweepResult out;
  out.axes = axes;
  out.m_runs = m_runs;
  out.master_seed = master_seed;

  std::uint64_t cell_index = 0;
  for (const MimoSpec& array : axes.arrays) {
    const ArrayGeometry geom = virtual_array(array, base.geometry.wavelength_m);
    for (const DoaAlgorithm algo : axes.algorithms) {
      for (const double snr : axes.snr_db) {
        for (const double dist : axes.distance_m) {
          Scenario sc = base;
          sc.geometry = geom;
          sc.algorithm = algo;
          sc.snr_nominal_db = snr;
          sc.distance_m = dist;

          SweepCell cell;
          cell.n_tx = array.n_tx;
          cell.n_rx = array.n_rx;
          cell.algorithm = algo;
          cell.snr_db = snr;
          cell.distance_m = dist;
          cell.m_runs = m_runs;
          cell.cell_seed = derive_seed(master_seed, cell_index++);

          const MonteCarloResult mc = run_monte_carlo(sc, m_runs, cell.cell_seed, n_threads);
          cell.rmse_deg = mc.rmse_deg;
          cell.degenerate_runs = mc.degenerate_runs;
          out.cells.push_back(cell);
        }
      }
    }
  }
  return out;
}

}  // namespace dradar
