#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dradar/array.hpp"
#include "dradar/rng.hpp"
#include "dradar/units.hpp"

namespace dradar {

struct Target {
  Direction direction;
  std::complex<double> amplitude{1.0, 0.0};
};

struct TargetSet {
  std::vector<Target> targets;

  std::size_t count() const { return targets.size(); }

  void validate() const {
    if (targets.empty()) throw std::invalid_argument("target set must not be empty");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      targets[i].direction.validate();
      for (std::size_t j = i + 1; j < targets.size(); ++j) {
        if (targets[i].direction.theta_deg == targets[j].direction.theta_deg &&
            targets[i].direction.phi_deg == targets[j].direction.phi_deg) {
          throw std::invalid_argument("target directions must be pairwise distinct");
        }
      }
    }
  }
};

// Array output samples: one row per element, one column per snapshot.
struct SnapshotMatrix {
  Eigen::MatrixXcd data;
  double snr_db = 0.0;

  Eigen::Index elements() const { return data.rows(); }
  Eigen::Index snapshots() const { return data.cols(); }
};

struct SpatialSpectrum {
  std::vector<double> theta_grid_deg;
  std::vector<double> phi_grid_deg;
  Eigen::MatrixXd values;  // values(i, j) at (theta_grid[i], phi_grid[j])
};

enum class DoaAlgorithm { music, mvdr };

inline const char* to_string(DoaAlgorithm a) {
  return a == DoaAlgorithm::music ? "music" : "mvdr";
}

struct DoaEstimate {
  std::vector<Direction> directions;
  DoaAlgorithm algorithm = DoaAlgorithm::music;
};

// Thrown when a spectrum exposes fewer strict local maxima than requested
// targets. Carries the peaks that were found so callers can apply a penalty
// policy instead of dropping the run.
class degenerate_spectrum_error : public std::runtime_error {
 public:
  degenerate_spectrum_error(std::size_t requested, std::vector<Direction> found)
      : std::runtime_error("spectrum has " + std::to_string(found.size()) +
                           " local maxima, " + std::to_string(requested) + " requested"),
        requested_(requested),
        found_(std::move(found)) {}

  std::size_t requested() const { return requested_; }
  const std::vector<Direction>& found() const { return found_; }

 private:
  std::size_t requested_;
  std::vector<Direction> found_;
};

// Two-stage angular search: a coarse grid over the antenna field of view,
// then a fine step inside a small window around each coarse peak.
struct SearchGrid {
  double theta_min_deg = -60.0;
  double theta_max_deg = 60.0;
  double phi_min_deg = -60.0;
  double phi_max_deg = 60.0;
  double coarse_step_deg = 1.0;
  double refine_step_deg = 0.05;
  double refine_window_deg = 1.0;

  void validate() const {
    if (theta_min_deg > theta_max_deg || phi_min_deg > phi_max_deg) {
      throw std::invalid_argument("search grid bounds are inverted");
    }
    if (coarse_step_deg <= 0.0 || refine_step_deg <= 0.0 || refine_window_deg <= 0.0) {
      throw std::invalid_argument("search grid steps must be positive");
    }
  }

  std::vector<double> theta_points() const {
    return points(theta_min_deg, theta_max_deg, coarse_step_deg);
  }
  std::vector<double> phi_points() const {
    return points(phi_min_deg, phi_max_deg, coarse_step_deg);
  }

  static std::vector<double> points(double lo, double hi, double step) {
    std::vector<double> p;
    const double eps = step * 1e-9;
    for (int i = 0;; ++i) {
      const double v = lo + i * step;
      if (v > hi + eps) break;
      p.push_back(std::min(v, hi));
    }
    return p;
  }
};

// Synthesize array snapshots for targets in additive white Gaussian noise:
// x[k] = A s[k] + n[k], with A the steering matrix of the target directions.
// Per source, the signal-to-noise power ratio per element is 10^(snr_db/10):
// sources are drawn with variance 10^(snr_db/10) |amplitude|^2 against unit
// noise variance. snr_db = +inf produces noise-free snapshots.
//
// Draw order is fixed (all source samples snapshot by snapshot, then all
// noise samples), so a seed fully determines the result.
inline SnapshotMatrix synthesize_snapshots(const ArrayGeometry& geom,
                                           const TargetSet& targets, double snr_db,
                                           int n_snapshots, std::uint64_t seed) {
  geom.validate();
  targets.validate();
  if (n_snapshots < 1) throw std::invalid_argument("need at least one snapshot");

  const int n_elements = geom.size();
  const auto k_targets = static_cast<Eigen::Index>(targets.count());

  Eigen::MatrixXcd steering(n_elements, k_targets);
  for (Eigen::Index i = 0; i < k_targets; ++i) {
    steering.col(i) = steering_vector(geom, targets.targets[i].direction);
  }

  GaussianSource rng(seed);
  const bool noiseless = std::isinf(snr_db) && snr_db > 0.0;
  const double source_variance = noiseless ? 1.0 : db_to_linear(snr_db);

  Eigen::MatrixXcd sources(k_targets, n_snapshots);
  for (int k = 0; k < n_snapshots; ++k) {
    for (Eigen::Index i = 0; i < k_targets; ++i) {
      sources(i, k) = targets.targets[i].amplitude * rng.complex_gaussian(source_variance);
    }
  }

  SnapshotMatrix out;
  out.snr_db = snr_db;
  out.data = steering * sources;
  if (!noiseless) {
    for (int k = 0; k < n_snapshots; ++k) {
      for (int m = 0; m < n_elements; ++m) {
        out.data(m, k) += rng.complex_gaussian(1.0);
      }
    }
  }
  return out;
}

// Sample covariance (1/Ns) sum_k x[k] x[k]^H, symmetrized.
inline Eigen::MatrixXcd sample_covariance(const SnapshotMatrix& x) {
  if (x.snapshots() < 1) throw std::invalid_argument("need at least one snapshot");
  Eigen::MatrixXcd r =
      (x.data * x.data.adjoint()) / static_cast<double>(x.snapshots());
  return 0.5 * (r + r.adjoint());
}

namespace detail {

inline constexpr double spectrum_floor = 1e-12;

inline void check_hermitian(const Eigen::MatrixXcd& r) {
  if (r.rows() != r.cols()) throw std::invalid_argument("covariance matrix must be square");
  const double scale = std::max(r.cwiseAbs().maxCoeff(), 1e-300);
  const double dev = (r - r.adjoint()).cwiseAbs().maxCoeff();
  if (dev > 1e-9 * scale) {
    throw std::invalid_argument("covariance matrix is not Hermitian");
  }
}

// Steering vectors for every (theta, phi) grid pair, one column per pair
// (theta-major), each scaled to unit norm. The per-element phase splits as
// m*psi_x + n*psi_y, so columns are built from two short per-axis tables.
inline Eigen::MatrixXcd unit_steering_grid(const ArrayGeometry& geom,
                                           const std::vector<double>& theta_grid_deg,
                                           const std::vector<double>& phi_grid_deg) {
  const int nx = geom.nx;
  const int ny = geom.ny;
  const double norm = 1.0 / std::sqrt(static_cast<double>(nx * ny));
  const double wave_number = 2.0 * pi / geom.wavelength_m;

  const auto n_theta = static_cast<Eigen::Index>(theta_grid_deg.size());
  const auto n_phi = static_cast<Eigen::Index>(phi_grid_deg.size());
  Eigen::MatrixXcd grid(nx * ny, n_theta * n_phi);

  std::vector<std::complex<double>> ax(nx), ay(ny);
  for (Eigen::Index ti = 0; ti < n_theta; ++ti) {
    const double theta = deg_to_rad(theta_grid_deg[ti]);
    for (Eigen::Index pj = 0; pj < n_phi; ++pj) {
      const double phi = deg_to_rad(phi_grid_deg[pj]);
      const auto [psi_x, psi_y] = phase_increments_rad(
          wave_number * geom.dx_m, wave_number * geom.dy_m, theta, phi);
      for (int m = 0; m < nx; ++m) {
        const double p = m * psi_x;
        ax[m] = {std::cos(p), std::sin(p)};
      }
      for (int n = 0; n < ny; ++n) {
        const double p = n * psi_y;
        ay[n] = {norm * std::cos(p), norm * std::sin(p)};
      }
      auto col = grid.col(ti * n_phi + pj);
      for (int n = 0; n < ny; ++n) {
        for (int m = 0; m < nx; ++m) {
          col(n * nx + m) = ay[n] * ax[m];
        }
      }
    }
  }
  return grid;
}

// Signal-subspace basis: eigenvectors of the K largest eigenvalues.
inline Eigen::MatrixXcd signal_subspace(const Eigen::MatrixXcd& r, int k_targets) {
  check_hermitian(r);
  const auto n = r.rows();
  if (k_targets < 1 || k_targets >= n) {
    throw std::domain_error("target count must satisfy 1 <= K < element count");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(r);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of covariance failed");
  }
  return solver.eigenvectors().rightCols(k_targets);
}

// MUSIC denominators a^H E_n E_n^H a for unit-norm steering columns. Uses
// the complement identity E_n E_n^H = I - E_s E_s^H, so only the K signal
// columns enter the product.
inline Eigen::ArrayXd music_denominators(const Eigen::MatrixXcd& signal_basis,
                                         const Eigen::MatrixXcd& unit_steering) {
  const Eigen::MatrixXcd projected = signal_basis.adjoint() * unit_steering;
  return (unit_steering.colwise().squaredNorm() - projected.colwise().squaredNorm())
      .transpose()
      .array();
}

// Diagonally loaded covariance factorization for MVDR.
inline Eigen::LLT<Eigen::MatrixXcd> loaded_cholesky(const Eigen::MatrixXcd& r) {
  check_hermitian(r);
  const auto n = r.rows();
  const double loading = 1e-6 * r.real().trace() / static_cast<double>(n);
  Eigen::MatrixXcd loaded = r;
  loaded.diagonal().array() += loading;
  Eigen::LLT<Eigen::MatrixXcd> llt(loaded);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("covariance not positive definite after diagonal loading");
  }
  return llt;
}

inline Eigen::ArrayXd mvdr_denominators(const Eigen::LLT<Eigen::MatrixXcd>& llt,
                                        const Eigen::MatrixXcd& unit_steering) {
  const Eigen::MatrixXcd solved = llt.solve(unit_steering);
  return (unit_steering.conjugate().cwiseProduct(solved))
      .colwise()
      .sum()
      .real()
      .transpose()
      .array();
}

inline SpatialSpectrum spectrum_from_denominators(const Eigen::ArrayXd& denom,
                                                  std::vector<double> theta_grid,
                                                  std::vector<double> phi_grid) {
  SpatialSpectrum spec;
  spec.theta_grid_deg = std::move(theta_grid);
  spec.phi_grid_deg = std::move(phi_grid);
  const auto n_theta = static_cast<Eigen::Index>(spec.theta_grid_deg.size());
  const auto n_phi = static_cast<Eigen::Index>(spec.phi_grid_deg.size());
  spec.values.resize(n_theta, n_phi);
  for (Eigen::Index ti = 0; ti < n_theta; ++ti) {
    for (Eigen::Index pj = 0; pj < n_phi; ++pj) {
      spec.values(ti, pj) = 1.0 / std::max(denom(ti * n_phi + pj), spectrum_floor);
    }
  }
  return spec;
}

}  // namespace detail

// MUSIC pseudo-spectrum 1 / (a^H E_n E_n^H a) over the grid, with E_n the
// noise subspace of the (N - K) smallest eigenvalues and a unit-normalized.
inline SpatialSpectrum music_spectrum(const Eigen::MatrixXcd& r, const ArrayGeometry& geom,
                                      int k_targets,
                                      const std::vector<double>& theta_grid_deg,
                                      const std::vector<double>& phi_grid_deg) {
  geom.validate();
  if (theta_grid_deg.empty() || phi_grid_deg.empty()) {
    throw std::invalid_argument("spectrum grid must be nonempty");
  }
  if (r.rows() != geom.size()) {
    throw std::invalid_argument("covariance size does not match array geometry");
  }
  const Eigen::MatrixXcd basis = detail::signal_subspace(r, k_targets);
  const Eigen::MatrixXcd steering =
      detail::unit_steering_grid(geom, theta_grid_deg, phi_grid_deg);
  return detail::spectrum_from_denominators(detail::music_denominators(basis, steering),
                                            theta_grid_deg, phi_grid_deg);
}

// MVDR (Capon) spectrum 1 / (a^H R^-1 a) with diagonal loading
// 1e-6 * trace(R)/N and a unit-normalized, so a flat-noise covariance gives
// a spectrum of one.
inline SpatialSpectrum mvdr_spectrum(const Eigen::MatrixXcd& r, const ArrayGeometry& geom,
                                     const std::vector<double>& theta_grid_deg,
                                     const std::vector<double>& phi_grid_deg) {
  geom.validate();
  if (theta_grid_deg.empty() || phi_grid_deg.empty()) {
    throw std::invalid_argument("spectrum grid must be nonempty");
  }
  if (r.rows() != geom.size()) {
    throw std::invalid_argument("covariance size does not match array geometry");
  }
  const auto llt = detail::loaded_cholesky(r);
  const Eigen::MatrixXcd steering =
      detail::unit_steering_grid(geom, theta_grid_deg, phi_grid_deg);
  return detail::spectrum_from_denominators(detail::mvdr_denominators(llt, steering),
                                            theta_grid_deg, phi_grid_deg);
}

// K highest strict local maxima of the spectrum (8-neighborhood; border
// cells compare against their in-bounds neighbors only), ordered by
// descending value, equal values by ascending (theta, phi). Throws
// degenerate_spectrum_error when fewer than K exist.
inline std::vector<Direction> find_peaks(const SpatialSpectrum& spec, int k_peaks) {
  if (k_peaks < 1) throw std::invalid_argument("need at least one peak");
  const auto n_theta = spec.values.rows();
  const auto n_phi = spec.values.cols();

  struct Peak {
    double value;
    Eigen::Index ti, pj;
  };
  std::vector<Peak> peaks;
  for (Eigen::Index ti = 0; ti < n_theta; ++ti) {
    for (Eigen::Index pj = 0; pj < n_phi; ++pj) {
      const double v = spec.values(ti, pj);
      bool is_peak = true;
      for (int dt = -1; dt <= 1 && is_peak; ++dt) {
        for (int dp = -1; dp <= 1 && is_peak; ++dp) {
          if (dt == 0 && dp == 0) continue;
          const Eigen::Index t2 = ti + dt;
          const Eigen::Index p2 = pj + dp;
          if (t2 < 0 || t2 >= n_theta || p2 < 0 || p2 >= n_phi) continue;
          if (spec.values(t2, p2) >= v) is_peak = false;
        }
      }
      if (is_peak) peaks.push_back({v, ti, pj});
    }
  }

  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.ti != b.ti) return a.ti < b.ti;
    return a.pj < b.pj;
  });

  std::vector<Direction> found;
  const std::size_t take = std::min<std::size_t>(peaks.size(), k_peaks);
  for (std::size_t i = 0; i < take; ++i) {
    found.push_back({spec.theta_grid_deg[peaks[i].ti], spec.phi_grid_deg[peaks[i].pj]});
  }
  if (peaks.size() < static_cast<std::size_t>(k_peaks)) {
    throw degenerate_spectrum_error(static_cast<std::size_t>(k_peaks), std::move(found));
  }
  return found;
}

namespace detail {

// Fine-grid points centered on a coarse peak, clamped to the search bounds.
inline std::vector<double> refine_points(double center, double lo, double hi,
                                         const SearchGrid& grid) {
  std::vector<double> pts;
  const int half = static_cast<int>(std::round(grid.refine_window_deg / grid.refine_step_deg));
  for (int i = -half; i <= half; ++i) {
    const double v = center + i * grid.refine_step_deg;
    if (v < lo || v > hi) continue;
    pts.push_back(v);
  }
  if (pts.empty()) pts.push_back(std::clamp(center, lo, hi));
  return pts;
}

// Argmax of 1/denominator over a small grid, returned as a direction.
inline Direction local_argmax(const Eigen::ArrayXd& denom,
                              const std::vector<double>& theta_pts,
                              const std::vector<double>& phi_pts) {
  Eigen::Index best = 0;
  denom.minCoeff(&best);
  const auto n_phi = static_cast<Eigen::Index>(phi_pts.size());
  return {theta_pts[best / n_phi], phi_pts[best % n_phi]};
}

}  // namespace detail

// Full estimation pipeline: sample covariance, coarse spatial spectrum,
// peak extraction, then per-peak refinement on the fine grid. Peaks keep the
// descending-height order of the coarse search.
inline DoaEstimate estimate_doa(const SnapshotMatrix& x, const ArrayGeometry& geom,
                                int k_targets, DoaAlgorithm algorithm,
                                const SearchGrid& grid) {
  grid.validate();
  const Eigen::MatrixXcd r = sample_covariance(x);
  const std::vector<double> theta_pts = grid.theta_points();
  const std::vector<double> phi_pts = grid.phi_points();

  // Decompose once, evaluate on the coarse grid and on each refinement
  // window with the same factorization.
  Eigen::MatrixXcd music_basis;
  Eigen::LLT<Eigen::MatrixXcd> mvdr_llt;
  const auto denominators = [&](const std::vector<double>& th,
                                const std::vector<double>& ph) -> Eigen::ArrayXd {
    const Eigen::MatrixXcd steering = detail::unit_steering_grid(geom, th, ph);
    if (algorithm == DoaAlgorithm::music) {
      return detail::music_denominators(music_basis, steering);
    }
    return detail::mvdr_denominators(mvdr_llt, steering);
  };

  if (algorithm == DoaAlgorithm::music) {
    music_basis = detail::signal_subspace(r, k_targets);
  } else {
    mvdr_llt = detail::loaded_cholesky(r);
  }

  const SpatialSpectrum coarse =
      detail::spectrum_from_denominators(denominators(theta_pts, phi_pts), theta_pts, phi_pts);
  const std::vector<Direction> coarse_peaks = find_peaks(coarse, k_targets);

  DoaEstimate est;
  est.algorithm = algorithm;
  for (const Direction& peak : coarse_peaks) {
    const std::vector<double> th =
        detail::refine_points(peak.theta_deg, grid.theta_min_deg, grid.theta_max_deg, grid);
    const std::vector<double> ph =
        detail::refine_points(peak.phi_deg, grid.phi_min_deg, grid.phi_max_deg, grid);
    est.directions.push_back(detail::local_argmax(denominators(th, ph), th, ph));
  }
  return est;
}

}  // namespace dradar
