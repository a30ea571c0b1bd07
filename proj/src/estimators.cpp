#include "mimocal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mimocal {

namespace {

ComplexVector kron_self(const ComplexVector& a) {
  const Eigen::Index m = a.size();
  ComplexVector v(m * m);
  for (Eigen::Index i = 0; i < m; ++i) v.segment(i * m, m) = a(i) * a;
  return v;
}

/// Minimizes a smooth scalar function near x by repeated three-point
/// parabolic fits on a shrinking bracket.  Steps that do not lower g are
/// rejected, so the result is never worse than the start.
double refine_minimum(const std::function<double(double)>& g, double x, double h, double lo,
                      double hi) {
  double gx = g(x);
  for (int round = 0; round < 64 && h > 1e-10; ++round) {
    if (x - h < lo || x + h > hi) {
      h = std::min(x - lo, hi - x);
      if (h <= 1e-10) break;
    }
    const double gl = g(x - h);
    const double gr = g(x + h);
    const double curvature = gl - 2.0 * gx + gr;
    if (!(curvature > 0.0)) {
      h /= 16.0;
      continue;
    }
    const double offset = std::clamp(0.5 * h * (gl - gr) / curvature, -h, h);
    const double xn = x + offset;
    const double gn = g(xn);
    if (gn <= gx) {
      x = xn;
      gx = gn;
    }
    // Vertex pinned at the bracket edge: the minimum may lie further out,
    // so keep the scale for another round.
    if (std::abs(offset) < 0.5 * h) h /= 16.0;
  }
  return x;
}

constexpr double kVisibleLimit = kPi / 2 - 1e-9;

void require_rows(const SubspaceDecomp& d, Eigen::Index rows, const char* what) {
  if (d.signal.rows() != rows) {
    throw EstimationError(std::string(what) + ": subspace has " + std::to_string(d.signal.rows()) +
                          " rows, array implies " + std::to_string(rows));
  }
}

std::vector<double> rotation_angles(const ComplexMatrix& u1, const ComplexMatrix& u2,
                                    const ArrayConfig& cfg, const char* what) {
  const ComplexMatrix gram = u1.adjoint() * u1;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
  const double largest = es.eigenvalues().maxCoeff();
  if (!(largest > 0.0) || es.eigenvalues().minCoeff() < 1e-10 * largest) {
    throw EstimationError(std::string(what) + ": subarray Gram matrix is rank deficient");
  }
  const ComplexMatrix psi = solve_hermitian(gram, u1.adjoint() * u2);
  const ComplexVector q = general_eigenvalues(psi);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(q.size()));
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    out.push_back(angle_from_rotation(q(i), cfg.calibrated_spacing(), cfg.wavelength()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double SubspaceDecomp::null_value(const ComplexVector& v) const {
  const double total = v.squaredNorm();
  const double in_signal = (signal.adjoint() * v).squaredNorm();
  return std::max(total - in_signal, 0.0);
}

SubspaceDecomp subspace(const ComplexMatrix& r, int k) {
  if (r.rows() != r.cols()) throw EstimationError("subspace: covariance must be square");
  if (k < 1 || k >= r.rows()) {
    throw EstimationError("subspace: source count " + std::to_string(k) + " out of range [1, " +
                          std::to_string(r.rows() - 1) + "]");
  }
  HermitianEig eig = hermitian_eig(r);
  const Eigen::Index n = r.rows();
  return SubspaceDecomp{eig.eigenvectors.leftCols(k), eig.eigenvectors.rightCols(n - k),
                        std::move(eig.eigenvalues)};
}

SteeringProvider nominal_provider(const ArrayConfig& cfg) {
  return [cfg](double theta) { return kron_self(ideal_steering(theta, cfg)); };
}

SteeringProvider true_provider(const ArrayConfig& cfg, const GainPhase& gp) {
  return [cfg, gp](double theta) { return kron_self(actual_steering(theta, gp, cfg)); };
}

SteeringProvider calibrated_provider(const ArrayConfig& cfg, const ComplexVector& delta) {
  if (delta.size() != cfg.virtual_size()) {
    throw EstimationError("calibrated_provider: delta length does not match the virtual array");
  }
  return [cfg, delta](double theta) {
    return ComplexVector(delta.cwiseProduct(kron_self(ideal_steering(theta, cfg))));
  };
}

std::vector<double> angle_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw EstimationError("angle_grid: invalid range or step");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

std::vector<double> default_music_grid() {
  // Endpoints at ±90° are outside the visible region; stop one step short.
  return angle_grid(deg_to_rad(-89.99), deg_to_rad(89.99), deg_to_rad(0.01));
}

std::vector<double> music_spectrum_serial(const SubspaceDecomp& d,
                                          const SteeringProvider& steering,
                                          const std::vector<double>& grid) {
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    f[i] = 1.0 / std::max(d.null_value(steering(grid[i])), 1e-300);
  }
  return f;
}

std::vector<double> music_spectrum(const SubspaceDecomp& d, const SteeringProvider& steering,
                                   const std::vector<double>& grid) {
  std::vector<double> f(grid.size());
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    f[i] = 1.0 / std::max(d.null_value(steering(grid[i])), 1e-300);
  }
  return f;
}

std::vector<double> music_estimate(const SubspaceDecomp& d, const SteeringProvider& steering,
                                   const std::vector<double>& grid, int k) {
  if (k < 1) throw EstimationError("music_estimate: need k >= 1");
  if (grid.size() < 3) throw EstimationError("music_estimate: grid too small");
  const std::vector<double> f = music_spectrum(d, steering, grid);

  // Rising into i by more than rounding noise, not rising out of it.
  constexpr double tol = 1e-10;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (f[i] > f[i - 1] * (1.0 + tol) && f[i + 1] <= f[i] * (1.0 + tol)) peaks.push_back(i);
  }
  if (peaks.size() < static_cast<std::size_t>(k)) {
    throw EstimationError("music_estimate: found " + std::to_string(peaks.size()) +
                          " spectral peaks, need " + std::to_string(k));
  }
  std::partial_sort(peaks.begin(), peaks.begin() + k, peaks.end(),
                    [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });

  const auto null_fn = [&](double theta) { return d.null_value(steering(theta)); };
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const std::size_t p = peaks[static_cast<std::size_t>(i)];
    const double step = grid[p + 1] - grid[p];
    out.push_back(refine_minimum(null_fn, grid[p], step, grid[p - 1], grid[p + 1]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double angle_from_rotation(cd q, double spacing, double wavelength) {
  const double mag = std::abs(q);
  if (!(mag >= 0.5 && mag <= 2.0)) {
    throw EstimationError("angle_from_rotation: rotation magnitude " + std::to_string(mag) +
                          " outside [0.5, 2]");
  }
  const double s = -std::arg(q) * wavelength / (2.0 * kPi * spacing);
  if (std::abs(s) > 1.0) {
    throw EstimationError("angle_from_rotation: sin(theta) = " + std::to_string(s) +
                          " is outside the visible region");
  }
  return std::asin(s);
}

std::vector<double> esprit_traditional(const SubspaceDecomp& d, const ArrayConfig& cfg, int k) {
  const int m = cfg.num_antennas();
  require_rows(d, cfg.virtual_size(), "esprit_traditional");
  if (k != d.num_sources() || k >= m) {
    throw EstimationError("esprit_traditional: source count inconsistent with subspace/array");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(m) * (m - 1);
  return rotation_angles(d.signal.topRows(rows), d.signal.bottomRows(rows), cfg,
                         "esprit_traditional");
}

std::vector<double> esprit_proposed(const SubspaceDecomp& d, const ArrayConfig& cfg, int k) {
  const int m = cfg.num_antennas();
  require_rows(d, cfg.virtual_size(), "esprit_proposed");
  if (k != d.num_sources() || k >= m) {
    throw EstimationError("esprit_proposed: source count inconsistent with subspace/array");
  }
  return rotation_angles(d.signal.topRows(m), d.signal.middleRows(m, m), cfg, "esprit_proposed");
}

ComplexMatrix gain_phase_cost(const SubspaceDecomp& d, const std::vector<double>& doas,
                              const ArrayConfig& cfg) {
  const Eigen::Index n = cfg.virtual_size();
  require_rows(d, n, "gain_phase_cost");
  ComplexMatrix noise_proj = -d.signal * d.signal.adjoint();
  noise_proj.diagonal().array() += 1.0;

  // Z = P_n ∘ Σ_k conj(v_k) v_k^T, the Hadamard form of Σ V_k^H P_n V_k.
  ComplexMatrix outer = ComplexMatrix::Zero(n, n);
  for (double theta : doas) {
    const ComplexVector v = kron_self(ideal_steering(theta, cfg));
    outer.noalias() += v.conjugate() * v.transpose();
  }
  ComplexMatrix z = noise_proj.cwiseProduct(outer);
  return 0.5 * (z + z.adjoint());
}

ComplexVector constrained_min_lagrange(const ComplexMatrix& z) {
  const Eigen::Index n = z.rows();
  if (n < 3 || z.cols() != n) throw EstimationError("constrained_min_lagrange: bad dimensions");
  const ComplexMatrix e = ComplexMatrix::Identity(n, 2);
  const ComplexVector f = ComplexVector::Ones(2);
  const ComplexMatrix y = solve_hermitian(z, e);  // Z^-1 E
  const ComplexMatrix g = y.topRows(2);           // E^H Z^-1 E
  const ComplexVector mu = g.fullPivLu().solve(f);
  return y * mu;
}

ComplexVector constrained_min_reduced(const ComplexMatrix& z) {
  const Eigen::Index n = z.rows();
  if (n < 3 || z.cols() != n) throw EstimationError("constrained_min_reduced: bad dimensions");
  const ComplexVector f = ComplexVector::Ones(2);
  const ComplexMatrix rhs = -(z.bottomLeftCorner(n - 2, 2) * f);
  ComplexVector delta(n);
  delta.head(2) = f;
  delta.tail(n - 2) = solve_hermitian(z.bottomRightCorner(n - 2, n - 2), rhs);
  return delta;
}

GainPhaseEstimate estimate_gain_phase(const SubspaceDecomp& d, const std::vector<double>& doas,
                                      const ArrayConfig& cfg) {
  if (doas.empty()) throw EstimationError("estimate_gain_phase: no DOAs supplied");
  for (double t : doas) check_angle(t);
  const ComplexMatrix z = gain_phase_cost(d, doas, cfg);
  const int m = cfg.num_antennas();

  GainPhaseEstimate out;
  out.delta = constrained_min_reduced(z);
  if (!out.delta.allFinite()) {
    throw EstimationError("estimate_gain_phase: cost matrix is singular");
  }
  out.per_antenna = out.delta.head(m);
  out.unenforced_deviation =
      std::max(std::abs(out.delta(m) - 1.0), std::abs(out.delta(m + 1) - 1.0));
  return out;
}

std::vector<double> refine_doas_local(const SubspaceDecomp& d, const GainPhaseEstimate& gp,
                                      const std::vector<double>& doas, const ArrayConfig& cfg,
                                      const LocalSearchOptions& opts) {
  if (!(opts.window > 0.0) || !(opts.step > 0.0) || !(opts.fine_step > 0.0)) {
    throw EstimationError("refine_doas_local: window and steps must be positive");
  }
  std::vector<double> start = doas;
  std::sort(start.begin(), start.end());
  for (std::size_t i = 0; i + 1 < start.size(); ++i) {
    if (start[i + 1] - start[i] <= 2.0 * opts.window) {
      throw EstimationError("refine_doas_local: search windows overlap; targets at " +
                            std::to_string(rad_to_deg(start[i])) + " and " +
                            std::to_string(rad_to_deg(start[i + 1])) + " deg are unresolved");
    }
  }

  const SteeringProvider steering = calibrated_provider(cfg, gp.delta);
  const auto null_fn = [&](double theta) { return d.null_value(steering(theta)); };

  // Best grid point of center + i*step on [lo, hi]; the center is always a
  // candidate, so the objective never gets worse than at the start.
  const auto grid_min = [&](double center, double half, double step, double lo, double hi) {
    const int n = static_cast<int>(std::floor(half / step + 1e-9));
    double best = center;
    double best_val = null_fn(center);
    for (int i = -n; i <= n; ++i) {
      const double t = center + i * step;
      if (i == 0 || t < lo || t > hi) continue;
      const double val = null_fn(t);
      if (val < best_val) {
        best_val = val;
        best = t;
      }
    }
    return best;
  };

  std::vector<double> out;
  out.reserve(start.size());
  for (double center : start) {
    check_angle(center);
    const double lo = std::max(center - opts.window, -kVisibleLimit);
    const double hi = std::min(center + opts.window, kVisibleLimit);
    const double coarse = grid_min(center, opts.window, opts.step, lo, hi);
    const double fine = grid_min(coarse, opts.step, opts.fine_step, lo, hi);
    out.push_back(refine_minimum(null_fn, fine, opts.fine_step, lo, hi));
  }
  std::sort(out.begin(), out.end());
  return out;
}

JointEstimate joint_estimate(const SubspaceDecomp& d, const ArrayConfig& cfg,
                             const JointOptions& opts) {
  if (opts.max_iterations < 0) throw EstimationError("joint_estimate: negative iteration cap");
  JointEstimate out;
  out.doas = esprit_proposed(d, cfg, d.num_sources());
  out.history.push_back(out.doas);

  for (int t = 1; t <= opts.max_iterations; ++t) {
    GainPhaseEstimate gp = estimate_gain_phase(d, out.doas, cfg);
    std::vector<double> next = refine_doas_local(d, gp, out.doas, cfg, opts.search);
    double change = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) {
      change = std::max(change, std::abs(next[k] - out.doas[k]));
    }
    out.doas = std::move(next);
    out.history.push_back(out.doas);
    out.gain_history.push_back(gp);
    out.gain_phase = std::move(gp);
    out.iterations_used = t;
    if (change < opts.tol) break;
  }
  return out;
}

JointEstimate joint_estimate(const ComplexMatrix& r, int k, const ArrayConfig& cfg,
                             const JointOptions& opts) {
  return joint_estimate(subspace(r, k), cfg, opts);
}

}  // namespace mimocal
