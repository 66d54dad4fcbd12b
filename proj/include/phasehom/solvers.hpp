// Discrete cell problems: the bulk problem m_b(l_xi, Q) and the surface
// problem m_s(u_{x,zeta,nu}, Q^nu), the latter by alternating minimisation.
#pragma once

#include "phasehom/fields.hpp"
#include "phasehom/geometry.hpp"
#include "phasehom/integrand.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace phasehom {

struct SolverOptions {
  /// Smoothing parameters for |.| in the u-step, strictly decreasing.
  std::vector<double> delta_schedule{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  int am_max_iters = 300;
  /// Alternating minimisation stops once the relative energy decrease drops below this.
  double am_rel_tol = 1e-6;
  /// Relative objective decrease that ends one reweighting stage of the u-step.
  double inner_tol = 1e-9;
  int inner_max_iters = 2000;
  /// Lower clamp eta on v.
  double v_floor = 0.0;
  /// Value of v on the jump plane at initialisation.
  double v_dip = 0.5;
  /// 0: deterministic dip; otherwise the dip nodes are perturbed by a seeded amount.
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (delta_schedule.empty()) throw DomainError("SolverOptions: delta_schedule is empty");
    for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
      if (!(delta_schedule[i] > 0.0)) throw DomainError("SolverOptions: delta values must be positive");
      if (i > 0 && !(delta_schedule[i] < delta_schedule[i - 1]))
        throw DomainError("SolverOptions: delta_schedule must be strictly decreasing");
    }
    if (am_max_iters < 1 || inner_max_iters < 1) throw DomainError("SolverOptions: iteration caps must be >= 1");
    if (!(am_rel_tol > 0.0) || !(inner_tol > 0.0)) throw DomainError("SolverOptions: tolerances must be positive");
    if (!(v_floor >= 0.0 && v_floor < 1.0)) throw DomainError("SolverOptions: v_floor must lie in [0,1)");
    if (!(v_dip >= 0.0 && v_dip <= 1.0)) throw DomainError("SolverOptions: v_dip must lie in [0,1]");
  }
};

struct CellResult {
  double value = 0.0;
  VectorField u;
  PhaseField v;
  EnergyBreakdown breakdown;
  int iterations = 0;
  std::vector<double> energy_trace;
  bool converged = false;
  /// Energy of the initial competitor (affine datum, or jump datum with seeded v).
  double initial_energy = 0.0;
  std::string diagnostic;
};

struct UStepResult {
  VectorField u;
  double objective = 0.0;  // smoothed objective at the last stage
  int iterations = 0;
  bool converged = true;
  std::string diagnostic;
};

namespace detail {

/// Dirichlet bookkeeping: interior numbering of the free nodes.
struct DirichletMap {
  std::vector<Eigen::Index> free_index;  // node -> free index or -1
  std::vector<Eigen::Index> free_nodes;

  explicit DirichletMap(const CellDomain& cell) {
    free_index.assign(static_cast<std::size_t>(cell.node_count()), -1);
    for (Eigen::Index i = 0; i < cell.node_count(); ++i) {
      if (!cell.on_boundary(i, BoundaryPart::all)) {
        free_index[i] = static_cast<Eigen::Index>(free_nodes.size());
        free_nodes.push_back(i);
      }
    }
  }
  Eigen::Index size() const { return static_cast<Eigen::Index>(free_nodes.size()); }
};

/// Smoothed radial profile: phi for s >= delta, its quadratic-in-s extension below.
inline double smoothed_profile(const RadialProfile& phi, double s, double delta) {
  if (s >= delta) return phi(s);
  return phi(delta) + phi.derivative(delta) * (s * s - delta * delta) / (2.0 * delta);
}

}  // namespace detail

/// Minimiser of sum_c weight_c * g~(z_c, Du_c) under Dirichlet data, where
/// weight_c = h^n v_c^2. Radial densities use majorise-minimise reweighting
/// (each step an SPD solve); other densities use monotone gradient descent with
/// Barzilai-Borwein steps and Armijo backtracking.
class USolver {
 public:
  USolver(const CellDomain& cell, const GridOperators& ops, const Integrand& g)
      : cell_(cell), ops_(ops), g_(g), dir_(cell) {
    coef_.resize(static_cast<std::size_t>(cell.cell_count()), 1.0);
    if (g.is_radial()) {
      for (Eigen::Index c = 0; c < cell.cell_count(); ++c) coef_[c] = g.coefficient(ops.cell_centers[c]);
    }
  }

  /// Unsmoothed objective.
  double objective(const std::vector<double>& weight, const VectorField& u) const {
    return objective_impl(weight, u, 0.0);
  }

  UStepResult minimize(const std::vector<double>& weight, const VectorField& start,
                       const std::vector<double>& deltas, const SolverOptions& opts) {
    if (g_.is_radial()) return minimize_radial(weight, start, deltas, opts);
    return minimize_generic(weight, start, deltas, opts);
  }

 private:
  /// delta == 0 means unsmoothed.
  double objective_impl(const std::vector<double>& weight, const VectorField& u, double delta) const {
    const int n = cell_.dim(), N = u.components();
    const Eigen::MatrixXd GUt = ops_.gradient * u.values.transpose();
    const Matrix Rt = cell_.rotation().matrix.transpose();
    std::vector<double> terms(static_cast<std::size_t>(cell_.cell_count()));
    for (Eigen::Index c = 0; c < cell_.cell_count(); ++c) {
      if (weight[c] == 0.0) {
        terms[c] = 0.0;
        continue;
      }
      const Grad xi = detail::cell_gradient(GUt, c, n, N);
      double val;
      if (g_.is_radial()) {
        const double s = xi.norm();
        val = coef_[c] * (delta > 0.0 ? detail::smoothed_profile(g_.profile(), s, delta) : g_.profile()(s));
      } else {
        val = g_(ops_.cell_centers[c], Grad(xi * Rt));
      }
      terms[c] = weight[c] * val;
    }
    return pairwise_sum(terms);
  }

  UStepResult minimize_radial(const std::vector<double>& weight, const VectorField& start,
                              const std::vector<double>& deltas, const SolverOptions& opts) {
    const int n = cell_.dim(), N = start.components();
    const double h = cell_.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const Eigen::Index nf = dir_.size();
    UStepResult res{start, 0.0, 0, true, {}};
    if (nf == 0) {
      res.objective = objective_impl(weight, start, deltas.back());
      return res;
    }

    std::vector<double> omega(static_cast<std::size_t>(cell_.cell_count()));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(cell_.cell_count() * n * 4 + nf));
    Eigen::MatrixXd rhs(nf, N);

    for (double delta : deltas) {
      double J = objective_impl(weight, res.u, delta);
      bool stage_converged = false;
      for (int it = 0; it < opts.inner_max_iters; ++it) {
        const Eigen::MatrixXd GUt = ops_.gradient * res.u.values.transpose();
        double wmax = 0.0;
        for (Eigen::Index c = 0; c < cell_.cell_count(); ++c) {
          if (weight[c] == 0.0) {
            omega[c] = 0.0;
            continue;
          }
          double s2 = 0.0;
          for (int a = 0; a < n; ++a) s2 += GUt.row(c * n + a).squaredNorm();
          const double m = std::max(std::sqrt(s2), delta);
          omega[c] = weight[c] * coef_[c] * g_.profile().derivative(m) / m;
          wmax = std::max(wmax, omega[c]);
        }
        // Proximal term keeps flat (zero-weight) regions at their previous values.
        const double rho = std::max(wmax * inv_h2 * 1e-10, 1e-300);

        trip.clear();
        rhs.setZero();
        for (Eigen::Index k = 0; k < nf; ++k) {
          trip.emplace_back(k, k, rho);
          rhs.row(k) = rho * res.u.values.col(dir_.free_nodes[k]).transpose();
        }
        for (Eigen::Index c = 0; c < cell_.cell_count(); ++c) {
          const Eigen::Index p = cell_.cell_anchor(c);
          for (int a = 0; a < n; ++a) {
            const Eigen::Index q = p + cell_.node_stride(a);
            const double w = omega[c] * inv_h2;
            const Eigen::Index fp = dir_.free_index[p], fq = dir_.free_index[q];
            if (fp >= 0) trip.emplace_back(fp, fp, w);
            if (fq >= 0) trip.emplace_back(fq, fq, w);
            if (fp >= 0 && fq >= 0) {
              trip.emplace_back(fp, fq, -w);
              trip.emplace_back(fq, fp, -w);
            } else if (fp >= 0) {
              rhs.row(fp) += w * res.u.values.col(q).transpose();
            } else if (fq >= 0) {
              rhs.row(fq) += w * res.u.values.col(p).transpose();
            }
          }
        }
        Eigen::SparseMatrix<double> L(nf, nf);
        L.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_) {
          ldlt_.analyzePattern(L);
          analyzed_ = true;
        }
        ldlt_.factorize(L);
        if (ldlt_.info() != Eigen::Success) {
          res.converged = false;
          res.diagnostic = "u-step factorisation failed";
          break;
        }
        const Eigen::MatrixXd sol = ldlt_.solve(rhs);
        VectorField trial = res.u;
        for (Eigen::Index k = 0; k < nf; ++k) trial.values.col(dir_.free_nodes[k]) = sol.row(k).transpose();
        const double Jt = objective_impl(weight, trial, delta);
        ++res.iterations;
        if (!(Jt <= J)) {
          // Majorise-minimise cannot increase J beyond round-off; stop here.
          stage_converged = true;
          break;
        }
        const double dec = J - Jt;
        res.u = std::move(trial);
        J = Jt;
        if (dec <= opts.inner_tol * std::max(J, 1e-300)) {
          stage_converged = true;
          break;
        }
      }
      res.objective = J;
      if (!stage_converged) res.converged = false;
    }
    if (!res.converged && res.diagnostic.empty()) res.diagnostic = "u-step reached the iteration cap";
    return res;
  }

  UStepResult minimize_generic(const std::vector<double>& weight, const VectorField& start,
                               const std::vector<double>& deltas, const SolverOptions& opts) {
    const int n = cell_.dim(), N = start.components();
    const Matrix Rt = cell_.rotation().matrix.transpose();
    UStepResult res{start, 0.0, 0, true, {}};
    double J = objective_impl(weight, res.u, 0.0);

    auto gradient = [&](const VectorField& u, double fd) {
      const Eigen::MatrixXd GUt = ops_.gradient * u.values.transpose();
      Eigen::MatrixXd dJ = Eigen::MatrixXd::Zero(GUt.rows(), N);
      for (Eigen::Index c = 0; c < cell_.cell_count(); ++c) {
        if (weight[c] == 0.0) continue;
        const Grad xi = detail::cell_gradient(GUt, c, n, N);
        for (int comp = 0; comp < N; ++comp) {
          for (int a = 0; a < n; ++a) {
            Grad p = xi, m = xi;
            p(comp, a) += fd;
            m(comp, a) -= fd;
            const double d = (g_(ops_.cell_centers[c], Grad(p * Rt)) - g_(ops_.cell_centers[c], Grad(m * Rt))) /
                             (2.0 * fd);
            dJ(c * n + a, comp) = weight[c] * d;
          }
        }
      }
      Eigen::MatrixXd gu = (ops_.gradient.transpose() * dJ).transpose();  // N x nodes
      for (Eigen::Index i = 0; i < cell_.node_count(); ++i)
        if (dir_.free_index[i] < 0) gu.col(i).setZero();
      return gu;
    };

    for (double delta : deltas) {
      Eigen::MatrixXd gk = gradient(res.u, delta);
      double step = 1.0 / std::max(1.0, gk.cwiseAbs().maxCoeff());
      bool stage_converged = false;
      Eigen::MatrixXd prev_u, prev_g;
      for (int it = 0; it < opts.inner_max_iters; ++it) {
        const double gn2 = gk.squaredNorm();
        if (gn2 == 0.0) {
          stage_converged = true;
          break;
        }
        // Armijo backtracking on the unsmoothed objective keeps the iteration monotone.
        VectorField trial = res.u;
        double Jt = J;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
          trial.values = res.u.values - step * gk;
          Jt = objective_impl(weight, trial, 0.0);
          if (Jt <= J - 1e-4 * step * gn2) {
            accepted = true;
            break;
          }
          step *= 0.5;
        }
        ++res.iterations;
        if (!accepted) {
          stage_converged = true;  // step collapse: best iterate kept
          res.diagnostic = "u-step line search collapsed";
          break;
        }
        prev_u = res.u.values;
        prev_g = gk;
        const double dec = J - Jt;
        res.u = std::move(trial);
        J = Jt;
        gk = gradient(res.u, delta);
        const Eigen::MatrixXd s = res.u.values - prev_u, y = gk - prev_g;
        const double sy = (s.array() * y.array()).sum();
        step = sy > 0.0 ? s.squaredNorm() / sy : step * 2.0;
        if (dec <= opts.inner_tol * std::max(J, 1e-300)) {
          stage_converged = true;
          break;
        }
      }
      if (!stage_converged) res.converged = false;
    }
    res.objective = J;
    if (!res.converged && res.diagnostic.empty()) res.diagnostic = "u-step reached the iteration cap";
    return res;
  }

  const CellDomain& cell_;
  const GridOperators& ops_;
  Integrand g_;
  detail::DirichletMap dir_;
  std::vector<double> coef_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
};

/// Exact minimiser of the quadratic sum_c h^n (v_c^2 W_c + (1 - v_c)^2 + |Dv_c|^2)
/// with v = 1 on the boundary, followed by the box constraint eta <= v <= 1
/// (projected Gauss-Seidel when the clamp is active).
class VSolver {
 public:
  VSolver(const CellDomain& cell, const GridOperators& ops) : cell_(cell), ops_(ops), dir_(cell) {}

  PhaseField minimize(const std::vector<double>& W, double eta, const SolverOptions& opts) {
    const int n = cell_.dim();
    const int corners = 1 << n;
    const double vol = cell_.cell_volume();
    const double inv_h2 = 1.0 / (cell_.spacing() * cell_.spacing());
    const Eigen::Index nf = dir_.size();
    PhaseField v = PhaseField::constant(cell_, 1.0);
    if (nf == 0) return v;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(cell_.cell_count() * (corners * corners + 4 * n)));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    std::array<Eigen::Index, 8> cs{};
    auto add = [&](Eigen::Index p, Eigen::Index q, double w) {
      // Quadratic form w * x_p * x_q with x = 1 on Dirichlet nodes.
      const Eigen::Index fp = dir_.free_index[p], fq = dir_.free_index[q];
      if (fp >= 0 && fq >= 0)
        trip.emplace_back(fp, fq, w);
      else if (fp >= 0)
        rhs(fp) -= w;
    };
    for (Eigen::Index c = 0; c < cell_.cell_count(); ++c) {
      cell_.cell_corners(c, cs);
      const double d = vol * (W[c] + 1.0) / (corners * corners);
      for (int i = 0; i < corners; ++i)
        for (int j = 0; j < corners; ++j) add(cs[i], cs[j], d);
      // Linear term -2 (1 - 0) * v_c from (1 - v_c)^2.
      for (int i = 0; i < corners; ++i) {
        const Eigen::Index fi = dir_.free_index[cs[i]];
        if (fi >= 0) rhs(fi) += vol / corners;
      }
      const Eigen::Index p = cell_.cell_anchor(c);
      for (int a = 0; a < n; ++a) {
        const Eigen::Index q = p + cell_.node_stride(a);
        const double w = vol * inv_h2;
        add(p, p, w);
        add(q, q, w);
        add(p, q, -w);
        add(q, p, -w);
      }
    }
    Eigen::SparseMatrix<double> H(nf, nf);
    H.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(H);
      analyzed_ = true;
    }
    ldlt_.factorize(H);
    if (ldlt_.info() != Eigen::Success) throw SolverError("v-step factorisation failed", -1.0);
    Eigen::VectorXd x = ldlt_.solve(rhs);
    const double residual = (H * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
    if (!std::isfinite(residual) || residual > 1e-6)
      throw SolverError("v-step linear solve inaccurate", residual);

    const double lo = std::max(eta, 0.0);
    bool clamped = false;
    for (Eigen::Index k = 0; k < nf; ++k) {
      if (x(k) < lo || x(k) > 1.0) {
        clamped = true;
        x(k) = std::clamp(x(k), lo, 1.0);
      }
    }
    if (clamped) projected_gauss_seidel(H, rhs, x, lo, opts);
    for (Eigen::Index k = 0; k < nf; ++k) v.values(dir_.free_nodes[k]) = x(k);
    return v;
  }

 private:
  static void projected_gauss_seidel(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& b,
                                     Eigen::VectorXd& x, double lo, const SolverOptions& opts) {
    // H is symmetric and stored column-major, so column k holds row k.
    const int sweeps = std::max(50, opts.inner_max_iters);
    for (int s = 0; s < sweeps; ++s) {
      double change = 0.0;
      for (Eigen::Index k = 0; k < H.outerSize(); ++k) {
        double diag = 0.0, off = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(H, k); it; ++it) {
          if (it.row() == k)
            diag += it.value();
          else
            off += it.value() * x(it.row());
        }
        const double xn = std::clamp((b(k) - off) / diag, lo, 1.0);
        change = std::max(change, std::abs(xn - x(k)));
        x(k) = xn;
      }
      if (change < 1e-12) break;
    }
  }

  const CellDomain& cell_;
  const GridOperators& ops_;
  detail::DirichletMap dir_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  bool analyzed_ = false;
};

namespace detail {

inline std::vector<double> squared_cell_average(const GridOperators& ops, const PhaseField& v, double vol) {
  const Eigen::VectorXd vc = ops.average * v.values;
  std::vector<double> w(static_cast<std::size_t>(vc.size()));
  for (Eigen::Index c = 0; c < vc.size(); ++c) w[c] = vol * vc(c) * vc(c);
  return w;
}

inline void check_boundary_field(const CellDomain& cell, const VectorField& u) {
  if (u.nodes() != cell.node_count()) throw DomainError("boundary field does not match the cell grid");
}

}  // namespace detail

/// Approximate minimiser of sum_c h^n v_c^2 g~_delta(z_c, Du_c) with u = boundary on
/// the cell boundary, started from `boundary`; monotone in the objective.
inline UStepResult minimize_u_given_v(const CellDomain& cell, const Integrand& g, const PhaseField& v,
                                      const VectorField& boundary, double delta, const SolverOptions& opts) {
  if (!(delta > 0.0)) throw DomainError("minimize_u_given_v: delta must be positive");
  detail::check_field(cell, v);
  detail::check_boundary_field(cell, boundary);
  const GridOperators ops(cell);
  USolver solver(cell, ops, g);
  return solver.minimize(detail::squared_cell_average(ops, v, cell.cell_volume()), boundary, {delta}, opts);
}

/// Minimiser of the v-part of S^h at fixed u, clamped to [eta, 1], v = 1 on the boundary.
inline PhaseField minimize_v_given_u(const CellDomain& cell, const Integrand& ginf, const VectorField& u,
                                     double eta, const SolverOptions& opts) {
  detail::check_field(cell, u);
  const GridOperators ops(cell);
  VSolver solver(cell, ops);
  return solver.minimize(detail::cell_density(cell, ops, ginf, u), eta, opts);
}

/// Discrete m_b(l_xi, Q): minimises the bulk energy with u = l_xi on the boundary.
/// The reported value is the unsmoothed energy of the final iterate and never
/// exceeds the affine competitor.
inline CellResult solve_bulk_cell(const CellDomain& cell, const Integrand& g, const Grad& xi,
                                  const SolverOptions& opts) {
  opts.validate();
  if (!all_finite(xi)) throw DomainError("solve_bulk_cell: non-finite xi");
  const GridOperators ops(cell);
  USolver solver(cell, ops, g);
  const std::vector<double> weight(static_cast<std::size_t>(cell.cell_count()), cell.cell_volume());

  CellResult res;
  res.u = affine_datum(cell, xi);
  res.v = PhaseField::constant(cell, 1.0);
  double E = solver.objective(weight, res.u);
  res.initial_energy = E;
  res.energy_trace.push_back(E);
  res.converged = true;
  for (double delta : opts.delta_schedule) {
    UStepResult step = solver.minimize(weight, res.u, {delta}, opts);
    res.iterations += step.iterations;
    if (!step.converged) {
      res.converged = false;
      res.diagnostic = step.diagnostic;
    }
    const double Et = solver.objective(weight, step.u);
    if (Et <= E) {
      res.u = std::move(step.u);
      E = Et;
    }
    res.energy_trace.push_back(E);
  }
  res.value = E;
  res.breakdown = EnergyBreakdown::from_parts(E, 0.0, 0.0);
  return res;
}

namespace detail {

/// Alternating minimisation of S^h from (u0, v0); u0 also carries the Dirichlet data.
inline CellResult alternating_minimisation(const CellDomain& cell, const Integrand& ginf, const VectorField& u0,
                                           const PhaseField& v0, const SolverOptions& opts) {
  if (!ginf.positively_homogeneous())
    throw PreconditionError("surface cell problem requires a positively 1-homogeneous density");
  const GridOperators ops(cell);
  USolver usolver(cell, ops, ginf);
  VSolver vsolver(cell, ops);
  const double vol = cell.cell_volume();

  CellResult res;
  res.u = u0;
  res.v = v0;
  double E = surface_energy(cell, ops, ginf, res.u, res.v).total;
  res.initial_energy = E;
  res.energy_trace.push_back(E);

  for (int it = 1; it <= opts.am_max_iters; ++it) {
    const double E_start = E;
    // u-step
    UStepResult us = usolver.minimize(squared_cell_average(ops, res.v, vol), res.u, opts.delta_schedule, opts);
    if (!us.diagnostic.empty()) res.diagnostic = us.diagnostic;
    const double Eu = surface_energy(cell, ops, ginf, us.u, res.v).total;
    if (Eu <= E) {
      res.u = std::move(us.u);
      E = Eu;
    }
    // v-step
    PhaseField vn = vsolver.minimize(cell_density(cell, ops, ginf, res.u), opts.v_floor, opts);
    const double Ev = surface_energy(cell, ops, ginf, res.u, vn).total;
    if (Ev <= E) {
      res.v = std::move(vn);
      E = Ev;
    }
    res.energy_trace.push_back(E);
    res.iterations = it;
    if (E_start - E <= opts.am_rel_tol * std::max(E_start, 1e-300)) {
      res.converged = true;
      break;
    }
  }
  // The datum with v = 1 is itself admissible (exactly 0 for a zero jump).
  const PhaseField one = PhaseField::constant(cell, 1.0);
  const double E_plain = surface_energy(cell, ops, ginf, u0, one).total;
  if (E_plain < E) {
    res.u = u0;
    res.v = one;
    E = E_plain;
    res.energy_trace.push_back(E);
  }
  res.breakdown = surface_energy(cell, ops, ginf, res.u, res.v);
  res.value = res.breakdown.total;
  return res;
}

/// v = 1 except `dip` on the corners of the cells whose centres satisfy
/// -h/2 < (y_c - anchor) . nu <= h/2: one cell layer along the jump plane, so the
/// first u-step has a unique cheapest layer for the jump.
inline PhaseField seeded_phase(const CellDomain& cell, const Point& nu, const Point& anchor,
                               const SolverOptions& opts) {
  PhaseField v = PhaseField::constant(cell, 1.0);
  std::vector<char> dip(static_cast<std::size_t>(cell.node_count()), 0);
  const double half = 0.5 * cell.spacing();
  const double slack = 1e-9 * cell.spacing();
  std::array<Eigen::Index, 8> cs{};
  for (Eigen::Index c = 0; c < cell.cell_count(); ++c) {
    const double t = (cell.cell_center_global(c) - anchor).dot(nu);
    if (t > -half + slack && t <= half + slack) {
      const int k = cell.cell_corners(c, cs);
      for (int i = 0; i < k; ++i) dip[cs[i]] = 1;
    }
  }
  std::mt19937_64 rng(opts.rng_seed);
  for (Eigen::Index i = 0; i < cell.node_count(); ++i) {
    if (!dip[i] || cell.on_boundary(i, BoundaryPart::all)) continue;
    double value = opts.v_dip;
    if (opts.rng_seed != 0) value += 0.2 * (detail::unit_uniform(rng) - 0.5);
    v.values(i) = std::clamp(value, std::max(opts.v_floor, 0.0), 1.0);
  }
  return v;
}

}  // namespace detail

/// Discrete m_s(u_{x,zeta,nu}, Q^nu) for the cell centred at x = cell.center().
/// Boundary datum: the smoothed jump of width 4h; v = 1 on the boundary.
inline CellResult solve_surface_cell(const CellDomain& cell, const Integrand& ginf, const Amplitude& zeta,
                                     const Point& nu, const SolverOptions& opts) {
  opts.validate();
  if ((nu - cell.rotation().nu).norm() > 1e-12)
    throw DomainError("solve_surface_cell: normal does not match the cell rotation");
  if (!ginf.positively_homogeneous())
    throw PreconditionError("solve_surface_cell: density must be positively 1-homogeneous");
  const VectorField u0 = jump_datum(cell, zeta, nu, 4.0 * cell.spacing());
  const PhaseField v0 = detail::seeded_phase(cell, nu, cell.center(), opts);
  return detail::alternating_minimisation(cell, ginf, u0, v0, opts);
}

/// Surface problem with an explicit boundary datum (also the initial u).
inline CellResult solve_surface_with_datum(const CellDomain& cell, const Integrand& ginf, const VectorField& datum,
                                           const Point& nu, const Point& anchor, const SolverOptions& opts) {
  opts.validate();
  detail::check_boundary_field(cell, datum);
  const PhaseField v0 = detail::seeded_phase(cell, nu, anchor, opts);
  return detail::alternating_minimisation(cell, ginf, datum, v0, opts);
}

}  // namespace phasehom
