// Discrete deformation and phase fields on a CellDomain and the discrete
// energies E^h (bulk), S^h (surface) and F_eps (phase-field functional).
#pragma once

#include "phasehom/geometry.hpp"
#include "phasehom/integrand.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <ostream>
#include <vector>

namespace phasehom {

/// u: R^N value per node, stored components x nodes.
struct VectorField {
  Eigen::MatrixXd values;

  int components() const { return static_cast<int>(values.rows()); }
  Eigen::Index nodes() const { return values.cols(); }
};

/// v: one value per node, kept in [0, 1].
struct PhaseField {
  Eigen::VectorXd values;

  static PhaseField constant(const CellDomain& cell, double value) {
    return {Eigen::VectorXd::Constant(cell.node_count(), value)};
  }
};

struct EnergyBreakdown {
  double bulk_term = 0.0;
  double fidelity_term = 0.0;
  double gradient_v_term = 0.0;
  double total = 0.0;

  static EnergyBreakdown from_parts(double bulk, double fidelity, double gradient) {
    return {bulk, fidelity, gradient, bulk + fidelity + gradient};
  }
};

/// Sparse forward-difference gradient and corner-averaging operators of a grid.
/// Gradient rows are ordered (cell, axis) with axis fastest; every cell
/// gradient is anchored at the cell's lowest corner.
struct GridOperators {
  Eigen::SparseMatrix<double> gradient;  // (cells * n) x nodes
  Eigen::SparseMatrix<double> average;   // cells x nodes
  std::vector<Point> cell_centers;       // global coordinates
  std::vector<Point> cell_centers_local;

  explicit GridOperators(const CellDomain& cell) {
    const int n = cell.dim();
    const double h = cell.spacing();
    const Eigen::Index nc = cell.cell_count();
    std::vector<Eigen::Triplet<double>> tg, ta;
    tg.reserve(static_cast<std::size_t>(nc * n * 2));
    const int corners = 1 << n;
    ta.reserve(static_cast<std::size_t>(nc * corners));
    cell_centers.reserve(static_cast<std::size_t>(nc));
    cell_centers_local.reserve(static_cast<std::size_t>(nc));
    std::array<Eigen::Index, 8> cs{};
    for (Eigen::Index c = 0; c < nc; ++c) {
      const Eigen::Index anchor = cell.cell_anchor(c);
      for (int a = 0; a < n; ++a) {
        tg.emplace_back(c * n + a, anchor, -1.0 / h);
        tg.emplace_back(c * n + a, anchor + cell.node_stride(a), 1.0 / h);
      }
      cell.cell_corners(c, cs);
      for (int k = 0; k < corners; ++k) ta.emplace_back(c, cs[k], 1.0 / corners);
      cell_centers_local.push_back(cell.cell_center_local(c));
      cell_centers.push_back(cell.to_global(cell_centers_local.back()));
    }
    gradient.resize(nc * n, cell.node_count());
    gradient.setFromTriplets(tg.begin(), tg.end());
    average.resize(nc, cell.node_count());
    average.setFromTriplets(ta.begin(), ta.end());
  }
};

namespace detail {

inline void check_field(const CellDomain& cell, const VectorField& u) {
  if (u.nodes() != cell.node_count()) throw DomainError("vector field does not match the cell grid");
  if (!u.values.allFinite()) throw DomainError("vector field has non-finite values");
}

inline void check_field(const CellDomain& cell, const PhaseField& v) {
  if (v.values.size() != cell.node_count()) throw DomainError("phase field does not match the cell grid");
  if (!v.values.allFinite()) throw DomainError("phase field has non-finite values");
}

/// Cell gradient in the local frame (N x n) from the stacked product G * U^T.
inline Grad cell_gradient(const Eigen::MatrixXd& GUt, Eigen::Index c, int n, int N) {
  Grad xi(N, n);
  for (int a = 0; a < n; ++a)
    for (int comp = 0; comp < N; ++comp) xi(comp, a) = GUt(c * n + a, comp);
  return xi;
}

/// Per-cell density values g(y_c, Du_c R^T).
inline std::vector<double> cell_density(const CellDomain& cell, const GridOperators& ops, const Integrand& g,
                                        const VectorField& u) {
  const int n = cell.dim(), N = u.components();
  const Eigen::MatrixXd GUt = ops.gradient * u.values.transpose();
  const Matrix Rt = cell.rotation().matrix.transpose();
  std::vector<double> w(static_cast<std::size_t>(cell.cell_count()));
  for (Eigen::Index c = 0; c < cell.cell_count(); ++c) {
    const Grad xi = cell_gradient(GUt, c, n, N);
    if (g.is_radial())
      w[c] = g.coefficient(ops.cell_centers[c]) * g.profile()(xi.norm());
    else
      w[c] = g(ops.cell_centers[c], Grad(xi * Rt));
  }
  return w;
}

/// Smoothstep ramp: 0 on (-inf,-1/2], 1 on [1/2, inf), 3s^2 - 2s^3 in between (s = t + 1/2).
inline double cutoff(double t) {
  const double s = std::clamp(t + 0.5, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

}  // namespace detail

/// Sup norm of the ramp derivative, attained at t = 0.
inline constexpr double kCutoffSlopeMax = 1.5;

/// u(node) = xi * y(node), y the global node coordinate.
inline VectorField affine_datum(const CellDomain& cell, const Grad& xi) {
  if (xi.cols() != cell.dim()) throw DomainError("affine_datum: gradient shape does not match the cell dimension");
  VectorField u{Eigen::MatrixXd(xi.rows(), cell.node_count())};
  for (Eigen::Index i = 0; i < cell.node_count(); ++i) u.values.col(i) = xi * cell.node_global(i);
  return u;
}

/// u(node) = zeta * cutoff((y - anchor) . nu / eps_width).
inline VectorField jump_datum(const CellDomain& cell, const Amplitude& zeta, const Point& nu, double eps_width,
                              const Point& anchor) {
  if (!(eps_width > 0.0)) throw DomainError("jump_datum: eps_width must be positive");
  if (nu.size() != cell.dim() || anchor.size() != cell.dim()) throw DomainError("jump_datum: dimension mismatch");
  VectorField u{Eigen::MatrixXd(zeta.size(), cell.node_count())};
  for (Eigen::Index i = 0; i < cell.node_count(); ++i) {
    const double t = (cell.node_global(i) - anchor).dot(nu) / eps_width;
    u.values.col(i) = zeta * detail::cutoff(t);
  }
  return u;
}

inline VectorField jump_datum(const CellDomain& cell, const Amplitude& zeta, const Point& nu, double eps_width) {
  return jump_datum(cell, zeta, nu, eps_width, cell.center());
}

inline double bulk_energy(const CellDomain& cell, const GridOperators& ops, const Integrand& g,
                          const VectorField& u) {
  detail::check_field(cell, u);
  std::vector<double> w = detail::cell_density(cell, ops, g, u);
  for (double& x : w) x *= cell.cell_volume();
  return pairwise_sum(w);
}

inline double bulk_energy(const CellDomain& cell, const Integrand& g, const VectorField& u) {
  return bulk_energy(cell, GridOperators(cell), g, u);
}

/// F_eps on the cell: sum_c h^n (v_c^2 g(y_c, Du_c) + (1 - v_c)^2 / eps + eps |Dv_c|^2).
inline EnergyBreakdown at_energy(const CellDomain& cell, const GridOperators& ops, const Integrand& g,
                                 const VectorField& u, const PhaseField& v, double eps) {
  if (!(eps > 0.0)) throw DomainError("at_energy: eps must be positive");
  detail::check_field(cell, u);
  detail::check_field(cell, v);
  const std::vector<double> dens = detail::cell_density(cell, ops, g, u);
  const Eigen::VectorXd vc = ops.average * v.values;
  const Eigen::VectorXd dv = ops.gradient * v.values;
  const int n = cell.dim();
  const double vol = cell.cell_volume();
  const auto nc = static_cast<std::size_t>(cell.cell_count());
  std::vector<double> bulk(nc), fid(nc), grad(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    bulk[c] = vol * vc[c] * vc[c] * dens[c];
    fid[c] = vol * (1.0 - vc[c]) * (1.0 - vc[c]) / eps;
    grad[c] = vol * eps * dv.segment(static_cast<Eigen::Index>(c) * n, n).squaredNorm();
  }
  return EnergyBreakdown::from_parts(pairwise_sum(bulk), pairwise_sum(fid), pairwise_sum(grad));
}

inline EnergyBreakdown at_energy(const CellDomain& cell, const Integrand& g, const VectorField& u,
                                 const PhaseField& v, double eps) {
  return at_energy(cell, GridOperators(cell), g, u, v, eps);
}

/// S^h on the cell with a positively 1-homogeneous density.
inline EnergyBreakdown surface_energy(const CellDomain& cell, const GridOperators& ops, const Integrand& ginf,
                                      const VectorField& u, const PhaseField& v) {
  if (!ginf.positively_homogeneous())
    throw PreconditionError("surface_energy: density must be positively 1-homogeneous");
  return at_energy(cell, ops, ginf, u, v, 1.0);
}

inline EnergyBreakdown surface_energy(const CellDomain& cell, const Integrand& ginf, const VectorField& u,
                                      const PhaseField& v) {
  return surface_energy(cell, GridOperators(cell), ginf, u, v);
}

/// CSV snapshot: node index, global coordinates, u components, v (if given).
inline void write_field_csv(std::ostream& os, const CellDomain& cell, const VectorField& u,
                            const PhaseField* v = nullptr) {
  const int n = cell.dim();
  os << "node";
  for (int a = 0; a < n; ++a) os << ",y" << a;
  for (int k = 0; k < u.components(); ++k) os << ",u" << k;
  if (v) os << ",v";
  os << '\n';
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < cell.node_count(); ++i) {
    const Point y = cell.node_global(i);
    os << i;
    for (int a = 0; a < n; ++a) os << ',' << y(a);
    for (int k = 0; k < u.components(); ++k) os << ',' << u.values(k, i);
    if (v) os << ',' << v->values(i);
    os << '\n';
  }
  os.precision(old);
}

}  // namespace phasehom
