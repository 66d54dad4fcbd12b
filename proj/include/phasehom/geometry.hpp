// Rotated cubes and rectangles realised as axis-aligned grids in a local frame.
#pragma once

#include "phasehom/integrand.hpp"
#include "phasehom/types.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace phasehom {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Orthogonal R with R e_n = nu.
struct Rotation {
  Point nu;
  Matrix matrix;

  int dim() const { return static_cast<int>(nu.size()); }
};

namespace detail {

/// True when nu lies in the closed upper hemisphere: its last nonzero entry is positive.
inline bool upper_hemisphere(const Point& nu) {
  for (Eigen::Index i = nu.size() - 1; i >= 0; --i) {
    if (nu(i) != 0.0) return nu(i) > 0.0;
  }
  return true;
}

inline Matrix householder_to(const Point& nu) {
  const auto n = nu.size();
  Point en = Point::Zero(n);
  en(n - 1) = 1.0;
  Point w = en - nu;
  const double wn = w.norm();
  Matrix I = Matrix::Identity(n, n);
  if (wn < 1e-14) return I;
  w /= wn;
  return I - 2.0 * w * w.transpose();
}

}  // namespace detail

/// Householder reflection sending e_n to nu on the upper hemisphere; on the lower
/// hemisphere R(nu) := R(-nu) diag(1, ..., 1, -1), so that R(-nu) Q_1 = R(nu) Q_1.
/// Rational normals give rational matrices.
inline Rotation rotation_for_normal(const Point& nu) {
  const auto n = nu.size();
  if (n < 1 || n > kMaxDim) throw DomainError("rotation_for_normal: dimension out of range");
  if (!all_finite(nu)) throw DomainError("rotation_for_normal: non-finite normal");
  const double norm = nu.norm();
  if (norm < 1e-8) throw DomainError("rotation_for_normal: normal is (near) zero");
  if (std::abs(norm - 1.0) > 1e-10) throw DomainError("rotation_for_normal: normal must have unit length");
  Rotation rot;
  rot.nu = nu;
  if (detail::upper_hemisphere(nu)) {
    rot.matrix = detail::householder_to(nu);
  } else {
    const Point neg = -nu;
    rot.matrix = detail::householder_to(neg);
    rot.matrix.col(n - 1) *= -1.0;
  }
  return rot;
}

inline Point basis_vector(int dim, int axis) {
  Point e = Point::Zero(dim);
  e(axis) = 1.0;
  return e;
}

enum class BoundaryPart { all, perp, para };

/// Q^{nu,k}_r(x) discretised with uniform spacing h: local extents k r along the
/// first n-1 axes and r along the last, mapped to the global frame by z -> R z + center.
/// Nodes are numbered with local axis 0 fastest.
class CellDomain {
 public:
  CellDomain(Point center, std::array<int, kMaxDim> cells, Rotation rotation, double spacing, double side,
             int elongation)
      : center_(std::move(center)),
        rotation_(std::move(rotation)),
        h_(spacing),
        side_(side),
        elongation_(elongation),
        cells_(cells) {
    dim_ = static_cast<int>(center_.size());
    node_stride_[0] = cell_stride_[0] = 1;
    for (int a = 1; a < dim_; ++a) {
      node_stride_[a] = node_stride_[a - 1] * (cells_[a - 1] + 1);
      cell_stride_[a] = cell_stride_[a - 1] * cells_[a - 1];
    }
    num_nodes_ = node_stride_[dim_ - 1] * (cells_[dim_ - 1] + 1);
    num_cells_ = cell_stride_[dim_ - 1] * cells_[dim_ - 1];
    cell_volume_ = std::pow(h_, dim_);
  }

  int dim() const { return dim_; }
  const Point& center() const { return center_; }
  const Rotation& rotation() const { return rotation_; }
  double spacing() const { return h_; }
  /// Nominal side r and elongation k (0 / 1 for boxes built with make_box).
  double side() const { return side_; }
  int elongation() const { return elongation_; }

  int cells_along(int axis) const { return cells_[axis]; }
  int nodes_along(int axis) const { return cells_[axis] + 1; }
  double length(int axis) const { return cells_[axis] * h_; }
  Eigen::Index node_count() const { return num_nodes_; }
  Eigen::Index cell_count() const { return num_cells_; }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return static_cast<double>(num_cells_) * cell_volume_; }
  /// Realised (n-1)-dimensional measure of the face orthogonal to nu.
  double cross_section() const {
    double a = 1.0;
    for (int i = 0; i + 1 < dim_; ++i) a *= length(i);
    return a;
  }

  Eigen::Index node_stride(int axis) const { return node_stride_[axis]; }

  std::array<int, kMaxDim> node_multi(Eigen::Index idx) const {
    std::array<int, kMaxDim> m{};
    for (int a = dim_ - 1; a >= 0; --a) {
      m[a] = static_cast<int>(idx / node_stride_[a]);
      idx -= static_cast<Eigen::Index>(m[a]) * node_stride_[a];
    }
    return m;
  }

  Eigen::Index node_index(const std::array<int, kMaxDim>& m) const {
    Eigen::Index idx = 0;
    for (int a = 0; a < dim_; ++a) idx += static_cast<Eigen::Index>(m[a]) * node_stride_[a];
    return idx;
  }

  std::array<int, kMaxDim> cell_multi(Eigen::Index idx) const {
    std::array<int, kMaxDim> m{};
    for (int a = dim_ - 1; a >= 0; --a) {
      m[a] = static_cast<int>(idx / cell_stride_[a]);
      idx -= static_cast<Eigen::Index>(m[a]) * cell_stride_[a];
    }
    return m;
  }

  /// Node at the lowest corner of cell c.
  Eigen::Index cell_anchor(Eigen::Index c) const { return node_index(cell_multi(c)); }

  /// The 2^n corner nodes of cell c.
  int cell_corners(Eigen::Index c, std::array<Eigen::Index, 8>& out) const {
    const Eigen::Index base = cell_anchor(c);
    const int count = 1 << dim_;
    for (int mask = 0; mask < count; ++mask) {
      Eigen::Index idx = base;
      for (int a = 0; a < dim_; ++a)
        if (mask & (1 << a)) idx += node_stride_[a];
      out[mask] = idx;
    }
    return count;
  }

  Point node_local(Eigen::Index idx) const {
    const auto m = node_multi(idx);
    Point z(dim_);
    for (int a = 0; a < dim_; ++a) z(a) = -0.5 * length(a) + m[a] * h_;
    return z;
  }

  Point cell_center_local(Eigen::Index c) const {
    const auto m = cell_multi(c);
    Point z(dim_);
    for (int a = 0; a < dim_; ++a) z(a) = -0.5 * length(a) + (m[a] + 0.5) * h_;
    return z;
  }

  Point to_global(const Point& z) const { return rotation_.matrix * z + center_; }
  Point node_global(Eigen::Index idx) const { return to_global(node_local(idx)); }
  Point cell_center_global(Eigen::Index c) const { return to_global(cell_center_local(c)); }

  bool on_boundary(Eigen::Index idx, BoundaryPart part) const {
    const auto m = node_multi(idx);
    bool perp = false, para = false;
    for (int a = 0; a < dim_; ++a) {
      const bool rim = m[a] == 0 || m[a] == cells_[a];
      if (!rim) continue;
      if (a == dim_ - 1)
        para = true;
      else
        perp = true;
    }
    switch (part) {
      case BoundaryPart::perp: return perp;
      case BoundaryPart::para: return para;
      case BoundaryPart::all: return perp || para;
    }
    return false;
  }

 private:
  Point center_;
  Rotation rotation_;
  double h_;
  double side_;
  int elongation_;
  std::array<int, kMaxDim> cells_{};
  std::array<Eigen::Index, kMaxDim> node_stride_{};
  std::array<Eigen::Index, kMaxDim> cell_stride_{};
  Eigen::Index num_nodes_ = 0;
  Eigen::Index num_cells_ = 0;
  double cell_volume_ = 0.0;
  int dim_ = 0;
};

/// Q^{nu,k}_side(center) with spacing h.
inline CellDomain make_cell(const Point& center, double side, const Point& nu, int k, double h) {
  if (!(side > 0.0)) throw DomainError("make_cell: side must be positive");
  if (k < 1) throw DomainError("make_cell: elongation k must be >= 1");
  if (!(h > 0.0) || h > side / 4.0 * (1.0 + 1e-12))
    throw ResolutionError("make_cell: spacing h must satisfy 0 < h <= side/4");
  if (center.size() != nu.size()) throw DomainError("make_cell: center and normal dimensions differ");
  const int n = static_cast<int>(nu.size());
  std::array<int, kMaxDim> cells{};
  for (int a = 0; a < n; ++a) {
    const double L = a + 1 < n ? k * side : side;
    cells[a] = static_cast<int>(std::lround(L / h));
  }
  return CellDomain(center, cells, rotation_for_normal(nu), h, side, k);
}

/// General rotated box with the given local extents (used for the intervals T_nu(A')).
inline CellDomain make_box(const Point& center, const std::vector<double>& lengths, const Rotation& rotation,
                           double h) {
  const int n = static_cast<int>(center.size());
  if (static_cast<int>(lengths.size()) != n || rotation.dim() != n)
    throw DomainError("make_box: dimension mismatch");
  if (!(h > 0.0)) throw ResolutionError("make_box: spacing must be positive");
  std::array<int, kMaxDim> cells{};
  for (int a = 0; a < n; ++a) {
    cells[a] = static_cast<int>(std::lround(lengths[a] / h));
    if (cells[a] < 1) throw ResolutionError("make_box: spacing coarser than an extent");
  }
  return CellDomain(center, cells, rotation, h, 0.0, 1);
}

/// Sorted node indices on the requested boundary faces. perp: faces normal to the
/// first n-1 local axes; para: the two faces orthogonal to nu.
inline std::vector<Eigen::Index> boundary_nodes(const CellDomain& cell, BoundaryPart part) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < cell.node_count(); ++i)
    if (cell.on_boundary(i, part)) out.push_back(i);
  return out;
}

/// g~(z, xi) = g(R z + c, xi R^T): the density seen in the local frame of `cell`.
inline Integrand localize_integrand(const CellDomain& cell, const Integrand& g) {
  const Matrix R = cell.rotation().matrix;
  const Point c = cell.center();
  auto localize_one = [&](const Integrand& f) {
    const std::string id = f.id();
    if (f.is_radial()) {
      auto a = f.coefficient_fn();
      // |xi R^T| = |xi| for orthogonal R, so the profile is unchanged.
      return Integrand::radial(id, [a, R, c](const Point& z) { return a(Point(R * z + c)); }, f.profile(),
                               f.constants());
    }
    return Integrand::generic(id, [f, R, c](const Point& z, const Grad& xi) {
      return f(Point(R * z + c), Grad(xi * R.transpose()));
    }, f.constants());
  };
  Integrand out = localize_one(g);
  if (!g.positively_homogeneous()) {
    if (auto rec = g.recession()) out = out.with_recession(localize_one(*rec));
  }
  return out;
}

}  // namespace phasehom
