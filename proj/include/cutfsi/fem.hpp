// Tensor-product Lagrange Q_r bases, degree-of-freedom maps on the fluid and
// solid subtriangulations, field evaluation, normal-derivative jumps and nodal
// interpolation.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "cutfsi/geometry.hpp"
#include "cutfsi/mesh.hpp"

namespace cutfsi {

/// Symmetric 2x2 second-derivative tensor.
struct Hessian {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double contract(Vec2 n) const { return n.x * n.x * xx + 2.0 * n.x * n.y * xy + n.y * n.y * yy; }
};

/// Lagrange polynomials on r + 1 equispaced nodes of [0, 1].
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(int order) : order_(order) {
    if (order < 1 || order > 4) throw std::invalid_argument("LagrangeBasis1D: order must be in [1, 4]");
    for (int k = 0; k <= order; ++k) nodes_.push_back(static_cast<double>(k) / order);
  }

  int order() const { return order_; }
  int size() const { return order_ + 1; }

  /// Value and first two derivatives of basis k at t.
  std::array<double, 3> eval(int k, double t) const {
    const int n = size();
    double value = 1.0;
    double d1 = 0.0;
    double d2 = 0.0;
    const double tk = nodes_[k];
    for (int m = 0; m < n; ++m) {
      if (m != k) value *= (t - nodes_[m]) / (tk - nodes_[m]);
    }
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      double p = 1.0 / (tk - nodes_[j]);
      for (int m = 0; m < n; ++m) {
        if (m != k && m != j) p *= (t - nodes_[m]) / (tk - nodes_[m]);
      }
      d1 += p;
      for (int l = 0; l < n; ++l) {
        if (l == k || l == j) continue;
        double q = 1.0 / ((tk - nodes_[j]) * (tk - nodes_[l]));
        for (int m = 0; m < n; ++m) {
          if (m != k && m != j && m != l) q *= (t - nodes_[m]) / (tk - nodes_[m]);
        }
        d2 += q;
      }
    }
    return {value, d1, d2};
  }

 private:
  int order_;
  std::vector<double> nodes_;
};

struct BasisTable {
  std::vector<double> values;
  std::vector<Vec2> gradients;
  std::vector<Hessian> hessians;
};

/// Q_r on the unit square. Local basis k = b (r + 1) + a sits at (a / r, b / r).
class ReferenceBasis {
 public:
  explicit ReferenceBasis(int order) : line_(order) {}

  int order() const { return line_.order(); }
  int size() const { return line_.size() * line_.size(); }
  Vec2 node(int k) const {
    const int r = order();
    return {static_cast<double>(k % (r + 1)) / r, static_cast<double>(k / (r + 1)) / r};
  }

  /// d = 0: values; d = 1: plus gradients; d = 2: plus Hessians.
  BasisTable eval(Vec2 xhat, int d = 0) const {
    const int m = line_.size();
    std::vector<std::array<double, 3>> ex(m), ey(m);
    for (int a = 0; a < m; ++a) {
      ex[a] = line_.eval(a, xhat.x);
      ey[a] = line_.eval(a, xhat.y);
    }
    BasisTable t;
    t.values.resize(size());
    if (d >= 1) t.gradients.resize(size());
    if (d >= 2) t.hessians.resize(size());
    for (int b = 0; b < m; ++b) {
      for (int a = 0; a < m; ++a) {
        const int k = b * m + a;
        t.values[k] = ex[a][0] * ey[b][0];
        if (d >= 1) t.gradients[k] = {ex[a][1] * ey[b][0], ex[a][0] * ey[b][1]};
        if (d >= 2) t.hessians[k] = {ex[a][2] * ey[b][0], ex[a][1] * ey[b][1], ex[a][0] * ey[b][2]};
      }
    }
    return t;
  }

 private:
  LagrangeBasis1D line_;
};

inline BasisTable ref_eval(const ReferenceBasis& basis, Vec2 xhat, int d) { return basis.eval(xhat, d); }

/// Pull back through the cell map (axis-aligned squares: x = lower + h xhat)
/// and scale derivatives by h^-1 and h^-2.
inline BasisTable physical_eval(const Mesh& mesh, int cell, const ReferenceBasis& basis, Vec2 x, int d) {
  const double h = mesh.h();
  const Vec2 lo = mesh.cell_lower(cell);
  BasisTable t = basis.eval({(x.x - lo.x) / h, (x.y - lo.y) / h}, d);
  const double ih = 1.0 / h;
  for (Vec2& g : t.gradients) g *= ih;
  for (Hessian& H : t.hessians) {
    H.xx *= ih * ih;
    H.xy *= ih * ih;
    H.yy *= ih * ih;
  }
  return t;
}

/// j-th derivative along n of every basis function in the table (j in {0, 1, 2}).
inline double directional_derivative(const BasisTable& t, int k, Vec2 n, int j) {
  switch (j) {
    case 0: return t.values[k];
    case 1: return dot(t.gradients[k], n);
    case 2: return t.hessians[k].contract(n);
    default: throw std::invalid_argument("directional_derivative: order must be 0, 1 or 2");
  }
}

enum class FieldRole { FluidVelocity = 0, Pressure = 1, SolidVelocity = 2, Displacement = 3 };

constexpr Side side_of(FieldRole role) {
  return role == FieldRole::FluidVelocity || role == FieldRole::Pressure ? Side::Fluid : Side::Solid;
}

constexpr const char* to_string(FieldRole role) {
  switch (role) {
    case FieldRole::FluidVelocity: return "v_f";
    case FieldRole::Pressure: return "p";
    case FieldRole::SolidVelocity: return "v_s";
    case FieldRole::Displacement: return "u";
  }
  return "?";
}

/// Continuous Q_r dofs on the cells selected by a filter. Lattice nodes are
/// numbered lexicographically over the global (r n + 1)^2 lattice, keeping only
/// nodes of active cells. Vector fields are component-major.
class DofMap {
 public:
  DofMap(const Mesh& mesh, const std::function<bool(int)>& active, FieldRole role, int order, int components)
      : role_(role), basis_(order), components_(components), cells_per_side_(mesh.cells_per_side()) {
    const int n = mesh.cells_per_side();
    const int lat = order * n + 1;
    const int nloc = basis_.size();
    std::vector<int> lattice_to_dof(static_cast<std::size_t>(lat) * lat, -1);
    active_.resize(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) {
      active_[c] = active(c);
      if (!active_[c]) continue;
      const auto [i, j] = mesh.cell_ij(c);
      for (int k = 0; k < nloc; ++k) {
        const int a = order * i + k % (order + 1);
        const int b = order * j + k / (order + 1);
        lattice_to_dof[static_cast<std::size_t>(b) * lat + a] = 0;
      }
    }
    for (int b = 0; b < lat; ++b) {
      for (int a = 0; a < lat; ++a) {
        int& d = lattice_to_dof[static_cast<std::size_t>(b) * lat + a];
        if (d < 0) continue;
        d = num_scalar_++;
        node_points_.push_back({-1.0 + 2.0 * a / (order * n), -1.0 + 2.0 * b / (order * n)});
        boundary_.push_back(a == 0 || b == 0 || a == lat - 1 || b == lat - 1);
      }
    }
    cell_dofs_.assign(static_cast<std::size_t>(mesh.num_cells()) * nloc, -1);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      if (!active_[c]) continue;
      const auto [i, j] = mesh.cell_ij(c);
      for (int k = 0; k < nloc; ++k) {
        const int a = order * i + k % (order + 1);
        const int b = order * j + k / (order + 1);
        cell_dofs_[static_cast<std::size_t>(c) * nloc + k] = lattice_to_dof[static_cast<std::size_t>(b) * lat + a];
      }
    }
    if (role == FieldRole::FluidVelocity) {
      for (int comp = 0; comp < components_; ++comp) {
        for (int s = 0; s < num_scalar_; ++s) {
          if (boundary_[s]) dirichlet_.push_back(index(comp, s));
        }
      }
    }
  }

  FieldRole role() const { return role_; }
  const ReferenceBasis& basis() const { return basis_; }
  int order() const { return basis_.order(); }
  int components() const { return components_; }
  int cells_per_side() const { return cells_per_side_; }
  int num_scalar() const { return num_scalar_; }
  int size() const { return components_ * num_scalar_; }
  int local_size() const { return basis_.size(); }
  int index(int comp, int scalar) const { return comp * num_scalar_ + scalar; }

  bool active(int cell) const { return active_[cell] != 0; }
  std::span<const int> cell_dofs(int cell) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(cell) * local_size(), static_cast<std::size_t>(local_size())};
  }
  Vec2 node_point(int scalar) const { return node_points_[scalar]; }
  bool on_boundary(int scalar) const { return boundary_[scalar] != 0; }
  /// Field-local indices carrying Dirichlet conditions (fluid velocity on the
  /// outer boundary; solid fields have none).
  const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }

 private:
  FieldRole role_;
  ReferenceBasis basis_;
  int components_;
  int cells_per_side_;
  int num_scalar_ = 0;
  std::vector<char> active_;
  std::vector<int> cell_dofs_;
  std::vector<Vec2> node_points_;
  std::vector<char> boundary_;
  std::vector<int> dirichlet_;
};

inline DofMap build_dof_map(const Mesh& mesh, const CutTopology& topo, FieldRole role, int order, int components) {
  const Side side = side_of(role);
  return DofMap(mesh, [&](int c) { return topo.in_side(c, side); }, role, order, components);
}

/// Dofs on every cell of the mesh.
inline DofMap build_full_dof_map(const Mesh& mesh, FieldRole role, int order, int components) {
  return DofMap(mesh, [](int) { return true; }, role, order, components);
}

/// A coefficient vector interpreted through its dof map.
struct FieldView {
  const DofMap* dofs = nullptr;
  std::span<const double> coeffs;

  FieldView(const DofMap& d, std::span<const double> c) : dofs(&d), coeffs(c) {
    if (static_cast<int>(c.size()) != d.size()) throw std::invalid_argument("FieldView: coefficient count mismatch");
  }

  double value(const Mesh& mesh, int cell, Vec2 x, int comp = 0) const {
    const BasisTable t = physical_eval(mesh, cell, dofs->basis(), x, 0);
    return combine(t.values, cell, comp);
  }
  Vec2 gradient(const Mesh& mesh, int cell, Vec2 x, int comp = 0) const {
    const BasisTable t = physical_eval(mesh, cell, dofs->basis(), x, 1);
    Vec2 g;
    const auto ids = dofs->cell_dofs(cell);
    for (std::size_t k = 0; k < ids.size(); ++k) g += coeffs[dofs->index(comp, ids[k])] * t.gradients[k];
    return g;
  }

  double combine(const std::vector<double>& table, int cell, int comp) const {
    const auto ids = dofs->cell_dofs(cell);
    double v = 0.0;
    for (std::size_t k = 0; k < ids.size(); ++k) v += coeffs[dofs->index(comp, ids[k])] * table[k];
    return v;
  }
};

/// [[d^j u / dn^j]] = (cell0 side) - (cell1 side) across an interior face, for
/// one component, at a point on the face. n is the stored face normal.
inline double normal_derivative_jump(const Mesh& mesh, int face, const FieldView& field, int j, Vec2 x, int comp = 0) {
  const Face& f = mesh.face(face);
  if (f.on_boundary()) throw std::invalid_argument("normal_derivative_jump: boundary face");
  auto side_value = [&](int cell) {
    const BasisTable t = physical_eval(mesh, cell, field.dofs->basis(), x, j);
    const auto ids = field.dofs->cell_dofs(cell);
    double v = 0.0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      v += field.coeffs[field.dofs->index(comp, ids[k])] * directional_derivative(t, static_cast<int>(k), f.normal, j);
    }
    return v;
  };
  return side_value(f.cell0) - side_value(f.cell1);
}

/// Nodal interpolation. `fn` maps a point to a double (scalar fields) or to a
/// Vec2 (two-component fields).
template <class Fn>
std::vector<double> interpolate(const DofMap& dofs, Fn&& fn) {
  std::vector<double> out(dofs.size(), 0.0);
  for (int s = 0; s < dofs.num_scalar(); ++s) {
    const auto v = fn(dofs.node_point(s));
    if constexpr (std::is_convertible_v<decltype(v), double>) {
      out[dofs.index(0, s)] = v;
    } else {
      out[dofs.index(0, s)] = v.x;
      if (dofs.components() > 1) out[dofs.index(1, s)] = v.y;
    }
  }
  return out;
}

/// Prescribed values at the Dirichlet dofs, by nodal interpolation of g(t, x).
inline std::vector<std::pair<int, double>> interpolate_boundary(const DofMap& dofs,
                                                                const std::function<Vec2(double, Vec2)>& g, double t) {
  std::vector<std::pair<int, double>> out;
  out.reserve(dofs.dirichlet_dofs().size());
  for (int d : dofs.dirichlet_dofs()) {
    const int comp = d / dofs.num_scalar();
    const int s = d % dofs.num_scalar();
    const Vec2 v = g(t, dofs.node_point(s));
    out.emplace_back(d, comp == 0 ? v.x : v.y);
  }
  return out;
}

}  // namespace cutfsi
