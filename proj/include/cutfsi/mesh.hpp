// Uniform quadrilateral mesh of (-1,1)^2 and its cut topology with respect to
// a circular interface: cell classes, cut fractions, exact cut-cell geometry,
// ghost-penalty face sets.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutfsi/geometry.hpp"

namespace cutfsi {

struct Face {
  int cell0 = -1;  ///< lower lexicographic id (the only cell on the boundary)
  int cell1 = -1;  ///< -1 on the boundary
  Vec2 a;
  Vec2 b;
  Vec2 normal;     ///< unit; from cell0 into cell1, outward on the boundary
  bool vertical = false;

  bool on_boundary() const { return cell1 < 0; }
};

/// n x n axis-aligned squares covering (-1,1)^2. Cells are numbered
/// lexicographically, id = j * n + i with i the column.
class Mesh {
 public:
  explicit Mesh(int n) : n_(n), h_(2.0 / n) {
    if (n < 2) throw std::invalid_argument("build_mesh: need at least 2 cells per side");
    build_faces();
  }

  int cells_per_side() const { return n_; }
  double h() const { return h_; }
  int num_cells() const { return n_ * n_; }
  int num_vertices() const { return (n_ + 1) * (n_ + 1); }
  int num_faces() const { return static_cast<int>(faces_.size()); }

  int cell_index(int i, int j) const { return j * n_ + i; }
  std::array<int, 2> cell_ij(int c) const { return {c % n_, c / n_}; }
  Vec2 cell_lower(int c) const {
    const auto [i, j] = cell_ij(c);
    return {coordinate(i), coordinate(j)};
  }
  Vec2 cell_upper(int c) const {
    const auto [i, j] = cell_ij(c);
    return {coordinate(i + 1), coordinate(j + 1)};
  }
  Vec2 cell_center(int c) const { return 0.5 * (cell_lower(c) + cell_upper(c)); }
  Vec2 vertex(int v) const { return {coordinate(v % (n_ + 1)), coordinate(v / (n_ + 1))}; }
  /// Grid line k in [0, n]; exact at the domain boundary.
  double coordinate(int k) const { return -1.0 + 2.0 * k / n_; }

  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int f) const { return faces_[f]; }
  /// left, right, bottom, top
  std::array<int, 4> cell_faces(int c) const {
    const auto [i, j] = cell_ij(c);
    const int nv = n_ * (n_ + 1);
    return {j * (n_ + 1) + i, j * (n_ + 1) + i + 1, nv + j * n_ + i, nv + (j + 1) * n_ + i};
  }

  /// Cell containing x; points on grid lines go to the upper/right cell except
  /// on the outer boundary.
  int locate(Vec2 x) const {
    auto idx = [&](double t) {
      int k = static_cast<int>(std::floor((t + 1.0) / h_));
      return std::clamp(k, 0, n_ - 1);
    };
    return cell_index(idx(x.x), idx(x.y));
  }

 private:
  void build_faces() {
    faces_.reserve(2 * n_ * (n_ + 1));
    for (int j = 0; j < n_; ++j) {
      for (int i = 0; i <= n_; ++i) {
        Face f;
        f.vertical = true;
        f.a = {coordinate(i), coordinate(j)};
        f.b = {coordinate(i), coordinate(j + 1)};
        if (i == 0) {
          f.cell0 = cell_index(0, j);
          f.normal = {-1.0, 0.0};
        } else if (i == n_) {
          f.cell0 = cell_index(n_ - 1, j);
          f.normal = {1.0, 0.0};
        } else {
          f.cell0 = cell_index(i - 1, j);
          f.cell1 = cell_index(i, j);
          f.normal = {1.0, 0.0};
        }
        faces_.push_back(f);
      }
    }
    for (int j = 0; j <= n_; ++j) {
      for (int i = 0; i < n_; ++i) {
        Face f;
        f.a = {coordinate(i), coordinate(j)};
        f.b = {coordinate(i + 1), coordinate(j)};
        if (j == 0) {
          f.cell0 = cell_index(i, 0);
          f.normal = {0.0, -1.0};
        } else if (j == n_) {
          f.cell0 = cell_index(i, n_ - 1);
          f.normal = {0.0, 1.0};
        } else {
          f.cell0 = cell_index(i, j - 1);
          f.cell1 = cell_index(i, j);
          f.normal = {0.0, 1.0};
        }
        faces_.push_back(f);
      }
    }
  }

  int n_;
  double h_;
  std::vector<Face> faces_;
};

inline Mesh build_mesh(int n) {
  if (n >= 2 && n % 2 != 0) {
    std::clog << "warning: odd cells-per-side " << n << " does not nest under refinement\n";
  }
  return Mesh(n);
}

// ---------------------------------------------------------------------------
// Exact geometry of a cell cut by a circle.
//
// Seen from the circle center, a cell that does not contain the center is a
// union of angular pieces. On each piece the ray enters the cell through one
// fixed grid line and leaves through another, so the ray segment is
// [rho_in(theta), rho_out(theta)] with rho = d / cos or d / sin. Comparing the
// radius against that segment yields the solid part, the fluid part and the
// interface arc without approximation.

/// x = coord (vertical) or y = coord (horizontal).
struct GridLine {
  bool vertical = true;
  double coord = 0.0;

  double distance_along(Vec2 center, double theta) const {
    return vertical ? (coord - center.x) / std::cos(theta) : (coord - center.y) / std::sin(theta);
  }

  /// Integral of rho(theta)^2 / 2 over [a, b].
  double half_square_integral(Vec2 center, double a, double b) const {
    const double d = vertical ? coord - center.x : coord - center.y;
    const double s = std::sin(b - a);
    const double q = vertical ? s / (std::cos(a) * std::cos(b)) : s / (std::sin(a) * std::sin(b));
    return 0.5 * d * d * q;
  }
};

enum class RaySplit { Fluid, Solid, Crossing };

struct AngularPiece {
  double theta_a = 0.0;
  double theta_b = 0.0;
  GridLine inner;
  GridLine outer;
  RaySplit split = RaySplit::Fluid;
};

struct CutCellGeometry {
  std::vector<AngularPiece> pieces;
  std::vector<InterfaceSegment> arcs;
  double solid_area = 0.0;
  double fluid_area = 0.0;
};

inline CutCellGeometry decompose_cell(Vec2 lower, double h, const CircleLevelSet& ls, int cell_id = -1) {
  const Vec2 c = ls.center();
  const Vec2 upper = lower + Vec2{h, h};
  if (c.x >= lower.x && c.x <= upper.x && c.y >= lower.y && c.y <= upper.y) {
    throw std::runtime_error("cut cell " + std::to_string(cell_id) +
                             " contains the circle center; mesh too coarse for the interface");
  }
  const double r = ls.radius();
  const Vec2 center_dir = 0.5 * (lower + upper) - c;
  const double theta_c = std::atan2(center_dir.y, center_dir.x);
  auto rel_angle = [&](Vec2 p) {
    const Vec2 d = p - c;
    return std::remainder(std::atan2(d.y, d.x) - theta_c, 2.0 * std::numbers::pi);
  };

  const std::array<Vec2, 4> corners{lower, Vec2{upper.x, lower.y}, upper, Vec2{lower.x, upper.y}};
  std::vector<double> breaks;
  for (const Vec2& p : corners) breaks.push_back(rel_angle(p));
  for (int e = 0; e < 4; ++e) {
    for (const Vec2& p : edge_zero_crossings(ls, corners[e], corners[(e + 1) % 4])) {
      breaks.push_back(rel_angle(p));
    }
  }
  std::sort(breaks.begin(), breaks.end());

  CutCellGeometry g;
  const double lo = breaks.front();
  const double hi = breaks.back();
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (b - a <= 1e-15 * (hi - lo)) continue;
    const double mid = theta_c + 0.5 * (a + b);
    const double dx = std::cos(mid);
    const double dy = std::sin(mid);
    // Slab intersection of the ray with the square.
    double tx0 = (lower.x - c.x) / dx, tx1 = (upper.x - c.x) / dx;
    GridLine lx0{true, lower.x}, lx1{true, upper.x};
    if (tx0 > tx1) {
      std::swap(tx0, tx1);
      std::swap(lx0, lx1);
    }
    double ty0 = (lower.y - c.y) / dy, ty1 = (upper.y - c.y) / dy;
    GridLine ly0{false, lower.y}, ly1{false, upper.y};
    if (ty0 > ty1) {
      std::swap(ty0, ty1);
      std::swap(ly0, ly1);
    }
    AngularPiece piece;
    piece.theta_a = theta_c + a;
    piece.theta_b = theta_c + b;
    piece.inner = tx0 > ty0 ? lx0 : ly0;
    piece.outer = tx1 < ty1 ? lx1 : ly1;
    const double rho_in = std::max(tx0, ty0);
    const double rho_out = std::min(tx1, ty1);
    piece.split = r <= rho_in ? RaySplit::Fluid : (r >= rho_out ? RaySplit::Solid : RaySplit::Crossing);

    const double in_sq = piece.inner.half_square_integral(c, piece.theta_a, piece.theta_b);
    const double out_sq = piece.outer.half_square_integral(c, piece.theta_a, piece.theta_b);
    const double r_sq = 0.5 * r * r * (piece.theta_b - piece.theta_a);
    switch (piece.split) {
      case RaySplit::Fluid: g.fluid_area += out_sq - in_sq; break;
      case RaySplit::Solid: g.solid_area += out_sq - in_sq; break;
      case RaySplit::Crossing:
        g.solid_area += r_sq - in_sq;
        g.fluid_area += out_sq - r_sq;
        if (!g.arcs.empty() && g.arcs.back().theta_end == piece.theta_a) {
          g.arcs.back().theta_end = piece.theta_b;
          g.arcs.back().end = ls.point_at(piece.theta_b);
        } else {
          g.arcs.push_back({piece.theta_a, piece.theta_b, ls.point_at(piece.theta_a),
                            ls.point_at(piece.theta_b), cell_id});
        }
        break;
    }
    g.pieces.push_back(piece);
  }
  return g;
}

// ---------------------------------------------------------------------------

enum class CellClass { FluidOnly, SolidOnly, Cut };

/// Subtriangulations T_f^h and T_s^h, cut fractions and ghost faces.
class CutTopology {
 public:
  CutTopology(const Mesh& mesh, const CircleLevelSet& ls) : levelset_(ls) {
    const int nc = mesh.num_cells();
    cell_class_.resize(nc);
    kappa_solid_.assign(nc, 0.0);
    geometry_.resize(nc);
    const double r2 = ls.radius_squared();
    const Vec2 c = ls.center();
    for (int k = 0; k < nc; ++k) {
      const Vec2 lo = mesh.cell_lower(k);
      const Vec2 hi = mesh.cell_upper(k);
      const Vec2 nearest{std::clamp(c.x, lo.x, hi.x), std::clamp(c.y, lo.y, hi.y)};
      const double min_d2 = norm_squared(nearest - c);
      const double max_d2 = std::max({norm_squared(lo - c), norm_squared(hi - c),
                                      norm_squared(Vec2{lo.x, hi.y} - c), norm_squared(Vec2{hi.x, lo.y} - c)});
      if (max_d2 <= r2) {
        cell_class_[k] = CellClass::SolidOnly;
        kappa_solid_[k] = 1.0;
      } else if (min_d2 >= r2) {
        cell_class_[k] = CellClass::FluidOnly;
      } else {
        CutCellGeometry g = decompose_cell(lo, mesh.h(), ls, k);
        const double area = mesh.h() * mesh.h();
        if (g.arcs.empty()) {
          // Numerically tangent: the cell lies on one side.
          const bool solid = g.solid_area > g.fluid_area;
          cell_class_[k] = solid ? CellClass::SolidOnly : CellClass::FluidOnly;
          kappa_solid_[k] = solid ? 1.0 : 0.0;
          continue;
        }
        cell_class_[k] = CellClass::Cut;
        kappa_solid_[k] = std::clamp(g.solid_area / area, 0.0, 1.0);
        geometry_[k] = std::move(g);
        cut_cells_.push_back(k);
      }
    }
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Face& face = mesh.face(f);
      if (face.on_boundary()) continue;
      if (cell_class_[face.cell0] != CellClass::Cut && cell_class_[face.cell1] != CellClass::Cut) continue;
      for (Side s : {Side::Fluid, Side::Solid}) {
        if (in_side(face.cell0, s) && in_side(face.cell1, s)) ghost_[static_cast<int>(s)].push_back(f);
      }
    }
  }

  const CircleLevelSet& levelset() const { return levelset_; }
  int num_cells() const { return static_cast<int>(cell_class_.size()); }
  CellClass cell_class(int c) const { return cell_class_[c]; }
  bool is_cut(int c) const { return cell_class_[c] == CellClass::Cut; }
  bool in_side(int c, Side s) const {
    return cell_class_[c] == CellClass::Cut ||
           cell_class_[c] == (s == Side::Fluid ? CellClass::FluidOnly : CellClass::SolidOnly);
  }
  /// Cells of the side that lie in the interior region Omega_i \ G_h.
  bool is_interior(int c, Side s) const { return in_side(c, s) && !is_cut(c); }

  double kappa(int c, Side s) const { return s == Side::Solid ? kappa_solid_[c] : 1.0 - kappa_solid_[c]; }
  const CutCellGeometry& geometry(int c) const { return geometry_[c]; }
  const std::vector<InterfaceSegment>& segments(int c) const { return geometry_[c].arcs; }
  const std::vector<int>& cut_cells() const { return cut_cells_; }
  const std::vector<int>& ghost_faces(Side s) const { return ghost_[static_cast<int>(s)]; }

  int count_side(Side s) const {
    int n = 0;
    for (int c = 0; c < num_cells(); ++c) n += in_side(c, s) ? 1 : 0;
    return n;
  }

 private:
  CircleLevelSet levelset_;
  std::vector<CellClass> cell_class_;
  std::vector<double> kappa_solid_;
  std::vector<CutCellGeometry> geometry_;
  std::vector<int> cut_cells_;
  std::array<std::vector<int>, 2> ghost_;
};

inline CutTopology build_cut_topology(const Mesh& mesh, const CircleLevelSet& ls) { return CutTopology(mesh, ls); }

/// (kappa_f, kappa_s) of a classified cell.
inline std::array<double, 2> cut_fraction(const CutTopology& topo, int cell) {
  return {topo.kappa(cell, Side::Fluid), topo.kappa(cell, Side::Solid)};
}

inline const std::vector<int>& ghost_faces(const CutTopology& topo, Side s) { return topo.ghost_faces(s); }

struct PathReport {
  int max_faces_crossed = 0;  ///< N_F
  int max_reuse = 0;          ///< N_K
  int num_paths = 0;
};

/// Breadth-first search from every cut cell across ghost faces of the given
/// side to the nearest uncut cell of that side.
inline PathReport verify_path_assumption(const Mesh& mesh, const CutTopology& topo, Side side) {
  std::vector<std::vector<int>> adjacency(mesh.num_cells());
  for (int f : topo.ghost_faces(side)) {
    const Face& face = mesh.face(f);
    adjacency[face.cell0].push_back(face.cell1);
    adjacency[face.cell1].push_back(face.cell0);
  }
  PathReport report;
  std::map<int, int> reuse;
  std::vector<int> dist(mesh.num_cells(), -1);
  for (int start : topo.cut_cells()) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{start};
    dist[start] = 0;
    int target = -1;
    while (!queue.empty() && target < 0) {
      const int k = queue.front();
      queue.pop_front();
      for (int nb : adjacency[k]) {
        if (dist[nb] >= 0) continue;
        dist[nb] = dist[k] + 1;
        if (topo.is_interior(nb, side)) {
          target = nb;
          break;
        }
        queue.push_back(nb);
      }
    }
    if (target < 0) {
      throw std::runtime_error("path assumption violated: cut cell " + std::to_string(start) +
                               " cannot reach an uncut " + to_string(side) + " cell");
    }
    report.max_faces_crossed = std::max(report.max_faces_crossed, dist[target]);
    report.max_reuse = std::max(report.max_reuse, ++reuse[target]);
    ++report.num_paths;
  }
  return report;
}

}  // namespace cutfsi
