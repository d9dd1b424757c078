// Gauss rules on full cells, on the fluid/solid parts of cut cells, on
// interface arcs and on mesh faces. All rules live in physical coordinates.
#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cutfsi/geometry.hpp"
#include "cutfsi/mesh.hpp"

namespace cutfsi {

struct GaussRule1D {
  std::vector<double> points;   ///< on [0, 1]
  std::vector<double> weights;  ///< sum to 1
};

/// Gauss-Legendre rule on [0, 1], exact up to degree 2 npts - 1.
inline GaussRule1D gauss_1d(int npts) {
  if (npts < 1 || npts > 20) throw std::invalid_argument("gauss_1d: npts must be in [1, 20]");
  GaussRule1D rule;
  rule.points.resize(npts);
  rule.weights.resize(npts);
  for (int i = 0; i < (npts + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (npts + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= npts; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = npts * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= npts; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = npts * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[npts - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[npts - 1 - i] = 0.5 * w;
  }
  if (npts % 2 == 1) rule.points[npts / 2] = 0.5;
  return rule;
}

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  std::vector<Vec2> normals;  ///< interface rules only: fluid outward normal
  int owner = -1;             ///< cell or face id

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

/// Tensor-product Gauss rule on a full cell.
inline QuadratureRule cell_rule(const Mesh& mesh, int cell, int npts) {
  const GaussRule1D g = gauss_1d(npts);
  const Vec2 lo = mesh.cell_lower(cell);
  const double h = mesh.h();
  QuadratureRule q;
  q.owner = cell;
  q.points.reserve(npts * npts);
  for (int j = 0; j < npts; ++j) {
    for (int i = 0; i < npts; ++i) {
      q.points.push_back({lo.x + h * g.points[i], lo.y + h * g.points[j]});
      q.weights.push_back(h * h * g.weights[i] * g.weights[j]);
    }
  }
  return q;
}

/// Rule over K_i for a cut cell, built in polar coordinates about the circle
/// center on each angular piece: 2 npts angular points and npts + 1 radial
/// points per piece. Slivers below 1e-14 h^2 give an empty rule.
inline QuadratureRule cut_cell_rule(const Mesh& mesh, const CutTopology& topo, int cell, Side side, int npts) {
  if (!topo.is_cut(cell)) throw std::invalid_argument("cut_cell_rule: cell is not cut");
  QuadratureRule q;
  q.owner = cell;
  (void)mesh;
  if (topo.kappa(cell, side) < 1e-14) return q;

  const GaussRule1D gt = gauss_1d(std::min(2 * npts, 20));
  const GaussRule1D gr = gauss_1d(npts + 1);
  const Vec2 c = topo.levelset().center();
  const double r = topo.levelset().radius();
  const bool solid = side == Side::Solid;
  for (const AngularPiece& p : topo.geometry(cell).pieces) {
    if (p.split == (solid ? RaySplit::Fluid : RaySplit::Solid)) continue;
    const double dtheta = p.theta_b - p.theta_a;
    for (std::size_t a = 0; a < gt.points.size(); ++a) {
      const double theta = p.theta_a + dtheta * gt.points[a];
      double rho_lo = p.inner.distance_along(c, theta);
      double rho_hi = p.outer.distance_along(c, theta);
      if (p.split == RaySplit::Crossing) (solid ? rho_hi : rho_lo) = r;
      const double dr = rho_hi - rho_lo;
      if (dr <= 0.0) continue;
      const Vec2 dir{std::cos(theta), std::sin(theta)};
      for (std::size_t b = 0; b < gr.points.size(); ++b) {
        const double rho = rho_lo + dr * gr.points[b];
        q.points.push_back(c + rho * dir);
        q.weights.push_back(dtheta * gt.weights[a] * dr * gr.weights[b] * rho);
      }
    }
  }
  return q;
}

/// Rule over Omega_i intersected with the cell: the full cell rule for uncut
/// members of T_i^h, the cut rule for cut cells, empty otherwise.
inline QuadratureRule domain_rule(const Mesh& mesh, const CutTopology& topo, int cell, Side side, int npts_full,
                                  int npts_cut) {
  if (topo.is_cut(cell)) return cut_cell_rule(mesh, topo, cell, side, npts_cut);
  if (topo.in_side(cell, side)) return cell_rule(mesh, cell, npts_full);
  QuadratureRule q;
  q.owner = cell;
  return q;
}

/// Rule on the interface arcs inside a cut cell (arc-length measure), with the
/// fluid outward normal attached to every point.
inline QuadratureRule interface_rule(const Mesh& mesh, const CutTopology& topo, int cell, int npts) {
  (void)mesh;
  if (!topo.is_cut(cell)) throw std::invalid_argument("interface_rule: cell is not cut");
  const GaussRule1D g = gauss_1d(npts);
  const CircleLevelSet& ls = topo.levelset();
  const double r = ls.radius();
  QuadratureRule q;
  q.owner = cell;
  for (const InterfaceSegment& arc : topo.segments(cell)) {
    const double dtheta = arc.angle();
    for (std::size_t a = 0; a < g.points.size(); ++a) {
      const double theta = arc.theta_begin + dtheta * g.points[a];
      const Vec2 x = ls.point_at(theta);
      q.points.push_back(x);
      q.weights.push_back(r * dtheta * g.weights[a]);
      q.normals.push_back({-std::cos(theta), -std::sin(theta)});
    }
  }
  return q;
}

/// Gauss rule along a whole mesh face.
inline QuadratureRule face_rule(const Mesh& mesh, int face, int npts) {
  const GaussRule1D g = gauss_1d(npts);
  const Face& f = mesh.face(face);
  QuadratureRule q;
  q.owner = face;
  const Vec2 d = f.b - f.a;
  const double len = norm(d);
  for (std::size_t a = 0; a < g.points.size(); ++a) {
    q.points.push_back(f.a + g.points[a] * d);
    q.weights.push_back(len * g.weights[a]);
  }
  return q;
}

}  // namespace cutfsi
