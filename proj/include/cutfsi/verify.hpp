// Property checks shared by the verify command and the acceptance binary.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cutfsi/analysis.hpp"

namespace cutfsi {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

template <class... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

}  // namespace detail

/// Solid area from the cut quadrature and interface length from the arc rules.
inline CheckResult check_geometry(const SimulationConfig& base, const std::vector<int>& levels) {
  CheckResult r{"geometry", true, ""};
  const double area = std::numbers::pi * base.radius_squared;
  const double length = 2.0 * std::numbers::pi * std::sqrt(base.radius_squared);
  for (int n : levels) {
    SimulationConfig c = base;
    c.cells_per_side = n;
    const Discretization disc(c);
    double a = 0.0, l = 0.0;
    for (int cell = 0; cell < disc.mesh().num_cells(); ++cell) {
      for (double w : disc.bulk_rule(cell, Side::Solid).weights) a += w;
      for (double w : disc.interface_rule(cell).weights) l += w;
    }
    const double ea = std::abs(a - area), el = std::abs(l - length);
    r.passed = r.passed && ea <= 1e-8 && el <= 1e-10;
    r.detail += detail::format("n=%d area err %.2e length err %.2e; ", n, ea, el);
  }
  return r;
}

/// Q1 mass matrix of one uncut fluid cell against (h^2/36)[4 2 2 1; ...].
inline CheckResult check_q1_mass(const SimulationConfig& cfg) {
  const Discretization disc(cfg);
  const Mesh& mesh = disc.mesh();
  int cell = -1;
  for (int c = 0; c < mesh.num_cells() && cell < 0; ++c) {
    if (disc.topology().is_interior(c, Side::Fluid)) cell = c;
  }
  if (cell < 0) return {"q1_mass", false, "no uncut fluid cell"};
  const ReferenceBasis basis(1);
  const QuadratureRule q = cell_rule(mesh, cell, cfg.quad_full);
  const double h = mesh.h();
  double err = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double m = 0.0;
      for (std::size_t p = 0; p < q.size(); ++p) {
        const BasisTable t = physical_eval(mesh, cell, basis, q.points[p], 0);
        m += q.weights[p] * t.values[a] * t.values[b];
      }
      const Vec2 na = basis.node(a), nb = basis.node(b);
      const int shared = (na.x == nb.x) + (na.y == nb.y);
      const double exact = h * h / 36.0 * (shared == 2 ? 4.0 : shared == 1 ? 2.0 : 1.0);
      err = std::max(err, std::abs(m - exact));
    }
  }
  return {"q1_mass", err <= 1e-14, detail::format("cell %d max entry error %.2e", cell, err)};
}

/// Each ghost form: symmetric, positive semidefinite (dense spectrum) and
/// vanishing on interpolants of global polynomials of the field's degree.
inline CheckResult check_ghost_forms(const SimulationConfig& cfg) {
  const Discretization disc(cfg);
  CheckResult r{"ghost_forms", true, ""};
  for (FieldRole role : kFieldRoles) {
    const SparseMatrix g = ghost_matrix(disc, role);
    const int n = g.rows();
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int p = g.row_ptr()[i]; p < g.row_ptr()[i + 1]; ++p) dense(i, g.col_idx()[p]) = g.values()[p];
    }
    const double scale = std::max(dense.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double asym = (dense - dense.transpose()).cwiseAbs().maxCoeff() / scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
    const double lmax = std::max(es.eigenvalues().maxCoeff(), std::numeric_limits<double>::min());
    const double neg = -std::min(0.0, es.eigenvalues().minCoeff()) / lmax;
    const DofMap& d = disc.dofs(role);
    const int m = d.order();
    const std::vector<double> poly = interpolate(d, [m](Vec2 x) {
      const double a = 0.3 + x.x - 0.7 * x.y, b = -0.2 + 0.5 * x.x + x.y;
      return m == 1 ? Vec2{a, b} : Vec2{a + x.x * x.y + 0.5 * x.x * x.x, b - x.y * x.y + 0.8 * x.x * x.y};
    });
    double pp = 0.0;
    for (double v : poly) pp += v * v;
    const double kernel = std::abs(g.bilinear(poly, poly)) / (lmax * pp);
    const bool ok = asym <= 1e-12 && neg <= 1e-12 && kernel <= 1e-12;
    r.passed = r.passed && ok;
    r.detail += detail::format("%s: asym %.1e, min eig/max %.1e, kernel %.1e; ", to_string(role), asym, neg, kernel);
  }
  return r;
}

/// Bounded number of ghost faces between any cut cell and an uncut cell.
inline CheckResult check_path_assumption(const SimulationConfig& base, const std::vector<int>& levels) {
  CheckResult r{"path_assumption", true, ""};
  int first = -1;
  for (int n : levels) {
    SimulationConfig c = base;
    c.cells_per_side = n;
    const Discretization disc(c);
    int worst = 0;
    for (Side s : {Side::Fluid, Side::Solid}) {
      worst = std::max(worst, verify_path_assumption(disc.mesh(), disc.topology(), s).max_faces_crossed);
    }
    if (first < 0) first = worst;
    r.passed = r.passed && worst <= first;
    r.detail += detail::format("n=%d N_F=%d; ", n, worst);
  }
  return r;
}

/// Zero data stays zero; solve and constraint residuals on a short lid run.
inline CheckResult check_short_run(const SimulationConfig& base, int steps) {
  SimulationConfig c = base;
  c.final_time = steps * c.time_step;
  const Discretization disc(c);
  RunOptions zero;
  zero.boundary = zero_boundary;
  const RunResult z = run(disc, zero);
  double zmax = 0.0;
  for (double v : z.final_state.U) zmax = std::max(zmax, std::abs(v));
  const RunResult lid = run(disc);
  double res = 0.0, con = 0.0;
  for (const StepRecord& s : lid.log) {
    res = std::max(res, s.solve_residual);
    con = std::max(con, s.constraint_residual);
  }
  const bool ok = zmax == 0.0 && res <= 1e-10 && con <= 1e-9;
  return {"short_run", ok,
          detail::format("zero-data max |U| %.1e, max solve residual %.1e, max constraint residual %.1e", zmax, res, con)};
}

inline CheckResult check_energy_decay(const SimulationConfig& cfg, const std::vector<unsigned>& seeds, int steps) {
  CheckResult r{"energy_decay", true, ""};
  for (unsigned s : seeds) {
    const EnergyDecayResult e = verify_energy_decay(cfg, steps, s);
    r.passed = r.passed && e.passed();
    r.detail += detail::format("seed %u: max rel increase %.1e%s; ", s, e.max_increase,
                               e.passed() ? "" : (" first violation at step " + std::to_string(e.first_violation)).c_str());
  }
  return r;
}

/// Spread of the maximum ratios across levels must stay within a factor 2.
inline CheckResult check_ghost_extension(const SimulationConfig& base, const std::vector<int>& levels,
                                         const std::vector<GhostExtensionCase>& cases, unsigned seed) {
  CheckResult r{"ghost_extension", true, ""};
  for (const GhostExtensionCase& c : cases) {
    const GhostExtensionResult g = verify_ghost_extension(base, levels, c, 100, seed);
    const double spread = g.spread();
    const bool ok = spread <= 2.0;
    r.passed = r.passed && ok;
    r.detail += detail::format("%s r=%d l=%d w=%g gamma=%g ratios", to_string(c.side), c.order, c.derivative, c.w_max,
                               c.gamma);
    for (const auto& l : g.levels) r.detail += detail::format(" %.3g", l.max_ratio);
    r.detail += detail::format(" spread %.3g%s; ", spread, ok ? "" : " FAIL");
  }
  return r;
}

/// Without stabilization the fluid l = 1 ratio must grow by at least 5x from
/// the first to the last level. An infinite ratio on the first level leaves
/// the growth factor undefined, which counts as a failure.
inline CheckResult check_ghost_necessity(const SimulationConfig& base, const std::vector<int>& levels, unsigned seed) {
  CheckResult r{"ghost_necessity", true, ""};
  for (int order : {2, 1}) {
    GhostExtensionCase c;
    c.side = Side::Fluid;
    c.order = order;
    c.derivative = 1;
    c.w_max = base.stabilization.w_max;
    c.gamma = 0.0;
    const GhostExtensionResult g = verify_ghost_extension(base, levels, c, 100, seed);
    const double growth = g.growth();
    const bool ok = growth >= 5.0;
    r.passed = r.passed && ok;
    r.detail += detail::format("fluid r=%d l=1 gamma=0 ratios", order);
    for (const auto& l : g.levels) r.detail += detail::format(" %.3g (random-only %.3g)", l.max_ratio, l.max_random_ratio);
    r.detail += detail::format(" growth %.3g; ", growth);
  }
  return r;
}

/// Ghost-extension cases for a config: the estimate's ghost part is switched
/// off for a side whose relevant ghost parameter is zero.
inline std::vector<GhostExtensionCase> ghost_extension_cases(const SimulationConfig& cfg,
                                                             const std::vector<double>& w_values) {
  const StabilizationParams& s = cfg.stabilization;
  std::vector<GhostExtensionCase> out;
  for (double w : w_values) {
    for (Side side : {Side::Fluid, Side::Solid}) {
      for (int order : {1, 2}) {
        for (int l : {0, 1}) {
          double gamma;
          if (side == Side::Fluid) {
            gamma = (order == 2 ? s.gamma_vf : s.gamma_p) > 0.0 ? 1.0 : 0.0;
          } else {
            gamma = (l == 0 ? s.gamma_vs : s.gamma_u) > 0.0 ? 1.0 : 0.0;
          }
          out.push_back({side, order, l, w, gamma});
        }
      }
    }
  }
  return out;
}

}  // namespace cutfsi
