// Norms, energy functionals, reference-solution errors, convergence orders and
// the numerical checks of ghost-penalty extension and discrete energy decay.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cutfsi/assembly.hpp"
#include "cutfsi/timestepper.hpp"

namespace cutfsi {

enum class Domain { Fluid, Solid, FluidComputational, SolidComputational, Interface };
enum class NormOp { Value, Gradient };

constexpr const char* to_string(Domain d) {
  switch (d) {
    case Domain::Fluid: return "Omega_f";
    case Domain::Solid: return "Omega_s";
    case Domain::FluidComputational: return "Omega_f^T";
    case Domain::SolidComputational: return "Omega_s^T";
    case Domain::Interface: return "Gamma";
  }
  return "?";
}

/// Values and gradients of up to two components at one point.
struct FieldSample {
  std::array<double, 2> value{};
  std::array<Vec2, 2> grad{};
};

inline FieldSample sample_field(const Mesh& mesh, const DofMap& dofs, std::span<const double> coeffs, int cell, Vec2 x,
                                int d = 1) {
  const BasisTable t = physical_eval(mesh, cell, dofs.basis(), x, d);
  const auto ids = dofs.cell_dofs(cell);
  FieldSample s;
  for (int comp = 0; comp < dofs.components(); ++comp) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const double c = coeffs[dofs.index(comp, ids[k])];
      s.value[comp] += c * t.values[k];
      if (d >= 1) s.grad[comp] += c * t.gradients[k];
    }
  }
  return s;
}

/// Calls f(cell, point, weight) for every quadrature point of the domain.
template <class F>
void for_each_point(const Discretization& disc, Domain domain, F&& f) {
  const CutTopology& topo = disc.topology();
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const QuadratureRule* q = nullptr;
    switch (domain) {
      case Domain::Fluid: q = &disc.bulk_rule(c, Side::Fluid); break;
      case Domain::Solid: q = &disc.bulk_rule(c, Side::Solid); break;
      case Domain::FluidComputational:
        if (topo.in_side(c, Side::Fluid)) q = &disc.full_rule(c);
        break;
      case Domain::SolidComputational:
        if (topo.in_side(c, Side::Solid)) q = &disc.full_rule(c);
        break;
      case Domain::Interface: q = &disc.interface_rule(c); break;
    }
    if (q == nullptr) continue;
    for (std::size_t p = 0; p < q->size(); ++p) f(c, q->points[p], q->weights[p]);
  }
}

inline double squared_magnitude(const FieldSample& s, int components, NormOp op) {
  double v = 0.0;
  for (int comp = 0; comp < components; ++comp) v += op == NormOp::Value ? s.value[comp] * s.value[comp] : norm_squared(s.grad[comp]);
  return v;
}

/// ||field|| or ||grad field|| over a domain. `coeffs` is the field's block.
inline double field_norm(const Discretization& disc, FieldRole role, std::span<const double> coeffs, Domain domain,
                         NormOp op = NormOp::Value) {
  const DofMap& d = disc.dofs(role);
  if (static_cast<int>(coeffs.size()) != d.size()) throw std::invalid_argument("field_norm: coefficient count mismatch");
  if (domain == Domain::Interface && op == NormOp::Gradient) throw std::invalid_argument("field_norm: no gradient norm on the interface");
  const Side side = side_of(role);
  const bool fluid_domain = domain == Domain::Fluid || domain == Domain::FluidComputational;
  if (domain != Domain::Interface && fluid_domain != (side == Side::Fluid)) {
    throw std::invalid_argument("field_norm: field is not defined on this domain");
  }
  double sum = 0.0;
  for_each_point(disc, domain, [&](int c, Vec2 x, double w) {
    sum += w * squared_magnitude(sample_field(disc.mesh(), d, coeffs, c, x, op == NormOp::Gradient ? 1 : 0), d.components(), op);
  });
  return std::sqrt(sum);
}

/// h^-1 ||v_f - v_s||^2 on the interface.
inline double interface_jump_squared(const Discretization& disc, std::span<const double> U) {
  const DofMap& df = disc.dofs(FieldRole::FluidVelocity);
  const DofMap& ds = disc.dofs(FieldRole::SolidVelocity);
  const auto vf = disc.block(U, FieldRole::FluidVelocity);
  const auto vs = disc.block(U, FieldRole::SolidVelocity);
  double sum = 0.0;
  for_each_point(disc, Domain::Interface, [&](int c, Vec2 x, double w) {
    const FieldSample a = sample_field(disc.mesh(), df, vf, c, x, 0);
    const FieldSample b = sample_field(disc.mesh(), ds, vs, c, x, 0);
    const double dx = a.value[0] - b.value[0], dy = a.value[1] - b.value[1];
    sum += w * (dx * dx + dy * dy);
  });
  return sum / disc.h();
}

struct EnergySnapshot {
  double E_T2 = 0.0;     ///< rho_f/2 |v_f|^2_{Omega_f} + rho_s/2 |v_s|^2_{Omega_s^T} + mu_s |grad u|^2_{Omega_s^T}
  double E_g2 = 0.0;     ///< rho_s/2 g_vs(v_s, v_s) + mu_s g_u(u, u)
  double triple2 = 0.0;  ///< rho_f nu_f |grad v_f|^2_{Omega_f^T} + rho_f nu_f gamma_N trace2 + g_p(p, p)
  double trace2 = 0.0;   ///< h^-1 |v_f - v_s|^2_Gamma
  double g_vf = 0.0;
  double g_p = 0.0;
  double g_vs = 0.0;
  double g_u = 0.0;
};

/// Caches the ghost and mass matrices needed for repeated energy evaluations.
class EnergyEvaluator {
 public:
  explicit EnergyEvaluator(const Discretization& disc)
      : disc_(&disc),
        g_{ghost_matrix(disc, FieldRole::FluidVelocity), ghost_matrix(disc, FieldRole::Pressure),
           ghost_matrix(disc, FieldRole::SolidVelocity), ghost_matrix(disc, FieldRole::Displacement)},
        mass_(assemble_mass(disc)) {}

  double ghost(FieldRole r, std::span<const double> U) const {
    const auto x = disc_->block(U, r);
    return g_[static_cast<int>(r)].bilinear(x, x);
  }

  EnergySnapshot energy(std::span<const double> U) const {
    const Discretization& d = *disc_;
    const MaterialParams& m = d.config().material;
    const double visc = m.rho_f * m.nu_f;
    EnergySnapshot e;
    e.g_vf = ghost(FieldRole::FluidVelocity, U);
    e.g_p = ghost(FieldRole::Pressure, U);
    e.g_vs = ghost(FieldRole::SolidVelocity, U);
    e.g_u = ghost(FieldRole::Displacement, U);
    auto sq = [&](FieldRole r, Domain dom, NormOp op) {
      const double n = field_norm(d, r, d.block(U, r), dom, op);
      return n * n;
    };
    e.E_T2 = 0.5 * m.rho_f * sq(FieldRole::FluidVelocity, Domain::Fluid, NormOp::Value) +
             0.5 * m.rho_s * sq(FieldRole::SolidVelocity, Domain::SolidComputational, NormOp::Value) +
             m.mu_s * sq(FieldRole::Displacement, Domain::SolidComputational, NormOp::Gradient);
    e.E_g2 = 0.5 * m.rho_s * e.g_vs + m.mu_s * e.g_u;
    e.trace2 = interface_jump_squared(d, U);
    e.triple2 = visc * sq(FieldRole::FluidVelocity, Domain::FluidComputational, NormOp::Gradient) +
                visc * d.config().stabilization.gamma_nitsche * e.trace2 + e.g_p;
    return e;
  }

  /// Q = 1/2 M^h(U, U) + mu_s |eps(u)|^2 + lambda_s/2 |div u|^2 (over Omega_s) + mu_s g_u(u, u).
  double decay_functional(std::span<const double> U) const {
    const Discretization& d = *disc_;
    const MaterialParams& m = d.config().material;
    const DofMap& du = d.dofs(FieldRole::Displacement);
    const auto u = d.block(U, FieldRole::Displacement);
    double elastic = 0.0;
    for_each_point(d, Domain::Solid, [&](int c, Vec2 x, double w) {
      const FieldSample s = sample_field(d.mesh(), du, u, c, x, 1);
      const double exx = s.grad[0].x, eyy = s.grad[1].y, exy = 0.5 * (s.grad[0].y + s.grad[1].x);
      const double div = exx + eyy;
      elastic += w * (m.mu_s * (exx * exx + eyy * eyy + 2.0 * exy * exy) + 0.5 * m.lambda_s * div * div);
    });
    return 0.5 * mass_.bilinear(U, U) + elastic + m.mu_s * ghost(FieldRole::Displacement, U);
  }

 private:
  const Discretization* disc_;
  std::array<SparseMatrix, 4> g_;
  SparseMatrix mass_;
};

inline EnergySnapshot energy(const Discretization& disc, std::span<const double> U) {
  return EnergyEvaluator(disc).energy(U);
}

inline double convergence_order(double e_h, double e_h2) {
  if (!(e_h > 0.0) || !(e_h2 > 0.0)) throw std::invalid_argument("convergence_order: errors must be positive");
  return std::log2(e_h / e_h2);
}

inline constexpr std::array<const char*, 5> kErrorNames{"vf_L2_T", "vs_L2_T", "grad_u_L2_T", "grad_vf_L2L2",
                                                        "h_grad_p_L2L2"};

struct ErrorRow {
  double h = 0.0;
  double k = 0.0;
  std::array<double, 5> errors{};
};

struct ErrorReport {
  std::string mode;  ///< "space" or "time"
  std::vector<ErrorRow> rows;

  /// orders[i][c]: between rows i and i + 1, column c.
  std::vector<std::array<double, 5>> orders() const {
    std::vector<std::array<double, 5>> out;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      std::array<double, 5> o{};
      for (int c = 0; c < 5; ++c) o[c] = convergence_order(rows[i].errors[c], rows[i + 1].errors[c]);
      out.push_back(o);
    }
    return out;
  }
};

namespace detail {

inline int nesting_ratio(double coarse, double fine, const char* what) {
  const double r = coarse / fine;
  const double rr = std::round(r);
  if (rr < 1.0 || std::abs(r - rr) > 1e-9 * rr) throw std::invalid_argument(std::string("error_vs_reference: non-nested ") + what);
  return static_cast<int>(rr);
}

}  // namespace detail

/// Errors of a coarse trajectory against a reference trajectory on a nested
/// mesh and time grid. Both histories hold states n = 0..N. The difference is
/// integrated with the reference mesh's cut quadrature; the coarse field is
/// evaluated in the coarse cell containing each reference cell.
inline ErrorRow error_vs_reference(const Discretization& coarse, const std::vector<State>& coarse_hist,
                                   const Discretization& ref, const std::vector<State>& ref_hist) {
  const int sr = detail::nesting_ratio(ref.mesh().cells_per_side(), coarse.mesh().cells_per_side(), "meshes");
  if (ref.mesh().cells_per_side() % coarse.mesh().cells_per_side() != 0) {
    throw std::invalid_argument("error_vs_reference: non-nested meshes");
  }
  const int tr = detail::nesting_ratio(coarse.config().time_step, ref.config().time_step, "time grids");
  const int nc = static_cast<int>(coarse_hist.size()) - 1;
  if (nc < 1 || static_cast<int>(ref_hist.size()) - 1 != nc * tr) {
    throw std::invalid_argument("error_vs_reference: histories do not cover the same final time");
  }
  if (coarse.config().radius_squared != ref.config().radius_squared || coarse.config().solid_order != ref.config().solid_order) {
    throw std::invalid_argument("error_vs_reference: geometry or element order differ");
  }
  const Mesh& fm = ref.mesh();
  const Mesh& cm = coarse.mesh();
  const int nfine = fm.cells_per_side();
  std::vector<int> parent(fm.num_cells());
  for (int c = 0; c < fm.num_cells(); ++c) parent[c] = cm.cell_index((c % nfine) / sr, (c / nfine) / sr);

  auto diff_sq = [&](FieldRole role, Domain dom, NormOp op, const State& a, const State& b) {
    const DofMap& dc = coarse.dofs(role);
    const DofMap& df = ref.dofs(role);
    const auto xc = coarse.block(a.U, role);
    const auto xf = ref.block(b.U, role);
    const int deriv = op == NormOp::Gradient ? 1 : 0;
    double sum = 0.0;
    for_each_point(ref, dom, [&](int c, Vec2 x, double w) {
      const FieldSample sf = sample_field(fm, df, xf, c, x, deriv);
      const FieldSample sc = sample_field(cm, dc, xc, parent[c], x, deriv);
      for (int comp = 0; comp < dc.components(); ++comp) {
        if (op == NormOp::Value) {
          const double d = sf.value[comp] - sc.value[comp];
          sum += w * d * d;
        } else {
          sum += w * norm_squared(sf.grad[comp] - sc.grad[comp]);
        }
      }
    });
    return sum;
  };

  ErrorRow row;
  row.h = coarse.h();
  row.k = coarse.config().time_step;
  const State& cT = coarse_hist.back();
  const State& rT = ref_hist.back();
  row.errors[0] = std::sqrt(diff_sq(FieldRole::FluidVelocity, Domain::Fluid, NormOp::Value, cT, rT));
  row.errors[1] = std::sqrt(diff_sq(FieldRole::SolidVelocity, Domain::Solid, NormOp::Value, cT, rT));
  row.errors[2] = std::sqrt(diff_sq(FieldRole::Displacement, Domain::Solid, NormOp::Gradient, cT, rT));
  double gv = 0.0, gp = 0.0;
  const double k = coarse.config().time_step;
  for (int n = 1; n <= nc; ++n) {
    gv += k * diff_sq(FieldRole::FluidVelocity, Domain::Fluid, NormOp::Gradient, coarse_hist[n], ref_hist[n * tr]);
    gp += k * diff_sq(FieldRole::Pressure, Domain::Fluid, NormOp::Gradient, coarse_hist[n], ref_hist[n * tr]);
  }
  row.errors[3] = std::sqrt(gv);
  row.errors[4] = coarse.h() * std::sqrt(gp);
  return row;
}

// ---------------------------------------------------------------------------
// Ghost-penalty extension check

struct GhostExtensionCase {
  Side side = Side::Fluid;
  int order = 2;        ///< element order r
  int derivative = 1;   ///< l in {0, 1}
  double w_max = 1.0;
  double gamma = 1.0;   ///< multiplies the ghost part; 0 removes it
};

struct GhostExtensionLevel {
  int n = 0;
  double max_ratio = 0.0;         ///< over all samples (inf if some denominator vanishes)
  double max_random_ratio = 0.0;  ///< over the globally random coefficient vectors
  double max_local_ratio = 0.0;   ///< worst case over functions living on one cut cell's dofs
  double polynomial_ratio = 0.0;  ///< interpolant of a global polynomial of degree r
  double area_bound = 0.0;        ///< |Omega_i^T| / |Omega_i \ G_h|
};

struct GhostExtensionResult {
  GhostExtensionCase spec;
  std::vector<GhostExtensionLevel> levels;

  /// max / min of the per-level maximum ratios (NaN when all are infinite).
  double spread() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& l : levels) {
      lo = std::min(lo, l.max_ratio);
      hi = std::max(hi, l.max_ratio);
    }
    return hi / lo;
  }
  /// Last level's maximum ratio over the first level's.
  double growth() const { return levels.back().max_ratio / levels.front().max_ratio; }
};

namespace detail {

/// (grad^l v, grad^l w) over the given cells, full-cell rules, scalar field.
inline SparseMatrix cell_set_form(const Mesh& mesh, const DofMap& dofs, const std::vector<int>& cells, int l, int npts) {
  TripletList t(dofs.size(), dofs.size());
  const int nloc = dofs.local_size();
  std::vector<double> local(static_cast<std::size_t>(nloc) * nloc);
  for (int c : cells) {
    std::fill(local.begin(), local.end(), 0.0);
    const QuadratureRule q = cell_rule(mesh, c, npts);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const BasisTable tb = physical_eval(mesh, c, dofs.basis(), q.points[p], l);
      for (int a = 0; a < nloc; ++a) {
        for (int b = 0; b < nloc; ++b) {
          local[a * nloc + b] += q.weights[p] * (l == 0 ? tb.values[a] * tb.values[b] : dot(tb.gradients[a], tb.gradients[b]));
        }
      }
    }
    const auto ids = dofs.cell_dofs(c);
    for (int a = 0; a < nloc; ++a) {
      for (int b = 0; b < nloc; ++b) t.add(ids[a], ids[b], local[a * nloc + b]);
    }
  }
  return t.compress();
}

/// Largest lambda with A x = lambda D x on the principal submatrices indexed
/// by `ids`; infinite when D is singular there.
inline double local_generalized_max(const SparseMatrix& a, const SparseMatrix& d, const std::vector<int>& ids) {
  const int k = static_cast<int>(ids.size());
  Eigen::MatrixXd al(k, k), dl(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      al(i, j) = a.at(ids[i], ids[j]);
      dl(i, j) = d.at(ids[i], ids[j]);
    }
  }
  const double scale = dl.diagonal().cwiseAbs().maxCoeff();
  Eigen::LLT<Eigen::MatrixXd> llt(dl);
  if (llt.info() != Eigen::Success || !(scale > 0.0) || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-10 * std::sqrt(scale)) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::MatrixXd li = llt.matrixL().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd c = li * al * li.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

/// For each mesh level, the largest value found of
///   |grad^l v|^2_{Omega_i^T} / (|grad^l v|^2_{Omega_i \ G_h}
///        + gamma sum_j h^{2(j-l)+1} / ((j-l)!)^2 sum_F w_F g_F^j(v, v))
/// over `samples` globally random coefficient vectors and, for every cut cell,
/// the exact worst case among functions carried by that cell's dofs.
inline GhostExtensionResult verify_ghost_extension(const SimulationConfig& base, const std::vector<int>& levels,
                                                   const GhostExtensionCase& spec, int samples = 100,
                                                   unsigned seed = 1) {
  if (spec.derivative < 0 || spec.derivative > 1) throw std::invalid_argument("verify_ghost_extension: l must be 0 or 1");
  if (spec.order < 1 || spec.order > 2) throw std::invalid_argument("verify_ghost_extension: order must be 1 or 2");
  GhostExtensionResult result;
  result.spec = spec;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n : levels) {
    SimulationConfig cfg = base;
    cfg.cells_per_side = n;
    cfg.stabilization.w_max = spec.w_max;
    const Discretization disc(cfg);
    const Mesh& mesh = disc.mesh();
    const CutTopology& topo = disc.topology();
    const DofMap dofs(mesh, [&](int c) { return topo.in_side(c, spec.side); }, FieldRole::Displacement, spec.order, 1);
    std::vector<int> all, interior;
    for (int c = 0; c < mesh.num_cells(); ++c) {
      if (!topo.in_side(c, spec.side)) continue;
      all.push_back(c);
      if (!topo.is_cut(c)) interior.push_back(c);
    }
    const int npts = spec.order + 1;
    const SparseMatrix A = detail::cell_set_form(mesh, dofs, all, spec.derivative, npts);
    const SparseMatrix B = detail::cell_set_form(mesh, dofs, interior, spec.derivative, npts);
    std::vector<std::pair<int, double>> orders;
    const double h = mesh.h();
    for (int j = 1; j <= spec.order; ++j) {
      const int e = j - spec.derivative;
      orders.emplace_back(j, std::pow(h, 2 * e + 1) / std::pow(factorial(e), 2));
    }
    TripletList gt(dofs.size(), dofs.size());
    add_face_jump_terms(disc, dofs, spec.side, orders, spec.gamma, 0, 0, gt);
    const SparseMatrix D = add(B, gt.compress());

    auto ratio = [&](const std::vector<double>& x) {
      const double num = A.bilinear(x, x);
      const double den = D.bilinear(x, x);
      if (num <= 0.0) return 0.0;
      return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    };
    GhostExtensionLevel lev;
    lev.n = n;
    for (int s = 0; s < samples; ++s) {
      std::vector<double> x(dofs.size());
      for (double& v : x) v = coef(rng);
      lev.max_random_ratio = std::max(lev.max_random_ratio, ratio(x));
    }
    for (int c : topo.cut_cells()) {
      const auto ids = dofs.cell_dofs(c);
      lev.max_local_ratio = std::max(lev.max_local_ratio, detail::local_generalized_max(A, D, {ids.begin(), ids.end()}));
    }
    lev.max_ratio = std::max(lev.max_random_ratio, lev.max_local_ratio);
    const std::vector<double> poly = interpolate(dofs, [&](Vec2 p) {
      return spec.order == 1 ? 0.3 + p.x - 0.7 * p.y : 0.3 + p.x - 0.7 * p.y + p.x * p.y + 0.5 * p.x * p.x;
    });
    lev.polynomial_ratio = ratio(poly);
    const std::vector<double> ones(dofs.size(), 1.0);
    const SparseMatrix A0 = spec.derivative == 0 ? A : detail::cell_set_form(mesh, dofs, all, 0, npts);
    const SparseMatrix B0 = spec.derivative == 0 ? B : detail::cell_set_form(mesh, dofs, interior, 0, npts);
    lev.area_bound = A0.bilinear(ones, ones) / B0.bilinear(ones, ones);
    result.levels.push_back(lev);
  }
  return result;
}

enum class StudyMode { Space, Time };

struct StudyResult {
  ErrorReport report;
  double max_solve_residual = 0.0;
  double max_constraint_residual = 0.0;
};

/// Space mode: levels are mesh sizes h at the base time step. Time mode:
/// levels are time steps k at the base mesh. `reference` is the finer h or k.
inline StudyResult convergence_study(const SimulationConfig& base, StudyMode mode, const std::vector<double>& levels,
                                     double reference) {
  if (levels.size() < 2) throw std::invalid_argument("convergence_study: need at least two levels");
  for (double l : levels) {
    if (!(reference < l)) throw std::invalid_argument("convergence_study: reference must be finer than every level");
  }
  auto configure = [&](double value) {
    SimulationConfig c = base;
    if (mode == StudyMode::Space) {
      const double n = 2.0 / value;
      if (std::abs(n - std::round(n)) > 1e-9 * n) throw std::invalid_argument("convergence_study: 2/h must be an integer");
      c.cells_per_side = static_cast<int>(std::round(n));
    } else {
      c.time_step = value;
    }
    validate(c);
    step_count(c);
    return c;
  };
  StudyResult out;
  out.report.mode = mode == StudyMode::Space ? "space" : "time";
  auto track = [&](const RunResult& r) {
    for (const StepRecord& rec : r.log) {
      out.max_solve_residual = std::max(out.max_solve_residual, rec.solve_residual);
      out.max_constraint_residual = std::max(out.max_constraint_residual, rec.constraint_residual);
    }
  };
  std::vector<SimulationConfig> cfgs;
  for (double l : levels) cfgs.push_back(configure(l));
  const Discretization ref(configure(reference));
  RunOptions opts;
  opts.keep_history = true;
  const RunResult ref_run = run(ref, opts);
  track(ref_run);
  for (const SimulationConfig& c : cfgs) {
    const Discretization disc(c);
    const RunResult r = run(disc, opts);
    track(r);
    out.report.rows.push_back(error_vs_reference(disc, r.history, ref, ref_run.history));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Energy decay check

struct EnergyDecayResult {
  std::vector<double> Q;  ///< Q^0 .. Q^N
  int first_violation = -1;
  double max_increase = 0.0;  ///< max (Q^n - Q^{n-1}) / Q^0
  double max_solve_residual = 0.0;
  double max_constraint_residual = 0.0;
  bool passed() const { return first_violation < 0; }
};

/// Random smooth initial state: trigonometric fields with random amplitudes
/// interpolated on each space; fluid velocity zero on the outer boundary,
/// pressure zero.
inline State random_smooth_state(const Discretization& disc, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  const double pi = std::numbers::pi;
  auto make = [&]() {
    std::array<double, 8> a{};
    for (double& v : a) v = amp(rng);
    return [a, pi](Vec2 x) {
      return Vec2{a[0] * std::sin(pi * x.x) * std::sin(pi * x.y) + a[1] * std::cos(0.5 * pi * x.x) * std::sin(pi * x.y) +
                      a[2] * x.x * x.y + a[3] * std::cos(1.5 * pi * x.y),
                  a[4] * std::sin(2.0 * pi * x.x) * std::cos(0.5 * pi * x.y) + a[5] * x.x * x.x +
                      a[6] * std::sin(pi * (x.x + x.y)) + a[7]};
    };
  };
  State s = initialize(disc);
  for (FieldRole r : {FieldRole::FluidVelocity, FieldRole::SolidVelocity, FieldRole::Displacement}) {
    const auto f = make();
    const std::vector<double> v = interpolate(disc.dofs(r), f);
    std::copy(v.begin(), v.end(), disc.block(std::span<double>(s.U), r).begin());
  }
  for (int d : disc.dirichlet_dofs()) s.U[d] = 0.0;
  return s;
}

/// Runs `steps` steps with F = 0 and zero boundary data from a random state
/// and checks Q^n <= Q^{n-1} + tol Q^0.
inline EnergyDecayResult verify_energy_decay(SimulationConfig cfg, int steps, unsigned seed, double tol = 1e-9) {
  cfg.final_time = steps * cfg.time_step;
  const Discretization disc(cfg);
  const EnergyEvaluator ev(disc);
  RunOptions opts;
  opts.boundary = zero_boundary;
  opts.initial = random_smooth_state(disc, seed);
  EnergyDecayResult out;
  out.Q.push_back(ev.decay_functional(opts.initial->U));
  run(disc, opts, [&](const State& s, const StepRecord& rec) {
    out.Q.push_back(ev.decay_functional(s.U));
    out.max_solve_residual = std::max(out.max_solve_residual, rec.solve_residual);
    out.max_constraint_residual = std::max(out.max_constraint_residual, rec.constraint_residual);
  });
  const double q0 = out.Q.front();
  for (std::size_t n = 1; n < out.Q.size(); ++n) {
    const double inc = q0 > 0.0 ? (out.Q[n] - out.Q[n - 1]) / q0 : out.Q[n] - out.Q[n - 1];
    out.max_increase = std::max(out.max_increase, inc);
    if (out.first_violation < 0 && out.Q[n] > out.Q[n - 1] + tol * q0) out.first_violation = static_cast<int>(n);
  }
  return out;
}

}  // namespace cutfsi
