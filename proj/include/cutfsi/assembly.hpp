// Discretization setup and assembly of the monolithic backward Euler system:
// mass, fluid and solid bulk forms, Nitsche interface coupling, weighted ghost
// penalties and the displacement/velocity constraint rows.
#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cutfsi/config.hpp"
#include "cutfsi/fem.hpp"
#include "cutfsi/geometry.hpp"
#include "cutfsi/mesh.hpp"
#include "cutfsi/quadrature.hpp"
#include "cutfsi/sparse.hpp"

namespace cutfsi {

inline constexpr std::array<FieldRole, 4> kFieldRoles{FieldRole::FluidVelocity, FieldRole::Pressure,
                                                      FieldRole::SolidVelocity, FieldRole::Displacement};

/// Contiguous blocks (v_f, p, v_s, u) of the monolithic vector.
struct BlockLayout {
  std::array<int, 4> offset{};
  std::array<int, 4> size{};
  int total = 0;

  int begin(FieldRole r) const { return offset[static_cast<int>(r)]; }
  int count(FieldRole r) const { return size[static_cast<int>(r)]; }
  int end(FieldRole r) const { return begin(r) + count(r); }
  FieldRole block_of(int dof) const {
    for (FieldRole r : kFieldRoles) {
      if (dof >= begin(r) && dof < end(r)) return r;
    }
    throw std::out_of_range("BlockLayout: dof out of range");
  }
};

/// Mesh, cut topology, dof maps and cached quadrature for one configuration.
class Discretization {
 public:
  explicit Discretization(const SimulationConfig& cfg)
      : cfg_((validate(cfg), cfg)),
        mesh_(build_mesh(cfg.cells_per_side)),
        topo_(mesh_, CircleLevelSet({0.0, 0.0}, cfg.radius_squared)),
        dofs_{build_dof_map(mesh_, topo_, FieldRole::FluidVelocity, cfg.fluid_order, 2),
              build_dof_map(mesh_, topo_, FieldRole::Pressure, cfg.fluid_order - 1, 1),
              build_dof_map(mesh_, topo_, FieldRole::SolidVelocity, cfg.solid_order, 2),
              build_dof_map(mesh_, topo_, FieldRole::Displacement, cfg.solid_order, 2)} {
    int off = 0;
    for (int b = 0; b < 4; ++b) {
      layout_.offset[b] = off;
      layout_.size[b] = dofs_[b].size();
      off += dofs_[b].size();
    }
    layout_.total = off;
    const int nc = mesh_.num_cells();
    bulk_[0].resize(nc);
    bulk_[1].resize(nc);
    full_.resize(nc);
    interface_.resize(nc);
    for (int c = 0; c < nc; ++c) {
      full_[c] = cell_rule(mesh_, c, cfg.quad_full);
      for (Side s : {Side::Fluid, Side::Solid}) {
        QuadratureRule& q = bulk_[static_cast<int>(s)][c];
        if (topo_.is_cut(c)) {
          q = cut_cell_rule(mesh_, topo_, c, s, cfg.quad_cut);
        } else if (topo_.in_side(c, s)) {
          q = full_[c];
        } else {
          q.owner = c;
        }
      }
      if (topo_.is_cut(c)) interface_[c] = cutfsi::interface_rule(mesh_, topo_, c, cfg.quad_interface);
    }
  }

  const SimulationConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return mesh_; }
  const CutTopology& topology() const { return topo_; }
  const DofMap& dofs(FieldRole r) const { return dofs_[static_cast<int>(r)]; }
  const BlockLayout& layout() const { return layout_; }
  double h() const { return mesh_.h(); }

  /// Rule over Omega_i intersected with the cell (empty outside T_i^h).
  const QuadratureRule& bulk_rule(int cell, Side s) const { return bulk_[static_cast<int>(s)][cell]; }
  /// Rule over the whole cell.
  const QuadratureRule& full_rule(int cell) const { return full_[cell]; }
  /// Rule on the interface arcs of a cut cell (empty elsewhere).
  const QuadratureRule& interface_rule(int cell) const { return interface_[cell]; }

  /// Global system indices of a field's local basis on a cell, component-major:
  /// entry comp * nloc + k.
  std::vector<int> global_dofs(FieldRole r, int cell) const {
    const DofMap& d = dofs(r);
    const auto ids = d.cell_dofs(cell);
    const int nloc = d.local_size();
    std::vector<int> out(static_cast<std::size_t>(d.components()) * nloc);
    for (int comp = 0; comp < d.components(); ++comp) {
      for (int k = 0; k < nloc; ++k) out[comp * nloc + k] = layout_.begin(r) + d.index(comp, ids[k]);
    }
    return out;
  }

  std::span<const double> block(std::span<const double> x, FieldRole r) const {
    return x.subspan(layout_.begin(r), layout_.count(r));
  }
  std::span<double> block(std::span<double> x, FieldRole r) const {
    return x.subspan(layout_.begin(r), layout_.count(r));
  }

  /// Global dof ids (system numbering) carrying Dirichlet conditions.
  std::vector<int> dirichlet_dofs() const {
    std::vector<int> out;
    for (int d : dofs(FieldRole::FluidVelocity).dirichlet_dofs()) out.push_back(layout_.begin(FieldRole::FluidVelocity) + d);
    return out;
  }

  std::string describe_dof(int dof) const {
    const FieldRole r = layout_.block_of(dof);
    const DofMap& d = dofs(r);
    const int local = dof - layout_.begin(r);
    const int comp = local / d.num_scalar();
    const Vec2 x = d.node_point(local % d.num_scalar());
    return std::string(to_string(r)) + "[" + std::to_string(comp) + "] at (" + std::to_string(x.x) + ", " +
           std::to_string(x.y) + ")";
  }

 private:
  SimulationConfig cfg_;
  Mesh mesh_;
  CutTopology topo_;
  std::array<DofMap, 4> dofs_;
  BlockLayout layout_;
  std::array<std::vector<QuadratureRule>, 2> bulk_;
  std::vector<QuadratureRule> full_;
  std::vector<QuadratureRule> interface_;
};

inline double weight_w(double kappa, double w_max) {
  if (kappa < 0.0 || kappa > 1.0) throw std::invalid_argument("weight_w: kappa must lie in [0, 1]");
  return 0.5 * std::pow(w_max, 1.0 - 2.0 * kappa);
}

/// Weighted uses w(kappa); Unweighted hard-codes w = 0.5 per adjacent cell.
enum class GhostWeighting { Weighted, Unweighted };

/// w_F^i: sum of w(kappa_i) over the two cells adjacent to an interior face.
inline double face_weight(const CutTopology& topo, const Face& f, Side side, double w_max,
                          GhostWeighting mode = GhostWeighting::Weighted) {
  if (mode == GhostWeighting::Unweighted) return 0.5 + 0.5;
  return weight_w(topo.kappa(f.cell0, side), w_max) + weight_w(topo.kappa(f.cell1, side), w_max);
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// (derivative order l, h-scaling) pairs of one ghost form, without gamma.
inline std::vector<std::pair<int, double>> ghost_coefficients(FieldRole which, double h, int m_f, int m_s) {
  std::vector<std::pair<int, double>> out;
  switch (which) {
    case FieldRole::FluidVelocity:
      for (int l = 1; l <= m_f; ++l) out.emplace_back(l, std::pow(h, 2 * l - 1) / std::pow(factorial(l - 1), 2));
      break;
    case FieldRole::Pressure:
      for (int l = 1; l <= m_f - 1; ++l) out.emplace_back(l, std::pow(h, 2 * l + 1) / std::pow(factorial(l), 2));
      break;
    case FieldRole::SolidVelocity:
      for (int l = 1; l <= m_s; ++l) out.emplace_back(l, std::pow(h, 2 * l + 1) / std::pow(factorial(l), 2));
      break;
    case FieldRole::Displacement:
      for (int l = 1; l <= m_s; ++l) out.emplace_back(l, std::pow(h, 2 * l - 1) / std::pow(factorial(l - 1), 2));
      break;
  }
  return out;
}

inline double ghost_gamma(const StabilizationParams& s, FieldRole which) {
  switch (which) {
    case FieldRole::FluidVelocity: return s.gamma_vf;
    case FieldRole::Pressure: return s.gamma_p;
    case FieldRole::SolidVelocity: return s.gamma_vs;
    case FieldRole::Displacement: return s.gamma_u;
  }
  return 0.0;
}

/// Adds scale * sum_F w_F sum_l coef_l <[[d^l_n v]], [[d^l_n phi]]>_F over the
/// ghost faces of `side`, componentwise, for a field laid out by `dofs`. Test
/// rows start at row_offset, trial columns at col_offset.
inline void add_face_jump_terms(const Discretization& disc, const DofMap& dofs, Side side,
                                const std::vector<std::pair<int, double>>& orders, double scale, int row_offset,
                                int col_offset, TripletList& out,
                                GhostWeighting mode = GhostWeighting::Weighted) {
  if (orders.empty() || scale == 0.0) return;
  const Mesh& mesh = disc.mesh();
  const CutTopology& topo = disc.topology();
  const int nloc = dofs.local_size();
  const int max_order = orders.back().first;
  if (max_order > dofs.order()) throw std::invalid_argument("ghost form: derivative order exceeds element order");
  std::vector<double> jump(2 * nloc);
  std::vector<double> local(4 * nloc * nloc);
  std::vector<int> scalar_ids(2 * nloc);
  for (int fid : topo.ghost_faces(side)) {
    const Face& f = mesh.face(fid);
    const double wf = face_weight(topo, f, side, disc.config().stabilization.w_max, mode);
    const QuadratureRule q = face_rule(mesh, fid, disc.config().quad_face);
    std::fill(local.begin(), local.end(), 0.0);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const BasisTable t0 = physical_eval(mesh, f.cell0, dofs.basis(), q.points[p], max_order);
      const BasisTable t1 = physical_eval(mesh, f.cell1, dofs.basis(), q.points[p], max_order);
      for (const auto& [l, coef] : orders) {
        for (int k = 0; k < nloc; ++k) {
          jump[k] = directional_derivative(t0, k, f.normal, l);
          jump[nloc + k] = -directional_derivative(t1, k, f.normal, l);
        }
        const double w = q.weights[p] * coef * wf * scale;
        for (int a = 0; a < 2 * nloc; ++a) {
          const double ja = w * jump[a];
          for (int b = 0; b < 2 * nloc; ++b) local[a * 2 * nloc + b] += ja * jump[b];
        }
      }
    }
    const auto ids0 = dofs.cell_dofs(f.cell0);
    const auto ids1 = dofs.cell_dofs(f.cell1);
    for (int k = 0; k < nloc; ++k) {
      scalar_ids[k] = ids0[k];
      scalar_ids[nloc + k] = ids1[k];
    }
    for (int comp = 0; comp < dofs.components(); ++comp) {
      for (int a = 0; a < 2 * nloc; ++a) {
        const int row = row_offset + dofs.index(comp, scalar_ids[a]);
        for (int b = 0; b < 2 * nloc; ++b) {
          out.add(row, col_offset + dofs.index(comp, scalar_ids[b]), local[a * 2 * nloc + b]);
        }
      }
    }
  }
}

/// One ghost form (gamma included) on the field's own dofs.
inline SparseMatrix ghost_matrix(const Discretization& disc, FieldRole which,
                                 GhostWeighting mode = GhostWeighting::Weighted) {
  const SimulationConfig& c = disc.config();
  const DofMap& d = disc.dofs(which);
  TripletList t(d.size(), d.size());
  add_face_jump_terms(disc, d, side_of(which), ghost_coefficients(which, disc.h(), c.fluid_order, c.solid_order),
                      ghost_gamma(c.stabilization, which), 0, 0, t, mode);
  return t.compress();
}

/// Alias matching the operation name: g_which as a field-local matrix.
inline SparseMatrix assemble_ghost_form(const Discretization& disc, FieldRole which,
                                        GhostWeighting mode = GhostWeighting::Weighted) {
  return ghost_matrix(disc, which, mode);
}

namespace detail {

/// Scatter a dense local block into triplets.
inline void scatter(TripletList& out, const std::vector<int>& rows, const std::vector<int>& cols,
                    const std::vector<double>& local) {
  const std::size_t nc = cols.size();
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < nc; ++b) out.add(rows[a], cols[b], local[a * nc + b]);
  }
}

/// scale * (v, phi) over a rule, vector field, block diagonal in components.
inline void vector_mass_local(const Mesh& mesh, int cell, const ReferenceBasis& basis, const QuadratureRule& q,
                              double scale, std::vector<double>& local) {
  const int nloc = basis.size();
  const int n = 2 * nloc;
  local.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t p = 0; p < q.size(); ++p) {
    const BasisTable t = physical_eval(mesh, cell, basis, q.points[p], 0);
    const double w = scale * q.weights[p];
    for (int a = 0; a < nloc; ++a) {
      for (int b = 0; b < nloc; ++b) {
        const double m = w * t.values[a] * t.values[b];
        local[a * n + b] += m;
        local[(nloc + a) * n + nloc + b] += m;
      }
    }
  }
}

}  // namespace detail

/// Adds scale * M^h: rho_f (v_f, phi_f)_{Omega_f} + rho_s (v_s, phi_s)_{Omega_s}
/// + rho_s g_vs(v_s, phi_s).
inline void add_mass(const Discretization& disc, TripletList& out, double scale = 1.0,
                     GhostWeighting mode = GhostWeighting::Weighted) {
  const Mesh& mesh = disc.mesh();
  const MaterialParams& mat = disc.config().material;
  std::vector<double> local;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (auto [role, side, rho] : {std::tuple{FieldRole::FluidVelocity, Side::Fluid, mat.rho_f},
                                   std::tuple{FieldRole::SolidVelocity, Side::Solid, mat.rho_s}}) {
      const QuadratureRule& q = disc.bulk_rule(c, side);
      if (q.empty()) continue;
      detail::vector_mass_local(mesh, c, disc.dofs(role).basis(), q, scale * rho, local);
      const std::vector<int> ids = disc.global_dofs(role, c);
      detail::scatter(out, ids, ids, local);
    }
  }
  const SimulationConfig& cfg = disc.config();
  const int vs = disc.layout().begin(FieldRole::SolidVelocity);
  add_face_jump_terms(disc, disc.dofs(FieldRole::SolidVelocity), Side::Solid,
                      ghost_coefficients(FieldRole::SolidVelocity, disc.h(), cfg.fluid_order, cfg.solid_order),
                      scale * mat.rho_s * cfg.stabilization.gamma_vs, vs, vs, out, mode);
}

/// Adds scale * a_f^h: (sigma_f, grad phi_f)_{Omega_f} + (div v_f, xi)_{Omega_f}.
inline void add_fluid_bulk(const Discretization& disc, TripletList& out, double scale = 1.0) {
  const Mesh& mesh = disc.mesh();
  const MaterialParams& mat = disc.config().material;
  const double visc = mat.rho_f * mat.nu_f;
  const ReferenceBasis& vb = disc.dofs(FieldRole::FluidVelocity).basis();
  const ReferenceBasis& pb = disc.dofs(FieldRole::Pressure).basis();
  const int nv = vb.size();
  const int np = pb.size();
  std::vector<double> kvv, kvp, kpv;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule& q = disc.bulk_rule(c, Side::Fluid);
    if (q.empty()) continue;
    kvv.assign(4 * nv * nv, 0.0);
    kvp.assign(2 * nv * np, 0.0);
    kpv.assign(2 * nv * np, 0.0);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const BasisTable tv = physical_eval(mesh, c, vb, q.points[p], 1);
      const BasisTable tp = physical_eval(mesh, c, pb, q.points[p], 0);
      const double w = scale * q.weights[p];
      for (int a = 0; a < nv; ++a) {
        const Vec2 ga = tv.gradients[a];
        for (int b = 0; b < nv; ++b) {
          const Vec2 gb = tv.gradients[b];
          const double lap = dot(ga, gb);
          // rho nu (delta_cd grad phi_a . grad phi_b + d_d phi_a d_c phi_b)
          const double g[2][2] = {{lap + ga.x * gb.x, ga.y * gb.x}, {ga.x * gb.y, lap + ga.y * gb.y}};
          for (int ci = 0; ci < 2; ++ci) {
            for (int di = 0; di < 2; ++di) kvv[(ci * nv + a) * 2 * nv + di * nv + b] += w * visc * g[ci][di];
          }
        }
        for (int qd = 0; qd < np; ++qd) {
          const double pv = w * tp.values[qd];
          kvp[(0 * nv + a) * np + qd] -= pv * ga.x;
          kvp[(1 * nv + a) * np + qd] -= pv * ga.y;
          kpv[qd * 2 * nv + 0 * nv + a] += pv * ga.x;
          kpv[qd * 2 * nv + 1 * nv + a] += pv * ga.y;
        }
      }
    }
    const std::vector<int> vid = disc.global_dofs(FieldRole::FluidVelocity, c);
    const std::vector<int> pid = disc.global_dofs(FieldRole::Pressure, c);
    detail::scatter(out, vid, vid, kvv);
    detail::scatter(out, vid, pid, kvp);
    detail::scatter(out, pid, vid, kpv);
  }
}

/// Adds scale * a_s^h: (sigma_s(u), grad phi_s)_{Omega_s}, u columns in v_s rows.
inline void add_solid_bulk(const Discretization& disc, TripletList& out, double scale = 1.0) {
  const Mesh& mesh = disc.mesh();
  const MaterialParams& mat = disc.config().material;
  const ReferenceBasis& sb = disc.dofs(FieldRole::Displacement).basis();
  const int ns = sb.size();
  std::vector<double> k;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule& q = disc.bulk_rule(c, Side::Solid);
    if (q.empty()) continue;
    k.assign(4 * ns * ns, 0.0);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const BasisTable t = physical_eval(mesh, c, sb, q.points[p], 1);
      const double w = scale * q.weights[p];
      for (int a = 0; a < ns; ++a) {
        const Vec2 ga = t.gradients[a];
        for (int b = 0; b < ns; ++b) {
          const Vec2 gb = t.gradients[b];
          const double lap = dot(ga, gb);
          const double ga_[2] = {ga.x, ga.y};
          const double gb_[2] = {gb.x, gb.y};
          for (int ci = 0; ci < 2; ++ci) {
            for (int di = 0; di < 2; ++di) {
              const double v = mat.mu_s * ((ci == di ? lap : 0.0) + ga_[di] * gb_[ci]) + mat.lambda_s * gb_[di] * ga_[ci];
              k[(ci * ns + a) * 2 * ns + di * ns + b] += w * v;
            }
          }
        }
      }
    }
    detail::scatter(out, disc.global_dofs(FieldRole::SolidVelocity, c), disc.global_dofs(FieldRole::Displacement, c), k);
  }
}

/// Adds scale * j^h: h^-1 rho_f nu_f gamma_N (v_f - v_s, phi_f - phi_s)
/// - (sigma_f n_f, phi_f - phi_s) - (v_f - v_s, sigma_f(phi_f, -xi) n_f) on the
/// interface, with n_f pointing into the solid.
inline void add_nitsche(const Discretization& disc, TripletList& out, double scale = 1.0) {
  const Mesh& mesh = disc.mesh();
  const SimulationConfig& cfg = disc.config();
  const double visc = cfg.material.rho_f * cfg.material.nu_f;
  const double alpha = visc * cfg.stabilization.gamma_nitsche / disc.h();
  const ReferenceBasis& vb = disc.dofs(FieldRole::FluidVelocity).basis();
  const ReferenceBasis& pb = disc.dofs(FieldRole::Pressure).basis();
  const ReferenceBasis& sb = disc.dofs(FieldRole::SolidVelocity).basis();
  const int nv = vb.size(), np = pb.size(), ns = sb.size();
  // Local unknown ordering: [v_f (2 nv) | p (np) | v_s (2 ns)].
  const int nf = 2 * nv, n = 2 * nv + np + 2 * ns;
  const int p0 = nf, s0 = nf + np;
  std::vector<double> local;
  for (int c : disc.topology().cut_cells()) {
    const QuadratureRule& q = disc.interface_rule(c);
    if (q.empty()) continue;
    local.assign(static_cast<std::size_t>(n) * n, 0.0);
    auto at = [&](int i, int j) -> double& { return local[static_cast<std::size_t>(i) * n + j]; };
    for (std::size_t pt = 0; pt < q.size(); ++pt) {
      const Vec2 nn = q.normals[pt];
      const double nvec[2] = {nn.x, nn.y};
      const BasisTable tv = physical_eval(mesh, c, vb, q.points[pt], 1);
      const BasisTable tp = physical_eval(mesh, c, pb, q.points[pt], 0);
      const BasisTable ts = physical_eval(mesh, c, sb, q.points[pt], 0);
      const double w = scale * q.weights[pt];
      // Traction (2 rho nu eps(phi_b e_d) n)_c = rho nu (delta_cd dn phi_b + d_c phi_b n_d).
      auto traction = [&](int b, int d, int ci) {
        const Vec2 g = tv.gradients[b];
        const double gc = ci == 0 ? g.x : g.y;
        return visc * ((ci == d ? dot(g, nn) : 0.0) + gc * nvec[d]);
      };
      for (int ci = 0; ci < 2; ++ci) {
        for (int a = 0; a < nv; ++a) {
          const int row = ci * nv + a;
          const double fa = tv.values[a];
          // fluid test, fluid trial
          for (int d = 0; d < 2; ++d) {
            for (int b = 0; b < nv; ++b) {
              double v = -traction(b, d, ci) * fa - traction(a, ci, d) * tv.values[b];
              if (ci == d) v += alpha * fa * tv.values[b];
              at(row, d * nv + b) += w * v;
            }
          }
          // fluid test, pressure trial: +(p n, phi_f)
          for (int qd = 0; qd < np; ++qd) at(row, p0 + qd) += w * tp.values[qd] * nvec[ci] * fa;
          // fluid test, solid trial
          for (int d = 0; d < 2; ++d) {
            for (int b = 0; b < ns; ++b) {
              double v = traction(a, ci, d) * ts.values[b];
              if (ci == d) v -= alpha * fa * ts.values[b];
              at(row, s0 + d * ns + b) += w * v;
            }
          }
        }
        for (int a = 0; a < ns; ++a) {
          const int row = s0 + ci * ns + a;
          const double sa = ts.values[a];
          // solid test, fluid trial
          for (int d = 0; d < 2; ++d) {
            for (int b = 0; b < nv; ++b) {
              double v = traction(b, d, ci) * sa;
              if (ci == d) v -= alpha * sa * tv.values[b];
              at(row, d * nv + b) += w * v;
            }
          }
          // solid test, pressure trial: -(p n, phi_s)
          for (int qd = 0; qd < np; ++qd) at(row, p0 + qd) -= w * tp.values[qd] * nvec[ci] * sa;
          // solid test, solid trial
          for (int b = 0; b < ns; ++b) at(row, s0 + ci * ns + b) += w * alpha * sa * ts.values[b];
        }
      }
      // pressure test: -(v_f - v_s, xi n)
      for (int qd = 0; qd < np; ++qd) {
        const double xi = tp.values[qd];
        for (int d = 0; d < 2; ++d) {
          for (int b = 0; b < nv; ++b) at(p0 + qd, d * nv + b) -= w * xi * nvec[d] * tv.values[b];
          for (int b = 0; b < ns; ++b) at(p0 + qd, s0 + d * ns + b) += w * xi * nvec[d] * ts.values[b];
        }
      }
    }
    std::vector<int> ids = disc.global_dofs(FieldRole::FluidVelocity, c);
    const std::vector<int> pid = disc.global_dofs(FieldRole::Pressure, c);
    const std::vector<int> sid = disc.global_dofs(FieldRole::SolidVelocity, c);
    ids.insert(ids.end(), pid.begin(), pid.end());
    ids.insert(ids.end(), sid.begin(), sid.end());
    detail::scatter(out, ids, ids, local);
  }
}

/// Adds scale * S^h: 2 rho_f nu_f g_vf(v_f, phi_f) + g_p(p, xi) + 2 mu_s g_u(u, phi_s).
inline void add_stabilization(const Discretization& disc, TripletList& out, double scale = 1.0,
                              GhostWeighting mode = GhostWeighting::Weighted) {
  const SimulationConfig& cfg = disc.config();
  const BlockLayout& L = disc.layout();
  const double h = disc.h();
  const auto& st = cfg.stabilization;
  const auto& mat = cfg.material;
  const int vf = L.begin(FieldRole::FluidVelocity), p = L.begin(FieldRole::Pressure);
  const int vs = L.begin(FieldRole::SolidVelocity), u = L.begin(FieldRole::Displacement);
  add_face_jump_terms(disc, disc.dofs(FieldRole::FluidVelocity), Side::Fluid,
                      ghost_coefficients(FieldRole::FluidVelocity, h, cfg.fluid_order, cfg.solid_order),
                      scale * 2.0 * mat.rho_f * mat.nu_f * st.gamma_vf, vf, vf, out, mode);
  add_face_jump_terms(disc, disc.dofs(FieldRole::Pressure), Side::Fluid,
                      ghost_coefficients(FieldRole::Pressure, h, cfg.fluid_order, cfg.solid_order),
                      scale * st.gamma_p, p, p, out, mode);
  add_face_jump_terms(disc, disc.dofs(FieldRole::Displacement), Side::Solid,
                      ghost_coefficients(FieldRole::Displacement, h, cfg.fluid_order, cfg.solid_order),
                      scale * 2.0 * mat.mu_s * st.gamma_u, vs, u, out, mode);
}

/// Region carrying the constraint mass.
inline const QuadratureRule& constraint_rule(const Discretization& disc, int cell) {
  if (disc.config().constraint_domain == ConstraintDomain::Computational) {
    static const QuadratureRule empty;
    return disc.topology().in_side(cell, Side::Solid) ? disc.full_rule(cell) : empty;
  }
  return disc.bulk_rule(cell, Side::Solid);
}

/// Adds the constraint rows tested with psi: u_scale (u, psi) + vs_scale (v_s, psi).
inline void add_constraint(const Discretization& disc, TripletList& out, double u_scale, double vs_scale) {
  const Mesh& mesh = disc.mesh();
  const ReferenceBasis& sb = disc.dofs(FieldRole::Displacement).basis();
  std::vector<double> local;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const QuadratureRule& q = constraint_rule(disc, c);
    if (q.empty()) continue;
    detail::vector_mass_local(mesh, c, sb, q, 1.0, local);
    const std::vector<int> uid = disc.global_dofs(FieldRole::Displacement, c);
    const std::vector<int> sid = disc.global_dofs(FieldRole::SolidVelocity, c);
    for (auto [cols, s] : {std::pair{&uid, u_scale}, std::pair{&sid, vs_scale}}) {
      if (s == 0.0) continue;
      std::vector<double> scaled(local);
      for (double& v : scaled) v *= s;
      detail::scatter(out, uid, *cols, scaled);
    }
  }
}

namespace detail {

inline TripletList system_triplets(const Discretization& disc) {
  const int n = disc.layout().total;
  TripletList t(n, n);
  return t;
}

/// Explicit zero diagonal so every row and column has a stored diagonal entry.
inline void add_structural_diagonal(TripletList& t) {
  for (int i = 0; i < t.rows(); ++i) t.add(i, i, 0.0);
}

}  // namespace detail

inline SparseMatrix assemble_mass(const Discretization& disc) {
  TripletList t = detail::system_triplets(disc);
  add_mass(disc, t);
  return t.compress();
}

inline SparseMatrix assemble_fluid_bulk(const Discretization& disc) {
  TripletList t = detail::system_triplets(disc);
  add_fluid_bulk(disc, t);
  return t.compress();
}

inline SparseMatrix assemble_solid_bulk(const Discretization& disc) {
  TripletList t = detail::system_triplets(disc);
  add_solid_bulk(disc, t);
  return t.compress();
}

inline SparseMatrix assemble_nitsche(const Discretization& disc) {
  TripletList t = detail::system_triplets(disc);
  add_nitsche(disc, t);
  return t.compress();
}

inline SparseMatrix assemble_stabilization(const Discretization& disc, GhostWeighting mode = GhostWeighting::Weighted) {
  TripletList t = detail::system_triplets(disc);
  add_stabilization(disc, t, 1.0, mode);
  return t.compress();
}

/// Constraint rows (u - k v_s, psi).
inline SparseMatrix assemble_constraint_rows(const Discretization& disc, double k) {
  TripletList t = detail::system_triplets(disc);
  add_constraint(disc, t, 1.0, -k);
  return t.compress();
}

/// Monolithic time-step operator with Dirichlet rows applied, plus what the
/// right-hand side needs.
struct LinearSystem {
  SparseMatrix matrix;     ///< Dirichlet rows replaced, columns eliminated
  SparseMatrix rhs_operator;  ///< M^h + (u, psi): maps U^{n-1} to the rhs
  SparseMatrix lift;       ///< eliminated columns: rhs -= lift * g
  std::vector<int> dirichlet;
  double time_step = 0.0;
};

/// Row replacement with column elimination; the sparsity pattern is kept.
inline SparseMatrix apply_dirichlet(const SparseMatrix& a, const std::vector<int>& dofs, SparseMatrix* lift) {
  std::vector<char> is_d(a.rows(), 0);
  for (int d : dofs) is_d[d] = 1;
  SparseMatrix out = a;
  TripletList l(a.rows(), a.cols());
  std::vector<double>& val = out.values();
  const auto& ptr = out.row_ptr();
  const auto& idx = out.col_idx();
  for (int i = 0; i < out.rows(); ++i) {
    for (int p = ptr[i]; p < ptr[i + 1]; ++p) {
      const int j = idx[p];
      if (is_d[i]) {
        val[p] = i == j ? 1.0 : 0.0;
      } else if (is_d[j]) {
        l.add(i, j, val[p]);
        val[p] = 0.0;
      }
    }
  }
  if (lift != nullptr) *lift = l.compress();
  return out;
}

/// A = M + k (a_f + a_s + j + S) + constraint rows, pattern symmetrized.
inline LinearSystem assemble_system(const Discretization& disc, double k,
                                    GhostWeighting mode = GhostWeighting::Weighted) {
  if (!(k > 0.0)) throw std::invalid_argument("assemble_system: time step must be positive");
  LinearSystem sys;
  sys.time_step = k;
  sys.dirichlet = disc.dirichlet_dofs();
  {
    TripletList r = detail::system_triplets(disc);
    add_mass(disc, r, 1.0, mode);
    add_constraint(disc, r, 1.0, 0.0);
    sys.rhs_operator = r.compress();
  }
  SparseMatrix a;
  {
    TripletList t = detail::system_triplets(disc);
    detail::add_structural_diagonal(t);
    add_mass(disc, t, 1.0, mode);
    add_fluid_bulk(disc, t, k);
    add_solid_bulk(disc, t, k);
    add_nitsche(disc, t, k);
    add_stabilization(disc, t, k, mode);
    add_constraint(disc, t, 1.0, -k);
    a = t.compress();
  }
  a = add(a, a.transpose(), 1.0, 0.0);
  sys.matrix = apply_dirichlet(a, sys.dirichlet, &sys.lift);
  return sys;
}

/// Right-hand side (M^h + (u, psi)) U^{n-1} + k F^n with Dirichlet values g.
inline std::vector<double> assemble_rhs(const LinearSystem& sys, std::span<const double> previous,
                                        const std::vector<std::pair<int, double>>& dirichlet_values,
                                        std::span<const double> load = {}) {
  std::vector<double> b = sys.rhs_operator.multiply(previous);
  if (!load.empty()) {
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += sys.time_step * load[i];
  }
  std::vector<double> g(b.size(), 0.0);
  for (const auto& [d, v] : dirichlet_values) g[d] = v;
  const std::vector<double> lg = sys.lift.multiply(g);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lg[i];
  for (const auto& [d, v] : dirichlet_values) b[d] = v;
  return b;
}

using VectorField = std::function<Vec2(double, Vec2)>;

/// F^n(Phi) = (f_f, phi_f)_{Omega_f} + (f_s, phi_s)_{Omega_s} at time t.
inline std::vector<double> assemble_load(const Discretization& disc, const VectorField& f_fluid,
                                         const VectorField& f_solid, double t) {
  std::vector<double> out(disc.layout().total, 0.0);
  const Mesh& mesh = disc.mesh();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    for (auto [role, side, f] : {std::tuple{FieldRole::FluidVelocity, Side::Fluid, &f_fluid},
                                 std::tuple{FieldRole::SolidVelocity, Side::Solid, &f_solid}}) {
      if (!*f) continue;
      const QuadratureRule& q = disc.bulk_rule(c, side);
      if (q.empty()) continue;
      const ReferenceBasis& b = disc.dofs(role).basis();
      const std::vector<int> ids = disc.global_dofs(role, c);
      const int nloc = b.size();
      for (std::size_t p = 0; p < q.size(); ++p) {
        const BasisTable tb = physical_eval(mesh, c, b, q.points[p], 0);
        const Vec2 fv = (*f)(t, q.points[p]);
        for (int a = 0; a < nloc; ++a) {
          out[ids[a]] += q.weights[p] * fv.x * tb.values[a];
          out[ids[nloc + a]] += q.weights[p] * fv.y * tb.values[a];
        }
      }
    }
  }
  return out;
}

}  // namespace cutfsi
