#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "cutfsi/assembly.hpp"
#include "cutfsi/verify.hpp"

using namespace cutfsi;

namespace {

const double kDiskArea = std::numbers::pi * 0.75;
const double kFluidArea = 4.0 - kDiskArea;

SimulationConfig config(int n = 8, int m_s = 2) {
  SimulationConfig c;
  c.cells_per_side = n;
  c.solid_order = m_s;
  return c;
}

/// System vector with the given fields interpolated into their blocks.
template <class F>
void set_block(const Discretization& d, std::vector<double>& U, FieldRole r, F&& f) {
  const auto v = interpolate(d.dofs(r), f);
  std::copy(v.begin(), v.end(), d.block(std::span<double>(U), r).begin());
}

}  // namespace

TEST(WeightFunction, Values) {
  EXPECT_DOUBLE_EQ(weight_w(0.5, 4.0), 0.5);
  EXPECT_DOUBLE_EQ(weight_w(0.5, 17.0), 0.5);
  EXPECT_DOUBLE_EQ(weight_w(0.0, 4.0), 2.0);
  EXPECT_DOUBLE_EQ(weight_w(1.0, 4.0), 0.125);
  for (double k : {0.0, 0.3, 1.0}) EXPECT_DOUBLE_EQ(weight_w(k, 1.0), 0.5);
  EXPECT_THROW(weight_w(1.5, 2.0), std::invalid_argument);
}

TEST(GhostCoefficients, FluidVelocityScaling) {
  const double h = 0.25;
  const auto c = ghost_coefficients(FieldRole::FluidVelocity, h, 2, 2);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].first, 1);
  EXPECT_DOUBLE_EQ(c[0].second, h);
  EXPECT_EQ(c[1].first, 2);
  EXPECT_DOUBLE_EQ(c[1].second, h * h * h);
  const auto p = ghost_coefficients(FieldRole::Pressure, h, 2, 2);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_DOUBLE_EQ(p[0].second, h * h * h);
  const auto vs = ghost_coefficients(FieldRole::SolidVelocity, h, 2, 2);
  EXPECT_DOUBLE_EQ(vs[1].second, std::pow(h, 5) / 4.0);
  const auto u = ghost_coefficients(FieldRole::Displacement, h, 2, 1);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(u[0].second, h);
}

TEST(GhostForms, SymmetricPsdWithPolynomialKernels) {
  for (int m_s : {1, 2}) {
    const CheckResult r = check_ghost_forms(config(8, m_s));
    EXPECT_TRUE(r.passed) << r.detail;
  }
  SimulationConfig w = config();
  w.stabilization.w_max = 4.0;
  EXPECT_TRUE(check_ghost_forms(w).passed);
}

TEST(GhostForms, LinearDisplacementInKernelForLinearElements) {
  const Discretization d(config(8, 1));
  const SparseMatrix g = ghost_matrix(d, FieldRole::Displacement);
  const auto u = interpolate(d.dofs(FieldRole::Displacement), [](Vec2 x) { return Vec2{x.x - 2.0 * x.y, 0.5 * x.x}; });
  EXPECT_NEAR(g.bilinear(u, u), 0.0, 1e-16);
}

TEST(GhostForms, PressureHatMatchesTwoCellHandAssembly) {
  // A Q1 hat at vertex z has normal-derivative jump 2/h (1 - s/h) across the
  // four faces meeting at z and 1/h (1 - s/h) across the eight faces bounding
  // its support; integrating the squares gives 4/(3h) and 1/(3h).
  const SimulationConfig cfg = config();
  const Discretization d(cfg);
  const Mesh& m = d.mesh();
  const double h = m.h();
  const DofMap& dp = d.dofs(FieldRole::Pressure);
  const SparseMatrix g = ghost_matrix(d, FieldRole::Pressure);
  const auto& ghost = d.topology().ghost_faces(Side::Fluid);
  const std::set<int> ghost_set(ghost.begin(), ghost.end());
  int tested = 0;
  for (int s = 0; s < dp.num_scalar(); ++s) {
    const Vec2 z = dp.node_point(s);
    double expected = 0.0;
    for (int f : ghost_set) {
      const Face& face = m.face(f);
      const bool incident = face.a == z || face.b == z;
      const double dn = face.vertical ? std::abs(face.a.x - z.x) : std::abs(face.a.y - z.y);
      const double lo = face.vertical ? std::min(face.a.y, face.b.y) : std::min(face.a.x, face.b.x);
      const double along = face.vertical ? z.y : z.x;
      const bool support_edge = std::abs(dn - h) < 1e-12 && (std::abs(lo - along) < 1e-12 || std::abs(lo + h - along) < 1e-12);
      const double w = face_weight(d.topology(), face, Side::Fluid, cfg.stabilization.w_max);
      if (incident) expected += w * 4.0 / (3.0 * h);
      if (support_edge) expected += w * 1.0 / (3.0 * h);
    }
    if (expected == 0.0) continue;
    expected *= cfg.stabilization.gamma_p * h * h * h;
    EXPECT_NEAR(g.at(s, s), expected, 1e-15 * std::max(1.0, expected / 1e-6)) << "vertex " << z.x << "," << z.y;
    ++tested;
  }
  EXPECT_GT(tested, 10);
}

TEST(Mass, SingleCellQ1Pattern) {
  const CheckResult r = check_q1_mass(config());
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Mass, PositiveAndMeasureIdentity) {
  const Discretization d(config());
  const SparseMatrix M = assemble_mass(d);
  std::vector<double> ones(d.layout().total, 0.0);
  set_block(d, ones, FieldRole::FluidVelocity, [](Vec2) { return Vec2{1.0, 0.0}; });
  EXPECT_NEAR(M.bilinear(ones, ones), kFluidArea, 1e-12);
  std::vector<double> vs(d.layout().total, 0.0);
  set_block(d, vs, FieldRole::SolidVelocity, [](Vec2) { return Vec2{0.0, 1.0}; });
  EXPECT_NEAR(M.bilinear(vs, vs), kDiskArea, 1e-12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> x(d.layout().total, 0.0);
    for (FieldRole r : {FieldRole::FluidVelocity, FieldRole::SolidVelocity}) {
      for (double& v : d.block(std::span<double>(x), r)) v = u(rng);
    }
    EXPECT_GT(M.bilinear(x, x), 0.0);
  }
}

TEST(FluidBulk, KernelAndDivergence) {
  const Discretization d(config());
  const SparseMatrix A = assemble_fluid_bulk(d);
  std::vector<double> c(d.layout().total, 0.0), rot(d.layout().total, 0.0);
  set_block(d, c, FieldRole::FluidVelocity, [](Vec2) { return Vec2{0.7, -0.2}; });
  set_block(d, rot, FieldRole::FluidVelocity, [](Vec2 x) { return Vec2{-x.y, x.x}; });
  const auto Ac = A.multiply(c);
  const auto vf = d.block(std::span<const double>(Ac), FieldRole::FluidVelocity);
  for (double v : vf) EXPECT_NEAR(v, 0.0, 1e-15);
  EXPECT_NEAR(A.bilinear(rot, rot), 0.0, 1e-15);
  std::vector<double> v(d.layout().total, 0.0), xi(d.layout().total, 0.0);
  set_block(d, v, FieldRole::FluidVelocity, [](Vec2 x) { return Vec2{x.x, 0.0}; });
  set_block(d, xi, FieldRole::Pressure, [](Vec2) { return 1.0; });
  EXPECT_NEAR(A.bilinear(xi, v), kFluidArea, 1e-12);
}

TEST(SolidBulk, StressOfLinearFields) {
  const SimulationConfig cfg = config();
  const Discretization d(cfg);
  const SparseMatrix A = assemble_solid_bulk(d);
  const MaterialParams& m = cfg.material;
  std::vector<double> U(d.layout().total, 0.0);
  set_block(d, U, FieldRole::SolidVelocity, [](Vec2 x) { return Vec2{x.x, 0.0}; });
  set_block(d, U, FieldRole::Displacement, [](Vec2 x) { return Vec2{x.x, 0.0}; });
  EXPECT_NEAR(A.bilinear(U, U), (2.0 * m.mu_s + m.lambda_s) * kDiskArea, 1e-13);
  std::vector<double> W(d.layout().total, 0.0);
  set_block(d, W, FieldRole::SolidVelocity, [](Vec2 x) { return Vec2{x.x, x.y}; });
  set_block(d, W, FieldRole::Displacement, [](Vec2 x) { return Vec2{x.x, x.y}; });
  // sigma = (2 mu + 2 lambda) I, grad phi = I: integrand 2 (2 mu + 2 lambda).
  EXPECT_NEAR(A.bilinear(W, W), 2.0 * (2.0 * m.mu_s + 2.0 * m.lambda_s) * kDiskArea, 1e-13);
  std::vector<double> T(d.layout().total, 0.0);
  set_block(d, T, FieldRole::Displacement, [](Vec2) { return Vec2{1.0, 2.0}; });
  for (double v : A.multiply(T)) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(Nitsche, ZeroJumpAndPressureFlux) {
  const Discretization d(config());
  const SparseMatrix J = assemble_nitsche(d);
  std::vector<double> U(d.layout().total, 0.0);
  auto poly = [](Vec2 x) { return Vec2{0.2 + x.x * x.y, x.x - x.y * x.y}; };
  set_block(d, U, FieldRole::FluidVelocity, poly);
  set_block(d, U, FieldRole::SolidVelocity, poly);
  EXPECT_NEAR(J.bilinear(U, U), 0.0, 1e-14);
  // -(v_f - v_s, xi n_f) with xi = 1, v_f = (x, 0), v_s = 0. n_f points into
  // the disk, so the boundary integral of x n_f.x is -|disk|.
  std::vector<double> V(d.layout().total, 0.0), xi(d.layout().total, 0.0);
  set_block(d, V, FieldRole::FluidVelocity, [](Vec2 x) { return Vec2{x.x, 0.0}; });
  set_block(d, xi, FieldRole::Pressure, [](Vec2) { return 1.0; });
  EXPECT_NEAR(J.bilinear(xi, V), kDiskArea, 1e-10);
}

TEST(Nitsche, CoercivePairedWithViscousPart) {
  const Discretization d(config());
  const SparseMatrix A = add(assemble_fluid_bulk(d), assemble_nitsche(d));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(d.layout().total, 0.0);
    for (FieldRole r : {FieldRole::FluidVelocity, FieldRole::SolidVelocity}) {
      for (double& v : d.block(std::span<double>(x), r)) v = u(rng);
    }
    EXPECT_GT(A.bilinear(x, x), 0.0);
  }
}

TEST(Constraint, ZeroStepKeepsOnlyDisplacement) {
  const Discretization d(config());
  const SparseMatrix C = assemble_constraint_rows(d, 0.0);
  const int u0 = d.layout().begin(FieldRole::Displacement);
  for (int i = 0; i < C.rows(); ++i) {
    for (int p = C.row_ptr()[i]; p < C.row_ptr()[i + 1]; ++p) {
      if (C.values()[p] == 0.0) continue;
      EXPECT_GE(i, u0);
      EXPECT_GE(C.col_idx()[p], u0);
    }
  }
}

TEST(System, DimensionMatchesEnumeration) {
  const Discretization d(config(8, 1));
  const Mesh& m = d.mesh();
  const CutTopology& t = d.topology();
  auto count = [&](Side s, int order) {
    std::set<std::pair<int, int>> nodes;
    for (int c = 0; c < m.num_cells(); ++c) {
      if (!t.in_side(c, s)) continue;
      const auto [i, j] = m.cell_ij(c);
      for (int a = 0; a <= order; ++a) {
        for (int b = 0; b <= order; ++b) nodes.insert({order * i + a, order * j + b});
      }
    }
    return static_cast<int>(nodes.size());
  };
  const LinearSystem sys = assemble_system(d, 1.0);
  EXPECT_EQ(sys.matrix.rows(), 2 * count(Side::Fluid, 2) + count(Side::Fluid, 1) + 4 * count(Side::Solid, 1));
}

TEST(System, StructurallySymmetricAndDirichletRows) {
  const Discretization d(config());
  const LinearSystem sys = assemble_system(d, 1.0);
  const SparseMatrix& A = sys.matrix;
  const SparseMatrix At = A.transpose();
  EXPECT_EQ(A.row_ptr(), At.row_ptr());
  EXPECT_EQ(A.col_idx(), At.col_idx());
  for (int r : sys.dirichlet) {
    for (int p = A.row_ptr()[r]; p < A.row_ptr()[r + 1]; ++p) {
      EXPECT_EQ(A.values()[p], A.col_idx()[p] == r ? 1.0 : 0.0);
    }
  }
}

TEST(System, LoadIntegratesMeasure) {
  const Discretization d(config());
  const auto f = assemble_load(d, [](double, Vec2) { return Vec2{1.0, 0.0}; }, [](double, Vec2) { return Vec2{0.0, 2.0}; }, 0.0);
  std::vector<double> ones(d.layout().total, 0.0);
  set_block(d, ones, FieldRole::FluidVelocity, [](Vec2) { return Vec2{1.0, 1.0}; });
  set_block(d, ones, FieldRole::SolidVelocity, [](Vec2) { return Vec2{1.0, 1.0}; });
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * ones[i];
  EXPECT_NEAR(s, kFluidArea + 2.0 * kDiskArea, 1e-12);
}
