#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "cutfsi/fem.hpp"
#include "cutfsi/timestepper.hpp"

using namespace cutfsi;

TEST(ReferenceBasis, KroneckerAndPartitionOfUnity) {
  for (int r : {1, 2}) {
    const ReferenceBasis b(r);
    for (int k = 0; k < b.size(); ++k) {
      const BasisTable t = ref_eval(b, b.node(k), 0);
      for (int j = 0; j < b.size(); ++j) EXPECT_NEAR(t.values[j], j == k ? 1.0 : 0.0, 1e-15);
    }
    for (Vec2 x : {Vec2{0.13, 0.71}, Vec2{0.5, 0.5}, Vec2{0.9, 0.02}}) {
      const BasisTable t = ref_eval(b, x, 2);
      double s = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
      Vec2 g;
      for (int j = 0; j < b.size(); ++j) {
        s += t.values[j];
        g += t.gradients[j];
        hxx += t.hessians[j].xx;
        hxy += t.hessians[j].xy;
        hyy += t.hessians[j].yy;
      }
      EXPECT_NEAR(s, 1.0, 1e-14);
      EXPECT_NEAR(g.x, 0.0, 1e-13);
      EXPECT_NEAR(g.y, 0.0, 1e-13);
      EXPECT_NEAR(hxx, 0.0, 1e-12);
      EXPECT_NEAR(hxy, 0.0, 1e-12);
      EXPECT_NEAR(hyy, 0.0, 1e-12);
    }
  }
  const BasisTable q1 = ref_eval(ReferenceBasis(1), {0.5, 0.5}, 0);
  for (double v : q1.values) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(PhysicalEval, AffineScaling) {
  const Mesh m = build_mesh(8);
  const int c = m.locate({0.1, 0.1});
  const ReferenceBasis q1(1), q2(2);
  const BasisTable ref = ref_eval(q1, {0.5, 0.5}, 1);
  const BasisTable phys = physical_eval(m, c, q1, m.cell_center(c), 1);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(phys.values[k], ref.values[k]);
    EXPECT_NEAR(phys.gradients[k].x, ref.gradients[k].x / 0.25, 1e-14);
    EXPECT_NEAR(phys.gradients[k].y, ref.gradients[k].y / 0.25, 1e-14);
  }
  const BasisTable r2 = ref_eval(q2, {0.3, 0.6}, 2);
  const BasisTable p2 = physical_eval(m, c, q2, m.cell_lower(c) + 0.25 * Vec2{0.3, 0.6}, 2);
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(p2.hessians[k].xy, r2.hessians[k].xy / 0.0625, 1e-12);
}

TEST(DofMap, FullMeshCounts) {
  const Mesh m = build_mesh(8);
  EXPECT_EQ(build_full_dof_map(m, FieldRole::Pressure, 1, 1).size(), 81);
  EXPECT_EQ(build_full_dof_map(m, FieldRole::Pressure, 2, 1).size(), 289);
}

TEST(DofMap, SolidCountMatchesNodeEnumeration) {
  const Mesh m = build_mesh(8);
  const CutTopology t(m, CircleLevelSet({0.0, 0.0}, 0.75));
  for (int order : {1, 2}) {
    std::set<std::pair<int, int>> nodes;
    for (int c = 0; c < m.num_cells(); ++c) {
      if (!t.in_side(c, Side::Solid)) continue;
      const auto [i, j] = m.cell_ij(c);
      for (int a = 0; a <= order; ++a) {
        for (int b = 0; b <= order; ++b) nodes.insert({order * i + a, order * j + b});
      }
    }
    const DofMap d = build_dof_map(m, t, FieldRole::Displacement, order, 2);
    EXPECT_EQ(d.num_scalar(), static_cast<int>(nodes.size()));
    EXPECT_EQ(d.size(), 2 * static_cast<int>(nodes.size()));
    EXPECT_TRUE(d.dirichlet_dofs().empty());
  }
}

TEST(DofMap, SharedFaceNodesAgree) {
  const Mesh m = build_mesh(4);
  const DofMap d = build_full_dof_map(m, FieldRole::FluidVelocity, 2, 2);
  for (const Face& f : m.faces()) {
    if (f.on_boundary()) continue;
    std::set<int> a, b;
    for (int k = 0; k < 9; ++k) {
      const Vec2 xa = d.node_point(d.cell_dofs(f.cell0)[k]);
      const Vec2 xb = d.node_point(d.cell_dofs(f.cell1)[k]);
      auto on_face = [&](Vec2 x) { return f.vertical ? std::abs(x.x - f.a.x) < 1e-14 : std::abs(x.y - f.a.y) < 1e-14; };
      if (on_face(xa)) a.insert(d.cell_dofs(f.cell0)[k]);
      if (on_face(xb)) b.insert(d.cell_dofs(f.cell1)[k]);
    }
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 3u);
  }
}

TEST(DofMap, FluidDirichletCoversBoundary) {
  const Mesh m = build_mesh(8);
  const CutTopology t(m, CircleLevelSet({0.0, 0.0}, 0.75));
  const DofMap d = build_dof_map(m, t, FieldRole::FluidVelocity, 2, 2);
  EXPECT_EQ(d.dirichlet_dofs().size(), 2u * 4u * 16u);
  for (int dof : d.dirichlet_dofs()) {
    const Vec2 x = d.node_point(dof % d.num_scalar());
    EXPECT_TRUE(std::abs(std::abs(x.x) - 1.0) < 1e-14 || std::abs(std::abs(x.y) - 1.0) < 1e-14);
  }
}

TEST(NormalDerivativeJump, PolynomialsHaveNoJumps) {
  const Mesh m = build_mesh(4);
  const DofMap q1 = build_full_dof_map(m, FieldRole::Pressure, 1, 1);
  const DofMap q2 = build_full_dof_map(m, FieldRole::Pressure, 2, 1);
  const auto lin = interpolate(q1, [](Vec2 x) { return 0.3 + 2.0 * x.x - x.y; });
  const auto quad = interpolate(q2, [](Vec2 x) { return 0.3 + x.x * x.y - 2.0 * x.y * x.y + x.x; });
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& face = m.face(f);
    if (face.on_boundary()) continue;
    const Vec2 x = 0.3 * face.a + 0.7 * face.b;
    EXPECT_NEAR(normal_derivative_jump(m, f, FieldView(q1, lin), 1, x), 0.0, 1e-13);
    for (int j : {1, 2}) EXPECT_NEAR(normal_derivative_jump(m, f, FieldView(q2, quad), j, x), 0.0, 1e-12);
  }
}

TEST(NormalDerivativeJump, HatFunction) {
  const Mesh m = build_mesh(4);
  const double h = m.h();
  const DofMap q1 = build_full_dof_map(m, FieldRole::Pressure, 1, 1);
  // Hat at the origin, a vertex of the lattice.
  const auto hat = interpolate(q1, [](Vec2 x) { return x.x == 0.0 && x.y == 0.0 ? 1.0 : 0.0; });
  for (int f = 0; f < m.num_faces(); ++f) {
    const Face& face = m.face(f);
    if (face.on_boundary() || !face.vertical || face.a.x != 0.0) continue;
    const double y0 = std::min(face.a.y, face.b.y);
    if (std::abs(y0 + 0.0) > 1e-15 && std::abs(y0 + h) > 1e-15) continue;
    for (double s : {0.2, 0.5, 0.9}) {
      const Vec2 x{0.0, y0 + s * h};
      const double profile = 1.0 - std::abs(x.y) / h;
      EXPECT_NEAR(normal_derivative_jump(m, f, FieldView(q1, hat), 1, x), 2.0 / h * profile, 1e-12);
    }
  }
}

TEST(InterpolateBoundary, LidProfile) {
  const Mesh m = build_mesh(8);
  const DofMap d = build_full_dof_map(m, FieldRole::FluidVelocity, 2, 2);
  const auto vals = interpolate_boundary(d, inflow, 3.0);
  int checked = 0;
  for (const auto& [dof, v] : vals) {
    const int comp = dof / d.num_scalar();
    const Vec2 x = d.node_point(dof % d.num_scalar());
    if (comp == 1) {
      EXPECT_EQ(v, 0.0);
      continue;
    }
    if (x.y == 1.0 && x.x == -1.0) {
      EXPECT_NEAR(v, 0.0, 1e-15);
      ++checked;
    }
    if (x.y == 1.0 && x.x == 0.0) {
      EXPECT_DOUBLE_EQ(v, 0.2);
      ++checked;
    }
    if (x.y < 1.0) {
      EXPECT_EQ(v, 0.0);
    }
  }
  EXPECT_EQ(checked, 2);
  // Flank and plateau meet continuously at x = -0.7.
  EXPECT_NEAR(inflow(3.0, {-0.7, 1.0}).x, 0.2, 1e-15);
}
