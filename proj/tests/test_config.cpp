#include <gtest/gtest.h>

#include "cutfsi/assembly.hpp"
#include "cutfsi/config.hpp"

using namespace cutfsi;

TEST(Config, EmptyTextGivesDefaults) {
  const SimulationConfig c = parse_config_text("", "empty");
  EXPECT_EQ(c.material.rho_f, 1.0);
  EXPECT_EQ(c.material.rho_s, 1.0);
  EXPECT_EQ(c.material.nu_f, 1e-3);
  EXPECT_EQ(c.material.mu_s, 5e-3);
  EXPECT_EQ(c.material.lambda_s, 1e-2);
  EXPECT_EQ(c.stabilization.gamma_vf, 1e-3);
  EXPECT_EQ(c.stabilization.gamma_p, 1e-3);
  EXPECT_EQ(c.stabilization.gamma_vs, 1e-3);
  EXPECT_EQ(c.stabilization.gamma_u, 1e-3);
  EXPECT_EQ(c.stabilization.gamma_nitsche, 100.0);
  EXPECT_EQ(c.stabilization.w_max, 1.0);
  EXPECT_EQ(c.fluid_order, 2);
  EXPECT_EQ(c.cells_per_side, 8);
  EXPECT_EQ(c.h(), 0.25);
  EXPECT_EQ(c.time_step, 1.0);
  EXPECT_EQ(c.final_time, 8.0);
  EXPECT_EQ(c.radius_squared, 0.75);
}

TEST(Config, CommentsAndOverrides) {
  const SimulationConfig c = parse_config_text("# comment\n n = 16  # trailing\nk=0.5\n\nm_s = 1\n");
  EXPECT_EQ(c.cells_per_side, 16);
  EXPECT_EQ(c.time_step, 0.5);
  EXPECT_EQ(c.solid_order, 1);
  const SimulationConfig d = parse_config_text("h = 0.0625\n");
  EXPECT_EQ(d.cells_per_side, 32);
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config_text("n = 8\nbogus = 1\n", "f.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.cfg:2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("unknown key"), std::string::npos);
  }
  try {
    parse_config_text("\n\nrho_f = abc\n", "f.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("f.cfg:3"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("n 8\n"), ConfigError);
}

TEST(Config, InvariantsRejected) {
  EXPECT_THROW(parse_config_text("gamma_N = -1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("w_max = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config_text("m_s = 3\n"), ConfigError);
  EXPECT_THROW(parse_config_text("m_f = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("rho_f = 0\n"), ConfigError);
  EXPECT_THROW(parse_config_text("constraint_domain = elsewhere\n"), ConfigError);
  EXPECT_NO_THROW(parse_config_text("gamma_vf = 0\n"));
}

TEST(Config, UnitWeightSelectsConventionalPenalty) {
  const SimulationConfig c = parse_config_text("w_max = 1\n");
  for (double k : {0.0, 0.2, 0.5, 1.0}) EXPECT_EQ(weight_w(k, c.stabilization.w_max), 0.5);
}

TEST(Config, StepCount) {
  SimulationConfig c;
  EXPECT_EQ(step_count(c), 8);
  c.time_step = 0.3;
  EXPECT_THROW(step_count(c), ConfigError);
}

TEST(Config, TextRoundTrip) {
  SimulationConfig c = parse_config_text("n = 32\nk = 0.125\nw_max = 4\nnu_f = 0.0011\n");
  const SimulationConfig d = parse_config_text(to_config_text(c));
  EXPECT_EQ(to_config_text(c), to_config_text(d));
  EXPECT_EQ(d.material.nu_f, 0.0011);
}
