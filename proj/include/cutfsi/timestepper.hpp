// Backward Euler driver: lid inflow with a smooth start-up ramp, one
// factorization per run, per-step residual and constraint bookkeeping.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutfsi/assembly.hpp"
#include "cutfsi/config.hpp"
#include "cutfsi/sparse.hpp"

namespace cutfsi {

/// Start-up factor 1/2 (1 - cos(t pi / 2)) for t < 2, then 1.
inline double inflow_ramp(double t) {
  if (t <= 0.0) return 0.0;
  return t < 2.0 ? 0.5 * (1.0 - std::cos(t * std::numbers::pi / 2.0)) : 1.0;
}

/// Horizontal lid profile on y = 1: sin^2 flanks of width 0.3 next to the
/// corners and a plateau of 0.2 in between. Zero on the other walls.
inline Vec2 inflow(double t, Vec2 x) {
  if (std::abs(x.y - 1.0) > 1e-12) return {0.0, 0.0};
  const double pi = std::numbers::pi;
  double v = 0.2;
  if (x.x <= -0.7) {
    const double s = std::sin((x.x + 1.0) * pi / 0.6);
    v = 0.2 * s * s;
  } else if (x.x >= 0.7) {
    const double s = std::sin((x.x - 1.0) * pi / 0.6);
    v = 0.2 * s * s;
  }
  return {v * inflow_ramp(t), 0.0};
}

inline Vec2 zero_boundary(double, Vec2) { return {0.0, 0.0}; }

/// Monolithic unknown U^{h,n} at t_n.
struct State {
  int n = 0;
  double t = 0.0;
  std::vector<double> U;
};

/// Zero coefficients at n = 0.
inline State initialize(const Discretization& disc) { return State{0, 0.0, std::vector<double>(disc.layout().total, 0.0)}; }

struct StepRecord {
  int n = 0;
  double t = 0.0;
  double solve_residual = 0.0;       ///< ||A x - b|| / ||b||
  double constraint_residual = 0.0;  ///< max |u^n - u^{n-1} - k v_s^n|
};

class StepError : public std::runtime_error {
 public:
  StepError(int step, const std::string& what) : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// max |u^n - u^{n-1} - k v_s^n| over coefficients.
inline double constraint_residual(const Discretization& disc, std::span<const double> prev, std::span<const double> next,
                                  double k) {
  const auto u0 = disc.block(prev, FieldRole::Displacement);
  const auto u1 = disc.block(next, FieldRole::Displacement);
  const auto vs = disc.block(next, FieldRole::SolidVelocity);
  double r = 0.0;
  for (std::size_t i = 0; i < u1.size(); ++i) r = std::max(r, std::abs(u1[i] - u0[i] - k * vs[i]));
  return r;
}

/// Assembles and factorizes A once; each step only rebuilds the rhs.
class TimeStepper {
 public:
  TimeStepper(const Discretization& disc, double k, VectorField boundary = inflow,
              GhostWeighting mode = GhostWeighting::Weighted)
      : disc_(&disc), k_(k), boundary_(std::move(boundary)), system_(assemble_system(disc, k, mode)),
        factor_(factorize_with_diagnostics(disc, system_.matrix)) {}

  const LinearSystem& system() const { return system_; }
  const Factorization& factorization() const { return factor_; }
  double time_step() const { return k_; }

  /// Volumetric loads f_f, f_s; empty functions mean zero.
  void set_load(VectorField fluid, VectorField solid) {
    load_fluid_ = std::move(fluid);
    load_solid_ = std::move(solid);
  }

  State step(const State& prev, StepRecord* record = nullptr) const {
    State next;
    next.n = prev.n + 1;
    next.t = next.n * k_;
    const auto g = interpolate_boundary(disc_->dofs(FieldRole::FluidVelocity), boundary_, next.t);
    std::vector<std::pair<int, double>> dirichlet;
    dirichlet.reserve(g.size());
    const int off = disc_->layout().begin(FieldRole::FluidVelocity);
    for (const auto& [d, v] : g) dirichlet.emplace_back(off + d, v);
    std::vector<double> load;
    if (load_fluid_ || load_solid_) load = assemble_load(*disc_, load_fluid_, load_solid_, next.t);
    const std::vector<double> b = assemble_rhs(system_, prev.U, dirichlet, load);
    try {
      next.U = factor_.solve(b);
    } catch (const std::exception& e) {
      throw StepError(next.n, "step " + std::to_string(next.n) + ": " + e.what());
    }
    if (record != nullptr) {
      record->n = next.n;
      record->t = next.t;
      record->solve_residual = relative_residual(system_.matrix, next.U, b);
      record->constraint_residual = constraint_residual(*disc_, prev.U, next.U, k_);
    }
    return next;
  }

 private:
  static Factorization factorize_with_diagnostics(const Discretization& disc, const SparseMatrix& a) {
    try {
      return Factorization(a);
    } catch (const SingularMatrixError& e) {
      const std::string where = e.row() >= 0 ? disc.describe_dof(e.row()) : std::string("unknown dof");
      throw SingularMatrixError(e.row(), std::string(e.what()) + ", dof " + where);
    }
  }

  const Discretization* disc_;
  double k_;
  VectorField boundary_;
  VectorField load_fluid_;
  VectorField load_solid_;
  LinearSystem system_;
  Factorization factor_;
};

struct RunOptions {
  bool keep_history = false;  ///< store every state (needed for space-time norms)
  VectorField boundary = inflow;
  std::optional<State> initial;  ///< defaults to zero
  GhostWeighting weighting = GhostWeighting::Weighted;
};

struct RunResult {
  std::vector<StepRecord> log;
  State final_state;
  std::vector<State> history;  ///< n = 0..N when keep_history
};

using StepObserver = std::function<void(const State&, const StepRecord&)>;

/// N = T / k backward Euler steps from the initial state.
inline RunResult run(const Discretization& disc, const RunOptions& opts = {}, const StepObserver& observer = {}) {
  const SimulationConfig& cfg = disc.config();
  const int steps = step_count(cfg);
  TimeStepper stepper(disc, cfg.time_step, opts.boundary, opts.weighting);
  RunResult result;
  State state = opts.initial ? *opts.initial : initialize(disc);
  if (static_cast<int>(state.U.size()) != disc.layout().total) throw std::invalid_argument("run: initial state size mismatch");
  if (opts.keep_history) result.history.push_back(state);
  for (int s = 0; s < steps; ++s) {
    StepRecord rec;
    state = stepper.step(state, &rec);
    result.log.push_back(rec);
    if (observer) observer(state, rec);
    if (opts.keep_history) result.history.push_back(state);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace cutfsi
