#pragma once

#include "epd/grid.hpp"
#include "epd/operators.hpp"
#include "epd/sylvester.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace epd {

/// Initial data for Taylor seeding: u(t0), u_t(t0), v(t0), v_t(t0).
struct InitialData {
    SpaceFn u0;
    SpaceFn u1;
    SpaceFn v0;
    SpaceFn v1;
};

/// Exact solution used to seed levels 0 and 1 directly.
struct ExactSeed {
    SpaceTimeFn u;
    SpaceTimeFn v;
};

struct Forcing {
    SpaceTimeFn G1;
    SpaceTimeFn G2;
};

/// Coefficients and data of
///   u_tt + (2a/t) v_t = Lap u + (2 lambda/x) v_x + (2 gamma/y) v_y + |u|^(p-1) v + G1
///   v_tt + (2a/t) u_t = Lap v + (2 lambda/x) u_x + (2 gamma/y) u_y + |v|^(q-1) u + G2
/// with homogeneous Neumann conditions.
struct ProblemDef {
    double a = 2.5;
    double lambda = 0.25;
    double gamma = 0.25;
    double p = 1.5;
    double q = 4.0 / 3.0;
    /// When false the power-law terms are dropped (linear system).
    bool nonlinear = true;
    std::optional<Forcing> forcing;
    /// Exactly one of `exact_seed` and `initial` must be set.
    std::optional<ExactSeed> exact_seed;
    std::optional<InitialData> initial;
    /// 2: U^1 = u0 + l u1 + (l^2/2) u_tt(t0); 1: U^1 = u0 + l u1.
    int taylor_order = 2;
    /// Allow Taylor seeding at t0 = 0 with a != 0 by taking the t -> 0+ limit
    /// of the damping term (requires u1 = v1 = 0).
    bool regularize_t0 = false;
    SingularPolicy singular_policy = SingularPolicy::limit;
};

/// Throws InvalidSpecError if p, q <= 1 or the seeding source is not unique.
void validate(const ProblemDef& prob);

enum class SolverKind { sylvester, kronecker };

struct StepReport {
    int n = 0;
    /// max |entry| over U^{n+1} and V^{n+1}.
    double sup_norm = 0.0;
    /// ||(U^{n+1}, V^{n+1})||_2.
    double pair_norm = 0.0;
    double residual_coupled = 0.0;
    /// NaN when margin computation is disabled.
    double margin = 0.0;
    double assembly_ms = 0.0;
    double solve_ms = 0.0;
};

/// Entrywise |X|^(p-1) Y.
Field nonlinear_G(const Field& X, const Field& Y, double p);
/// Entrywise |Y|^(q-1) X.
Field nonlinear_H(const Field& X, const Field& Y, double q);

/// Levels 0 and 1, either sampled from the exact seed or built by Taylor expansion.
std::pair<CoupledState, CoupledState> init_levels(const ProblemDef& prob, const Grid& grid,
                                                  const OperatorSet& opset);

/// Right-hand sides C1, C2 of the step from level n to n+1.
std::pair<Field, Field> assemble_rhs(const CoupledState& current, const CoupledState& previous,
                                     const StepOperators& ops, const OperatorSet& opset,
                                     const ProblemDef& prob, const Grid& grid);

/// Matrix-equation form of one step, ready for either solver.
CoupledProblem step_problem(const StepOperators& ops, Field C1, Field C2);

struct StepOptions {
    SolverKind solver = SolverKind::sylvester;
    bool compute_margin = false;
    SylvesterOptions sylvester;
    KroneckerOptions kronecker;
};

/// Advance from (current = level n, previous = level n-1) to level n+1.
CoupledState step(const CoupledState& current, const CoupledState& previous,
                  const StepOperators& ops, const OperatorSet& opset, const ProblemDef& prob,
                  const Grid& grid, const StepOptions& opts = {}, StepReport* report = nullptr);

struct RunOptions {
    SolverKind solver = SolverKind::sylvester;
    double blowup_cap = 1e8;
    bool compute_margin = true;
    SylvesterOptions sylvester;
    KroneckerOptions kronecker;
};

struct CflReport {
    bool ok = true;
    /// 4 sigma C_alpha, C_alpha = alpha (4 + h (max|lambda_j| + max|gamma_m|)).
    double value = 0.0;
};

struct RunResult {
    Grid grid;
    std::vector<CoupledState> trajectory;
    std::vector<StepReport> reports;
    CflReport cfl;
    double init_ms = 0.0;
    double assembly_ms = 0.0;
    double solve_ms = 0.0;

    double total_ms() const { return init_ms + assembly_ms + solve_ms; }
    double max_residual() const;
};

/// Full simulation: n_steps + 1 levels. Throws BlowUpError when sup_norm
/// exceeds the cap, NonSolvableError (annotated with the step) on solver failure.
RunResult run(const ProblemDef& prob, const GridSpec& spec, const RunOptions& opts = {});

/// Sufficient stability condition 4 sigma C_alpha < 1. Advisory only.
CflReport cfl_guard(const Grid& grid, double alpha, const OperatorSet& opset);

/// Least-squares slope of log Er against log h. +inf if any Er is zero.
double convergence_order(std::span<const std::pair<double, double>> h_and_error);

}  // namespace epd
