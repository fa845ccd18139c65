#include "epd/stepper.hpp"

#include "epd/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace epd {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Field laplacian(const OperatorSet& opset, const Grid& grid, const Field& X) {
    return apply_both(opset.A, X) / (grid.h() * grid.h());
}

/// (2 lambda/x) X_x + (2 gamma/y) X_y with centred differences.
Field gradient_term(const OperatorSet& opset, const Grid& grid, const Field& X) {
    return (apply_x(opset.Theta, X) + apply_y(X, opset.Lambda)) / grid.h();
}

Field forcing_at(const SpaceTimeFn& f, const Grid& grid, double t) {
    return sample(f, grid, t);
}

double max_abs(const Field& X) {
    return X.size() == 0 ? 0.0 : X.cwiseAbs().maxCoeff();
}

}  // namespace

void validate(const ProblemDef& prob) {
    if (!(prob.p > 1.0) || !(prob.q > 1.0)) {
        throw InvalidSpecError("ProblemDef: exponents p and q must exceed 1");
    }
    if (prob.exact_seed.has_value() == prob.initial.has_value()) {
        throw InvalidSpecError("ProblemDef: exactly one of exact_seed and initial must be set");
    }
    if (prob.taylor_order != 1 && prob.taylor_order != 2) {
        throw InvalidSpecError("ProblemDef: taylor_order must be 1 or 2");
    }
    if (!std::isfinite(prob.a) || !std::isfinite(prob.lambda) || !std::isfinite(prob.gamma)) {
        throw InvalidSpecError("ProblemDef: coefficients must be finite");
    }
}

Field nonlinear_G(const Field& X, const Field& Y, double p) {
    return X.array().abs().pow(p - 1.0) * Y.array();
}

Field nonlinear_H(const Field& X, const Field& Y, double q) {
    return Y.array().abs().pow(q - 1.0) * X.array();
}

std::pair<CoupledState, CoupledState> init_levels(const ProblemDef& prob, const Grid& grid,
                                                  const OperatorSet& opset) {
    validate(prob);
    const double t0 = grid.t0();
    const double l = grid.l();

    if (prob.exact_seed) {
        const ExactSeed& e = *prob.exact_seed;
        CoupledState s0{sample(e.u, grid, t0), sample(e.v, grid, t0), 0};
        CoupledState s1{sample(e.u, grid, grid.t(1)), sample(e.v, grid, grid.t(1)), 1};
        return {std::move(s0), std::move(s1)};
    }

    const InitialData& d = *prob.initial;
    const Field u0 = sample(d.u0, grid);
    const Field u1 = sample(d.u1, grid);
    const Field v0 = sample(d.v0, grid);
    const Field v1 = sample(d.v1, grid);

    CoupledState s0{u0, v0, 0};
    CoupledState s1{u0 + l * u1, v0 + l * v1, 1};
    if (prob.taylor_order == 1) {
        return {std::move(s0), std::move(s1)};
    }

    Field rhs_u = laplacian(opset, grid, u0) + gradient_term(opset, grid, v0);
    Field rhs_v = laplacian(opset, grid, v0) + gradient_term(opset, grid, u0);
    if (prob.nonlinear) {
        rhs_u += nonlinear_G(u0, v0, prob.p);
        rhs_v += nonlinear_H(u0, v0, prob.q);
    }
    if (prob.forcing) {
        rhs_u += forcing_at(prob.forcing->G1, grid, t0);
        rhs_v += forcing_at(prob.forcing->G2, grid, t0);
    }

    Field utt;
    Field vtt;
    if (t0 > 0.0) {
        const double damping = 2.0 * prob.a / t0;
        utt = rhs_u - damping * v1;
        vtt = rhs_v - damping * u1;
    } else if (prob.a == 0.0) {
        utt = std::move(rhs_u);
        vtt = std::move(rhs_v);
    } else {
        if (!prob.regularize_t0) {
            throw SeedingError(
                "init_levels: Taylor seeding at t0 = 0 with a != 0 hits the singular damping "
                "term; set regularize_t0 or seed from an exact solution");
        }
        const double scale = 1.0 + std::max(max_abs(u0), max_abs(v0));
        if (max_abs(u1) > 1e-12 * scale || max_abs(v1) > 1e-12 * scale) {
            throw SeedingError("init_levels: regularised seeding at t0 = 0 needs u1 = v1 = 0");
        }
        // As t -> 0+, (2a/t) v_t -> 2a v_tt, so u_tt + 2a v_tt = rhs_u and v_tt + 2a u_tt = rhs_v.
        const double det = 1.0 - 4.0 * prob.a * prob.a;
        if (std::abs(det) < 1e-12) {
            throw SeedingError("init_levels: regularised seeding is singular for a = +/-1/2");
        }
        utt = (rhs_u - 2.0 * prob.a * rhs_v) / det;
        vtt = (rhs_v - 2.0 * prob.a * rhs_u) / det;
    }
    s1.U += 0.5 * l * l * utt;
    s1.V += 0.5 * l * l * vtt;
    return {std::move(s0), std::move(s1)};
}

std::pair<Field, Field> assemble_rhs(const CoupledState& current, const CoupledState& previous,
                                     const StepOperators& ops, const OperatorSet& opset,
                                     const ProblemDef& prob, const Grid& grid) {
    const double alpha = ops.alpha;
    const double l = grid.l();
    const double grad_weight = (1.0 - 2.0 * alpha) * grid.sigma() * grid.h();
    const double source_weight = 0.5 * l * l;

    const Field& Un = current.U;
    const Field& Vn = current.V;
    const Field& Up = previous.U;
    const Field& Vp = previous.V;

    auto history = [&](const Field& Xn, const Field& Xp, const Field& Yn, const Field& Yp) {
        Field C = 2.0 * apply_both(ops.W_alpha_minus_half, Xn) - apply_both(ops.W_alpha, Xp);
        if (grad_weight != 0.0) {
            C += grad_weight * (apply_x(opset.Theta, Yn) + apply_y(Yn, opset.Lambda));
        }
        C += apply_x(ops.R_neg, Yp) + apply_y(Yp, ops.S_neg);
        return C;
    };

    Field C1 = history(Un, Up, Vn, Vp);
    Field C2 = history(Vn, Vp, Un, Up);

    if (prob.nonlinear) {
        C1 += source_weight * (nonlinear_G(Un, Vn, prob.p) + nonlinear_G(Up, Vp, prob.p));
        C2 += source_weight * (nonlinear_H(Un, Vn, prob.q) + nonlinear_H(Up, Vp, prob.q));
    }
    if (prob.forcing) {
        const double tn = grid.t(current.level);
        const double tp = grid.t(previous.level);
        C1 += source_weight *
              (forcing_at(prob.forcing->G1, grid, tn) + forcing_at(prob.forcing->G1, grid, tp));
        C2 += source_weight *
              (forcing_at(prob.forcing->G2, grid, tn) + forcing_at(prob.forcing->G2, grid, tp));
    }
    return {std::move(C1), std::move(C2)};
}

CoupledProblem step_problem(const StepOperators& ops, Field C1, Field C2) {
    return CoupledProblem{ops.W_alpha.dense(), ops.W_alpha.transposed().dense(),
                          ops.R_pos.dense(),   ops.S_pos.dense(),
                          std::move(C1),       std::move(C2)};
}

CoupledState step(const CoupledState& current, const CoupledState& previous,
                  const StepOperators& ops, const OperatorSet& opset, const ProblemDef& prob,
                  const Grid& grid, const StepOptions& opts, StepReport* report) {
    const auto t_assembly = Clock::now();
    auto [C1, C2] = assemble_rhs(current, previous, ops, opset, prob, grid);
    CoupledProblem problem = step_problem(ops, std::move(C1), std::move(C2));
    const double assembly_ms = ms_since(t_assembly);

    const auto t_solve = Clock::now();
    CoupledSolution sol;
    try {
        sol = opts.solver == SolverKind::sylvester ? solve_coupled(problem, opts.sylvester)
                                                   : kronecker_solve(problem, opts.kronecker);
    } catch (const NonSolvableError& e) {
        throw NonSolvableError("step " + std::to_string(ops.n) + ": " + e.what(),
                               e.eigenvalue_re(), e.eigenvalue_im(), e.branch());
    } catch (const SingularSystemError& e) {
        throw SingularSystemError("step " + std::to_string(ops.n) + ": " + e.what());
    }
    const double solve_ms = ms_since(t_solve);

    if (report) {
        report->n = ops.n;
        report->assembly_ms = assembly_ms;
        report->solve_ms = solve_ms;
        report->residual_coupled = residual(problem, sol);
        report->sup_norm = std::max(max_abs(sol.X), max_abs(sol.Y));
        report->pair_norm = std::sqrt(sol.X.squaredNorm() + sol.Y.squaredNorm());
        report->margin = opts.compute_margin
                             ? solvability_margin(problem.W_left, problem.W_right, problem.R,
                                                  problem.S)
                             : std::numeric_limits<double>::quiet_NaN();
    }
    return CoupledState{std::move(sol.X), std::move(sol.Y), current.level + 1};
}

double RunResult::max_residual() const {
    double r = 0.0;
    for (const StepReport& s : reports) r = std::max(r, s.residual_coupled);
    return r;
}

RunResult run(const ProblemDef& prob, const GridSpec& spec, const RunOptions& opts) {
    validate(prob);
    if (spec.n_steps < 2) {
        throw InvalidSpecError("run: n_steps must be >= 2");
    }
    RunResult out{build_grid(spec), {}, {}, {}, 0.0, 0.0, 0.0};
    const Grid& grid = out.grid;

    const auto t_init = Clock::now();
    const OperatorSet opset = build_operator_set(grid, prob.lambda, prob.gamma, prob.singular_policy);
    auto [s0, s1] = init_levels(prob, grid, opset);
    out.init_ms = ms_since(t_init);
    out.cfl = cfl_guard(grid, grid.alpha(), opset);

    out.trajectory.reserve(static_cast<std::size_t>(grid.n_steps()) + 1);
    out.trajectory.push_back(std::move(s0));
    out.trajectory.push_back(std::move(s1));
    out.reports.reserve(static_cast<std::size_t>(grid.n_steps()));

    StepOptions step_opts{opts.solver, opts.compute_margin, opts.sylvester, opts.kronecker};
    for (int n = 1; n < grid.n_steps(); ++n) {
        const auto t_ops = Clock::now();
        const StepOperators ops = assemble_step_operators(opset, grid, n, grid.alpha(), prob.a);
        const double ops_ms = ms_since(t_ops);

        StepReport report;
        const std::size_t cur = out.trajectory.size() - 1;
        CoupledState next = step(out.trajectory[cur], out.trajectory[cur - 1], ops, opset, prob,
                                 grid, step_opts, &report);
        report.assembly_ms += ops_ms;
        out.assembly_ms += report.assembly_ms;
        out.solve_ms += report.solve_ms;

        if (!std::isfinite(report.sup_norm) || report.sup_norm > opts.blowup_cap) {
            std::ostringstream os;
            os << "run: solution blew up at step " << n << " (sup norm " << report.sup_norm
               << " > cap " << opts.blowup_cap << ")";
            throw BlowUpError(os.str(), n);
        }
        out.reports.push_back(report);
        out.trajectory.push_back(std::move(next));
    }
    return out;
}

CflReport cfl_guard(const Grid& grid, double alpha, const OperatorSet& opset) {
    double max_lambda = 0.0;
    double max_gamma = 0.0;
    for (double v : opset.lambda_j) max_lambda = std::max(max_lambda, std::abs(v));
    for (double v : opset.gamma_m) max_gamma = std::max(max_gamma, std::abs(v));
    const double c_alpha = alpha * (4.0 + grid.h() * (max_lambda + max_gamma));
    CflReport r;
    r.value = 4.0 * grid.sigma() * c_alpha;
    r.ok = r.value < 1.0;
    return r;
}

double convergence_order(std::span<const std::pair<double, double>> h_and_error) {
    if (h_and_error.size() < 2) {
        throw InvalidSpecError("convergence_order: need at least two grid levels");
    }
    for (const auto& [h, e] : h_and_error) {
        if (!(h > 0.0) || !(e >= 0.0)) {
            throw InvalidSpecError("convergence_order: h must be positive and errors non-negative");
        }
        if (e == 0.0) return std::numeric_limits<double>::infinity();
    }
    const double count = static_cast<double>(h_and_error.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [h, e] : h_and_error) {
        const double x = std::log(h);
        const double y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = count * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) {
        throw InvalidSpecError("convergence_order: all grid spacings are equal");
    }
    return (count * sxy - sx * sy) / denom;
}

}  // namespace epd
