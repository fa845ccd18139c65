#include "epd/errors.hpp"
#include "epd/manufactured.hpp"
#include "epd/stepper.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace epd;

namespace {

GridSpec spec_of(int J, double L = 10.0, int n_steps = 2) {
    GridSpec s;
    s.L0 = -L;
    s.L1 = L;
    s.J = J;
    s.n_steps = n_steps;
    return s;
}

Field rnd(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1, 1);
    Field X(n, n);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
    return X;
}

ProblemDef zero_problem() {
    ProblemDef p;
    const SpaceTimeFn zero = [](double, double, double) { return 0.0; };
    p.exact_seed = ExactSeed{zero, zero};
    return p;
}

// Next level from the pointwise difference equations, written node by node with
// ghost reflection for the Neumann condition and solved as one dense system.
CoupledState reference_step(const CoupledState& cur, const CoupledState& prev, const ProblemDef& prob,
                            const Grid& g, int n, double alpha) {
    const int N = g.size();
    const double h = g.h(), l = g.l(), sigma = g.sigma();
    const double lan = l * prob.a / g.t(n);
    auto at = [N](const Field& F, int j, int m) {
        j = j < 0 ? -j : (j >= N ? 2 * (N - 1) - j : j);
        m = m < 0 ? -m : (m >= N ? 2 * (N - 1) - m : m);
        return F(j, m);
    };
    auto lap = [&](const Field& F) {
        Field out(N, N);
        for (int j = 0; j < N; ++j)
            for (int m = 0; m < N; ++m)
                out(j, m) = at(F, j + 1, m) + at(F, j - 1, m) + at(F, j, m + 1) + at(F, j, m - 1) - 4 * F(j, m);
        return out;
    };
    auto grad = [&](const Field& F) {
        Field out = Field::Zero(N, N);
        for (int j = 0; j < N; ++j)
            for (int m = 0; m < N; ++m) {
                double v = 0.0;
                if (j > 0 && j < N - 1) {
                    const double x = g.x(j);
                    if (std::abs(x) <= g.sing_eps())
                        v += 2 * prob.lambda * (F(j + 1, m) - 2 * F(j, m) + F(j - 1, m)) / h;
                    else
                        v += prob.lambda / x * (F(j + 1, m) - F(j - 1, m));
                }
                if (m > 0 && m < N - 1) {
                    const double y = g.y(m);
                    if (std::abs(y) <= g.sing_eps())
                        v += 2 * prob.gamma * (F(j, m + 1) - 2 * F(j, m) + F(j, m - 1)) / h;
                    else
                        v += prob.gamma / y * (F(j, m + 1) - F(j, m - 1));
                }
                out(j, m) = sigma * h * v;
            }
        return out;
    };
    auto lhs = [&](const Field& X, const Field& Y) { return Field(X - alpha * sigma * lap(X) + lan * Y - alpha * grad(Y)); };
    auto source = [&](const Field& X, const Field& Y, double power, bool first, double t) {
        Field s = Field::Zero(N, N);
        if (prob.nonlinear) s += (first ? X : Y).array().abs().pow(power - 1.0).matrix().cwiseProduct(first ? Y : X);
        if (prob.forcing) {
            const SpaceTimeFn& f = first ? prob.forcing->G1 : prob.forcing->G2;
            for (int j = 0; j < N; ++j)
                for (int m = 0; m < N; ++m) s(j, m) += f(g.x(j), g.y(m), t);
        }
        return s;
    };
    auto rhs = [&](const Field& Xn, const Field& Xp, const Field& Yn, const Field& Yp, bool first) {
        const double pw = first ? prob.p : prob.q;
        const Field Sn = first ? source(Xn, Yn, pw, true, g.t(n)) : source(Yn, Xn, pw, false, g.t(n));
        const Field Sp = first ? source(Xp, Yp, pw, true, g.t(n - 1)) : source(Yp, Xp, pw, false, g.t(n - 1));
        return Field(2 * Xn - Xp + (1 - 2 * alpha) * sigma * lap(Xn) + alpha * sigma * lap(Xp) +
                     (1 - 2 * alpha) * grad(Yn) + alpha * grad(Yp) + lan * Yp + 0.5 * l * l * (Sn + Sp));
    };

    const int M = N * N;
    Matrix K(2 * M, 2 * M);
    for (int c = 0; c < 2 * M; ++c) {
        Field X = Field::Zero(N, N), Y = Field::Zero(N, N);
        (c < M ? X : Y).data()[c % M] = 1.0;
        const Field r1 = lhs(X, Y), r2 = lhs(Y, X);
        K.col(c) << Eigen::Map<const Eigen::VectorXd>(r1.data(), M), Eigen::Map<const Eigen::VectorXd>(r2.data(), M);
    }
    // For the u equation X = U, Y = V; for v the roles swap and the source uses H.
    const Field b1 = rhs(cur.U, prev.U, cur.V, prev.V, true);
    const Field b2 = rhs(cur.V, prev.V, cur.U, prev.U, false);
    Eigen::VectorXd b(2 * M);
    b << Eigen::Map<const Eigen::VectorXd>(b1.data(), M), Eigen::Map<const Eigen::VectorXd>(b2.data(), M);
    const Eigen::VectorXd z = K.fullPivLu().solve(b);
    CoupledState out{Field(N, N), Field(N, N), n + 1};
    Eigen::Map<Eigen::VectorXd>(out.U.data(), M) = z.head(M);
    Eigen::Map<Eigen::VectorXd>(out.V.data(), M) = z.tail(M);
    return out;
}

}  // namespace

TEST(Nonlinear, Examples) {
    const Field Z = Field::Zero(3, 3);
    const Field Y = Field::Constant(3, 3, 2.0);
    EXPECT_EQ(nonlinear_G(Z, Y, 1.5), Z);
    EXPECT_EQ(nonlinear_G(Field::Constant(3, 3, -3.0), Y, 2.0), Field::Constant(3, 3, 6.0));
    EXPECT_EQ(nonlinear_H(Y, Field::Constant(3, 3, -3.0), 2.0), Field::Constant(3, 3, 6.0));

    const Grid g = build_grid(spec_of(24));
    const Field u = sample([](double x, double y) { return std::exp(-(x * x + y * y)); }, g);
    const Field gp = sample([](double x, double y) { return std::exp(-1.5 * (x * x + y * y)); }, g);
    EXPECT_LE((nonlinear_G(u, u, 1.5) - gp).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Validate, Invariants) {
    ProblemDef p = zero_problem();
    EXPECT_NO_THROW(validate(p));
    p.p = 1.0;
    EXPECT_THROW(validate(p), InvalidSpecError);
    p = zero_problem();
    p.initial = InitialData{};
    EXPECT_THROW(validate(p), InvalidSpecError);
    p = ProblemDef{};
    EXPECT_THROW(validate(p), InvalidSpecError);
}

TEST(InitLevels, ExactMode) {
    const Grid g = build_grid(spec_of(24));
    const ProblemDef prob = manufactured_problem({}, SeedMode::exact);
    const OperatorSet ops = build_operator_set(g, prob.lambda, prob.gamma);
    const auto [s0, s1] = init_levels(prob, g, ops);
    EXPECT_NEAR(s0.U(12, 12), 0.726149, 1e-6);
    EXPECT_EQ(s0.level, 0);
    EXPECT_EQ(s1.level, 1);
    const double t1 = std::pow(g.h(), 1.5);
    EXPECT_DOUBLE_EQ(s1.U(12, 12), gaussian(-0.4, -0.4, t1));
}

TEST(InitLevels, TaylorZeroData) {
    GridSpec s = spec_of(9);
    s.t0 = 0.5;
    const Grid g = build_grid(s);
    ProblemDef prob;
    const SpaceFn zero = [](double, double) { return 0.0; };
    prob.initial = InitialData{zero, zero, zero, zero};
    const auto [s0, s1] = init_levels(prob, g, build_operator_set(g, prob.lambda, prob.gamma));
    EXPECT_EQ(s0.U.norm() + s0.V.norm() + s1.U.norm() + s1.V.norm(), 0.0);
}

TEST(InitLevels, TaylorAtOriginNeedsRegularisation) {
    const Grid g = build_grid(spec_of(9));
    ProblemDef prob = manufactured_problem({}, SeedMode::taylor, 0.0);
    prob.regularize_t0 = false;
    EXPECT_THROW(init_levels(prob, g, build_operator_set(g, prob.lambda, prob.gamma)), SeedingError);
    prob.regularize_t0 = true;
    EXPECT_NO_THROW(init_levels(prob, g, build_operator_set(g, prob.lambda, prob.gamma)));
    prob.a = 0.5;
    EXPECT_THROW(init_levels(prob, g, build_operator_set(g, prob.lambda, prob.gamma)), SeedingError);
}

TEST(InitLevels, TaylorOrders) {
    // Second-order start is far closer to the exact level 1 than the first-order one.
    for (double t0 : {0.0, 0.7}) {
        GridSpec s = spec_of(99, 4.0);
        s.t0 = t0;
        s.step_rule = StepRule::independent;
        s.l = 0.01;
        const Grid g = build_grid(s);
        const auto exact1 = sample([](double x, double y, double t) { return gaussian(x, y, t); }, g, g.t(1));
        double err[2];
        int k = 0;
        for (SeedMode mode : {SeedMode::taylor, SeedMode::taylor1}) {
            const ProblemDef prob = manufactured_problem({}, mode, t0);
            const auto [s0, s1] = init_levels(prob, g, build_operator_set(g, prob.lambda, prob.gamma));
            err[k++] = (s1.U - exact1).cwiseAbs().maxCoeff();
        }
        EXPECT_LT(err[0], 0.1 * err[1]) << "t0=" << t0;
    }
}

TEST(AssembleRhs, ZeroHistory) {
    const Grid g = build_grid(spec_of(9));
    ProblemDef prob = zero_problem();
    const OperatorSet ops = build_operator_set(g, 0.25, 0.25);
    const StepOperators so = assemble_step_operators(ops, g, 1, 0.25, 2.5);
    const Field Z = Field::Zero(11, 11);
    const auto [C1, C2] = assemble_rhs({Z, Z, 1}, {Z, Z, 0}, so, ops, prob, g);
    EXPECT_EQ(C1.norm() + C2.norm(), 0.0);
}

TEST(AssembleRhs, HalfAlphaDropsGradientHistory) {
    std::mt19937_64 rng(1);
    const Grid g = build_grid(spec_of(9));
    ProblemDef prob = zero_problem();
    prob.nonlinear = false;
    const OperatorSet ops = build_operator_set(g, 0.25, 0.25);
    const StepOperators so = assemble_step_operators(ops, g, 1, 0.5, 2.5);
    const Field U = rnd(rng, 11), V = rnd(rng, 11), Up = rnd(rng, 11), Vp = rnd(rng, 11);
    const auto a = assemble_rhs({U, V, 1}, {Up, Vp, 0}, so, ops, prob, g);
    const auto b = assemble_rhs({U, V + rnd(rng, 11), 1}, {Up, Vp, 0}, so, ops, prob, g);
    EXPECT_LE((a.first - b.first).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AssembleRhs, DegenerateSingleNode) {
    GridSpec s = spec_of(1);
    const Grid g = build_grid(s);
    ProblemDef prob = zero_problem();
    prob.a = 0.0;
    prob.lambda = prob.gamma = 0.0;
    prob.nonlinear = false;
    const OperatorSet ops = build_operator_set(g, 0.0, 0.0);
    const StepOperators so = assemble_step_operators(ops, g, 1, 0.0, 0.0);
    const Field Un = Field::Constant(3, 3, 1.75), Up = Field::Constant(3, 3, -0.5);
    const auto [C1, C2] = assemble_rhs({Un, Un, 1}, {Up, Up, 0}, so, ops, prob, g);
    EXPECT_LE((C1 - (2 * Un - Up)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((C2 - (2 * Un - Up)).cwiseAbs().maxCoeff(), 1e-14);
}

class ReferenceStep : public ::testing::TestWithParam<std::tuple<int, double, bool>> {};

TEST_P(ReferenceStep, MatchesPointwiseScheme) {
    const auto [J, alpha, nonlinear] = GetParam();
    std::mt19937_64 rng(static_cast<unsigned>(J * 100 + alpha * 10));
    GridSpec s = spec_of(J, 3.0, 3);
    s.t0 = 0.3;
    s.alpha = alpha;
    const Grid g = build_grid(s);
    ManufacturedParams mp;
    mp.gamma = 0.4;
    ProblemDef prob = manufactured_problem(mp, SeedMode::exact);
    prob.nonlinear = nonlinear;
    const OperatorSet ops = build_operator_set(g, prob.lambda, prob.gamma);
    const int N = g.size();
    const CoupledState prev{rnd(rng, N), rnd(rng, N), 1}, cur{rnd(rng, N), rnd(rng, N), 2};
    const StepOperators so = assemble_step_operators(ops, g, 2, alpha, prob.a);
    for (SolverKind kind : {SolverKind::sylvester, SolverKind::kronecker}) {
        StepOptions opt;
        opt.solver = kind;
        StepReport rep;
        const CoupledState next = step(cur, prev, so, ops, prob, g, opt, &rep);
        const CoupledState ref = reference_step(cur, prev, prob, g, 2, alpha);
        const double scale = ref.U.cwiseAbs().maxCoeff() + ref.V.cwiseAbs().maxCoeff();
        EXPECT_LE((next.U - ref.U).cwiseAbs().maxCoeff(), 1e-10 * scale);
        EXPECT_LE((next.V - ref.V).cwiseAbs().maxCoeff(), 1e-10 * scale);
        EXPECT_EQ(next.level, 3);
        EXPECT_LE(rep.residual_coupled, 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(Grids, ReferenceStep,
                         ::testing::Values(std::make_tuple(4, 0.25, true), std::make_tuple(5, 0.25, true),
                                           std::make_tuple(5, 0.0, false), std::make_tuple(6, 0.5, true),
                                           std::make_tuple(7, 0.1, false)));

TEST(Step, ZeroStateStaysZero) {
    const Grid g = build_grid(spec_of(9));
    const ProblemDef prob = zero_problem();
    const OperatorSet ops = build_operator_set(g, prob.lambda, prob.gamma);
    const Field Z = Field::Zero(11, 11);
    const CoupledState next = step({Z, Z, 1}, {Z, Z, 0}, assemble_step_operators(ops, g, 1, 0.25, 2.5), ops, prob, g);
    EXPECT_EQ(next.U.norm() + next.V.norm(), 0.0);
}

TEST(Step, ManufacturedSingleStepJ24) {
    const Grid g = build_grid(spec_of(24));
    const ProblemDef prob = manufactured_problem({}, SeedMode::exact);
    const OperatorSet ops = build_operator_set(g, prob.lambda, prob.gamma);
    const auto [s0, s1] = init_levels(prob, g, ops);
    const CoupledState s2 = step(s1, s0, assemble_step_operators(ops, g, 1, 0.25, prob.a), ops, prob, g);
    const Field exact = sample([](double x, double y, double t) { return gaussian(x, y, t); }, g, g.t(2));
    // Regression value 0.158 at the time of writing.
    EXPECT_LT(l2_norm(s2.U - exact), 0.2);
    EXPECT_GT(l2_norm(s2.U - exact), 0.1);
}

TEST(Step, LinearMatchesKronecker) {
    const Grid g = build_grid(spec_of(9));
    ProblemDef prob = manufactured_problem({}, SeedMode::exact);
    prob.nonlinear = false;
    prob.forcing.reset();
    const OperatorSet ops = build_operator_set(g, prob.lambda, prob.gamma);
    const auto [s0, s1] = init_levels(prob, g, ops);
    const StepOperators so = assemble_step_operators(ops, g, 1, 0.25, prob.a);
    StepOptions k;
    k.solver = SolverKind::kronecker;
    const CoupledState a = step(s1, s0, so, ops, prob, g);
    const CoupledState b = step(s1, s0, so, ops, prob, g, k);
    EXPECT_LE((a.U - b.U).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((a.V - b.V).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Run, ZeroDataGivesZeroTrajectory) {
    const RunResult r = run(zero_problem(), spec_of(9, 10.0, 10));
    ASSERT_EQ(r.trajectory.size(), 11u);
    for (const auto& s : r.trajectory) {
        EXPECT_EQ(s.U.cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(s.V.cwiseAbs().maxCoeff(), 0.0);
    }
    EXPECT_EQ(r.reports.size(), 9u);
}

TEST(Run, SolverIndependence) {
    const ProblemDef prob = manufactured_problem({}, SeedMode::exact);
    GridSpec s = spec_of(24, 10.0, 4);
    RunOptions k;
    k.solver = SolverKind::kronecker;
    const RunResult a = run(prob, s);
    const RunResult b = run(prob, s, k);
    for (std::size_t n = 0; n < a.trajectory.size(); ++n) {
        EXPECT_LE((a.trajectory[n].U - b.trajectory[n].U).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_LE((a.trajectory[n].V - b.trajectory[n].V).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Run, SymmetricVariantKeepsUEqualV) {
    ManufacturedParams mp;
    mp.q = mp.p;
    const ProblemDef prob = manufactured_problem(mp, SeedMode::exact);
    const RunResult r = run(prob, spec_of(24, 10.0, 6));
    for (const auto& s : r.trajectory) EXPECT_LE((s.U - s.V).cwiseAbs().maxCoeff(), 1e-9);
}

// Equal u and v data: the cross-coupled damping anti-damps u - v, which must stay at rest.
TEST(Run, StabilityUnderGuard) {
    GridSpec s = spec_of(24, 10.0, 200);
    s.t0 = 1.0;
    s.step_rule = StepRule::independent;
    s.l = 0.2;
    ProblemDef prob;
    prob.nonlinear = false;
    prob.initial = InitialData{[](double x, double y) { return std::exp(-(x * x + y * y)); },
                               [](double, double) { return 0.0; },
                               [](double x, double y) { return std::exp(-(x * x + y * y)); },
                               [](double, double) { return 0.0; }};
    RunOptions opts;
    opts.compute_margin = false;
    const RunResult r = run(prob, s, opts);
    EXPECT_TRUE(r.cfl.ok);
    EXPECT_LT(r.cfl.value, 1.0);
    auto pair = [](const CoupledState& c) { return std::sqrt(c.U.squaredNorm() + c.V.squaredNorm()); };
    const double start = std::max(pair(r.trajectory[0]), pair(r.trajectory[1]));
    double sup = 0.0;
    for (const auto& c : r.trajectory) sup = std::max(sup, pair(c));
    EXPECT_LE(sup, 10 * start);
}

TEST(Run, BlowUpIsReported) {
    GridSpec s = spec_of(9, 10.0, 400);
    s.alpha = 0.0;
    s.step_rule = StepRule::independent;
    s.l = 4.0;  // sigma = 4, far beyond the explicit limit
    s.t0 = 1.0;
    ProblemDef prob;
    prob.a = 0.0;
    prob.lambda = prob.gamma = 0.0;
    prob.nonlinear = false;
    std::mt19937_64 rng(3);
    const Field noise = rnd(rng, 11);
    const Grid g = build_grid(s);
    auto idx = [&g](double x) { return static_cast<int>(std::lround((x - g.x(0)) / g.h())); };
    prob.initial = InitialData{[&](double x, double y) { return noise(idx(x), idx(y)); },
                               [](double, double) { return 0.0; },
                               [](double, double) { return 0.0; },
                               [](double, double) { return 0.0; }};
    RunOptions opts;
    opts.blowup_cap = 1e3;
    try {
        run(prob, s, opts);
        FAIL() << "expected BlowUpError";
    } catch (const BlowUpError& e) {
        EXPECT_GT(e.step(), 0);
    }
}

TEST(Run, NeedsTwoSteps) {
    EXPECT_THROW(run(zero_problem(), spec_of(4, 10.0, 1)), InvalidSpecError);
}

TEST(Cfl, Examples) {
    const Grid g = build_grid(spec_of(24));
    const OperatorSet ops = build_operator_set(g, 0.25, 0.25);
    const CflReport r = cfl_guard(g, 0.25, ops);
    EXPECT_NEAR(r.value, 4.0, 1e-12);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(cfl_guard(g, 0.0, ops).value, 0.0);
    EXPECT_TRUE(cfl_guard(g, 0.0, ops).ok);

    GridSpec s = spec_of(9);
    s.step_rule = StepRule::independent;
    s.l = std::sqrt(0.1) * 2.0;  // h = 2, sigma = 0.1
    const Grid g2 = build_grid(s);
    const CflReport r2 = cfl_guard(g2, 0.25, build_operator_set(g2, 0.0, 0.0));
    EXPECT_NEAR(r2.value, 0.4, 1e-12);
    EXPECT_TRUE(r2.ok);
}

TEST(ConvergenceOrder, Synthetic) {
    std::vector<std::pair<double, double>> quad, lin;
    for (double h : {0.8, 0.4, 0.2, 0.1}) {
        quad.emplace_back(h, h * h);
        lin.emplace_back(h, 3 * h);
    }
    EXPECT_NEAR(convergence_order(quad), 2.0, 1e-12);
    EXPECT_NEAR(convergence_order(lin), 1.0, 1e-12);
    quad[1].second = 0.0;
    EXPECT_EQ(convergence_order(quad), std::numeric_limits<double>::infinity());
    EXPECT_THROW(convergence_order(std::vector<std::pair<double, double>>{{0.1, 1.0}}), InvalidSpecError);
    EXPECT_THROW(convergence_order(std::vector<std::pair<double, double>>{{0.1, 1.0}, {0.1, 2.0}}),
                 InvalidSpecError);
}
