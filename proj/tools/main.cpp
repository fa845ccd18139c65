// epd: command-line driver for the coupled Euler-Poisson-Darboux solver.

#include "epd/bench.hpp"
#include "epd/errors.hpp"
#include "epd/exact_lab.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kValidationFailed = 2;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 1) {
            throw epd::InvalidSpecError("bad J list entry '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

const char* solver_name(epd::SolverKind k) {
    return k == epd::SolverKind::sylvester ? "sylvester" : "kronecker";
}

int cmd_solve(const std::string& path) {
    const epd::RunConfig cfg = epd::load_config(path);
    const epd::ProblemDef prob = cfg.problem();
    const epd::GridSpec spec = cfg.spec_for(cfg.grid.J);

    std::vector<epd::SolverKind> kinds;
    if (cfg.solver != epd::SolverChoice::kronecker) kinds.push_back(epd::SolverKind::sylvester);
    if (cfg.solver != epd::SolverChoice::sylvester) kinds.push_back(epd::SolverKind::kronecker);

    for (epd::SolverKind kind : kinds) {
        epd::RunOptions opts;
        opts.solver = kind;
        const epd::RunResult res = epd::run(prob, spec, opts);
        const epd::DiscreteErrors e =
            epd::discrete_errors(res.trajectory, epd::manufactured_exact(), res.grid);
        double margin = INFINITY;
        for (const auto& r : res.reports) margin = std::min(margin, r.margin);
        std::printf("solver=%s J=%d h=%.6g l=%.6g steps=%d\n", solver_name(kind), res.grid.J(),
                    res.grid.h(), res.grid.l(), res.grid.n_steps());
        std::printf("  Er_U=%.6e RelEr_U=%.6e Er_V=%.6e RelEr_V=%.6e\n", e.Er_U, e.RelEr_U,
                    e.Er_V, e.RelEr_V);
        std::printf("  max_residual=%.3e min_margin=%.3e cfl=%.4g (%s)\n", res.max_residual(),
                    margin, res.cfl.value, res.cfl.ok ? "ok" : "sufficient condition not met");
        std::printf("  time_ms total=%.3f solve=%.3f assembly=%.3f init=%.3f\n", res.total_ms(),
                    res.solve_ms, res.assembly_ms, res.init_ms);
    }
    return kOk;
}

int cmd_bench(const std::string& path) {
    const epd::RunConfig cfg = epd::load_config(path);
    const auto rows = epd::run_table1(cfg);
    epd::write_csv(std::cout, rows);
    for (const auto& r : rows) {
        std::fprintf(stderr, "J=%d order=%.3f solve_II_ms=%.3f solve_I_ms=%.3f res_II=%.2e res_I=%.2e%s%s\n",
                     r.J, r.order_estimate, r.solve_II_ms, r.solve_I_ms, r.residual_II,
                     r.residual_I, r.error.empty() ? "" : " error: ", r.error.c_str());
    }
    return kOk;
}

int cmd_converge(const std::string& path, const std::string& J_text, double lo, double hi) {
    const epd::RunConfig cfg = epd::load_config(path);
    const std::vector<int> Js = J_text.empty() ? cfg.J_list : parse_int_list(J_text);
    const epd::ConvergenceReport rep = epd::run_convergence(cfg, Js);
    std::printf("J,h,l,Er,RelEr\n");
    for (const auto& r : rep.rows) {
        std::printf("%d,%.17g,%.17g,%.17g,%.17g\n", r.J, r.h, r.l, r.Er, r.RelEr);
    }
    std::printf("order=%.6f order_relative=%.6f\n", rep.order, rep.order_relative);
    const bool ok = rep.order >= lo && rep.order <= hi;
    std::printf("%s: order %s [%g, %g]\n", ok ? "PASS" : "FAIL", ok ? "in" : "outside", lo, hi);
    return ok ? kOk : kValidationFailed;
}

int cmd_series(double lambda, double nu, double K, int N, const std::string& out) {
    if (out.empty()) {
        epd::emit_series_table(lambda, nu, K, N, std::cout);
    } else {
        epd::emit_series_table(lambda, nu, K, N, out);
    }
    return kOk;
}

struct Check {
    std::string name;
    bool ok;
    std::string detail;
};

epd::CoupledProblem random_coupled(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rnd = [&](int rows, int cols) {
        epd::Matrix M(rows, cols);
        for (int i = 0; i < M.size(); ++i) M.data()[i] = u(rng);
        return M;
    };
    epd::Matrix W = rnd(n, n) * 0.2 + 2.0 * epd::Matrix::Identity(n, n);
    return {W, W.transpose(), rnd(n, n) * 0.3, rnd(n, n) * 0.3, rnd(n, n), rnd(n, n)};
}

int cmd_validate(const std::string& path) {
    const epd::RunConfig cfg = epd::load_config(path);
    std::vector<Check> checks;
    auto fmt = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.3e", v);
        return std::string(b);
    };

    const double cert = epd::forcing_certificate(cfg.params);
    checks.push_back({"forcing certificate <= 1e-5", cert <= 1e-5, fmt(cert)});

    {
        const auto s = epd::exact::frobenius_coefficients(0.5, 0.0, 1.0, 40);
        double worst = 0.0;
        double fact = 1.0;
        for (int k = 0; 2 * k <= 40; ++k) {
            if (k > 0) fact *= k;
            const double expect = std::pow(0.25, k) / (fact * fact);
            worst = std::max(worst, std::abs(s.coeffs[static_cast<std::size_t>(2 * k)] - expect) / expect);
        }
        checks.push_back({"Bessel I0 coefficients", worst <= 1e-14, fmt(worst)});
        std::vector<double> xs;
        for (int i = 1; i <= 20; ++i) xs.push_back(i / 20.0);
        const double r = epd::exact::ode_residual(s, epd::exact::RhsMode::eigen, xs);
        checks.push_back({"I0 series ODE residual <= 1e-8", r <= 1e-8, fmt(r)});
    }

    {
        std::mt19937_64 rng(20240613);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = random_coupled(rng, 2 + trial % 7);
            const auto a = epd::solve_coupled(p);
            const auto b = epd::kronecker_solve(p);
            const double scale = std::max(b.X.norm() + b.Y.norm(), 1e-300);
            worst = std::max(worst, ((a.X - b.X).norm() + (a.Y - b.Y).norm()) / scale);
        }
        checks.push_back({"sylvester vs kronecker, random systems", worst <= 1e-10, fmt(worst)});
    }

    {
        epd::RunConfig small = cfg;
        small.grid.J = 4;
        const epd::ProblemDef prob = small.problem();
        const epd::GridSpec spec = small.spec_for(4);
        epd::RunOptions a;
        a.solver = epd::SolverKind::sylvester;
        epd::RunOptions b;
        b.solver = epd::SolverKind::kronecker;
        const auto ra = epd::run(prob, spec, a);
        const auto rb = epd::run(prob, spec, b);
        double worst = 0.0;
        for (std::size_t n = 0; n < ra.trajectory.size(); ++n) {
            const auto& x = ra.trajectory[n];
            const auto& y = rb.trajectory[n];
            const double scale = std::max(y.U.norm() + y.V.norm(), 1e-300);
            worst = std::max(worst, ((x.U - y.U).norm() + (x.V - y.V).norm()) / scale);
        }
        checks.push_back({"J=4 trajectories agree", worst <= 1e-9, fmt(worst)});
    }

    bool all = true;
    for (const auto& c : checks) {
        std::printf("%s  %s (%s)\n", c.ok ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
        all = all && c.ok;
    }
    return all ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coupled Euler-Poisson-Darboux solver: runs, benchmarks and oracles"};
    app.require_subcommand(1);

    std::string config;
    auto* solve = app.add_subcommand("solve", "Run one simulation and print errors and timings");
    solve->add_option("config", config, "Config file")->required();

    auto* bench = app.add_subcommand("bench", "Accuracy and timing table as CSV");
    bench->add_option("config", config, "Config file")->required();

    std::string J_text;
    double lo = 1.5;
    double hi = 2.5;
    auto* converge = app.add_subcommand("converge", "Grid refinement study and fitted order");
    converge->add_option("config", config, "Config file")->required();
    converge->add_option("--J", J_text, "Comma separated resolutions (default: config J)");
    converge->add_option("--min-order", lo, "Lower bound for a passing order");
    converge->add_option("--max-order", hi, "Upper bound for a passing order");

    double lambda = 0.5;
    double nu = 0.0;
    double K = 1.0;
    int N = 20;
    std::string out;
    auto* series = app.add_subcommand("series", "Frobenius coefficient table");
    series->add_option("--lambda", lambda, "Singular coefficient")->required();
    series->add_option("--nu", nu, "Indicial root")->required();
    series->add_option("--K", K, "Separation constant")->required();
    series->add_option("--N", N, "Truncation order")->required();
    series->add_option("--out", out, "Write to file instead of stdout");

    auto* validate = app.add_subcommand("validate", "Run the built-in oracles");
    validate->add_option("config", config, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    try {
        if (*solve) return cmd_solve(config);
        if (*bench) return cmd_bench(config);
        if (*converge) return cmd_converge(config, J_text, lo, hi);
        if (*series) return cmd_series(lambda, nu, K, N, out);
        if (*validate) return cmd_validate(config);
    } catch (const epd::ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kError;
    }
    return kError;
}
