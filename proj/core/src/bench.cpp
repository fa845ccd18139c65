#include "epd/bench.hpp"

#include "epd/errors.hpp"
#include "epd/exact_lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace epd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(std::string_view v, std::string_view key, int line) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ParseError("config line " + std::to_string(line) + ": '" + std::string(key) +
                             "' expects a number, got '" + std::string(v) + "'",
                         line);
    }
    return out;
}

int to_int(std::string_view v, std::string_view key, int line) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ParseError("config line " + std::to_string(line) + ": '" + std::string(key) +
                             "' expects an integer, got '" + std::string(v) + "'",
                         line);
    }
    return out;
}

template <class E>
E to_enum(std::string_view v, std::string_view key, int line,
          std::initializer_list<std::pair<std::string_view, E>> choices) {
    for (const auto& [name, value] : choices) {
        if (v == name) return value;
    }
    std::string names;
    for (const auto& c : choices) names += (names.empty() ? "" : ", ") + std::string(c.first);
    throw ParseError("config line " + std::to_string(line) + ": '" + std::string(key) +
                         "' must be one of " + names + ", got '" + std::string(v) + "'",
                     line);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct PathResult {
    double Er = kNaN;
    double RelEr = kNaN;
    double time_ms = kNaN;
    double solve_ms = kNaN;
    double residual = kNaN;
};

PathResult time_path(const ProblemDef& prob, const GridSpec& spec, SolverKind solver,
                     int repeats) {
    RunOptions opts;
    opts.solver = solver;
    opts.compute_margin = false;
    std::vector<double> totals;
    std::vector<double> solves;
    PathResult out;
    for (int r = 0; r < repeats; ++r) {
        RunResult res = run(prob, spec, opts);
        totals.push_back(res.total_ms());
        solves.push_back(res.solve_ms);
        if (r == 0) {
            const DiscreteErrors e = discrete_errors(res.trajectory, manufactured_exact(), res.grid);
            out.Er = e.Er_U;
            out.RelEr = e.RelEr_U;
            out.residual = res.max_residual();
        }
    }
    out.time_ms = median(totals);
    out.solve_ms = median(solves);
    return out;
}

}  // namespace

GridSpec RunConfig::spec_for(int J) const {
    GridSpec s = grid;
    s.J = J;
    const double h = (s.L1 - s.L0) / (J + 1);
    const double l = s.step_rule == StepRule::coupled ? h * std::sqrt(h) : s.l;
    s.n_steps = steps_to_reach(s.t0, T, l);
    return s;
}

ProblemDef RunConfig::problem() const {
    ProblemDef p = manufactured_problem(params, seed_mode, grid.t0);
    p.singular_policy = singular_policy;
    return p;
}

RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::map<std::string, int, std::less<>> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'",
                             line_no);
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw ParseError("config line " + std::to_string(line_no) + ": empty key or value",
                             line_no);
        }
        if (const auto it = seen.find(key); it != seen.end()) {
            throw ParseError("config line " + std::to_string(line_no) + ": duplicate key '" +
                                 std::string(key) + "' (first set on line " +
                                 std::to_string(it->second) + ")",
                             line_no);
        }
        seen.emplace(std::string(key), line_no);

        if (key == "J") {
            std::string_view rest = val;
            while (true) {
                const auto comma = rest.find(',');
                const int J = to_int(trim(rest.substr(0, comma)), key, line_no);
                if (J < 1) {
                    throw ParseError("config line " + std::to_string(line_no) +
                                         ": J must be positive",
                                     line_no);
                }
                cfg.J_list.push_back(J);
                if (comma == std::string_view::npos) break;
                rest = rest.substr(comma + 1);
            }
        } else if (key == "L0") {
            cfg.grid.L0 = to_double(val, key, line_no);
        } else if (key == "L1") {
            cfg.grid.L1 = to_double(val, key, line_no);
        } else if (key == "t0") {
            cfg.grid.t0 = to_double(val, key, line_no);
        } else if (key == "T") {
            cfg.T = to_double(val, key, line_no);
        } else if (key == "alpha") {
            cfg.grid.alpha = to_double(val, key, line_no);
        } else if (key == "a") {
            cfg.params.a = to_double(val, key, line_no);
        } else if (key == "lambda") {
            cfg.params.lambda = to_double(val, key, line_no);
        } else if (key == "gamma") {
            cfg.params.gamma = to_double(val, key, line_no);
        } else if (key == "p") {
            cfg.params.p = to_double(val, key, line_no);
        } else if (key == "q") {
            cfg.params.q = to_double(val, key, line_no);
        } else if (key == "l") {
            cfg.grid.l = to_double(val, key, line_no);
        } else if (key == "sing_eps") {
            cfg.grid.sing_eps = to_double(val, key, line_no);
        } else if (key == "repeats") {
            cfg.repeats = to_int(val, key, line_no);
            if (cfg.repeats < 1) {
                throw ParseError("config line " + std::to_string(line_no) +
                                     ": repeats must be >= 1",
                                 line_no);
            }
        } else if (key == "step_rule") {
            cfg.grid.step_rule = to_enum<StepRule>(
                val, key, line_no,
                {{"coupled", StepRule::coupled}, {"independent", StepRule::independent}});
        } else if (key == "solver") {
            cfg.solver = to_enum<SolverChoice>(val, key, line_no,
                                               {{"sylvester", SolverChoice::sylvester},
                                                {"kronecker", SolverChoice::kronecker},
                                                {"both", SolverChoice::both}});
        } else if (key == "seed_mode") {
            cfg.seed_mode = to_enum<SeedMode>(
                val, key, line_no,
                {{"exact", SeedMode::exact}, {"taylor", SeedMode::taylor},
                 {"taylor1", SeedMode::taylor1}});
        } else if (key == "singular_policy") {
            cfg.singular_policy = to_enum<SingularPolicy>(
                val, key, line_no,
                {{"limit", SingularPolicy::limit}, {"zero", SingularPolicy::zero}});
        } else if (key == "out_csv") {
            cfg.out_csv = std::string(val);
        } else {
            throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" +
                                 std::string(key) + "'",
                             line_no);
        }
    }

    if (cfg.J_list.empty()) {
        throw ParseError("config: missing mandatory key 'J'", 0);
    }
    cfg.grid.J = cfg.J_list.front();
    if (cfg.grid.step_rule == StepRule::independent && !(cfg.grid.l > 0.0)) {
        throw ParseError("config: step_rule = independent needs a positive 'l'", 0);
    }
    if (!(cfg.grid.L1 > cfg.grid.L0)) {
        throw ParseError("config: L1 must exceed L0", 0);
    }
    if (!(cfg.T > cfg.grid.t0)) {
        throw ParseError("config: T must exceed t0", 0);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config file '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void write_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << kCsvHeader << '\n';
    for (const BenchRow& r : rows) {
        os << r.J;
        for (double v : {r.h, r.l, r.Er_II, r.RelEr_II, r.Er_I, r.RelEr_I, r.time_II_ms,
                         r.time_I_ms, r.ratio}) {
            os << ',' << fmt17(v);
        }
        os << '\n';
    }
}

std::vector<BenchRow> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != kCsvHeader) {
        throw ParseError("csv: missing or unexpected header", 1);
    }
    std::vector<BenchRow> rows;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10) {
            throw ParseError("csv line " + std::to_string(line_no) + ": expected 10 columns",
                             line_no);
        }
        auto num = [&](std::size_t i) {
            char* end = nullptr;
            const double v = std::strtod(cells[i].c_str(), &end);
            if (end == cells[i].c_str() || *end != '\0') {
                throw ParseError("csv line " + std::to_string(line_no) + ": bad number '" +
                                     cells[i] + "'",
                                 line_no);
            }
            return v;
        };
        BenchRow r;
        r.J = to_int(trim(cells[0]), "J", line_no);
        r.h = num(1);
        r.l = num(2);
        r.Er_II = num(3);
        r.RelEr_II = num(4);
        r.Er_I = num(5);
        r.RelEr_I = num(6);
        r.time_II_ms = num(7);
        r.time_I_ms = num(8);
        r.ratio = num(9);
        r.order_estimate = kNaN;
        rows.push_back(r);
    }
    return rows;
}

double forcing_certificate(const ManufacturedParams& params) {
    const ProblemDef prob = manufactured_problem(params, SeedMode::exact);
    const SpaceTimeFn u = [](double x, double y, double t) { return gaussian(x, y, t); };
    const auto box = exact::sample_box(-1.9, 2.1, -1.9, 2.1, 0.2, 1.0, 5);
    return exact::pde_residual(u, u, prob, box);
}

std::vector<BenchRow> run_table1(const RunConfig& config) {
    const double cert = forcing_certificate(config.params);
    if (!(cert <= 1e-5)) {
        throw CertificateError("run_table1: forcing certificate " + fmt17(cert) +
                               " exceeds 1e-5");
    }
    const ProblemDef prob = config.problem();
    std::vector<BenchRow> rows;
    std::vector<std::pair<double, double>> fit;

    for (int J : config.J_list) {
        const GridSpec spec = config.spec_for(J);
        const Grid grid = build_grid(spec);
        BenchRow row;
        row.J = J;
        row.h = grid.h();
        row.l = grid.l();

        auto attempt = [&](SolverKind kind, const char* label) {
            try {
                return time_path(prob, spec, kind, config.repeats);
            } catch (const Error& e) {
                row.error += (row.error.empty() ? "" : "; ") + std::string(label) + ": " + e.what();
                return PathResult{};
            }
        };
        PathResult II;
        PathResult I;
        if (config.solver != SolverChoice::kronecker) II = attempt(SolverKind::sylvester, "II");
        if (config.solver != SolverChoice::sylvester) I = attempt(SolverKind::kronecker, "I");

        row.Er_II = II.Er;
        row.RelEr_II = II.RelEr;
        row.time_II_ms = II.time_ms;
        row.solve_II_ms = II.solve_ms;
        row.residual_II = II.residual;
        row.Er_I = I.Er;
        row.RelEr_I = I.RelEr;
        row.time_I_ms = I.time_ms;
        row.solve_I_ms = I.solve_ms;
        row.residual_I = I.residual;
        row.ratio = I.time_ms / II.time_ms;

        const double Er = std::isfinite(row.Er_II) ? row.Er_II : row.Er_I;
        if (std::isfinite(Er) && Er >= 0.0) fit.emplace_back(row.h, Er);
        row.order_estimate = kNaN;
        if (fit.size() >= 2) {
            try {
                row.order_estimate = convergence_order(fit);
            } catch (const InvalidSpecError&) {
            }
        }
        rows.push_back(std::move(row));
    }

    if (!config.out_csv.empty()) {
        std::ofstream out(config.out_csv);
        if (!out) {
            throw Error("run_table1: cannot write '" + config.out_csv + "'");
        }
        write_csv(out, rows);
    }
    return rows;
}

ConvergenceReport run_convergence(const RunConfig& config, const std::vector<int>& J_list) {
    return run_convergence(config.problem(), manufactured_exact(), config, J_list);
}

ConvergenceReport run_convergence(const ProblemDef& prob, const ExactPairFn& exact,
                                  const RunConfig& config, const std::vector<int>& J_list) {
    if (J_list.size() < 3) {
        throw InvalidSpecError("run_convergence: need at least three resolutions");
    }
    RunOptions opts;
    opts.solver =
        config.solver == SolverChoice::kronecker ? SolverKind::kronecker : SolverKind::sylvester;
    opts.compute_margin = false;

    ConvergenceReport rep;
    std::vector<std::pair<double, double>> abs_fit;
    std::vector<std::pair<double, double>> rel_fit;
    bool relative_ok = true;
    for (int J : J_list) {
        const RunResult res = run(prob, config.spec_for(J), opts);
        DiscreteErrors e;
        try {
            e = discrete_errors(res.trajectory, exact, res.grid);
        } catch (const DegenerateNormError&) {
            e = discrete_errors(res.trajectory, exact, res.grid, false);
            relative_ok = false;
        }
        rep.rows.push_back({J, res.grid.h(), res.grid.l(), e.Er_U, e.RelEr_U});
        abs_fit.emplace_back(res.grid.h(), e.Er_U);
        rel_fit.emplace_back(res.grid.h(), e.RelEr_U);
    }
    rep.order = convergence_order(abs_fit);
    rep.order_relative = relative_ok ? convergence_order(rel_fit) : kNaN;
    return rep;
}

void emit_series_table(double lambda, double nu, double K, int N, std::ostream& os) {
    const exact::SeriesSolution s = exact::frobenius_coefficients(lambda, nu, K, N);
    os << "n, a_n\n";
    for (int n = 0; n <= s.order(); ++n) {
        os << n << ", " << fmt17(s.coeffs[static_cast<std::size_t>(n)]) << '\n';
    }
}

void emit_series_table(double lambda, double nu, double K, int N, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("emit_series_table: cannot write '" + path + "'");
    }
    emit_series_table(lambda, nu, K, N, out);
}

}  // namespace epd
