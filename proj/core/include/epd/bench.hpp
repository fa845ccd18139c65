#pragma once

#include "epd/manufactured.hpp"
#include "epd/stepper.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace epd {

enum class SolverChoice { sylvester, kronecker, both };

/// Everything a batch experiment needs. Built by parse_config.
struct RunConfig {
    GridSpec grid;
    /// Every requested resolution; grid.J holds the first.
    std::vector<int> J_list;
    double T = 1.0;
    ManufacturedParams params;
    SeedMode seed_mode = SeedMode::exact;
    SolverChoice solver = SolverChoice::both;
    SingularPolicy singular_policy = SingularPolicy::limit;
    /// Timing repetitions; the median is reported.
    int repeats = 3;
    std::string out_csv;

    /// Grid spec for resolution J with n_steps set to reach T.
    GridSpec spec_for(int J) const;
    ProblemDef problem() const;
};

/// "key = value" lines with '#' comments. Keys:
///   L0 L1 J t0 T alpha a lambda gamma p q step_rule solver sing_eps seed_mode out_csv
///   l (time step for step_rule = independent), repeats, singular_policy.
/// J is mandatory and may be a comma separated list. Throws ParseError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// One line of the accuracy / timing table. Method II is the Sylvester path, I the dense one.
struct BenchRow {
    int J = 0;
    double h = 0.0;
    double l = 0.0;
    double Er_II = 0.0;
    double RelEr_II = 0.0;
    double Er_I = 0.0;
    double RelEr_I = 0.0;
    double time_II_ms = 0.0;
    double time_I_ms = 0.0;
    /// time_I / time_II.
    double ratio = 0.0;
    /// Fitted order over this and all previous rows (NaN for the first row).
    double order_estimate = 0.0;
    double solve_II_ms = 0.0;
    double solve_I_ms = 0.0;
    double residual_II = 0.0;
    double residual_I = 0.0;
    /// Non-empty when a solver path failed; the affected columns are NaN.
    std::string error;
};

inline constexpr std::string_view kCsvHeader =
    "J,h,l,Er_II,RelEr_II,Er_I,RelEr_I,time_II_ms,time_I_ms,ratio";

/// Values are written with 17 significant digits so that read_csv reproduces them exactly.
void write_csv(std::ostream& os, const std::vector<BenchRow>& rows);
std::vector<BenchRow> read_csv(std::istream& is);

/// Certifies the manufactured forcing with the PDE residual oracle (throws CertificateError
/// above 1e-5), then runs every J of the config with each selected solver. Solver failures
/// are recorded in the row. Writes out_csv when set.
std::vector<BenchRow> run_table1(const RunConfig& config);

/// Residual of the manufactured pair on the standard certificate box.
double forcing_certificate(const ManufacturedParams& params);

struct ConvergenceRow {
    int J = 0;
    double h = 0.0;
    double l = 0.0;
    double Er = 0.0;
    double RelEr = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    /// Least-squares slope of log Er against log h; +inf when some Er vanishes.
    double order = 0.0;
    /// Same fit for RelEr (NaN when the exact solution vanishes).
    double order_relative = 0.0;
};

/// Needs at least three resolutions. Uses the Sylvester path unless only Kronecker is selected.
ConvergenceReport run_convergence(const RunConfig& config, const std::vector<int>& J_list);
ConvergenceReport run_convergence(const ProblemDef& prob, const ExactPairFn& exact,
                                  const RunConfig& config, const std::vector<int>& J_list);

/// "n, a_n" rows with 17 significant digits.
void emit_series_table(double lambda, double nu, double K, int N, std::ostream& os);
void emit_series_table(double lambda, double nu, double K, int N, const std::string& path);

}  // namespace epd
