#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace epd {

using Matrix = Eigen::MatrixXd;

/// Values of one unknown on the (J+2)x(J+2) node set at one time level.
/// Row index j runs over x-nodes, column index m over y-nodes.
using Field = Matrix;

enum class StepRule {
    coupled,      ///< l = h^(3/2)
    independent,  ///< l given explicitly
};

struct GridSpec {
    double L0 = -10.0;
    double L1 = 10.0;
    int J = 24;
    double t0 = 0.0;
    int n_steps = 2;
    double alpha = 0.25;
    StepRule step_rule = StepRule::coupled;
    /// Time step, only read when step_rule == independent.
    double l = 0.0;
    /// Nodes with |coordinate| <= sing_eps are singular; defaults to h/100.
    std::optional<double> sing_eps;
};

/// Uniform space-time mesh. Immutable after construction.
class Grid {
public:
    Grid(const GridSpec& spec, double h, double l, double sing_eps,
         std::vector<double> nodes, std::vector<int> singular);

    const GridSpec& spec() const noexcept { return spec_; }
    int J() const noexcept { return spec_.J; }
    /// Nodes per axis, J + 2.
    int size() const noexcept { return spec_.J + 2; }
    double h() const noexcept { return h_; }
    double l() const noexcept { return l_; }
    double sigma() const noexcept { return sigma_; }
    double alpha() const noexcept { return spec_.alpha; }
    double t0() const noexcept { return spec_.t0; }
    int n_steps() const noexcept { return spec_.n_steps; }
    double sing_eps() const noexcept { return sing_eps_; }

    double x(int j) const { return nodes_[static_cast<std::size_t>(j)]; }
    double y(int m) const { return nodes_[static_cast<std::size_t>(m)]; }
    double t(int n) const { return spec_.t0 + n * l_; }

    std::span<const double> nodes_x() const noexcept { return nodes_; }
    std::span<const double> nodes_y() const noexcept { return nodes_; }

    /// Indices whose coordinate lies within sing_eps of zero (same on both axes).
    std::span<const int> singular_nodes() const noexcept { return singular_; }
    bool is_singular(int j) const;

private:
    GridSpec spec_;
    double h_;
    double l_;
    double sigma_;
    double sing_eps_;
    std::vector<double> nodes_;
    std::vector<int> singular_;
};

Grid build_grid(const GridSpec& spec);

/// Number of steps needed to reach T from t0 with step l (at least 2).
int steps_to_reach(double t0, double T, double l);

struct CoupledState {
    Field U;
    Field V;
    int level = 0;
};

using SpaceFn = std::function<double(double x, double y)>;
using SpaceTimeFn = std::function<double(double x, double y, double t)>;
using ExactPairFn = std::function<std::pair<double, double>(double x, double y, double t)>;

/// Frobenius norm of the node values, (sum |X_ij|^2)^(1/2) over all J+2 nodes per axis.
double l2_norm(const Field& X);

Field sample(const SpaceFn& f, const Grid& grid);
Field sample(const SpaceTimeFn& f, const Grid& grid, double t);

struct DiscreteErrors {
    double Er_U = 0.0;
    double RelEr_U = 0.0;
    double Er_V = 0.0;
    double RelEr_V = 0.0;

    double Er() const { return Er_U > Er_V ? Er_U : Er_V; }
    double RelEr() const { return RelEr_U > RelEr_V ? RelEr_U : RelEr_V; }
};

/// Max over time levels of ||U^n - u^n|| and ||U^n - u^n|| / ||u^n||, per component.
/// Throws DegenerateNormError when some exact level has zero norm, unless
/// `relative` is false, in which case the relative fields are left NaN.
DiscreteErrors discrete_errors(std::span<const CoupledState> trajectory,
                               const ExactPairFn& exact, const Grid& grid,
                               bool relative = true);

}  // namespace epd
