#include "epd/grid.hpp"

#include "epd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace epd {

Grid::Grid(const GridSpec& spec, double h, double l, double sing_eps,
           std::vector<double> nodes, std::vector<int> singular)
    : spec_(spec),
      h_(h),
      l_(l),
      sigma_(l * l / (h * h)),
      sing_eps_(sing_eps),
      nodes_(std::move(nodes)),
      singular_(std::move(singular)) {}

bool Grid::is_singular(int j) const {
    return std::find(singular_.begin(), singular_.end(), j) != singular_.end();
}

Grid build_grid(const GridSpec& spec) {
    if (!std::isfinite(spec.L0) || !std::isfinite(spec.L1) || spec.L1 <= spec.L0) {
        std::ostringstream os;
        os << "build_grid: need L1 > L0, got L0=" << spec.L0 << " L1=" << spec.L1;
        throw InvalidSpecError(os.str());
    }
    if (spec.J < 1) {
        throw InvalidSpecError("build_grid: J must be >= 1, got " + std::to_string(spec.J));
    }
    if (spec.n_steps < 1) {
        throw InvalidSpecError("build_grid: n_steps must be >= 1");
    }
    if (!(spec.t0 >= 0.0)) {
        throw InvalidSpecError("build_grid: t0 must be >= 0");
    }

    const double h = (spec.L1 - spec.L0) / (spec.J + 1);
    double l = 0.0;
    if (spec.step_rule == StepRule::coupled) {
        l = h * std::sqrt(h);
    } else {
        if (!(spec.l > 0.0) || !std::isfinite(spec.l)) {
            throw InvalidSpecError("build_grid: independent step rule needs l > 0");
        }
        l = spec.l;
    }

    const double eps = spec.sing_eps.value_or(h / 100.0);
    if (!(eps >= 0.0)) {
        throw InvalidSpecError("build_grid: sing_eps must be >= 0");
    }

    const int n = spec.J + 2;
    std::vector<double> nodes(static_cast<std::size_t>(n));
    std::vector<int> singular;
    for (int j = 0; j < n; ++j) {
        nodes[static_cast<std::size_t>(j)] = spec.L0 + j * h;
        if (std::abs(nodes[static_cast<std::size_t>(j)]) <= eps) {
            singular.push_back(j);
        }
    }
    return Grid(spec, h, l, eps, std::move(nodes), std::move(singular));
}

int steps_to_reach(double t0, double T, double l) {
    if (!(l > 0.0) || !(T > t0)) {
        throw InvalidSpecError("steps_to_reach: need l > 0 and T > t0");
    }
    // Guard against (T - t0)/l landing a hair above an integer through rounding.
    const int n = static_cast<int>(std::ceil((T - t0) / l - 1e-12));
    return std::max(n, 2);
}

double l2_norm(const Field& X) {
    return X.norm();
}

Field sample(const SpaceFn& f, const Grid& grid) {
    const int n = grid.size();
    Field out(n, n);
    for (int m = 0; m < n; ++m) {
        for (int j = 0; j < n; ++j) {
            const double x = grid.x(j);
            const double y = grid.y(m);
            double value = 0.0;
            try {
                value = f(x, y);
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << "sample: evaluation failed at (x=" << x << ", y=" << y << "): " << e.what();
                throw EvaluationError(os.str(), x, y);
            }
            if (!std::isfinite(value)) {
                std::ostringstream os;
                os << "sample: non-finite value at (x=" << x << ", y=" << y << ")";
                throw EvaluationError(os.str(), x, y);
            }
            out(j, m) = value;
        }
    }
    return out;
}

Field sample(const SpaceTimeFn& f, const Grid& grid, double t) {
    return sample([&](double x, double y) { return f(x, y, t); }, grid);
}

DiscreteErrors discrete_errors(std::span<const CoupledState> trajectory,
                               const ExactPairFn& exact, const Grid& grid,
                               bool relative) {
    if (trajectory.empty()) {
        throw InvalidSpecError("discrete_errors: empty trajectory");
    }
    DiscreteErrors out;
    const int n = grid.size();
    for (const CoupledState& s : trajectory) {
        const double t = grid.t(s.level);
        Field u(n, n);
        Field v(n, n);
        for (int m = 0; m < n; ++m) {
            for (int j = 0; j < n; ++j) {
                const auto [uv, vv] = exact(grid.x(j), grid.y(m), t);
                u(j, m) = uv;
                v(j, m) = vv;
            }
        }
        const double eu = l2_norm(s.U - u);
        const double ev = l2_norm(s.V - v);
        const double nu = l2_norm(u);
        const double nv = l2_norm(v);
        out.Er_U = std::max(out.Er_U, eu);
        out.Er_V = std::max(out.Er_V, ev);
        if (!relative) {
            continue;
        }
        if (nu == 0.0 || nv == 0.0) {
            throw DegenerateNormError("discrete_errors: exact solution has zero norm at level " +
                                      std::to_string(s.level));
        }
        out.RelEr_U = std::max(out.RelEr_U, eu / nu);
        out.RelEr_V = std::max(out.RelEr_V, ev / nv);
    }
    if (!relative) {
        out.RelEr_U = std::numeric_limits<double>::quiet_NaN();
        out.RelEr_V = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace epd
