#include "epd/manufactured.hpp"

#include <cmath>

namespace epd {

double gaussian(double x, double y, double t, double k) {
    return std::exp(-k * (0.5 * t * t + x * x + y * y));
}

Forcing manufactured_forcing(const ManufacturedParams& params) {
    const double shift = 3.0 - 2.0 * params.a + 4.0 * (params.lambda + params.gamma);
    auto make = [shift](double power) {
        return [shift, power](double x, double y, double t) {
            const double r2 = x * x + y * y;
            return (t * t - 4.0 * r2 + shift) * gaussian(x, y, t) - gaussian(x, y, t, power);
        };
    };
    return Forcing{make(params.p), make(params.q)};
}

ExactPairFn manufactured_exact() {
    return [](double x, double y, double t) {
        const double u = gaussian(x, y, t);
        return std::pair<double, double>{u, u};
    };
}

ProblemDef manufactured_problem(const ManufacturedParams& params, SeedMode seed, double t0) {
    ProblemDef prob;
    prob.a = params.a;
    prob.lambda = params.lambda;
    prob.gamma = params.gamma;
    prob.p = params.p;
    prob.q = params.q;
    prob.nonlinear = true;
    prob.forcing = manufactured_forcing(params);

    const SpaceTimeFn u = [](double x, double y, double t) { return gaussian(x, y, t); };
    if (seed == SeedMode::exact) {
        prob.exact_seed = ExactSeed{u, u};
        return prob;
    }
    const SpaceFn u0 = [t0](double x, double y) { return gaussian(x, y, t0); };
    const SpaceFn u1 = [t0](double x, double y) { return -t0 * gaussian(x, y, t0); };
    prob.initial = InitialData{u0, u1, u0, u1};
    prob.taylor_order = seed == SeedMode::taylor1 ? 1 : 2;
    prob.regularize_t0 = t0 == 0.0;
    return prob;
}

}  // namespace epd
