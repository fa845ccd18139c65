#pragma once

#include "epd/stepper.hpp"

namespace epd {

/// Gaussian test case u = v = exp(-(t^2/2 + r^2)), r^2 = x^2 + y^2.
struct ManufacturedParams {
    double a = 2.5;
    double lambda = 0.25;
    double gamma = 0.25;
    double p = 1.5;
    double q = 4.0 / 3.0;
};

enum class SeedMode {
    exact,    ///< levels 0 and 1 sampled from the exact solution
    taylor,   ///< second-order Taylor start (regularised at t0 = 0)
    taylor1,  ///< first-order Taylor start, U^1 = u0 + l u1
};

/// exp(-k (t^2/2 + r^2)).
double gaussian(double x, double y, double t, double k = 1.0);

/// Forcing that makes the Gaussian an exact solution:
///   G1 = (t^2 - 4 r^2 + 3 - 2a + 4(lambda + gamma)) g_1 - g_p, G2 likewise with g_q.
/// For a = 5/2 and lambda + gamma = 1/2 the bracket reduces to t^2 - 4 r^2.
Forcing manufactured_forcing(const ManufacturedParams& params);

ExactPairFn manufactured_exact();

/// Taylor modes seed from u(t0) and u_t(t0) = -t0 u(t0).
ProblemDef manufactured_problem(const ManufacturedParams& params, SeedMode seed, double t0 = 0.0);

}  // namespace epd
