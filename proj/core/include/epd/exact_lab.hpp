#pragma once

#include "epd/errors.hpp"
#include "epd/stepper.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace epd::exact {

using ScalarFn = std::function<double(double)>;

enum class Parity { even, odd, mixed };

/// Truncated Frobenius series |x|^nu * sum_{n<=N} a_n x^n for
///   f'' + (2 lambda / x) f' = K f.
template <class T>
struct BasicSeries {
    T lambda{};
    T nu{};
    T K{};
    std::vector<T> coeffs;
    Parity parity = Parity::even;

    int order() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
};

using SeriesSolution = BasicSeries<double>;

struct IndicialRoots {
    double nu1 = 0.0;
    double nu2 = 0.0;
    /// nu1 - nu2 is an integer; the second solution may carry a logarithm.
    bool resonant = false;
};

/// Roots of nu (nu - 1 + 2 lambda) = 0, i.e. {0, 1 - 2 lambda}.
IndicialRoots frobenius_indicial(double lambda);

namespace detail {
template <class T>
bool is_zero(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
        return std::abs(v) <= 1e-12;
    } else {
        return v == T(0);
    }
}
}  // namespace detail

/// Coefficients from (n + nu)(n + nu - 1 + 2 lambda) a_n = K a_{n-2}. a_1 is kept only when
/// (1 + nu)(nu + 2 lambda) vanishes. Works for any field type (double, exact rationals).
/// Throws ResonanceError at the first n with a vanishing denominator.
template <class T>
BasicSeries<T> frobenius_recurrence(const T& lambda, const T& nu, const T& K, int N, const T& a0,
                                    const T& a1) {
    if (N < 1) {
        throw InvalidSpecError("frobenius_recurrence: truncation order must be >= 1");
    }
    BasicSeries<T> s;
    s.lambda = lambda;
    s.nu = nu;
    s.K = K;
    s.coeffs.assign(static_cast<std::size_t>(N) + 1, T(0));
    s.coeffs[0] = a0;
    const T one(1);
    const T two(2);
    s.coeffs[1] = detail::is_zero(T((one + nu) * (nu + two * lambda))) ? a1 : T(0);
    for (int n = 2; n <= N; ++n) {
        const T tn(n);
        const T denom = (tn + nu) * (tn + nu - one + two * lambda);
        if (detail::is_zero(denom)) {
            throw ResonanceError("frobenius_recurrence: denominator vanishes at n = " +
                                     std::to_string(n),
                                 n);
        }
        s.coeffs[static_cast<std::size_t>(n)] = K * s.coeffs[static_cast<std::size_t>(n - 2)] / denom;
    }
    const bool has_even = !detail::is_zero(s.coeffs[0]);
    const bool has_odd = !detail::is_zero(s.coeffs[1]);
    s.parity = has_odd ? (has_even ? Parity::mixed : Parity::odd) : Parity::even;
    return s;
}

/// Floating-point engine; nu must be an indicial root (InvalidSpecError otherwise).
SeriesSolution frobenius_coefficients(double lambda, double nu, double K, int N, double a0 = 1.0,
                                      double a1 = 0.0);

struct SeriesValue {
    double value = 0.0;
    /// Geometric estimate of the neglected tail.
    double tail_bound = 0.0;
};

/// Throws SingularPointError at x = 0 when nu < 0.
SeriesValue evaluate_series(const SeriesSolution& s, double x);

/// Value and first two derivatives, term by term.
std::array<double, 3> series_derivatives(const SeriesSolution& s, double x);

/// A scalar function with analytic first and second derivatives.
struct Component {
    ScalarFn value;
    ScalarFn d1;
    ScalarFn d2;
};

enum class Family {
    additive_generic,
    additive_log_half,
    additive_log_neg_half,
    multiplicative_sinusoidal,
    mixed_additive,
};

/// Pair (f(x), g(y)) solving the stationary split of the linear system.
struct ClosedForm {
    Family family = Family::additive_generic;
    double lambda = 0.0;
    double gamma = 0.0;
    double K = 0.0;
    std::vector<double> constants;
    Component f;
    Component g;
    /// Max ODE residual of each factor on |s| in [0.1, 10], computed at construction.
    double certificate_f = 0.0;
    double certificate_g = 0.0;

    double certificate() const { return std::max(certificate_f, certificate_g); }
};

/// f'' + (2 lambda/x) f' = K and g'' + (2 gamma/y) g' = -K.
/// The branch of each factor follows its own coefficient (+-1/2 select the logarithmic forms).
ClosedForm stationary_additive(double lambda, double gamma, double K, double K1, double K2);

/// Candidate f = |x|^-lambda (a0 cos(sqrt(K) x) + a1/sqrt(K) sin(sqrt(K) x)), g likewise.
/// Certificates measure f'' + (2 lambda/x) f' - K f and g'' + (2 gamma/y) g' + K g; they are
/// not expected to vanish in general.
ClosedForm stationary_multiplicative(double lambda, double gamma, double K, double a0, double a1,
                                     double b0, double b1);

/// Samples used for closed-form certificates: 200 points with |s| in [0.1, 10], both signs.
std::vector<double> certificate_samples();

enum class RhsMode { constant, eigen, zero };

/// max |f'' + (2 lambda/x) f' - rhs| with rhs = K, K f or 0.
/// Black-box overload: fourth-order central differences, step 1e-3 max(1, |x|).
double ode_residual(const ScalarFn& f, double lambda, double K, RhsMode mode,
                    std::span<const double> samples);
double ode_residual(const Component& f, double lambda, double K, RhsMode mode,
                    std::span<const double> samples);
double ode_residual(const SeriesSolution& s, RhsMode mode, std::span<const double> samples);

/// u(x, y, t) = psi(t) phi(x, y) with psi'' + (2a/t) psi' = K psi and
/// Lap phi + <F, grad phi> = K phi.
struct SeparableSolution {
    double K = 0.0;
    double K_tilde = 0.0;
    SeriesSolution psi;
    /// K != 0: homogeneous series factors plus the constant pair (-K~/K, K~/K).
    SeriesSolution f_h;
    SeriesSolution g_h;
    double amplitude = 1.0;
    /// K == 0: additive stationary pair with constant K~.
    ClosedForm additive;

    double phi(double x, double y) const;
    double operator()(double x, double y, double t) const;
    SpaceTimeFn as_function() const;
};

/// amplitude scales the homogeneous part of phi (0 leaves the constant pair when K != 0).
SeparableSolution separable_solution(double lambda, double gamma, double a, double K,
                                     double K_tilde, double amplitude = 1.0, int N = 60);

struct SpaceTimePoint {
    double x;
    double y;
    double t;
};

/// Max over samples of both equation residuals of the system described by prob, using
/// fourth-order central differences (step 1e-3 max(1, |coordinate|)). Honours prob.nonlinear
/// and prob.forcing. Samples need t > 0 and x, y away from the axes.
double pde_residual(const SpaceTimeFn& u, const SpaceTimeFn& v, const ProblemDef& prob,
                    std::span<const SpaceTimePoint> samples);

/// Tensor grid of n points per axis on [x0, x1] x [y0, y1] x [t0, t1].
std::vector<SpaceTimePoint> sample_box(double x0, double x1, double y0, double y1, double t0,
                                       double t1, int n);

}  // namespace epd::exact
