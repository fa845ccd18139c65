#include "epd/exact_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace epd::exact {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool near(double a, double b) { return std::abs(a - b) <= 1e-12; }

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

double fd_step(double x) { return 1e-3 * std::max(1.0, std::abs(x)); }

template <class F>
double fd_d1(const F& f, double x, double h) {
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

template <class F>
double fd_d2(const F& f, double x, double h) {
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
           (12 * h * h);
}

void require_off_axis(double x, const char* who) {
    if (x == 0.0) {
        throw SingularPointError(std::string(who) + ": sample at the singular point x = 0");
    }
}

double rhs_value(RhsMode mode, double K, double f) {
    switch (mode) {
        case RhsMode::constant: return K;
        case RhsMode::eigen: return K * f;
        case RhsMode::zero: return 0.0;
    }
    return 0.0;
}

/// f'' + (2c/x) f' = Kc-family solution for one coordinate.
Component additive_component(double c, double K, double Kc) {
    if (near(c, 0.5)) {
        return {[=](double x) { return Kc * std::log(std::abs(x)) + K * x * x / 4.0; },
                [=](double x) { return Kc / x + K * x / 2.0; },
                [=](double x) { return -Kc / (x * x) + K / 2.0; }};
    }
    if (near(c, -0.5)) {
        return {[=](double x) { return 0.5 * x * x * (K * std::log(std::abs(x)) + Kc - 0.5); },
                [=](double x) { return x * (K * std::log(std::abs(x)) + Kc); },
                [=](double x) { return K * std::log(std::abs(x)) + Kc + K; }};
    }
    const double e = 1.0 - 2.0 * c;
    const double q = 1.0 + 2.0 * c;
    return {[=](double x) {
                return Kc / e * std::pow(std::abs(x), e) * sign_of(x) + K * x * x / (2.0 * q);
            },
            [=](double x) { return Kc * std::pow(std::abs(x), -2.0 * c) + K * x / q; },
            [=](double x) {
                return -2.0 * c * Kc * std::pow(std::abs(x), -2.0 * c - 1.0) * sign_of(x) + K / q;
            }};
}

Component sinusoidal_component(double c, double K, double a0, double a1) {
    const double k = std::sqrt(K);
    auto p = [c](double x) { return std::pow(std::abs(x), -c); };
    auto w = [=](double x) { return a0 * std::cos(k * x) + a1 / k * std::sin(k * x); };
    auto w1 = [=](double x) { return -a0 * k * std::sin(k * x) + a1 * std::cos(k * x); };
    return {[=](double x) { return p(x) * w(x); },
            [=](double x) { return -c / x * p(x) * w(x) + p(x) * w1(x); },
            [=](double x) {
                const double px = p(x);
                return c * (c + 1.0) / (x * x) * px * w(x) - 2.0 * c / x * px * w1(x) -
                       K * px * w(x);
            }};
}

void require_finite(std::initializer_list<double> values, const char* who) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InvalidBranchError(std::string(who) + ": parameters must be finite");
        }
    }
}

}  // namespace

IndicialRoots frobenius_indicial(double lambda) {
    IndicialRoots r;
    r.nu1 = 0.0;
    r.nu2 = 1.0 - 2.0 * lambda;
    const double diff = r.nu1 - r.nu2;
    r.resonant = std::abs(diff - std::round(diff)) <= 1e-12;
    return r;
}

SeriesSolution frobenius_coefficients(double lambda, double nu, double K, int N, double a0,
                                      double a1) {
    if (!std::isfinite(lambda) || !std::isfinite(nu) || !std::isfinite(K)) {
        throw InvalidSpecError("frobenius_coefficients: parameters must be finite");
    }
    if (std::abs(nu * (nu - 1.0 + 2.0 * lambda)) > 1e-10) {
        std::ostringstream os;
        os << "frobenius_coefficients: nu = " << nu << " is not an indicial root for lambda = "
           << lambda;
        throw InvalidSpecError(os.str());
    }
    return frobenius_recurrence<double>(lambda, nu, K, N, a0, a1);
}

SeriesValue evaluate_series(const SeriesSolution& s, double x) {
    if (s.order() < 2) {
        throw InvalidSpecError("evaluate_series: truncation order must be >= 2");
    }
    if (x == 0.0) {
        if (s.nu < 0.0) {
            throw SingularPointError("evaluate_series: |x|^nu is singular at x = 0");
        }
        return {s.nu == 0.0 ? s.coeffs[0] : 0.0, 0.0};
    }
    const int N = s.order();
    double sum = 0.0;
    double xn = 1.0;
    double last = 0.0;
    double before_last = 0.0;
    for (int n = 0; n <= N; ++n) {
        const double term = s.coeffs[static_cast<std::size_t>(n)] * xn;
        sum += term;
        before_last = last;
        last = term;
        xn *= x;
    }
    const double scale = std::pow(std::abs(x), s.nu);

    auto ratio = [&](int n) {
        const double d = (n + s.nu) * (n + s.nu - 1.0 + 2.0 * s.lambda);
        return d == 0.0 ? kInf : std::abs(s.K) * x * x / std::abs(d);
    };
    const double q1 = ratio(N + 1);
    const double q2 = ratio(N + 2);
    const double q = std::max(q1, q2);
    double tail = 0.0;
    if (s.K != 0.0) {
        tail = q < 1.0 ? scale * (std::abs(before_last) * q1 + std::abs(last) * q2) / (1.0 - q)
                       : kInf;
    }
    return {scale * sum, tail};
}

std::array<double, 3> series_derivatives(const SeriesSolution& s, double x) {
    if (x == 0.0 && s.nu != 0.0) {
        throw SingularPointError("series_derivatives: derivatives are singular at x = 0");
    }
    const double sg = sign_of(x);
    const double r = std::abs(x);
    double f = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double sign_n = 1.0;
    for (int n = 0; n <= s.order(); ++n) {
        const double b = s.coeffs[static_cast<std::size_t>(n)] * sign_n;
        sign_n *= sg;
        if (b == 0.0) continue;
        const double e = n + s.nu;
        f += b * std::pow(r, e);
        if (e != 0.0) f1 += b * e * std::pow(r, e - 1.0);
        if (e != 0.0 && e != 1.0) f2 += b * e * (e - 1.0) * std::pow(r, e - 2.0);
    }
    return {f, sg * f1, f2};
}

std::vector<double> certificate_samples() {
    std::vector<double> out;
    out.reserve(200);
    const double lo = std::log(0.1);
    const double hi = std::log(10.0);
    for (int i = 0; i < 100; ++i) {
        const double s = std::exp(lo + (hi - lo) * i / 99.0);
        out.push_back(s);
        out.push_back(-s);
    }
    return out;
}

double ode_residual(const ScalarFn& f, double lambda, double K, RhsMode mode,
                    std::span<const double> samples) {
    double worst = 0.0;
    for (double x : samples) {
        require_off_axis(x, "ode_residual");
        const double h = fd_step(x);
        if (std::abs(x) <= 2.0 * h) {
            throw SingularPointError("ode_residual: stencil would cross x = 0");
        }
        const double fx = f(x);
        const double r = fd_d2(f, x, h) + 2.0 * lambda / x * fd_d1(f, x, h) - rhs_value(mode, K, fx);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double ode_residual(const Component& f, double lambda, double K, RhsMode mode,
                    std::span<const double> samples) {
    double worst = 0.0;
    for (double x : samples) {
        require_off_axis(x, "ode_residual");
        const double r = f.d2(x) + 2.0 * lambda / x * f.d1(x) - rhs_value(mode, K, f.value(x));
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double ode_residual(const SeriesSolution& s, RhsMode mode, std::span<const double> samples) {
    double worst = 0.0;
    for (double x : samples) {
        require_off_axis(x, "ode_residual");
        const auto [f, f1, f2] = series_derivatives(s, x);
        const double r = f2 + 2.0 * s.lambda / x * f1 - rhs_value(mode, s.K, f);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

ClosedForm stationary_additive(double lambda, double gamma, double K, double K1, double K2) {
    require_finite({lambda, gamma, K, K1, K2}, "stationary_additive");
    ClosedForm cf;
    const bool lh = near(lambda, 0.5), gh = near(gamma, 0.5);
    const bool ln = near(lambda, -0.5), gn = near(gamma, -0.5);
    if (lh && gh) {
        cf.family = Family::additive_log_half;
    } else if (ln && gn) {
        cf.family = Family::additive_log_neg_half;
    } else if (!lh && !gh && !ln && !gn) {
        cf.family = Family::additive_generic;
    } else {
        cf.family = Family::mixed_additive;
    }
    cf.lambda = lambda;
    cf.gamma = gamma;
    cf.K = K;
    cf.constants = {K1, K2};
    cf.f = additive_component(lambda, K, K1);
    cf.g = additive_component(gamma, -K, K2);

    const auto xs = certificate_samples();
    cf.certificate_f = ode_residual(cf.f, lambda, K, RhsMode::constant, xs);
    cf.certificate_g = ode_residual(cf.g, gamma, -K, RhsMode::constant, xs);
    return cf;
}

ClosedForm stationary_multiplicative(double lambda, double gamma, double K, double a0, double a1,
                                     double b0, double b1) {
    require_finite({lambda, gamma, K, a0, a1, b0, b1}, "stationary_multiplicative");
    if (!(K > 0.0)) {
        throw InvalidBranchError("stationary_multiplicative: the oscillatory branch needs K > 0");
    }
    ClosedForm cf;
    cf.family = Family::multiplicative_sinusoidal;
    cf.lambda = lambda;
    cf.gamma = gamma;
    cf.K = K;
    cf.constants = {a0, a1, b0, b1};
    cf.f = sinusoidal_component(lambda, K, a0, a1);
    cf.g = sinusoidal_component(gamma, K, b0, b1);

    const auto xs = certificate_samples();
    cf.certificate_f = ode_residual(cf.f, lambda, K, RhsMode::eigen, xs);
    cf.certificate_g = ode_residual(cf.g, gamma, -K, RhsMode::eigen, xs);
    return cf;
}

double SeparableSolution::phi(double x, double y) const {
    if (K == 0.0) {
        return additive.f.value(x) + additive.g.value(y);
    }
    const double fx = amplitude * evaluate_series(f_h, x).value - K_tilde / K;
    const double gy = amplitude * evaluate_series(g_h, y).value + K_tilde / K;
    return fx + gy;
}

double SeparableSolution::operator()(double x, double y, double t) const {
    return evaluate_series(psi, t).value * phi(x, y);
}

SpaceTimeFn SeparableSolution::as_function() const {
    return [self = *this](double x, double y, double t) { return self(x, y, t); };
}

SeparableSolution separable_solution(double lambda, double gamma, double a, double K,
                                     double K_tilde, double amplitude, int N) {
    require_finite({lambda, gamma, a, K, K_tilde, amplitude}, "separable_solution");
    SeparableSolution s;
    s.K = K;
    s.K_tilde = K_tilde;
    s.amplitude = amplitude;
    s.psi = frobenius_coefficients(a, 0.0, K, N);
    if (K == 0.0) {
        s.additive = stationary_additive(lambda, gamma, K_tilde, amplitude, amplitude);
    } else {
        s.f_h = frobenius_coefficients(lambda, 0.0, K, N);
        s.g_h = frobenius_coefficients(gamma, 0.0, K, N);
    }
    return s;
}

double pde_residual(const SpaceTimeFn& u, const SpaceTimeFn& v, const ProblemDef& prob,
                    std::span<const SpaceTimePoint> samples) {
    double worst = 0.0;
    for (const auto& [x, y, t] : samples) {
        const double hx = fd_step(x);
        const double hy = fd_step(y);
        const double ht = fd_step(t);
        if (!(t - 2.0 * ht > 0.0)) {
            throw InvalidSpecError("pde_residual: time samples must be positive");
        }
        if ((prob.lambda != 0.0 && std::abs(x) <= 2.0 * hx) ||
            (prob.gamma != 0.0 && std::abs(y) <= 2.0 * hy)) {
            throw SingularPointError("pde_residual: sample too close to a coordinate axis");
        }

        auto eq = [&](const SpaceTimeFn& w, const SpaceTimeFn& z, double power,
                      const SpaceTimeFn* forcing) {
            auto wx = [&](double s) { return w(s, y, t); };
            auto wy = [&](double s) { return w(x, s, t); };
            auto wt = [&](double s) { return w(x, y, s); };
            auto zx = [&](double s) { return z(s, y, t); };
            auto zy = [&](double s) { return z(x, s, t); };
            auto zt = [&](double s) { return z(x, y, s); };
            double r = fd_d2(wt, t, ht) + 2.0 * prob.a / t * fd_d1(zt, t, ht) -
                       fd_d2(wx, x, hx) - fd_d2(wy, y, hy);
            if (prob.lambda != 0.0) r -= 2.0 * prob.lambda / x * fd_d1(zx, x, hx);
            if (prob.gamma != 0.0) r -= 2.0 * prob.gamma / y * fd_d1(zy, y, hy);
            if (prob.nonlinear) {
                r -= std::pow(std::abs(w(x, y, t)), power - 1.0) * z(x, y, t);
            }
            if (forcing) r -= (*forcing)(x, y, t);
            return std::abs(r);
        };
        const SpaceTimeFn* g1 = prob.forcing ? &prob.forcing->G1 : nullptr;
        const SpaceTimeFn* g2 = prob.forcing ? &prob.forcing->G2 : nullptr;
        const double r1 = eq(u, v, prob.p, g1);
        const double r2 = eq(v, u, prob.q, g2);
        if (!std::isfinite(r1) || !std::isfinite(r2)) {
            throw EvaluationError("pde_residual: non-finite residual", x, y);
        }
        worst = std::max({worst, r1, r2});
    }
    return worst;
}

std::vector<SpaceTimePoint> sample_box(double x0, double x1, double y0, double y1, double t0,
                                       double t1, int n) {
    if (n < 1) {
        throw InvalidSpecError("sample_box: need at least one point per axis");
    }
    auto axis = [n](double lo, double hi) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            v[static_cast<std::size_t>(i)] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
        }
        return v;
    };
    const auto xs = axis(x0, x1);
    const auto ys = axis(y0, y1);
    const auto ts = axis(t0, t1);
    std::vector<SpaceTimePoint> out;
    out.reserve(xs.size() * ys.size() * ts.size());
    for (double t : ts)
        for (double y : ys)
            for (double x : xs) out.push_back({x, y, t});
    return out;
}

}  // namespace epd::exact
