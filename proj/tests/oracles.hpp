#pragma once

// Test-side reference computations. Nothing here calls into the library's
// solvers: optima come from brute-force search, derivatives from finite
// differences or hand-derived formulas.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "merton/model.hpp"
#include "merton/power_policy.hpp"

namespace oracle {

// Maximizer of a unimodal f on [lo, hi] by golden-section search.
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-13) {
    return golden_max([&](double x) { return -f(x); }, lo, hi, tol);
}

// Argmax of f over an explicit grid.
inline double grid_argmax(const std::function<double(double)>& f, const std::vector<double>& grid) {
    double best = -std::numeric_limits<double>::infinity();
    double arg = std::numeric_limits<double>::quiet_NaN();
    for (double x : grid) {
        const double v = f(x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    return arg;
}

inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// Log-utility growth objective in excess of r: (mu - r) pi - sigma^2 pi^2 / 2 + lambda log(1 - pi).
inline double log_growth_excess(const merton::MarketParams& mp, double pi) {
    const double jump = mp.lambda > 0.0 ? mp.lambda * std::log(1.0 - pi) : 0.0;
    return (mp.mu - mp.r) * pi - 0.5 * mp.sigma * mp.sigma * pi * pi + jump;
}

// Optimal log weight by direct maximization over (-50, 1).
inline double log_weight_by_search(const merton::MarketParams& mp) {
    return golden_max([&](double pi) { return log_growth_excess(mp, pi); }, -50.0, 1.0 - 1e-15);
}

inline double growth_constant_by_search(const merton::MarketParams& mp) {
    return mp.r + log_growth_excess(mp, log_weight_by_search(mp));
}

// Terminal power weight: root of gamma sigma^2 (alpha - pi) - lambda (1 - pi)^{-gamma}
// by plain bisection; the lower end is pushed out until phi is positive there.
inline double terminal_weight_by_bisection(const merton::MarketParams& mp, double gamma) {
    const double s2 = mp.sigma * mp.sigma;
    const double alpha = (mp.mu - mp.r) / (gamma * s2);
    auto phi = [&](double pi) { return gamma * s2 * (alpha - pi) - mp.lambda * std::pow(1.0 - pi, -gamma); };
    double hi = std::min(alpha, 1.0 - 1e-12);
    double lo = std::min(-1.0, hi - 1.0);
    while (phi(lo) <= 0.0) lo *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// f as a function of the weight, from the first-order condition
// (mu - r - gamma sigma^2 pi) f = lambda (1 - pi)^{-gamma}.
inline double f_of_weight(const merton::MarketParams& mp, double gamma, double pi) {
    return mp.lambda * std::pow(1.0 - pi, -gamma) / (mp.mu - mp.r - gamma * mp.sigma * mp.sigma * pi);
}

// df/dt from the linear ODE obtained by substituting the power ansatz into
// the HJB equation at the optimal weight.
inline double f_time_derivative(const merton::MarketParams& mp, double gamma, double pi, double f) {
    const double g1 = 1.0 - gamma;
    const double bracket = pi * (mp.mu - mp.r) - 0.5 * gamma * mp.sigma * mp.sigma * pi * pi;
    return -g1 * bracket * f - mp.lambda * std::pow(1.0 - pi, g1) + mp.lambda * f;
}

// d pi / dt = (df/dt) / (df/dpi) with df/dpi by central differences.
inline double weight_velocity(const merton::MarketParams& mp, double gamma, double pi) {
    const double f = f_of_weight(mp, gamma, pi);
    const double dfdpi = central_diff([&](double p) { return f_of_weight(mp, gamma, p); }, pi, 1e-6);
    return f_time_derivative(mp, gamma, pi, f) / dfdpi;
}

// Hand-derived pieces of the minimization-form log value
//   V(t, x) = -e^{-l t} log x - C/l (e^{-l t} - e^{-l T}) - r (T - (1 - e^{-l T}) / l).
struct ReducedValue {
    merton::MarketParams mp;
    double T;
    double c;  // growth constant from direct maximization

    double value(double t, double x) const {
        const double l = mp.lambda;
        return -std::exp(-l * t) * std::log(x) - c / l * (std::exp(-l * t) - std::exp(-l * T)) -
               mp.r * (T - (1.0 - std::exp(-l * T)) / l);
    }
    double dt(double t, double x) const {
        const double l = mp.lambda;
        return l * std::exp(-l * t) * std::log(x) + c * std::exp(-l * t);
    }
    double dx(double t, double x) const { return -std::exp(-mp.lambda * t) / x; }
    double dxx(double t, double x) const { return std::exp(-mp.lambda * t) / (x * x); }
};

// Integrand of the minimized log Hamiltonian.
inline double log_hamiltonian_term(const merton::MarketParams& mp, double t, double x, double pi, double p, double A) {
    return (mp.mu * pi + mp.r * (1.0 - pi)) * x * p + 0.5 * mp.sigma * mp.sigma * pi * pi * x * x * A -
           mp.lambda * std::exp(-mp.lambda * t) * std::log((1.0 - pi) * x);
}

// max |V_t + inf_pi g| over an n x n grid of [0, T] x [x_lo, x_hi] for the
// value with growth constant c.
inline double log_hjb_max_residual(const merton::MarketParams& mp, double c, double T, int n, double x_lo,
                                   double x_hi) {
    const ReducedValue ref{mp, T, c};
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = T * i / (n - 1.0);
        for (int j = 0; j < n; ++j) {
            const double x = x_lo + (x_hi - x_lo) * j / (n - 1.0);
            const double p = ref.dx(t, x);
            const double A = ref.dxx(t, x);
            const double pi =
                golden_min([&](double q) { return log_hamiltonian_term(mp, t, x, q, p, A); }, -5.0, 1.0 - 1e-12);
            worst = std::max(worst, std::abs(ref.dt(t, x) + log_hamiltonian_term(mp, t, x, pi, p, A)));
        }
    }
    return worst;
}

struct PowerResidual {
    double relative;  // |V_t + sup H| / |V|
    double argmax;    // maximizing weight of the Hamiltonian
};

// Residual of the pre-default power HJB equation
//   V_t + sup_pi [(r + pi (mu - r)) w V_w + sigma^2 pi^2 w^2 V_ww / 2 + lambda (V_post(t, (1 - pi) w) - V)] = 0
// for the library's value V = power_value_pre(sol, ...), with V_post written out by hand
// and every derivative of V taken by central differences.
inline PowerResidual power_hjb_residual(const merton::PowerSolution& sol, double t, double w, double ht) {
    const merton::MarketParams& mp = sol.mp;
    const double g = sol.gamma;
    auto V = [&](double s, double y) { return merton::power_value_pre(sol, mp, s, y); };
    auto V_post = [&](double s, double y) {
        return std::exp((1.0 - g) * mp.r * (sol.T - s)) * std::pow(y, 1.0 - g) / (1.0 - g);
    };
    const double v = V(t, w);
    const double v_t = central_diff([&](double s) { return V(s, w); }, t, ht);
    const double v_w = central_diff([&](double y) { return V(t, y); }, w, 1e-4 * w);
    const double v_ww = second_diff([&](double y) { return V(t, y); }, w, 1e-3 * w);
    auto H = [&](double pi) {
        return (mp.r + pi * (mp.mu - mp.r)) * w * v_w + 0.5 * mp.sigma * mp.sigma * pi * pi * w * w * v_ww +
               mp.lambda * (V_post(t, (1.0 - pi) * w) - v);
    };
    const double pi = golden_max(H, -5.0, 1.0 - 1e-9);
    return {std::abs(v_t + H(pi)) / std::abs(v), pi};
}

}  // namespace oracle
