#include "merton/numerics.hpp"

#include <cmath>
#include <string>

#include "merton/errors.hpp"

namespace merton::numerics {

QuadraticRoots solve_quadratic(double a, double b, double c) {
    if (a == 0.0) throw solver_error("solve_quadratic: leading coefficient is zero");
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) throw solver_error("solve_quadratic: negative discriminant " + std::to_string(disc));
    const double s = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(s, b));
    double x1;
    double x2;
    if (q == 0.0) {
        x1 = x2 = 0.0;
    } else {
        x1 = q / a;
        x2 = c / q;
    }
    return x1 < x2 ? QuadraticRoots{x1, x2} : QuadraticRoots{x2, x1};
}

RootResult find_root_bracketed(const std::function<double(double)>& f,
                               const std::function<double(double)>& df, double lo, double hi,
                               double tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0};
    if (fhi == 0.0) return {hi, 0};
    if (std::signbit(flo) == std::signbit(fhi))
        throw solver_error("find_root_bracketed: f(" + std::to_string(lo) + ") and f(" + std::to_string(hi) +
                           ") have the same sign");

    int it = 0;
    for (; it < max_iter && (hi - lo) > 1e-6 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return {mid, it};
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }

    // Newton inside the bracket; fall back to bisection whenever a step leaves it.
    double x = 0.5 * (lo + hi);
    for (; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return {x, it};
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        const double d = df(x);
        double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= tol * std::max(1.0, std::abs(x))) return {next, it + 1};
        x = next;
    }
    throw solver_error("find_root_bracketed: no convergence after " + std::to_string(max_iter) + " iterations");
}

std::vector<double> rk4_backward(const std::function<double(double)>& rhs, double y_terminal, double T,
                                 std::size_t n_steps) {
    if (n_steps == 0) throw solver_error("rk4_backward: n_steps must be positive");
    std::vector<double> out(n_steps + 1);
    out[n_steps] = y_terminal;
    const double h = -T / static_cast<double>(n_steps);
    double y = y_terminal;
    for (std::size_t i = n_steps; i-- > 0;) {
        const double k1 = rhs(y);
        const double k2 = rhs(y + 0.5 * h * k1);
        const double k3 = rhs(y + 0.5 * h * k2);
        const double k4 = rhs(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(y)) throw solver_error("rk4_backward: solution left the finite range");
        out[i] = y;
    }
    return out;
}

double one_minus_exp_over(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
    return -std::expm1(-x) / x;
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
    } else {
        comp_ += (x - t) + sum_;
    }
    sum_ = t;
}

SampleStats sample_stats(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return {0.0, 0.0, 0};
    CompensatedSum s;
    for (double v : values) s.add(v);
    const double mean = s.value() / static_cast<double>(n);
    if (n == 1) return {mean, 0.0, 1};
    CompensatedSum ss;
    for (double v : values) ss.add((v - mean) * (v - mean));
    const double var = ss.value() / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n)), n};
}

}  // namespace merton::numerics
