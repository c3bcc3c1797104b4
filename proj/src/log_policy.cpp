#include "merton/log_policy.hpp"

#include <cmath>
#include <limits>

#include "merton/numerics.hpp"

namespace merton {

namespace {

void check_time(double T, double t) {
    if (!(T > 0.0)) throw validation_error("maturity T must be positive");
    if (t < 0.0 || t > T) throw validation_error("t must lie in [0, T]");
}

}  // namespace

double classical_merton_ratio(const MarketParams& mp, double gamma) {
    mp.validate();
    if (!(gamma > 0.0)) throw validation_error("gamma must be positive");
    return mp.excess_return() / (gamma * mp.variance());
}

double pre_default_ratio_log(const MarketParams& mp) {
    mp.validate();
    const double s2 = mp.variance();
    const double m = mp.excess_return();
    if (mp.lambda == 0.0) return std::min(m / s2, 1.0);
    return numerics::solve_quadratic(s2, -(m + s2), m - mp.lambda).lower;
}

double log_growth_constant(const MarketParams& mp) {
    const double pi = pre_default_ratio_log(mp);
    const double base = mp.r + pi * mp.excess_return() - 0.5 * mp.variance() * pi * pi;
    if (mp.lambda == 0.0) return base;
    return base + mp.lambda * std::log1p(-pi);
}

double hjb_objective(const MarketParams& mp, double t, double x, double pi, double p, double A) {
    if (pi >= 1.0) return std::numeric_limits<double>::infinity();
    const double drift = (mp.mu * pi + mp.r * (1.0 - pi)) * x;
    const double vol = mp.sigma * pi * x;
    return drift * p + 0.5 * vol * vol * A - mp.lambda * std::exp(-mp.lambda * t) * std::log((1.0 - pi) * x);
}

double hjb_pointwise_minimizer(const MarketParams& mp, double t, double x, double p, double A) {
    mp.validate();
    if (!(x > 0.0)) throw validation_error("hjb_pointwise_minimizer: x must be positive");
    if (!(A > 0.0)) throw validation_error("hjb_pointwise_minimizer: A <= 0, the HJB operator is undefined");
    // P(pi) = a pi^2 + (k - a) pi - (k + lambda e^{-lambda t}), a = sigma^2 x^2 A, k = (mu - r) x p
    const double a = mp.variance() * x * x * A;
    const double k = mp.excess_return() * x * p;
    const double jump = mp.lambda * std::exp(-mp.lambda * t);
    const double smaller = numerics::solve_quadratic(a, k - a, -(k + jump)).lower;
    // lambda = 0 and k <= -a puts the smaller root at exactly 1, the boundary of the
    // admissible set; there is no default then, so the root is returned as is.
    return smaller;
}

double log_value_function_pre(const MarketParams& mp, double T, double t, double w) {
    check_time(T, t);
    if (!(w > 0.0)) throw std::domain_error("wealth must be positive");
    const double tau = T - t;
    const double c = log_growth_constant(mp);
    // (1 - e^{-l tau}) / l = tau * one_minus_exp_over(l tau), finite at l = 0.
    const double weight = tau * numerics::one_minus_exp_over(mp.lambda * tau);
    return std::log(w) + mp.r * tau + (c - mp.r) * weight;
}

double log_value_function_post(const MarketParams& mp, double T, double t, double w, double pi_at_t_minus) {
    check_time(T, t);
    if (!(w > 0.0)) throw std::domain_error("wealth must be positive");
    if (pi_at_t_minus >= 1.0) throw inadmissible_error("weight >= 1 at default wipes out wealth");
    return std::log(w) + mp.r * (T - t) + std::log1p(-pi_at_t_minus);
}

double log_value_function_reduced(const MarketParams& mp, double T, double t, double x) {
    check_time(T, t);
    if (!(x > 0.0)) throw std::domain_error("wealth must be positive");
    const double l = mp.lambda;
    const double c = log_growth_constant(mp);
    const double decay_t = std::exp(-l * t);
    // (e^{-l t} - e^{-l T}) / l = e^{-l t} (T - t) one_minus_exp_over(l (T - t))
    const double window = decay_t * (T - t) * numerics::one_minus_exp_over(l * (T - t));
    // T - (1 - e^{-l T}) / l
    const double riskless_gap = T * (1.0 - numerics::one_minus_exp_over(l * T));
    return -decay_t * std::log(x) - c * window - mp.r * riskless_gap;
}

double total_value_mixture(double v_pre, double v_post, double lambda, double t) {
    if (lambda < 0.0 || t < 0.0) throw validation_error("total_value_mixture: lambda and t must be non-negative");
    if (t == 0.0 || lambda == 0.0) return v_pre;
    const double survive = std::exp(-lambda * t);
    return survive * v_pre + (1.0 - survive) * v_post;
}

LogSolution LogSolution::solve(const MarketParams& mp, double T) {
    if (!(T > 0.0)) throw validation_error("maturity T must be positive");
    return LogSolution{mp, T, pre_default_ratio_log(mp), log_growth_constant(mp)};
}

}  // namespace merton
