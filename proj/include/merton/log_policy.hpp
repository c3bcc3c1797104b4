#pragma once

#include "merton/model.hpp"

namespace merton {

/// Classical Merton ratio (mu - r) / (gamma sigma^2), ignoring default.
double classical_merton_ratio(const MarketParams& mp, double gamma);

/// Optimal pre-default stock weight under log utility.
///
/// Smaller root of sigma^2 pi^2 - (mu - r + sigma^2) pi + (mu - r - lambda) = 0,
/// i.e. the maximizer of (mu - r) pi - sigma^2 pi^2 / 2 + lambda log(1 - pi) over
/// pi < 1. Constant in time and wealth, below 1 whenever lambda > 0, and equal to
/// min((mu - r)/sigma^2, 1) at lambda = 0.
double pre_default_ratio_log(const MarketParams& mp);

/// Growth constant C*(lambda) = mu pi + r (1 - pi) - sigma^2 pi^2 / 2 + lambda log(1 - pi)
/// at pi = pre_default_ratio_log(mp). For lambda = 0 the log term is dropped
/// (its limit is 0 even when pi -> 1).
double log_growth_constant(const MarketParams& mp);

// Minimization form of the log problem with default integrated out: the
// controlled quantity is the no-default wealth x, and the Hamiltonian is
//   g(t, x, pi, p, A) = (mu pi + r (1 - pi)) x p + sigma^2 pi^2 x^2 A / 2
//                       - lambda e^{-lambda t} log((1 - pi) x).
double hjb_objective(const MarketParams& mp, double t, double x, double pi, double p, double A);

/// argmin over pi < 1 of hjb_objective; the smaller root of the first-order
/// quadratic. Throws validation_error when A <= 0 (operator undefined) or x <= 0.
double hjb_pointwise_minimizer(const MarketParams& mp, double t, double x, double p, double A);

/// Pre-default value (maximization form), conditional on no default by t:
///   log w + r (T - t) + (C - r)/lambda (1 - e^{-lambda (T - t)}).
/// lambda = 0 gives the continuous extension log w + C (T - t).
double log_value_function_pre(const MarketParams& mp, double T, double t, double w);

/// Post-default value log w + r (T - t) + log(1 - pi_{t-}).
double log_value_function_post(const MarketParams& mp, double T, double t, double w, double pi_at_t_minus);

/// Minimization-form value of the default-free reduced problem:
///   -e^{-lambda t} log x - C*/lambda (e^{-lambda t} - e^{-lambda T}) - r (T - (1 - e^{-lambda T})/lambda).
/// lambda = 0 gives the continuous extension -log x - C*(0) (T - t), where
/// C*(0) = r + (mu - r)^2 / (2 sigma^2) if mu - r <= sigma^2 and mu - sigma^2/2 otherwise.
double log_value_function_reduced(const MarketParams& mp, double T, double t, double x);

/// Total value e^{-lambda t} v_pre + (1 - e^{-lambda t}) v_post: the pre-default
/// state carries probability P{tau > t} = e^{-lambda t}.
double total_value_mixture(double v_pre, double v_post, double lambda, double t);

/// Everything about the log-utility solution for one market and maturity.
struct LogSolution {
    MarketParams mp;
    double T;
    double pi_pre;
    double c_star;

    static LogSolution solve(const MarketParams& mp, double T);

    double value_pre(double t, double w) const { return log_value_function_pre(mp, T, t, w); }
    double value_reduced(double t, double x) const { return log_value_function_reduced(mp, T, t, x); }
};

}  // namespace merton
