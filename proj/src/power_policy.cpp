#include "merton/power_policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "merton/log_policy.hpp"
#include "merton/numerics.hpp"

namespace merton {

namespace {

void check_gamma(double gamma) {
    if (!std::isfinite(gamma) || gamma <= 0.0) throw validation_error("gamma must be positive");
}

// f(t) for lambda = 0, where the first-order condition degenerates to 0/0:
// f = exp((1-g) (mu-r)^2 / (2 g sigma^2) (T-t)), the classical Merton power value.
double f_without_default(const MarketParams& mp, double gamma, double time_to_maturity) {
    const double m = mp.excess_return();
    return std::exp((1.0 - gamma) * m * m / (2.0 * gamma * mp.variance()) * time_to_maturity);
}

}  // namespace

PowerConstants PowerConstants::from(const MarketParams& mp, double gamma) {
    check_gamma(gamma);
    const double s2 = mp.variance();
    const double m = mp.excess_return();
    return PowerConstants{m / (gamma * s2), (m + s2) / ((gamma + 1.0) * s2),
                          (m - mp.lambda) / (gamma * (gamma + 1.0) * s2)};
}

PsiConstants PsiConstants::from(const PowerConstants& c, double gamma, double sigma) {
    PsiConstants p;
    const double gs2 = gamma * sigma * sigma;
    p.Delta = c.beta * c.beta - 2.0 * c.eta;
    if (p.Delta < 0.0) {
        p.reason = "Delta = beta^2 - 2 eta < 0";
        return p;
    }
    const double root = std::sqrt(p.Delta);
    p.q_minus = c.beta - root;
    p.q_plus = c.beta + root;
    const double den1 = gs2 * (1.0 - c.alpha) * (2.0 * c.beta - 2.0 * c.eta - 1.0);
    const double den2 = gs2 * (1.0 - c.alpha) * (2.0 * c.alpha * c.beta - c.alpha * c.alpha - 2.0 * c.eta);
    if (den1 == 0.0 || den2 == 0.0 || !std::isfinite(den1) || !std::isfinite(den2)) {
        p.reason = "singular exponent constants (alpha = 1 or a repeated root)";
        return p;
    }
    p.d1 = 1.0 / den1;
    p.d2 = 1.0 / den2;
    p.D = (1.0 - c.beta) * p.d1 + (c.beta - c.alpha) * p.d2;
    p.exponents = {-2.0 * (1.0 - c.beta) * p.d1, -2.0 * (c.beta - c.alpha) * p.d2,
                   p.D - (p.d1 - p.d2) * root, p.D + (p.d1 - p.d2) * root};
    p.available = true;
    return p;
}

WeightOde::WeightOde(const MarketParams& mp, double gamma) : mp_(mp), gamma_(gamma) {
    mp_.validate();
    check_gamma(gamma);
    c_ = PowerConstants::from(mp_, gamma_);
}

double WeightOde::phi(double pi) const {
    return gamma_ * mp_.variance() * (c_.alpha - pi) - mp_.lambda * std::pow(1.0 - pi, -gamma_);
}

double WeightOde::phi_derivative(double pi) const {
    return -gamma_ * mp_.variance() - mp_.lambda * gamma_ * std::pow(1.0 - pi, -gamma_ - 1.0);
}

double WeightOde::kappa(double pi) const {
    const double quad = 0.5 * pi * pi - c_.beta * pi + c_.eta;
    return gamma_ * mp_.variance() * (1.0 - pi) * (c_.alpha - pi) * quad / (pi - c_.beta);
}

double WeightOde::f_from_weight(double pi) const {
    return mp_.lambda * std::pow(1.0 - pi, -gamma_) / (mp_.excess_return() - gamma_ * mp_.variance() * pi);
}

double solve_terminal_weight(const MarketParams& mp, double gamma) {
    const WeightOde ode(mp, gamma);
    const double alpha = ode.constants().alpha;
    if (mp.lambda == 0.0) return alpha;

    const double gs2 = gamma * mp.variance();
    auto phi = [&](double p) { return ode.phi(p); };
    auto dphi = [&](double p) { return ode.phi_derivative(p); };

    double hi;
    double lo;
    if (alpha < 1.0) {
        hi = alpha;  // phi(alpha) = -lambda (1 - alpha)^{-gamma} < 0
        lo = alpha - mp.lambda * std::pow(1.0 - alpha, -gamma) / gs2 - 1.0;
    } else {
        // phi -> -inf as pi -> 1; walk towards 1 until it turns negative.
        hi = 0.5;
        int k = 1;
        while (phi(hi) >= 0.0 && k < 60) {
            hi = 1.0 - std::ldexp(1.0, -++k);
        }
        lo = std::min(alpha, 0.0) - mp.lambda / gs2 - 1.0;
    }
    for (int expand = 0; phi(lo) <= 0.0; ++expand) {
        if (expand >= 60) break;
        lo -= std::ldexp(1.0, expand);
    }
    if (!(phi(lo) > 0.0) || !(phi(hi) < 0.0)) {
        std::ostringstream os;
        os << "solve_terminal_weight: could not bracket the root of phi (gamma=" << gamma << ", lo=" << lo
           << ", phi(lo)=" << phi(lo) << ", hi=" << hi << ", phi(hi)=" << phi(hi) << ")";
        throw solver_error(os.str());
    }
    return numerics::find_root_bracketed(phi, dphi, lo, hi).root;
}

std::size_t default_ode_steps(double T) {
    return std::max<std::size_t>(1000, static_cast<std::size_t>(std::ceil(1000.0 * T)));
}

double PowerSolution::f_at(double t) const {
    const auto& times = path.times();
    if (t <= times.front()) return f_path.front();
    if (t >= times.back()) return f_path.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double s = (t - times[lo]) / (times[hi] - times[lo]);
    return f_path[lo] + s * (f_path[hi] - f_path[lo]);
}

double PowerSolution::terminal_slope() const {
    if (routed_to_log) return 0.0;
    return WeightOde(mp, gamma).kappa(pi_T);
}

PowerSolution integrate_weight_path(const MarketParams& mp, double gamma, const Horizon& horizon) {
    mp.validate();
    horizon.validate();
    check_gamma(gamma);
    const WeightOde ode(mp, gamma);
    const PowerConstants& c = ode.constants();
    const std::vector<double> times = horizon.grid();
    const std::size_t n = horizon.n_steps;

    auto f_of = [&](double pi, double t) {
        return mp.lambda == 0.0 ? f_without_default(mp, gamma, horizon.T - t) : ode.f_from_weight(pi);
    };

    if (std::abs(gamma - 1.0) < log_routing_tolerance) {
        const double pi = pre_default_ratio_log(mp);
        std::vector<double> f(n + 1);
        for (std::size_t i = 0; i <= n; ++i) f[i] = f_of(pi, times[i]);
        PowerSolution sol{mp, gamma, horizon.T, pi, PolicyPath(times, std::vector<double>(n + 1, pi)),
                          std::move(f), c, true, {}};
        std::ostringstream os;
        os << "gamma = " << gamma << " is within " << log_routing_tolerance
           << " of 1; using the constant log-utility weight";
        sol.warnings.push_back(os.str());
        return sol;
    }

    const double pi_T = solve_terminal_weight(mp, gamma);
    auto rhs = [&](double pi) {
        if (std::abs(pi - c.beta) < 1e-10) {
            std::ostringstream os;
            os << "weight ODE: step hit the pole pi = beta = " << c.beta;
            throw solver_error(os.str());
        }
        if (!(pi < 1.0)) throw solver_error("weight ODE: path reached pi >= 1");
        return ode.kappa(pi);
    };
    std::vector<double> weights = numerics::rk4_backward(rhs, pi_T, horizon.T, n);

    for (std::size_t i = 0; i <= n; ++i) {
        double& w = weights[i];
        if (w > c.alpha) {
            if (w - c.alpha > 1e-12) {
                std::ostringstream os;
                os << "weight ODE: pi(" << times[i] << ") = " << w << " exceeds alpha = " << c.alpha;
                throw solver_error(os.str());
            }
            w = c.alpha;
        }
    }

    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = f_of(weights[i], times[i]);
    f[n] = mp.lambda == 0.0 ? 1.0 : f[n];

    return PowerSolution{mp, gamma, horizon.T, pi_T, PolicyPath(times, std::move(weights)), std::move(f), c, false, {}};
}

std::optional<double> log_psi(const PsiConstants& psi, const PowerConstants& c, double pi) {
    if (!psi.available) return std::nullopt;
    const std::array<double, 4> bases{1.0 - pi, c.alpha - pi, pi - psi.q_minus, psi.q_plus - pi};
    double acc = 0.0;
    for (std::size_t i = 0; i < bases.size(); ++i) {
        if (!(bases[i] > 0.0)) return std::nullopt;
        acc += psi.exponents[i] * std::log(bases[i]);
    }
    return acc;
}

PsiCheck psi_invariant_check(const PowerSolution& solution) {
    PsiCheck out;
    if (solution.routed_to_log) {
        out.reason = "log-utility routing: constant path";
        return out;
    }
    const WeightOde ode(solution.mp, solution.gamma);
    if (ode.kappa(solution.pi_T) == 0.0) {
        out.reason = "constant path (kappa(pi_T) = 0)";
        return out;
    }
    const PsiConstants psi = PsiConstants::from(solution.constants, solution.gamma, solution.mp.sigma);
    if (!psi.available) {
        out.reason = psi.reason;
        return out;
    }
    const auto log_terminal = log_psi(psi, solution.constants, solution.pi_T);
    if (!log_terminal) {
        out.reason = "pi_T outside the real-power domain of Psi";
        return out;
    }
    const auto& times = solution.path.times();
    const auto& weights = solution.path.pre_weights();
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto lp = log_psi(psi, solution.constants, weights[i]);
        if (!lp) {
            out.reason = "a base factor of Psi is non-positive along the path";
            return out;
        }
        const double expected = *log_terminal - (solution.T - times[i]);
        worst = std::max(worst, std::abs(std::expm1(*lp - expected)));
    }
    out.available = true;
    out.max_relative_defect = worst;
    return out;
}

double power_value_pre(const PowerSolution& solution, const MarketParams& mp, double t, double w) {
    if (!(w > 0.0)) throw std::domain_error("wealth must be positive");
    if (t < 0.0 || t > solution.T) throw validation_error("t must lie in [0, T]");
    const double g = solution.gamma;
    if (std::abs(1.0 - g) <= UtilitySpec::log_tolerance) throw validation_error("power value needs gamma != 1");
    const double one_minus = 1.0 - g;
    return solution.f_at(t) * std::pow(w, one_minus) / one_minus * std::exp(one_minus * mp.r * (solution.T - t));
}

double power_value_post(const MarketParams& mp, double gamma, double T, double t, double w, double pi_at_t) {
    check_gamma(gamma);
    if (std::abs(1.0 - gamma) <= UtilitySpec::log_tolerance) throw validation_error("power value needs gamma != 1");
    if (!(w > 0.0)) throw std::domain_error("wealth must be positive");
    if (pi_at_t >= 1.0) throw inadmissible_error("weight >= 1 at default wipes out wealth");
    if (t < 0.0 || t > T) throw validation_error("t must lie in [0, T]");
    const double one_minus = 1.0 - gamma;
    return std::exp(one_minus * mp.r * (T - t)) * std::pow(w, one_minus) / one_minus *
           std::pow(1.0 - pi_at_t, one_minus);
}

double linearized_weight(const PowerSolution& solution, double t) {
    if (t > solution.T) throw validation_error("linearization is defined for t <= T");
    return solution.pi_T - (solution.T - t) * solution.terminal_slope();
}

}  // namespace merton
