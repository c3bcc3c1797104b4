#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "merton/model.hpp"

namespace merton {

/// Constants of the power-utility weight ODE. alpha is the classical Merton ratio.
struct PowerConstants {
    double alpha;
    double beta;
    double eta;

    static PowerConstants from(const MarketParams& mp, double gamma);
};

/// Exponent data of the implicit solution Psi(pi_t) = Psi(pi_T) e^{-(T - t)}, where
///   Psi(pi) = (1 - pi)^{e0} (alpha - pi)^{e1} (pi - q_minus)^{e2} (q_plus - pi)^{e3}.
/// The exponents are the partial-fraction residues of 1/kappa at 1, alpha, q_minus, q_plus:
///   e0 = -2 (1 - beta) d1, e1 = -2 (beta - alpha) d2, e2,3 = D -/+ (d1 - d2) sqrt(Delta).
struct PsiConstants {
    double d1 = 0.0;
    double d2 = 0.0;
    double D = 0.0;
    double Delta = 0.0;
    double q_minus = 0.0;
    double q_plus = 0.0;
    std::array<double, 4> exponents{};
    // False when Delta < 0 (q_minus, q_plus complex) or a d-constant is singular.
    bool available = false;
    std::string reason;

    static PsiConstants from(const PowerConstants& c, double gamma, double sigma);
};

/// Power-utility weight ODE for one market and risk aversion gamma != 1.
class WeightOde {
   public:
    WeightOde(const MarketParams& mp, double gamma);

    const MarketParams& market() const { return mp_; }
    double gamma() const { return gamma_; }
    const PowerConstants& constants() const { return c_; }

    // Terminal condition phi(pi) = gamma sigma^2 (alpha - pi) - lambda (1 - pi)^{-gamma}.
    double phi(double pi) const;
    double phi_derivative(double pi) const;
    // d pi / dt = kappa(pi) = gamma sigma^2 (1 - pi)(alpha - pi)(pi^2/2 - beta pi + eta) / (pi - beta).
    double kappa(double pi) const;
    // f from the first-order condition: lambda (1 - pi)^{-gamma} / (mu - r - gamma sigma^2 pi).
    double f_from_weight(double pi) const;

   private:
    MarketParams mp_;
    double gamma_;
    PowerConstants c_;
};

/// Unique root of phi on (-inf, 1); lies below alpha. Requires gamma != 1.
/// lambda = 0 returns alpha exactly.
double solve_terminal_weight(const MarketParams& mp, double gamma);

/// Default RK4 step count for maturity T: max(1000, ceil(1000 T)).
std::size_t default_ode_steps(double T);

/// Non-myopic pre-default policy for power utility.
struct PowerSolution {
    MarketParams mp;
    double gamma;
    double T;
    double pi_T;
    PolicyPath path;
    std::vector<double> f_path;
    PowerConstants constants;
    // Set when gamma is within 1e-4 of 1 and the log solution was used instead.
    bool routed_to_log = false;
    std::vector<std::string> warnings;

    double f_at(double t) const;
    // kappa(pi_T): the slope of the weight at maturity.
    double terminal_slope() const;
};

inline constexpr double log_routing_tolerance = 1e-4;

/// Backward RK4 integration of d pi/dt = kappa(pi) from pi_T over horizon.n_steps
/// steps, with f(t) recovered from the first-order condition (f(T) = 1).
/// Throws solver_error if a step lands within 1e-10 of the pole beta, or if the
/// path leaves pi <= alpha, pi < 1.
PowerSolution integrate_weight_path(const MarketParams& mp, double gamma, const Horizon& horizon);

struct PsiCheck {
    bool available = false;
    double max_relative_defect = 0.0;
    std::string reason;
};

/// Max over the grid of |Psi(pi_t) - Psi(pi_T) e^{-(T-t)}| / |Psi(pi_T) e^{-(T-t)}|,
/// computed from log Psi. "Unavailable" when Delta < 0, a base factor is <= 0
/// somewhere on the path, or the path is constant (kappa(pi_T) = 0).
PsiCheck psi_invariant_check(const PowerSolution& solution);

/// log Psi(pi); nullopt outside the real-power domain.
std::optional<double> log_psi(const PsiConstants& psi, const PowerConstants& c, double pi);

/// V_pre(t, w) = f(t) w^{1-g} / (1-g) e^{(1-g) r (T-t)}, f linearly interpolated.
/// Uses the unnormalized power utility; add utility_offset() to compare with utility().
double power_value_pre(const PowerSolution& solution, const MarketParams& mp, double t, double w);

/// V_post(t, w) = e^{(1-g) r (T-t)} w^{1-g} / (1-g) (1 - pi_t)^{1-g}.
double power_value_post(const MarketParams& mp, double gamma, double T, double t, double w, double pi_at_t);

/// First-order expansion around maturity: pi_T - (T - t) kappa(pi_T).
double linearized_weight(const PowerSolution& solution, double t);

}  // namespace merton
