#pragma once

#include <cstddef>
#include <vector>

#include "merton/errors.hpp"

namespace merton {

/// Market with one defaultable stock and a riskless account.
///
/// Until the default time tau ~ Exp(lambda) the stock is a GBM with drift `mu`
/// and volatility `sigma`; at tau it jumps to zero and stays there. All rates
/// are annualized, times are in years.
struct MarketParams {
    double mu = 0.0;
    double sigma = 0.0;
    double r = 0.0;
    double lambda = 0.0;

    double excess_return() const { return mu - r; }
    double variance() const { return sigma * sigma; }

    // Throws validation_error unless sigma > 0, r >= 0, lambda >= 0 and all finite.
    void validate() const;
};

enum class UtilityKind { Log, Power };

/// Relative risk aversion; gamma within 1e-12 of 1 is the log case.
class UtilitySpec {
   public:
    static constexpr double log_tolerance = 1e-12;

    explicit UtilitySpec(double gamma);

    double gamma() const { return gamma_; }
    UtilityKind kind() const { return kind_; }
    bool is_log() const { return kind_ == UtilityKind::Log; }

   private:
    double gamma_;
    UtilityKind kind_;
};

struct Horizon {
    double T = 1.0;
    std::size_t n_steps = 1;

    void validate() const;
    double step() const { return T / static_cast<double>(n_steps); }
    // Uniform grid 0, T/n, ..., T.
    std::vector<double> grid() const;
};

/// Pre-default weight path on a time grid. The post-default weight is always 0.
class PolicyPath {
   public:
    // times: strictly ascending, times[0] = 0, times.back() = T.
    // Every weight must be < 1, else inadmissible_error.
    PolicyPath(std::vector<double> times, std::vector<double> pre_weights);

    static PolicyPath constant(double weight, double T);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& pre_weights() const { return pre_weights_; }
    double post_weight() const { return 0.0; }
    double maturity() const { return times_.back(); }
    double max_weight() const;
    bool is_constant() const;

    // Linear interpolation of the pre-default weight, clamped to [0, T].
    double weight_at(double t) const;

   private:
    std::vector<double> times_;
    std::vector<double> pre_weights_;
};

/// Normalized isoelastic utility (w^{1-g} - 1) / (1 - g), log(w) for g = 1.
/// The -1/(1-g) offset makes the family continuous in g; the power-utility
/// policy code works with the unnormalized w^{1-g}/(1-g), see utility_offset().
double utility(const UtilitySpec& spec, double w);

/// utility(spec, w) minus the unnormalized power utility: -1/(1-g), or 0 for log.
double utility_offset(const UtilitySpec& spec);

/// Wealth at t >= tau after default: e^{r(t-tau)} (1 - pi_{tau-}) x_tau.
double wealth_given_default(double x_at_tau, double pi_at_tau_minus, double r, double t, double tau);

}  // namespace merton
