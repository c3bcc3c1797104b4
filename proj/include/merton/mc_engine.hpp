#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "merton/model.hpp"

namespace merton {

struct SimConfig {
    std::size_t n_paths = 100000;
    std::uint64_t seed = 42;
    // Simulation step in years. A constant policy is simulated exactly with dt = T.
    double dt = 1.0 / 252.0;

    void validate() const;
};

enum class Execution { serial, parallel };

struct WealthTrajectory {
    std::vector<double> times;
    std::vector<double> wealth;
    std::vector<double> weights;  // weight applied on [t_k, t_{k+1}); 0 after default
    double tau;                   // +inf when no default by T
    double wealth_before_default;  // W_{tau-}, NaN without default
    double wealth_after_default;   // W_tau, NaN without default

    bool defaulted() const;
    double terminal() const { return wealth.back(); }
};

/// Full trajectories with W_0 = 1 on the grid implied by cfg.dt. Intended for
/// inspection and small path counts; use simulate_terminal_wealth for estimators.
std::vector<WealthTrajectory> simulate_wealth(const MarketParams& mp, const PolicyPath& policy,
                                              const Horizon& horizon, const SimConfig& cfg);

/// W_T per path (W_0 = 1), same paths as simulate_wealth for equal inputs.
std::vector<double> simulate_terminal_wealth(const MarketParams& mp, const PolicyPath& policy,
                                             const Horizon& horizon, const SimConfig& cfg,
                                             Execution exec = Execution::parallel);

struct UtilityEstimate {
    double mean;
    double std_error;
    std::size_t n_paths;
    std::size_t n_nonpositive;  // terminal wealths <= 0; mean is -inf when > 0

    bool admissible() const { return n_nonpositive == 0; }
};

UtilityEstimate estimate_expected_utility(std::span<const double> terminal_wealth, const UtilitySpec& spec);
UtilityEstimate estimate_expected_utility(std::span<const WealthTrajectory> trajectories, const UtilitySpec& spec);

/// Monte Carlo estimate of the default-free reduced log objective for W_0 = 1.
/// Uses the same Brownian streams as simulate_terminal_wealth for equal seeds.
UtilityEstimate reduced_objective_estimate(const MarketParams& mp, const PolicyPath& policy,
                                           const Horizon& horizon, const SimConfig& cfg,
                                           Execution exec = Execution::parallel);

}  // namespace merton
