#include "merton/mc_engine.hpp"

#include <cmath>
#include <limits>

#include "merton/mc_kernels.hpp"
#include "merton/numerics.hpp"

namespace merton {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

mc::StepGrid checked_grid(const MarketParams& mp, const PolicyPath& policy, const Horizon& horizon,
                          const SimConfig& cfg) {
    mp.validate();
    horizon.validate();
    cfg.validate();
    if (std::abs(policy.maturity() - horizon.T) > 1e-12 * std::max(1.0, horizon.T))
        throw validation_error("policy path maturity does not match the horizon");
    if (policy.max_weight() >= 1.0) throw inadmissible_error("policy has a weight >= 1");
    return mc::make_step_grid(policy, cfg.dt);
}

struct TrajectoryRecorder {
    std::vector<double>* wealth;
    void on_grid(std::size_t k, double w) { (*wealth)[k] = w; }
};

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 1) throw validation_error("n_paths must be at least 1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw validation_error("dt must be positive");
}

bool WealthTrajectory::defaulted() const { return std::isfinite(tau); }

std::vector<WealthTrajectory> simulate_wealth(const MarketParams& mp, const PolicyPath& policy,
                                              const Horizon& horizon, const SimConfig& cfg) {
    const mc::StepGrid grid = checked_grid(mp, policy, horizon, cfg);
    const std::size_t n = grid.steps();
    std::vector<WealthTrajectory> out(cfg.n_paths);
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        WealthTrajectory& tr = out[i];
        tr.times = grid.times;
        tr.wealth.assign(n + 1, nan);
        tr.weights.assign(n + 1, 0.0);
        TrajectoryRecorder rec{&tr.wealth};
        mc::DefaultEvent ev;
        const double terminal = mc::simulate_path(mp, grid, cfg.seed, i, rec, &ev);
        if (ev.tau <= grid.maturity()) {
            tr.tau = ev.tau;
            tr.wealth_before_default = ev.wealth_before;
            tr.wealth_after_default = ev.wealth_after;
        } else {
            tr.tau = mc::no_default;
            tr.wealth_before_default = nan;
            tr.wealth_after_default = nan;
        }
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = grid.times[k];
            const bool pre = t < tr.tau;
            tr.weights[k] = pre ? (k < n ? grid.weights[k] : grid.weights[n - 1]) : 0.0;
            if (!pre) tr.wealth[k] = ev.wealth_after * std::exp(mp.r * (t - tr.tau));
        }
        tr.wealth[n] = terminal;
    }
    return out;
}

std::vector<double> simulate_terminal_wealth(const MarketParams& mp, const PolicyPath& policy,
                                             const Horizon& horizon, const SimConfig& cfg, Execution exec) {
    const mc::StepGrid grid = checked_grid(mp, policy, horizon, cfg);
    std::vector<double> out(cfg.n_paths);
    if (exec == Execution::parallel) {
        mc::omp::terminal_wealth(mp, grid, cfg.seed, out);
    } else {
        mc::serial::terminal_wealth(mp, grid, cfg.seed, out);
    }
    return out;
}

UtilityEstimate estimate_expected_utility(std::span<const double> terminal_wealth, const UtilitySpec& spec) {
    if (terminal_wealth.empty()) throw validation_error("no terminal wealths to average");
    std::size_t bad = 0;
    std::vector<double> u(terminal_wealth.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = terminal_wealth[i];
        if (!(w > 0.0)) {
            ++bad;
            continue;
        }
        u[i] = utility(spec, w);
    }
    if (bad > 0) {
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), u.size(), bad};
    }
    const auto s = numerics::sample_stats(u);
    return {s.mean, s.std_error, s.n, 0};
}

UtilityEstimate estimate_expected_utility(std::span<const WealthTrajectory> trajectories, const UtilitySpec& spec) {
    std::vector<double> w(trajectories.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = trajectories[i].terminal();
    return estimate_expected_utility(w, spec);
}

UtilityEstimate reduced_objective_estimate(const MarketParams& mp, const PolicyPath& policy, const Horizon& horizon,
                                           const SimConfig& cfg, Execution exec) {
    const mc::StepGrid grid = checked_grid(mp, policy, horizon, cfg);
    std::vector<double> values(cfg.n_paths);
    if (exec == Execution::parallel) {
        mc::omp::reduced_objective(mp, grid, cfg.seed, values);
    } else {
        mc::serial::reduced_objective(mp, grid, cfg.seed, values);
    }
    const auto s = numerics::sample_stats(values);
    return {s.mean, s.std_error, s.n, 0};
}

}  // namespace merton
