#include "merton/mc_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <omp.h>

#include "merton/numerics.hpp"

namespace merton::mc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

StepGrid make_step_grid(const PolicyPath& policy, double dt) {
    if (!(dt > 0.0)) throw validation_error("dt must be positive");
    const double T = policy.maturity();
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(T / dt)));
    StepGrid g;
    g.times.resize(n + 1);
    g.weights.resize(n);
    const double h = T / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        g.times[k] = static_cast<double>(k) * h;
        g.weights[k] = policy.weight_at(g.times[k]);
    }
    g.times[n] = T;
    return g;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path, Stream stream) {
    // Chained rather than xor-combined: a symmetric combination collides, e.g. (1, 0, default) with (2, 1, brownian).
    return splitmix64(splitmix64(splitmix64(seed) ^ path) ^ static_cast<std::uint64_t>(stream));
}

double draw_default_time(double lambda, PathStream& stream) {
    const double u = stream.uniform_open_zero();
    if (lambda == 0.0) return no_default;
    return -std::log(u) / lambda;
}

namespace {

// (1 - e^{-x}(1 + x)) / x, i.e. int_0^1 x e^{-x u} u du.
double tilt_factor(double x) {
    if (std::abs(x) < 1e-3) return x * (0.5 - x * (1.0 / 3.0 - x * (0.125 - x / 30.0)));
    return (-std::expm1(-x) - x * std::exp(-x)) / x;
}

}  // namespace

DefaultDensityWeights default_density_weights(double lambda, const StepGrid& grid) {
    const std::size_t n = grid.steps();
    DefaultDensityWeights dw{std::vector<double>(n), std::vector<double>(n), std::exp(-lambda * grid.maturity())};
    for (std::size_t k = 0; k < n; ++k) {
        const double x = lambda * (grid.times[k + 1] - grid.times[k]);
        const double start = std::exp(-lambda * grid.times[k]);
        dw.mass[k] = -start * std::expm1(-x);
        dw.tilt[k] = start * tilt_factor(x);
    }
    return dw;
}

double reduced_objective_path(const MarketParams& mp, const StepGrid& grid, const DefaultDensityWeights& dw,
                              std::uint64_t seed, std::uint64_t path) {
    PathStream bm(seed, path, Stream::brownian);
    const double excess = mp.excess_return();
    const double s2 = mp.variance();
    double log_x = 0.0;
    numerics::CompensatedSum running;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double h = grid.times[k + 1] - grid.times[k];
        const double pi = grid.weights[k];
        const double start = log_x;
        log_x += (mp.r + pi * excess - 0.5 * s2 * pi * pi) * h + mp.sigma * pi * std::sqrt(h) * bm.normal();
        running.add(dw.mass[k] * (std::log1p(-pi) + start));
        running.add(dw.tilt[k] * (log_x - start));
    }
    const double T = grid.maturity();
    return running.value() + dw.survival * log_x + mp.r * T * (1.0 - numerics::one_minus_exp_over(mp.lambda * T));
}

namespace serial {

void terminal_wealth(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out) {
    NullRecorder rec;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = simulate_path(mp, grid, seed, i, rec);
}

void reduced_objective(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out) {
    const DefaultDensityWeights dw = default_density_weights(mp.lambda, grid);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = reduced_objective_path(mp, grid, dw, seed, i);
}

}  // namespace serial

namespace omp {

void terminal_wealth(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        NullRecorder rec;
        out[static_cast<std::size_t>(i)] = simulate_path(mp, grid, seed, static_cast<std::uint64_t>(i), rec);
    }
}

void reduced_objective(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out) {
    const DefaultDensityWeights dw = default_density_weights(mp.lambda, grid);
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            reduced_objective_path(mp, grid, dw, seed, static_cast<std::uint64_t>(i));
    }
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace omp

}  // namespace merton::mc
