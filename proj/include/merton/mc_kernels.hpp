#pragma once

// Path-level Monte Carlo kernels. Every path draws from its own random streams,
// keyed by (seed, path index, stream id), so the serial and OpenMP variants
// write bit-identical per-path results into the output span.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "merton/model.hpp"

namespace merton::mc {

// Simulation grid with the piecewise-constant weight applied on [t_k, t_{k+1}).
struct StepGrid {
    std::vector<double> times;    // n + 1 points, 0 .. T
    std::vector<double> weights;  // n weights, left end of each step

    std::size_t steps() const { return weights.size(); }
    double maturity() const { return times.back(); }
};

// Uniform grid with max(1, round(T / dt)) steps; each step uses the policy
// weight at its left end.
StepGrid make_step_grid(const PolicyPath& policy, double dt);

enum class Stream : std::uint64_t { brownian = 0, default_time = 1 };

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path, Stream stream);

class PathStream {
   public:
    PathStream(std::uint64_t seed, std::uint64_t path, Stream stream) : engine_(stream_key(seed, path, stream)) {}

    double normal() { return normal_(engine_); }
    // Uniform on (0, 1].
    double uniform_open_zero() { return 1.0 - uniform_(engine_); }

   private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Exp(lambda) default time from the path's default_time stream; +inf for lambda = 0.
double draw_default_time(double lambda, PathStream& stream);

inline constexpr double no_default = std::numeric_limits<double>::infinity();

struct DefaultEvent {
    double tau = no_default;
    double wealth_before = 0.0;
    double wealth_after = 0.0;
    double weight = 0.0;
};

// Receives the pre-default wealth at each grid point reached before default.
struct NullRecorder {
    void on_grid(std::size_t, double) {}
};

// One jump-diffusion path with W_0 = 1; returns W_T. Pre-default steps use the
// exact log-normal update. When tau falls in (t_k, t_{k+1}], the Brownian
// increment up to tau comes from a bridge on that step's increment, the wealth
// loses the fraction weights[k] and accrues at r afterwards. The Brownian draws
// do not depend on lambda.
template <class Recorder>
double simulate_path(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::uint64_t path,
                     Recorder& rec, DefaultEvent* event = nullptr) {
    PathStream bm(seed, path, Stream::brownian);
    PathStream jump(seed, path, Stream::default_time);
    const double tau = draw_default_time(mp.lambda, jump);
    const double excess = mp.excess_return();
    const double s2 = mp.variance();
    double log_x = 0.0;
    rec.on_grid(0, 1.0);
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        const double t0 = grid.times[k];
        const double t1 = grid.times[k + 1];
        const double h = t1 - t0;
        const double pi = grid.weights[k];
        const double drift = mp.r + pi * excess - 0.5 * s2 * pi * pi;
        const double z = bm.normal();
        if (tau <= t1) {
            const double s = tau - t0;
            const double bridge_sd = std::sqrt(s * (h - s) / h);
            const double increment = (s / h) * std::sqrt(h) * z + bridge_sd * jump.normal();
            const double before = std::exp(log_x + drift * s + mp.sigma * pi * increment);
            const double after = (1.0 - pi) * before;
            if (event) *event = DefaultEvent{tau, before, after, pi};
            return after * std::exp(mp.r * (grid.maturity() - tau));
        }
        log_x += drift * h + mp.sigma * pi * std::sqrt(h) * z;
        rec.on_grid(k + 1, std::exp(log_x));
    }
    return std::exp(log_x);
}

// Per-step integrals of the default density against the linear interpolant of
// log X between grid points (exact given the endpoints, since a Brownian bridge
// has linear mean):
//   mass[k] = int_{t_k}^{t_{k+1}} lambda e^{-lambda s} ds,
//   tilt[k] = int_{t_k}^{t_{k+1}} lambda e^{-lambda s} (s - t_k) / h_k ds,
// survival = e^{-lambda T}.
struct DefaultDensityWeights {
    std::vector<double> mass;
    std::vector<double> tilt;
    double survival = 1.0;
};

DefaultDensityWeights default_density_weights(double lambda, const StepGrid& grid);

// Default-free wealth X with the same Brownian stream, scored by the reduced
// log objective (W_0 = 1):
//   int_0^T lambda e^{-lambda t} log((1 - pi_t) X_t) dt + e^{-lambda T} log X_T
//   + r (T - (1 - e^{-lambda T}) / lambda).
// Unbiased for E log W_T of the jump model on the same grid.
double reduced_objective_path(const MarketParams& mp, const StepGrid& grid, const DefaultDensityWeights& dw,
                              std::uint64_t seed, std::uint64_t path);

namespace serial {
void terminal_wealth(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out);
void reduced_objective(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out);
}  // namespace serial

namespace omp {
void terminal_wealth(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out);
void reduced_objective(const MarketParams& mp, const StepGrid& grid, std::uint64_t seed, std::span<double> out);
int max_threads();
}  // namespace omp

}  // namespace merton::mc
