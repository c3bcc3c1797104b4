#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace merton::numerics {

struct QuadraticRoots {
    double lower;
    double upper;
};

// Real roots of a x^2 + b x + c with a != 0, using q = -(b + sign(b) sqrt(disc)) / 2
// so neither root suffers cancellation. Throws solver_error on a negative discriminant.
QuadraticRoots solve_quadratic(double a, double b, double c);

struct RootResult {
    double root;
    int iterations;
};

// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign.
// Bisection until the bracket is below 1e-6 relative, then safeguarded Newton.
RootResult find_root_bracketed(const std::function<double(double)>& f,
                               const std::function<double(double)>& df, double lo, double hi,
                               double tol = 1e-14, int max_iter = 400);

// Classical RK4 for the autonomous ODE y' = rhs(y), integrated backward from
// y(T) = y_terminal over n_steps equal steps. out[i] approximates y(i T / n).
// The callback may throw to reject a step.
std::vector<double> rk4_backward(const std::function<double(double)>& rhs, double y_terminal, double T,
                                 std::size_t n_steps);

// (1 - e^{-x}) / x, equal to 1 at x = 0.
double one_minus_exp_over(double x);

// Neumaier compensated summation.
class CompensatedSum {
   public:
    void add(double x);
    double value() const { return sum_ + comp_; }

   private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct SampleStats {
    double mean;
    double std_error;
    std::size_t n;
};

// Mean and standard error (sample std / sqrt(n)); the sum runs in index order,
// so the result does not depend on how `values` was produced.
SampleStats sample_stats(std::span<const double> values);

}  // namespace merton::numerics
