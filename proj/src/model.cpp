#include "merton/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace merton {

void MarketParams::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(r) || !std::isfinite(lambda))
        throw validation_error("market parameters must be finite");
    if (sigma <= 0.0) throw validation_error("sigma must be positive");
    if (r < 0.0) throw validation_error("r must be non-negative");
    if (lambda < 0.0) throw validation_error("lambda must be non-negative");
}

UtilitySpec::UtilitySpec(double gamma) : gamma_(gamma) {
    if (!std::isfinite(gamma) || gamma <= 0.0) throw validation_error("gamma must be positive");
    kind_ = std::abs(gamma - 1.0) <= log_tolerance ? UtilityKind::Log : UtilityKind::Power;
}

void Horizon::validate() const {
    if (!std::isfinite(T) || T <= 0.0) throw validation_error("maturity T must be positive");
    if (n_steps < 1) throw validation_error("n_steps must be at least 1");
}

std::vector<double> Horizon::grid() const {
    std::vector<double> out(n_steps + 1);
    const double h = step();
    for (std::size_t i = 0; i < n_steps; ++i) out[i] = static_cast<double>(i) * h;
    out[n_steps] = T;
    return out;
}

PolicyPath::PolicyPath(std::vector<double> times, std::vector<double> pre_weights)
    : times_(std::move(times)), pre_weights_(std::move(pre_weights)) {
    if (times_.size() < 2) throw validation_error("policy path needs at least two grid points");
    if (times_.size() != pre_weights_.size())
        throw validation_error("policy path times and weights differ in length");
    if (times_.front() != 0.0) throw validation_error("policy path must start at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) throw validation_error("policy path times must be strictly ascending");
    }
    for (std::size_t i = 0; i < pre_weights_.size(); ++i) {
        const double w = pre_weights_[i];
        if (!std::isfinite(w)) throw validation_error("policy weight is not finite");
        if (w >= 1.0)
            throw inadmissible_error("policy weight " + std::to_string(w) + " at t = " +
                                     std::to_string(times_[i]) + " is >= 1");
    }
}

PolicyPath PolicyPath::constant(double weight, double T) {
    if (!std::isfinite(T) || T <= 0.0) throw validation_error("maturity T must be positive");
    return PolicyPath({0.0, T}, {weight, weight});
}

double PolicyPath::max_weight() const { return *std::max_element(pre_weights_.begin(), pre_weights_.end()); }

bool PolicyPath::is_constant() const {
    return std::all_of(pre_weights_.begin(), pre_weights_.end(),
                       [&](double w) { return w == pre_weights_.front(); });
}

double PolicyPath::weight_at(double t) const {
    if (t <= times_.front()) return pre_weights_.front();
    if (t >= times_.back()) return pre_weights_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return pre_weights_[lo] + s * (pre_weights_[hi] - pre_weights_[lo]);
}

double utility(const UtilitySpec& spec, double w) {
    if (!(w > 0.0)) throw std::domain_error("utility is undefined for non-positive wealth");
    if (spec.is_log()) return std::log(w);
    const double one_minus = 1.0 - spec.gamma();
    // expm1 keeps (w^{1-g} - 1)/(1-g) accurate as g -> 1.
    return std::expm1(one_minus * std::log(w)) / one_minus;
}

double utility_offset(const UtilitySpec& spec) {
    if (spec.is_log()) return 0.0;
    return -1.0 / (1.0 - spec.gamma());
}

double wealth_given_default(double x_at_tau, double pi_at_tau_minus, double r, double t, double tau) {
    if (pi_at_tau_minus >= 1.0) throw inadmissible_error("weight >= 1 at default wipes out wealth");
    if (!(x_at_tau > 0.0)) throw validation_error("wealth at default must be positive");
    if (t < tau) throw validation_error("post-default wealth requested before the default time");
    return std::exp(r * (t - tau)) * (1.0 - pi_at_tau_minus) * x_at_tau;
}

}  // namespace merton
