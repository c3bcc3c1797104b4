#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "merton/model.hpp"

namespace merton {

/// Daily closes with strictly ascending dates.
class PriceSeries {
   public:
    PriceSeries(std::vector<std::chrono::year_month_day> dates, std::vector<double> closes);

    const std::vector<std::chrono::year_month_day>& dates() const { return dates_; }
    const std::vector<double>& closes() const { return closes_; }
    std::size_t size() const { return closes_.size(); }

   private:
    std::vector<std::chrono::year_month_day> dates_;
    std::vector<double> closes_;
};

struct CsvReadResult {
    PriceSeries series;
    std::size_t skipped_rows = 0;
    std::vector<std::string> warnings;
};

inline constexpr const char* price_csv_schema =
    "header row with a 'date' column (ISO-8601 YYYY-MM-DD) and a 'close' column (decimal > 0); "
    "other columns are ignored";

/// Parses a header + rows CSV. Column names match case-insensitively; rows with a
/// missing or unparseable date/close (e.g. "null") are skipped and counted.
/// Throws io_error for a missing header column or fewer than two usable rows,
/// validation_error for non-ascending dates.
CsvReadResult read_price_csv(std::istream& in);
CsvReadResult read_price_csv_file(const std::string& path);

void write_price_csv(std::ostream& out, const PriceSeries& series);

std::string format_iso_date(std::chrono::year_month_day d);

/// GBM closes S_0 = 1 with n_returns daily steps of 1/trading_days years and
/// consecutive calendar dates from `start`. The log returns are i.i.d.
/// N((mu - sigma^2/2) dt, sigma^2 dt).
PriceSeries synthetic_gbm_series(double mu, double sigma, std::size_t n_returns, double trading_days,
                                 std::uint64_t seed,
                                 std::chrono::year_month_day start = std::chrono::year_month_day{
                                     std::chrono::year{2000}, std::chrono::month{1}, std::chrono::day{3}});

/// log S_{i+1} - log S_i.
std::vector<double> log_returns(const PriceSeries& series);

inline constexpr double default_trading_days = 252.0;

struct EstimationResult {
    double mu_hat;
    double sigma_hat;
    std::size_t n;
    double trading_days;
    bool variance_clamped = false;
};

/// Annualized drift and volatility from daily log returns:
///   mu_hat = (n_trade / n) sum X_i,
///   sigma_hat = sqrt(n_trade) ((1/(n-1)) sum X_i^2 - (n/(n-1)) mean(X)^2)^{1/2}.
/// mu_hat is the annualized mean log return and is used as the GBM drift as is.
/// A negative variance estimate (round-off on constant input) is clamped to 0.
EstimationResult estimate_params(std::span<const double> returns, double trading_days = default_trading_days);

struct PowerAllocation {
    double gamma;
    double pi_T;
    double slope;  // kappa(pi_T); pi_t ~ pi_T - slope (T - t)
};

struct AllocationReport {
    EstimationResult estimate;
    MarketParams market;
    double classical_ratio;  // gamma = 1
    double pi_pre;           // log utility, pre-default
    double pi_post = 0.0;
    std::vector<PowerAllocation> power;  // one row per requested gamma; gamma = 1 has slope 0
};

struct PipelineOverrides {
    double r = 0.0;
    double lambda = 0.0;
    std::vector<double> gammas{1.0, 1.5, 2.0, 2.5, 3.0};
    double trading_days = default_trading_days;
};

/// Estimation followed by the log and power allocations for the estimated market.
AllocationReport full_pipeline(const PriceSeries& series, const PipelineOverrides& overrides);
/// Same, starting from given drift/volatility (estimate.n = 0).
AllocationReport allocations_for(const MarketParams& mp, const std::vector<double>& gammas);

}  // namespace merton
