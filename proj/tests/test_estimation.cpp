#include <doctest.h>

#include <cmath>
#include <sstream>

#include "merton/errors.hpp"
#include "merton/estimation.hpp"
#include "merton/log_policy.hpp"

using namespace merton;
using std::chrono::day;
using std::chrono::month;
using std::chrono::year;
using std::chrono::year_month_day;

namespace {

PriceSeries series_of(const std::vector<double>& closes) {
    std::vector<year_month_day> dates;
    const std::chrono::sys_days d0{year_month_day{year{2020}, month{1}, day{1}}};
    for (std::size_t i = 0; i < closes.size(); ++i)
        dates.emplace_back(d0 + std::chrono::days{static_cast<int>(i)});
    return PriceSeries(dates, closes);
}

}  // namespace

TEST_CASE("log returns") {
    for (double x : log_returns(series_of({3.0, 3.0, 3.0}))) CHECK(x == 0.0);
    const auto one = log_returns(series_of({1.0, std::exp(1.0)}));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> geo;
    for (int i = 0; i < 10; ++i) geo.push_back(std::pow(1.01, i));
    for (double x : log_returns(series_of(geo))) CHECK(x == doctest::Approx(std::log(1.01)).epsilon(1e-12));
}

TEST_CASE("price series validation") {
    CHECK_THROWS_AS(series_of({1.0}), validation_error);
    CHECK_THROWS_AS(series_of({1.0, 0.0}), validation_error);
    CHECK_THROWS_AS(series_of({1.0, -2.0}), validation_error);
    const year_month_day d{year{2020}, month{1}, day{1}};
    CHECK_THROWS_AS(PriceSeries({d, d}, {1.0, 2.0}), validation_error);
}

TEST_CASE("estimator on hand-computed returns") {
    const std::vector<double> x{0.01, -0.02, 0.03, 0.0};
    const auto e = estimate_params(x, 252.0);
    const double mean = 0.005;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    CHECK(e.mu_hat == doctest::Approx(252.0 * mean).epsilon(1e-14));
    CHECK(e.sigma_hat == doctest::Approx(std::sqrt(252.0 * ss / 3.0)).epsilon(1e-12));
    CHECK(e.n == 4);
    CHECK(e.trading_days == 252.0);

    const std::vector<double> zeros(10, 0.0);
    const auto z = estimate_params(zeros);
    CHECK(z.mu_hat == 0.0);
    CHECK(z.sigma_hat == 0.0);
    CHECK_THROWS_AS(estimate_params(std::vector<double>{0.1}), validation_error);
}

TEST_CASE("constant returns clamp a round-off variance") {
    const std::vector<double> flat(751, 0.0123456789);
    const auto e = estimate_params(flat);
    CHECK(e.sigma_hat >= 0.0);
    CHECK(e.sigma_hat < 1e-6);
}

TEST_CASE("scale invariance and annualization") {
    const auto s = synthetic_gbm_series(0.1, 0.3, 500, 252.0, 4);
    std::vector<double> scaled;
    for (double c : s.closes()) scaled.push_back(37.5 * c);
    const auto a = estimate_params(log_returns(s));
    const auto b = estimate_params(log_returns(PriceSeries(s.dates(), scaled)));
    CHECK(std::abs(a.mu_hat - b.mu_hat) < 1e-12);
    CHECK(std::abs(a.sigma_hat - b.sigma_hat) < 1e-12);
    const auto doubled = estimate_params(log_returns(s), 504.0);
    CHECK(std::abs(doubled.mu_hat - 2.0 * a.mu_hat) < 1e-12);
    CHECK(std::abs(doubled.sigma_hat - std::sqrt(2.0) * a.sigma_hat) < 1e-12);
}

TEST_CASE("synthetic GBM sampling distribution") {
    const double mu = 0.1;
    const double sigma = 0.3;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto e = estimate_params(log_returns(synthetic_gbm_series(mu, sigma, 2520, 252.0, seed)));
        CHECK(std::abs(e.mu_hat - (mu - 0.5 * sigma * sigma)) < 3.0 * sigma / std::sqrt(10.0));
        CHECK(std::abs(e.sigma_hat - sigma) < 0.05 * sigma);
    }
}

TEST_CASE("csv parsing") {
    std::istringstream in(
        "\xEF\xBB\xBF"
        "Date,Open,High,Low,Close,Adj Close,Volume\r\n"
        "2021-01-29,1,1,1,0.5,0.5,100\r\n"
        "2021-02-01,1,1,1,null,null,0\r\n"
        "2021-02-02,1,1,1,0.55,0.55,100\r\n"
        "garbage\r\n"
        "\r\n"
        "2021-02-03 00:00:00,1,1,1,0.6,0.6,100\r\n");
    const auto res = read_price_csv(in);
    CHECK(res.series.size() == 3);
    CHECK(res.skipped_rows == 2);
    CHECK(res.warnings.size() == 1);
    CHECK(res.series.closes()[2] == 0.6);
    CHECK(format_iso_date(res.series.dates()[1]) == "2021-02-02");
}

TEST_CASE("csv errors") {
    std::istringstream no_close("date,open\n2021-01-01,1\n2021-01-02,2\n");
    CHECK_THROWS_AS(read_price_csv(no_close), io_error);
    std::istringstream one_row("date,close\n2021-01-01,1\n");
    CHECK_THROWS_AS(read_price_csv(one_row), io_error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_price_csv(empty), io_error);
    std::istringstream descending("date,close\n2021-01-02,1\n2021-01-01,2\n");
    CHECK_THROWS_AS(read_price_csv(descending), validation_error);
    CHECK_THROWS_AS(read_price_csv_file("/nonexistent/prices.csv"), io_error);
}

TEST_CASE("csv round trip") {
    const auto s = synthetic_gbm_series(0.2, 0.4, 100, 252.0, 8);
    std::stringstream buf;
    write_price_csv(buf, s);
    const auto back = read_price_csv(buf);
    CHECK(back.skipped_rows == 0);
    CHECK(back.series.closes() == s.closes());
    CHECK(back.series.dates() == s.dates());
}

TEST_CASE("allocations from given parameters") {
    const MarketParams mp{0.4027, 0.5905, 0.0501, 0.024};
    const auto rep = allocations_for(mp, {1.0, 1.5, 2.0, 2.5, 3.0});
    CHECK(std::abs(rep.classical_ratio - 1.0112) <= 5e-4);
    CHECK(std::abs(rep.pi_pre - 0.7432) <= 5e-4);
    CHECK(rep.pi_post == 0.0);
    REQUIRE(rep.power.size() == 5);
    CHECK(rep.power[0].pi_T == rep.pi_pre);
    CHECK(rep.power[0].slope == 0.0);
    CHECK(std::abs(rep.power[1].pi_T - 0.53132) <= 5e-4);
    CHECK(std::abs(rep.power[1].slope - 0.00449) <= 5e-5);

    const MarketParams none{0.1, 0.4, 0.02, 0.0};
    const auto flat = allocations_for(none, {1.0});
    CHECK(flat.classical_ratio == doctest::Approx(flat.pi_pre).epsilon(1e-14));
}

TEST_CASE("full pipeline on synthetic prices") {
    const auto s = synthetic_gbm_series(0.3, 0.5, 751, 252.0, 21);
    PipelineOverrides ov;
    ov.r = 0.03;
    ov.lambda = 0.05;
    const auto rep = full_pipeline(s, ov);
    const auto est = estimate_params(log_returns(s));
    CHECK(rep.estimate.mu_hat == est.mu_hat);
    CHECK(rep.market.mu == est.mu_hat);
    CHECK(rep.market.sigma == est.sigma_hat);
    CHECK(rep.market.r == 0.03);
    CHECK(rep.pi_pre == pre_default_ratio_log(rep.market));
    CHECK(rep.power.size() == ov.gammas.size());
}
