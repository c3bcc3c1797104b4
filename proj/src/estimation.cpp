#include "merton/estimation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "merton/log_policy.hpp"
#include "merton/numerics.hpp"
#include "merton/power_policy.hpp"

namespace merton {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_iso_date(const std::string& s, std::chrono::year_month_day& out) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (s.size() < 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) < 3) return false;
    // Allow a time suffix ("2021-01-29 00:00:00", "2021-01-29T..."), nothing else.
    if (s.size() > 10 && s[10] != ' ' && s[10] != 'T') return false;
    out = std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    return out.ok();
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

}  // namespace

PriceSeries::PriceSeries(std::vector<std::chrono::year_month_day> dates, std::vector<double> closes)
    : dates_(std::move(dates)), closes_(std::move(closes)) {
    if (dates_.size() != closes_.size()) throw validation_error("price series dates and closes differ in length");
    if (closes_.size() < 2) throw validation_error("price series needs at least two prices");
    for (std::size_t i = 0; i < closes_.size(); ++i) {
        if (!(closes_[i] > 0.0)) throw validation_error("price series contains a non-positive close");
        if (i > 0 && !(dates_[i - 1] < dates_[i]))
            throw validation_error("price series dates must be strictly ascending (at " + format_iso_date(dates_[i]) +
                                   ")");
    }
}

std::string format_iso_date(std::chrono::year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

CsvReadResult read_price_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io_error(std::string("empty price CSV; expected ") + price_csv_schema);
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);  // UTF-8 BOM
    const auto header = split_row(line);
    std::ptrdiff_t date_col = -1;
    std::ptrdiff_t close_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = lower(header[i]);
        if (name == "date" && date_col < 0) date_col = static_cast<std::ptrdiff_t>(i);
        if (name == "close" && close_col < 0) close_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0 || close_col < 0)
        throw io_error(std::string("price CSV header lacks 'date' or 'close'; expected ") + price_csv_schema);

    std::vector<std::chrono::year_month_day> dates;
    std::vector<double> closes;
    std::size_t skipped = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        std::chrono::year_month_day d;
        double c = 0.0;
        const auto need = static_cast<std::size_t>(std::max(date_col, close_col));
        if (cells.size() <= need || !parse_iso_date(cells[static_cast<std::size_t>(date_col)], d) ||
            !parse_double(cells[static_cast<std::size_t>(close_col)], c) || !(c > 0.0)) {
            ++skipped;
            continue;
        }
        dates.push_back(d);
        closes.push_back(c);
    }
    if (closes.size() < 2)
        throw io_error("price CSV has fewer than two usable rows; expected " + std::string(price_csv_schema));
    CsvReadResult out{PriceSeries(std::move(dates), std::move(closes)), skipped, {}};
    if (skipped > 0) out.warnings.push_back("skipped " + std::to_string(skipped) + " unparseable row(s)");
    return out;
}

CsvReadResult read_price_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open price CSV '" + path + "'; expected " + price_csv_schema);
    return read_price_csv(in);
}

void write_price_csv(std::ostream& out, const PriceSeries& series) {
    out << "date,close\n";
    char buf[64];
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", series.closes()[i]);
        out << format_iso_date(series.dates()[i]) << ',' << buf << '\n';
    }
}

PriceSeries synthetic_gbm_series(double mu, double sigma, std::size_t n_returns, double trading_days,
                                 std::uint64_t seed, std::chrono::year_month_day start) {
    if (!(sigma >= 0.0) || !(trading_days > 0.0) || n_returns < 1)
        throw validation_error("synthetic_gbm_series: need sigma >= 0, trading_days > 0, n_returns >= 1");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dt = 1.0 / trading_days;
    const double drift = (mu - 0.5 * sigma * sigma) * dt;
    const double vol = sigma * std::sqrt(dt);
    std::vector<std::chrono::year_month_day> dates(n_returns + 1);
    std::vector<double> closes(n_returns + 1);
    const std::chrono::sys_days day0{start};
    double log_s = 0.0;
    for (std::size_t i = 0; i <= n_returns; ++i) {
        if (i > 0) log_s += drift + vol * normal(engine);
        dates[i] = std::chrono::year_month_day{day0 + std::chrono::days{static_cast<int>(i)}};
        closes[i] = std::exp(log_s);
    }
    return PriceSeries(std::move(dates), std::move(closes));
}

std::vector<double> log_returns(const PriceSeries& series) {
    const auto& c = series.closes();
    std::vector<double> x(c.size() - 1);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) x[i] = std::log(c[i + 1]) - std::log(c[i]);
    return x;
}

EstimationResult estimate_params(std::span<const double> returns, double trading_days) {
    const std::size_t n = returns.size();
    if (n < 2) throw validation_error("estimate_params needs at least two returns");
    if (!(trading_days > 0.0)) throw validation_error("trading_days must be positive");
    numerics::CompensatedSum sum;
    numerics::CompensatedSum sum_sq;
    for (double x : returns) {
        sum.add(x);
        sum_sq.add(x * x);
    }
    const double nd = static_cast<double>(n);
    const double mean = sum.value() / nd;
    double var = sum_sq.value() / (nd - 1.0) - nd / (nd - 1.0) * mean * mean;
    bool clamped = false;
    if (var < 0.0) {
        var = 0.0;
        clamped = true;
    }
    return EstimationResult{trading_days * mean, std::sqrt(trading_days) * std::sqrt(var), n, trading_days, clamped};
}

AllocationReport allocations_for(const MarketParams& mp, const std::vector<double>& gammas) {
    mp.validate();
    AllocationReport rep{};
    rep.market = mp;
    rep.classical_ratio = classical_merton_ratio(mp, 1.0);
    rep.pi_pre = pre_default_ratio_log(mp);
    rep.pi_post = 0.0;
    for (double g : gammas) {
        const UtilitySpec spec(g);
        if (spec.is_log()) {
            rep.power.push_back({g, rep.pi_pre, 0.0});
            continue;
        }
        const double pi_T = solve_terminal_weight(mp, g);
        rep.power.push_back({g, pi_T, WeightOde(mp, g).kappa(pi_T)});
    }
    return rep;
}

AllocationReport full_pipeline(const PriceSeries& series, const PipelineOverrides& overrides) {
    const auto returns = log_returns(series);
    const EstimationResult est = estimate_params(returns, overrides.trading_days);
    const MarketParams mp{est.mu_hat, est.sigma_hat, overrides.r, overrides.lambda};
    AllocationReport rep = allocations_for(mp, overrides.gammas);
    rep.estimate = est;
    return rep;
}

}  // namespace merton
