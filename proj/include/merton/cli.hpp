#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "merton/model.hpp"

namespace merton::cli {

enum class Command { ratio, path, value, simulate, estimate, reproduce };
enum class OutputFormat { json, csv };

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_solver = 3;
inline constexpr int exit_io = 4;

inline constexpr const char* data_dir_env = "MERTON_DATA_DIR";
inline constexpr const char* default_dataset_name = "BOMB.csv";

// BBD-B.TO daily closes 2021-01-29 .. 2024-01-29 (751 returns): estimated market
// and the allocations derived from it. The rate r is not published; 0.0501
// reproduces the quoted classical ratio.
namespace reference {
inline constexpr double mu = 0.4027;
inline constexpr double sigma = 0.5905;
inline constexpr double r = 0.0501;
inline constexpr double lambda = 0.024;
inline constexpr double classical_ratio = 1.0112;
inline constexpr double pi_pre = 0.7432;
inline constexpr double pi_pre_5dp = 0.74333;
inline constexpr double gammas[] = {1.5, 2.0, 2.5, 3.0};
inline constexpr double pi_T[] = {0.53132, 0.40766, 0.32974, 0.27657};
inline constexpr double slopes[] = {0.00449, 0.00511, 0.00489, 0.00451};
inline constexpr double estimate_tolerance = 0.0005;
inline constexpr double ratio_tolerance = 0.0005;
inline constexpr double pi_T_tolerance = 5e-4;
inline constexpr double slope_tolerance = 5e-5;
}  // namespace reference

struct RunConfig {
    Command command = Command::ratio;
    MarketParams market{reference::mu, reference::sigma, reference::r, reference::lambda};
    // True when --mu and --sigma were both given explicitly.
    bool market_given = false;
    double gamma = 1.0;
    std::vector<double> gammas{1.0, 1.5, 2.0, 2.5, 3.0};
    std::vector<double> horizons;  // empty: {T}
    double T = 1.0;
    std::optional<std::size_t> steps;
    std::size_t paths = 100000;
    std::uint64_t seed = 42;
    OutputFormat format = OutputFormat::json;
    std::string out_path;  // empty: stdout
    std::optional<std::string> data_path;
    int precision = 6;

    // ratio
    double lambda_max = 0.5;
    std::size_t sweep_points = 51;
    // path
    std::size_t series_points = 101;
    // value
    double t = 0.0;
    double w = 1.0;
    // simulate
    std::vector<double> pi_grid;  // empty: 21 points on [-0.5, 0.95]
    std::string price_csv_out;
    double trading_days = 252.0;

    void validate() const;
};

// Main tabular series of a report (for --format csv). Cells are JSON numbers or strings.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
};

struct Report {
    nlohmann::json json;
    Table table;
};

Report cmd_ratio(const RunConfig& cfg);
Report cmd_path(const RunConfig& cfg);
Report cmd_value(const RunConfig& cfg);
Report cmd_simulate(const RunConfig& cfg);
Report cmd_estimate(const RunConfig& cfg);
Report cmd_reproduce(const RunConfig& cfg);

Report dispatch(const RunConfig& cfg);

// Rounds every floating-point number to `precision` significant digits (>= 17 keeps full precision).
nlohmann::json round_numbers(const nlohmann::json& j, int precision);
std::string render(const Report& report, OutputFormat format, int precision);

int exit_code_for(const std::exception& e);

// Validates, dispatches and writes the rendered report to cfg.out_path (or `out`).
// Errors go to `err`; returns the process exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

std::string command_name(Command c);

}  // namespace merton::cli
