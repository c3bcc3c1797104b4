#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "merton/cli.hpp"

int main(int argc, char** argv) {
    using merton::cli::Command;
    using merton::cli::OutputFormat;

    merton::cli::RunConfig cfg;
    CLI::App app{"Optimal stock weights with an exponential default time"};
    app.fallthrough();
    app.require_subcommand(1);

    auto* o_mu = app.add_option("--mu", cfg.market.mu, "Stock drift");
    auto* o_sigma = app.add_option("--sigma", cfg.market.sigma, "Stock volatility");
    app.add_option("--r", cfg.market.r, "Risk-free rate");
    app.add_option("--lambda", cfg.market.lambda, "Default intensity");
    app.add_option("--gamma", cfg.gamma, "Relative risk aversion (1 = log)");
    app.add_option("--gammas", cfg.gammas, "Risk aversions for path/estimate")->delimiter(',');
    app.add_option("--T", cfg.T, "Horizon in years");
    app.add_option("--horizons", cfg.horizons, "Horizons for path")->delimiter(',');
    std::size_t steps = 0;
    auto* o_steps = app.add_option("--steps", steps, "ODE or simulation steps");
    app.add_option("--paths", cfg.paths, "Monte Carlo paths");
    app.add_option("--seed", cfg.seed, "Random seed");
    const std::map<std::string, OutputFormat> formats{{"json", OutputFormat::json}, {"csv", OutputFormat::csv}};
    app.add_option("--format", cfg.format, "json or csv")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    app.add_option("--out", cfg.out_path, "Output file (default stdout)");
    std::string data;
    auto* o_data = app.add_option("--data", data, "Price CSV (date,close) or - for stdin");
    app.add_option("--precision", cfg.precision, "Significant digits in output");
    app.add_option("--lambda-max", cfg.lambda_max, "Upper end of the lambda sweep (ratio)");
    app.add_option("--points", cfg.sweep_points, "Points in the lambda sweep (ratio)");
    app.add_option("--series-points", cfg.series_points, "Points per weight path (path)");
    app.add_option("--t", cfg.t, "Evaluation time (value)");
    app.add_option("--w", cfg.w, "Wealth (value)");
    app.add_option("--pi-grid", cfg.pi_grid, "Constant weights to simulate (simulate)")->delimiter(',');
    app.add_option("--price-csv", cfg.price_csv_out, "Write a synthetic GBM price CSV (simulate)");
    app.add_option("--trading-days", cfg.trading_days, "Trading days per year");

    const std::map<std::string, std::pair<Command, std::string>> commands{
        {"ratio", {Command::ratio, "Log-utility weights and the lambda sweep"}},
        {"path", {Command::path, "Power-utility weight paths"}},
        {"value", {Command::value, "Value functions at (t, w)"}},
        {"simulate", {Command::simulate, "Monte Carlo checks of the log-utility results"}},
        {"estimate", {Command::estimate, "Estimate mu and sigma from prices, then allocate"}},
        {"reproduce", {Command::reproduce, "Compare against the reference allocations"}},
    };
    for (const auto& [name, entry] : commands) {
        const Command c = entry.first;
        app.add_subcommand(name, entry.second)->callback([&cfg, c] { cfg.command = c; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : merton::cli::exit_validation;
    }
    if (o_steps->count() > 0) cfg.steps = steps;
    if (o_data->count() > 0) cfg.data_path = data;
    cfg.market_given = o_mu->count() > 0 && o_sigma->count() > 0;

    return merton::cli::run(cfg, std::cout, std::cerr);
}
