#include "merton/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>
#include <typeinfo>

#include "merton/errors.hpp"
#include "merton/estimation.hpp"
#include "merton/log_policy.hpp"
#include "merton/mc_engine.hpp"
#include "merton/power_policy.hpp"

namespace merton::cli {

using nlohmann::json;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

json market_json(const MarketParams& mp) {
    return {{"mu", mp.mu}, {"sigma", mp.sigma}, {"r", mp.r}, {"lambda", mp.lambda}};
}

json header(const RunConfig& cfg, const MarketParams& mp) {
    return {{"command", command_name(cfg.command)}, {"market", market_json(mp)}};
}

// Rounding-error floor for comparisons whose standard errors vanish (e.g. the zero policy).
constexpr double roundoff_floor = 1e-12;

std::string format_number(double v, int precision) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", std::min(precision, 17), v);
    return buf;
}

std::string csv_cell(const json& c, int precision) {
    if (c.is_null()) return "";
    if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
    if (c.is_number_integer() || c.is_number_unsigned()) return c.dump();
    if (c.is_number()) return format_number(c.get<double>(), precision);
    std::string s = c.is_string() ? c.get<std::string>() : c.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    }
    return s;
}

// nullopt when neither --data nor the environment directory provides a file.
std::optional<std::string> resolve_dataset(const RunConfig& cfg) {
    if (cfg.data_path) return cfg.data_path;
    if (const char* dir = std::getenv(data_dir_env)) {
        const auto p = std::filesystem::path(dir) / default_dataset_name;
        if (std::filesystem::exists(p)) return p.string();
    }
    return std::nullopt;
}

CsvReadResult load_dataset(const std::string& path) {
    if (path == "-") return read_price_csv(std::cin);
    return read_price_csv_file(path);
}

json estimate_json(const EstimationResult& e) {
    return {{"mu_hat", e.mu_hat},
            {"sigma_hat", e.sigma_hat},
            {"n_returns", e.n},
            {"trading_days", e.trading_days},
            {"variance_clamped", e.variance_clamped}};
}

json allocations_json(const AllocationReport& rep) {
    json power = json::array();
    for (const auto& p : rep.power) power.push_back({{"gamma", p.gamma}, {"pi_T", p.pi_T}, {"slope", p.slope}});
    return {{"market", market_json(rep.market)},
            {"classical_ratio", rep.classical_ratio},
            {"pi_pre", rep.pi_pre},
            {"pi_post", rep.pi_post},
            {"power", power}};
}

json estimate_json_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string command_name(Command c) {
    switch (c) {
        case Command::ratio: return "ratio";
        case Command::path: return "path";
        case Command::value: return "value";
        case Command::simulate: return "simulate";
        case Command::estimate: return "estimate";
        case Command::reproduce: return "reproduce";
    }
    return "unknown";
}

void RunConfig::validate() const {
    market.validate();
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw validation_error("--gamma must be positive");
    for (double g : gammas)
        if (!(g > 0.0) || !std::isfinite(g)) throw validation_error("--gammas entries must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw validation_error("--T must be positive");
    for (double h : horizons)
        if (!(h > 0.0) || !std::isfinite(h)) throw validation_error("--horizons entries must be positive");
    if (steps && *steps < 1) throw validation_error("--steps must be at least 1");
    if (paths < 1) throw validation_error("--paths must be at least 1");
    if (precision < 1 || precision > 17) throw validation_error("--precision must be in [1, 17]");
    if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max)) throw validation_error("--lambda-max must be >= 0");
    if (sweep_points < 2) throw validation_error("--points must be at least 2");
    if (series_points < 2) throw validation_error("--series-points must be at least 2");
    if (!(w > 0.0) || !std::isfinite(w)) throw validation_error("--w must be positive");
    if (!(t >= 0.0) || t > T) throw validation_error("--t must lie in [0, T]");
    if (!(trading_days > 0.0)) throw validation_error("--trading-days must be positive");
    for (double p : pi_grid)
        if (!std::isfinite(p)) throw validation_error("--pi-grid entries must be finite");
}

Report cmd_ratio(const RunConfig& cfg) {
    const MarketParams& mp = cfg.market;
    Report rep;
    rep.json = header(cfg, mp);
    rep.json["gamma"] = cfg.gamma;
    rep.json["classical_ratio"] = classical_merton_ratio(mp, cfg.gamma);
    rep.json["pi_pre"] = pre_default_ratio_log(mp);
    rep.json["pi_post"] = 0.0;
    rep.json["c_star"] = log_growth_constant(mp);

    json lambdas = json::array();
    json weights = json::array();
    rep.table.columns = {"lambda", "pi_pre"};
    bool decreasing = true;
    double prev = 0.0;
    const auto grid = linspace(0.0, cfg.lambda_max, cfg.sweep_points);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        MarketParams m = mp;
        m.lambda = grid[i];
        const double pi = pre_default_ratio_log(m);
        if (i > 0 && !(pi < prev)) decreasing = false;
        prev = pi;
        lambdas.push_back(grid[i]);
        weights.push_back(pi);
        rep.table.rows.push_back({grid[i], pi});
    }
    rep.json["sweep"] = {{"lambda", lambdas}, {"pi_pre", weights}, {"strictly_decreasing", decreasing}};
    return rep;
}

Report cmd_path(const RunConfig& cfg) {
    if (cfg.gammas.empty()) throw validation_error("path: --gammas needs at least one value");
    const MarketParams& mp = cfg.market;
    const std::vector<double> horizons = cfg.horizons.empty() ? std::vector<double>{cfg.T} : cfg.horizons;
    Report rep;
    rep.json = header(cfg, mp);
    rep.json["series"] = json::array();
    rep.table.columns = {"gamma", "T", "t", "pi", "linearized", "f"};

    for (double T : horizons) {
        for (double g : cfg.gammas) {
            const std::size_t n = cfg.steps.value_or(default_ode_steps(T));
            const PowerSolution sol = integrate_weight_path(mp, g, Horizon{T, n});
            const PsiCheck psi = psi_invariant_check(sol);
            const auto& times = sol.path.times();
            const auto& weights = sol.path.pre_weights();

            std::vector<std::size_t> idx;
            if (cfg.series_points >= times.size()) {
                for (std::size_t k = 0; k < times.size(); ++k) idx.push_back(k);
            } else {
                const double last = static_cast<double>(times.size() - 1);
                for (std::size_t j = 0; j < cfg.series_points; ++j)
                    idx.push_back(static_cast<std::size_t>(
                        std::llround(last * static_cast<double>(j) / static_cast<double>(cfg.series_points - 1))));
            }

            json ts = json::array(), pis = json::array(), lin = json::array(), fs = json::array();
            for (std::size_t k : idx) {
                const double lw = linearized_weight(sol, times[k]);
                ts.push_back(times[k]);
                pis.push_back(weights[k]);
                lin.push_back(lw);
                fs.push_back(sol.f_path[k]);
                rep.table.rows.push_back({g, T, times[k], weights[k], lw, sol.f_path[k]});
            }
            json psi_json = {{"available", psi.available}, {"reason", psi.reason}};
            psi_json["max_relative_defect"] = psi.available ? json(psi.max_relative_defect) : json(nullptr);
            rep.json["series"].push_back({{"gamma", g},
                                          {"T", T},
                                          {"steps", n},
                                          {"pi_T", sol.pi_T},
                                          {"pi_0", weights.front()},
                                          {"slope", sol.terminal_slope()},
                                          {"routed_to_log", sol.routed_to_log},
                                          {"warnings", sol.warnings},
                                          {"psi_check", psi_json},
                                          {"t", ts},
                                          {"pi", pis},
                                          {"linearized", lin},
                                          {"f", fs}});
        }
    }
    return rep;
}

Report cmd_value(const RunConfig& cfg) {
    const MarketParams& mp = cfg.market;
    const UtilitySpec spec(cfg.gamma);
    const double T = cfg.T;
    const double t = cfg.t;
    const double w = cfg.w;
    Report rep;
    rep.json = header(cfg, mp);
    rep.json["gamma"] = cfg.gamma;
    rep.json["T"] = T;
    rep.json["t"] = t;
    rep.json["w"] = w;

    double pi = 0.0;
    double v_pre = 0.0;
    double v_post = 0.0;
    if (spec.is_log()) {
        pi = pre_default_ratio_log(mp);
        v_pre = log_value_function_pre(mp, T, t, w);
        v_post = log_value_function_post(mp, T, t, w, pi);
        rep.json["utility"] = "log";
        rep.json["c_star"] = log_growth_constant(mp);
        rep.json["v_reduced"] = log_value_function_reduced(mp, T, t, w);
    } else {
        const std::size_t n = cfg.steps.value_or(default_ode_steps(T));
        const PowerSolution sol = integrate_weight_path(mp, cfg.gamma, Horizon{T, n});
        pi = sol.path.weight_at(t);
        v_pre = power_value_pre(sol, mp, t, w);
        v_post = power_value_post(mp, cfg.gamma, T, t, w, pi);
        rep.json["utility"] = "power";
        rep.json["f"] = sol.f_at(t);
        rep.json["utility_offset"] = utility_offset(spec);
        rep.json["routed_to_log"] = sol.routed_to_log;
        rep.json["warnings"] = sol.warnings;
    }
    const double total = total_value_mixture(v_pre, v_post, mp.lambda, t);
    rep.json["pi"] = pi;
    rep.json["v_pre"] = v_pre;
    rep.json["v_post"] = v_post;
    rep.json["v_total"] = total;
    rep.table.columns = {"quantity", "value"};
    for (const char* key : {"pi", "v_pre", "v_post", "v_total"}) rep.table.rows.push_back({key, rep.json[key]});
    return rep;
}

Report cmd_simulate(const RunConfig& cfg) {
    const MarketParams& mp = cfg.market;
    const double T = cfg.T;
    const UtilitySpec log_spec(1.0);
    Report rep;
    rep.json = header(cfg, mp);
    rep.json["T"] = T;
    rep.json["paths"] = cfg.paths;
    rep.json["seed"] = cfg.seed;

    // Constant policies are simulated exactly in a single step.
    const SimConfig exact{cfg.paths, cfg.seed, T};
    const std::vector<double> grid = cfg.pi_grid.empty() ? linspace(-0.5, 0.95, 21) : cfg.pi_grid;
    const double pi_star = pre_default_ratio_log(mp);

    json entries = json::array();
    rep.table.columns = {"pi", "admissible", "mean", "std_error"};
    std::optional<double> argmax;
    double best = -std::numeric_limits<double>::infinity();
    for (double pi : grid) {
        if (pi >= 1.0) {
            entries.push_back({{"pi", pi}, {"admissible", false}, {"reason", "weight >= 1"}});
            rep.table.rows.push_back({pi, false, nullptr, nullptr});
            continue;
        }
        const auto wT = simulate_terminal_wealth(mp, PolicyPath::constant(pi, T), Horizon{T, 1}, exact);
        const UtilityEstimate est = estimate_expected_utility(wT, log_spec);
        entries.push_back({{"pi", pi},
                           {"admissible", est.admissible()},
                           {"mean", estimate_json_or_null(est.mean)},
                           {"std_error", estimate_json_or_null(est.std_error)}});
        rep.table.rows.push_back(
            {pi, est.admissible(), estimate_json_or_null(est.mean), estimate_json_or_null(est.std_error)});
        if (est.admissible() && est.mean > best) {
            best = est.mean;
            argmax = pi;
        }
    }
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    double grid_step = 0.0;
    for (std::size_t i = 1; i < sorted.size(); ++i) grid_step = std::max(grid_step, sorted[i] - sorted[i - 1]);
    const bool grid_pass = argmax && std::abs(*argmax - pi_star) <= grid_step + roundoff_floor;
    rep.json["grid"] = {{"entries", entries},
                        {"argmax", argmax ? json(*argmax) : json(nullptr)},
                        {"pi_pre", pi_star},
                        {"grid_step", grid_step},
                        {"argmax_within_one_step", grid_pass}};

    bool all_pass = grid_pass;
    json closed = {{"value", log_value_function_pre(mp, T, 0.0, 1.0)}};
    if (pi_star < 1.0) {
        const auto wT = simulate_terminal_wealth(mp, PolicyPath::constant(pi_star, T), Horizon{T, 1}, exact);
        const UtilityEstimate est = estimate_expected_utility(wT, log_spec);
        const double diff = std::abs(est.mean - closed["value"].get<double>());
        const bool pass = diff <= 3.0 * est.std_error + roundoff_floor;
        closed["mc_mean"] = est.mean;
        closed["mc_std_error"] = est.std_error;
        closed["within_3_se"] = pass;
        all_pass = all_pass && pass;
    } else {
        closed["mc_mean"] = nullptr;
        closed["mc_std_error"] = nullptr;
        closed["within_3_se"] = nullptr;
        closed["reason"] = "optimal weight is 1 (no default risk and mu - r >= sigma^2); not simulable";
    }
    rep.json["closed_form"] = closed;

    const std::size_t n = cfg.steps.value_or(100);
    const SimConfig stepped{cfg.paths, cfg.seed, T / static_cast<double>(n)};
    std::vector<std::pair<std::string, PolicyPath>> policies;
    policies.emplace_back("zero", PolicyPath::constant(0.0, T));
    policies.emplace_back("short", PolicyPath::constant(-0.25, T));
    const double base = std::min(pi_star, 0.9);
    policies.emplace_back("half_optimal", PolicyPath::constant(0.5 * base, T));
    policies.emplace_back("optimal", PolicyPath::constant(base, T));
    policies.emplace_back("ramp", PolicyPath({0.0, T}, {0.0, base}));
    json fubini = json::array();
    for (const auto& [name, policy] : policies) {
        const auto wT = simulate_terminal_wealth(mp, policy, Horizon{T, n}, stepped);
        const UtilityEstimate jump = estimate_expected_utility(wT, log_spec);
        const UtilityEstimate reduced = reduced_objective_estimate(mp, policy, Horizon{T, n}, stepped);
        const double diff = std::abs(jump.mean - reduced.mean);
        const double tol = 3.0 * (jump.std_error + reduced.std_error) + roundoff_floor;
        const bool pass = diff <= tol;
        all_pass = all_pass && pass;
        fubini.push_back({{"policy", name},
                          {"jump_mean", jump.mean},
                          {"jump_std_error", jump.std_error},
                          {"reduced_mean", reduced.mean},
                          {"reduced_std_error", reduced.std_error},
                          {"abs_difference", diff},
                          {"tolerance", tol},
                          {"pass", pass}});
    }
    rep.json["fubini"] = {{"steps", n}, {"policies", fubini}};
    rep.json["all_pass"] = all_pass;

    if (!cfg.price_csv_out.empty()) {
        const auto n_returns = static_cast<std::size_t>(std::max(1.0, std::round(T * cfg.trading_days)));
        const PriceSeries series = synthetic_gbm_series(mp.mu, mp.sigma, n_returns, cfg.trading_days, cfg.seed);
        std::ofstream f(cfg.price_csv_out);
        if (!f) throw io_error("cannot write price CSV '" + cfg.price_csv_out + "'");
        write_price_csv(f, series);
        if (!f) throw io_error("failed writing price CSV '" + cfg.price_csv_out + "'");
        rep.json["price_csv"] = {{"path", cfg.price_csv_out}, {"n_returns", n_returns}};
    }
    return rep;
}

Report cmd_estimate(const RunConfig& cfg) {
    const auto path = resolve_dataset(cfg);
    if (!path)
        throw io_error(std::string("estimate: no price data; pass --data <csv|-> or set ") + data_dir_env +
                       " to a directory containing " + default_dataset_name + "; expected " + price_csv_schema);
    const CsvReadResult data = load_dataset(*path);
    PipelineOverrides ov;
    ov.r = cfg.market.r;
    ov.lambda = cfg.market.lambda;
    ov.gammas = cfg.gammas;
    ov.trading_days = cfg.trading_days;
    const AllocationReport alloc = full_pipeline(data.series, ov);

    Report rep;
    rep.json = header(cfg, alloc.market);
    rep.json["source"] = *path;
    rep.json["n_prices"] = data.series.size();
    rep.json["first_date"] = format_iso_date(data.series.dates().front());
    rep.json["last_date"] = format_iso_date(data.series.dates().back());
    rep.json["skipped_rows"] = data.skipped_rows;
    rep.json["warnings"] = data.warnings;
    rep.json["estimate"] = estimate_json(alloc.estimate);
    rep.json["allocations"] = allocations_json(alloc);
    rep.table.columns = {"gamma", "pi_T", "slope"};
    for (const auto& p : alloc.power) rep.table.rows.push_back({p.gamma, p.pi_T, p.slope});
    return rep;
}

Report cmd_reproduce(const RunConfig& cfg) {
    const auto path = resolve_dataset(cfg);
    MarketParams mp = cfg.market;
    json source;
    std::optional<EstimationResult> est;
    if (path) {
        const CsvReadResult data = load_dataset(*path);
        est = estimate_params(log_returns(data.series), cfg.trading_days);
        mp.mu = est->mu_hat;
        mp.sigma = est->sigma_hat;
        source = {{"kind", "dataset"}, {"path", *path}, {"n_prices", data.series.size()}};
    } else if (cfg.market_given) {
        source = {{"kind", "given"}};
    } else {
        throw io_error(std::string("reproduce: no dataset; pass --data <csv> or set ") + data_dir_env +
                       " to a directory containing " + default_dataset_name + " (" + price_csv_schema +
                       "), or give --mu and --sigma to skip the estimation cells");
    }

    Report rep;
    rep.json = header(cfg, mp);
    rep.json["source"] = source;
    rep.table.columns = {"cell", "expected", "actual", "tolerance", "status"};
    json cells = json::array();
    bool all_pass = true;
    auto add = [&](const std::string& name, double expected, std::optional<double> actual, double tol) {
        std::string status = "skipped";
        if (actual) {
            status = std::abs(*actual - expected) <= tol ? "pass" : "fail";
            if (status == "fail") all_pass = false;
        }
        const json a = actual ? json(*actual) : json(nullptr);
        cells.push_back(
            {{"cell", name}, {"expected", expected}, {"actual", a}, {"tolerance", tol}, {"status", status}});
        rep.table.rows.push_back({name, expected, a, tol, status});
    };

    add("mu_hat", reference::mu, est ? std::optional<double>(est->mu_hat) : std::nullopt,
        reference::estimate_tolerance);
    add("sigma_hat", reference::sigma, est ? std::optional<double>(est->sigma_hat) : std::nullopt,
        reference::estimate_tolerance);
    add("classical_ratio", reference::classical_ratio, classical_merton_ratio(mp, 1.0), reference::ratio_tolerance);
    add("pi_pre", reference::pi_pre, pre_default_ratio_log(mp), reference::ratio_tolerance);
    for (std::size_t i = 0; i < std::size(reference::gammas); ++i) {
        const double g = reference::gammas[i];
        const double pi_T = solve_terminal_weight(mp, g);
        char label[32];
        std::snprintf(label, sizeof(label), "gamma=%g", g);
        add(std::string(label) + " pi_T", reference::pi_T[i], pi_T, reference::pi_T_tolerance);
        add(std::string(label) + " slope", reference::slopes[i], WeightOde(mp, g).kappa(pi_T),
            reference::slope_tolerance);
    }
    rep.json["cells"] = cells;
    rep.json["all_pass"] = all_pass;
    return rep;
}

Report dispatch(const RunConfig& cfg) {
    switch (cfg.command) {
        case Command::ratio: return cmd_ratio(cfg);
        case Command::path: return cmd_path(cfg);
        case Command::value: return cmd_value(cfg);
        case Command::simulate: return cmd_simulate(cfg);
        case Command::estimate: return cmd_estimate(cfg);
        case Command::reproduce: return cmd_reproduce(cfg);
    }
    throw validation_error("unknown command");
}

json round_numbers(const json& j, int precision) {
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (precision >= 17 || !std::isfinite(v)) return j;
        return std::strtod(format_number(v, precision).c_str(), nullptr);
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(round_numbers(e, precision));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = round_numbers(it.value(), precision);
        return out;
    }
    return j;
}

std::string render(const Report& report, OutputFormat format, int precision) {
    if (format == OutputFormat::json) return round_numbers(report.json, precision).dump(2) + "\n";
    std::ostringstream os;
    for (std::size_t i = 0; i < report.table.columns.size(); ++i)
        os << (i ? "," : "") << report.table.columns[i];
    os << '\n';
    for (const auto& row : report.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i], precision);
        os << '\n';
    }
    return os.str();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const io_error*>(&e)) return exit_io;
    if (dynamic_cast<const solver_error*>(&e)) return exit_solver;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return exit_validation;
    if (dynamic_cast<const std::domain_error*>(&e)) return exit_validation;
    return 1;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        const std::string text = render(dispatch(cfg), cfg.format, cfg.precision);
        if (cfg.out_path.empty()) {
            out << text;
        } else {
            std::ofstream f(cfg.out_path);
            if (!f) throw io_error("cannot open output file '" + cfg.out_path + "'");
            f << text;
            if (!f) throw io_error("failed writing output file '" + cfg.out_path + "'");
        }
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace merton::cli
