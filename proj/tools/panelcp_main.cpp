// panelcp command line: run change-point tests on CSV panel data, simulate
// size/power tables over scenario grids, and tabulate critical values.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "panelcp/panelcp.hpp"

namespace {

using nlohmann::json;

panelcp::KernelSpec make_kernel(const std::string& name, double bandwidth) {
    if (name == "parzen") return panelcp::KernelSpec::parzen(bandwidth);
    if (name == "bartlett") return panelcp::KernelSpec::bartlett(bandwidth);
    throw panelcp::ParameterError("unknown kernel '" + name + "' (expected parzen or bartlett)");
}

panelcp::WeightFunction make_weights(const std::string& name) {
    if (name == "t2") return panelcp::quadratic_weights();
    throw panelcp::ParameterError("unknown weight sequence '" + name + "' (expected t2)");
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw panelcp::InputError("cannot open output file: " + path);
    out << text;
}

void check_known_keys(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& item : j.items()) {
        if (!known.count(item.key())) {
            throw panelcp::InputError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

panelcp::ScenarioConfig scenario_from_json(const json& j) {
    check_known_keys(j,
                     {"id", "n_panels", "horizon", "tau", "process", "phi", "alpha0", "alpha1",
                      "beta1", "innovations", "t_dof", "change_fraction", "change_lo", "change_hi",
                      "sigma", "mu"},
                     "scenario");
    panelcp::ScenarioConfig cfg;
    cfg.id = j.at("id").get<std::string>();
    cfg.n_panels = j.value("n_panels", cfg.n_panels);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.tau = j.value("tau", cfg.horizon);

    const std::string process = j.value("process", "iid");
    if (process == "iid") cfg.errors.process = panelcp::ErrorProcess::iid;
    else if (process == "ar1") cfg.errors.process = panelcp::ErrorProcess::ar1;
    else if (process == "garch11") cfg.errors.process = panelcp::ErrorProcess::garch11;
    else throw panelcp::InputError("scenario " + cfg.id + ": unknown process '" + process + "'");

    cfg.errors.phi = j.value("phi", cfg.errors.phi);
    cfg.errors.alpha0 = j.value("alpha0", cfg.errors.alpha0);
    cfg.errors.alpha1 = j.value("alpha1", cfg.errors.alpha1);
    cfg.errors.beta1 = j.value("beta1", cfg.errors.beta1);

    const std::string innovations = j.value("innovations", "gaussian");
    if (innovations == "gaussian") cfg.errors.innovations = panelcp::InnovationLaw::gaussian;
    else if (innovations == "student_t") cfg.errors.innovations = panelcp::InnovationLaw::student_t;
    else throw panelcp::InputError("scenario " + cfg.id + ": unknown innovations '" + innovations + "'");
    cfg.errors.t_dof = j.value("t_dof", cfg.errors.t_dof);

    cfg.change_fraction = j.value("change_fraction", cfg.change_fraction);
    cfg.change_lo = j.value("change_lo", cfg.change_lo);
    cfg.change_hi = j.value("change_hi", cfg.change_hi);
    cfg.sigma = j.value("sigma", cfg.sigma);

    if (j.contains("mu")) {
        if (j["mu"].is_number()) {
            cfg.mu_law = panelcp::MuLaw::constant(j["mu"].get<double>());
        } else if (j["mu"] == "normal") {
            cfg.mu_law = panelcp::MuLaw::standard_normal();
        } else {
            throw panelcp::InputError("scenario " + cfg.id + ": mu must be \"normal\" or a number");
        }
    }
    return cfg;
}

panelcp::ExperimentGrid grid_from_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw panelcp::InputError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw panelcp::InputError("config file " + path + " is not valid JSON: " + e.what());
    }
    check_known_keys(j,
                     {"replications", "null_draws", "alpha", "kernel", "bandwidth", "weights",
                      "master_seed", "scenarios"},
                     "config");
    panelcp::ExperimentGrid grid;
    grid.replications = j.value("replications", grid.replications);
    grid.null_draws = j.value("null_draws", grid.null_draws);
    grid.alpha = j.value("alpha", grid.alpha);
    grid.kernel = make_kernel(j.value("kernel", "parzen"), j.value("bandwidth", 2.0));
    grid.weights = make_weights(j.value("weights", "t2"));
    grid.master_seed = j.value("master_seed", grid.master_seed);
    if (!j.contains("scenarios") || !j["scenarios"].is_array() || j["scenarios"].empty()) {
        throw panelcp::InputError("config needs a non-empty 'scenarios' array");
    }
    for (const auto& s : j["scenarios"]) grid.scenarios.push_back(scenario_from_json(s));
    return grid;
}

struct CommonOptions {
    std::string kernel = "parzen";
    double bandwidth = 2.0;
    std::string weights = "t2";
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::string format;
    std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--kernel", opts.kernel, "Smoothing kernel (parzen or bartlett)")
        ->check(CLI::IsMember({"parzen", "bartlett"}));
    cmd->add_option("--bandwidth", opts.bandwidth, "Kernel window width h (sensible range [2, 5])");
    cmd->add_option("--weights", opts.weights, "Change-point weight sequence (t2)");
    cmd->add_option("--alpha", opts.alpha, "Significance level");
    cmd->add_option("--seed", opts.seed, "Seed for all simulated randomness");
    cmd->add_option("--output", opts.output, "Write output to a file instead of stdout");
}

int run_test_command(const CommonOptions& opts, const std::string& input, int draws,
                     const std::string& statistic) {
    const panelcp::PanelCsv csv = panelcp::read_panel_csv_file(input);
    const panelcp::PanelDataset data = csv.to_dataset();

    panelcp::TestOptions options;
    options.kernel = make_kernel(opts.kernel, opts.bandwidth);
    options.weights = make_weights(opts.weights);
    options.alpha = opts.alpha;
    options.null_draws = draws;
    options.seed = opts.seed;
    options.run_cusum = statistic == "both" || statistic == "cusum";
    options.run_ratio = statistic == "both" || statistic == "ratio";

    const panelcp::TestReport report = panelcp::run_test(data, options);
    if (opts.format == "json-report") {
        write_output(panelcp::report_to_json(report).dump(2) + "\n", opts.output);
    } else {
        write_output(panelcp::render_text(report), opts.output);
    }
    return 0;
}

int run_simulate_command(const CommonOptions& opts, const std::string& config_path,
                         const std::string& preset, bool full_scale, int jobs, int replications,
                         int draws, bool seed_given, bool alpha_given, bool kernel_given,
                         bool weights_given) {
    panelcp::ExperimentGrid grid;
    if (!config_path.empty()) {
        grid = grid_from_config(config_path);
    } else if (preset == "tables-1-2-3") {
        grid = panelcp::tables_preset(full_scale);
    } else if (!preset.empty()) {
        throw panelcp::InputError("unknown preset '" + preset + "' (expected tables-1-2-3)");
    } else {
        throw panelcp::InputError("simulate needs --config FILE or --preset tables-1-2-3");
    }
    if (full_scale) {
        grid.replications = 5000;
        grid.null_draws = 2000;
    }
    if (replications > 0) grid.replications = replications;
    if (draws > 0) grid.null_draws = draws;
    if (seed_given) grid.master_seed = opts.seed;
    if (alpha_given) grid.alpha = opts.alpha;
    if (kernel_given) grid.kernel = make_kernel(opts.kernel, opts.bandwidth);
    if (weights_given) grid.weights = make_weights(opts.weights);

    // progress on stderr only; stdout stays byte-identical across runs
    const auto progress = [](const panelcp::ScenarioConfig& scenario, int done, int total) {
        std::cerr << "[" << done << "/" << total << "] " << scenario.id << "\n";
    };
    const panelcp::RejectionTable table = panelcp::run_experiment(grid, jobs, progress);
    const auto format = opts.format == "markdown" ? panelcp::TableFormat::markdown
                                                  : panelcp::TableFormat::csv;
    write_output(panelcp::emit_table(table, format), opts.output);
    return 0;
}

int run_critical_values_command(const CommonOptions& opts, const std::string& input, int horizon,
                                const std::string& structure, double phi, int draws,
                                std::vector<double> alphas) {
    panelcp::LimitCovariance lambda;
    std::optional<double> sigma_hat;
    if (!input.empty()) {
        const panelcp::PanelDataset data = panelcp::read_panel_csv_file(input).to_dataset();
        const panelcp::CovarianceFit fit =
            panelcp::fit_covariance(data, make_kernel(opts.kernel, opts.bandwidth),
                                    make_weights(opts.weights));
        lambda = fit.lambda;
        sigma_hat = std::sqrt(fit.sigma2);
    } else if (horizon > 0) {
        if (structure == "iid") {
            lambda = panelcp::build_lambda(panelcp::CorrelationStructure::iid(horizon),
                                           panelcp::CovarianceSource::true_structure);
        } else if (structure == "ar1") {
            lambda = panelcp::build_lambda(panelcp::CorrelationStructure::ar1(phi, horizon),
                                           panelcp::CovarianceSource::true_structure);
        } else {
            throw panelcp::InputError("unknown structure '" + structure + "' (expected iid or ar1)");
        }
    } else {
        throw panelcp::InputError("critical-values needs --input FILE or --horizon T");
    }

    if (alphas.empty()) alphas = {0.10, 0.05, 0.01};
    const std::uint64_t seed = panelcp::derive_seed({opts.seed, 0xC11});
    const auto nulls = panelcp::build_null_pair(lambda, draws, seed);

    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    const bool as_csv = opts.format == "csv";
    if (as_csv) {
        out << "kind,alpha,critical_value\n";
    } else {
        out << "critical values (" << draws << " draws, T = " << lambda.horizon() << ")";
        if (sigma_hat) out << ", cusum scaled by sigma_hat = " << *sigma_hat;
        else out << ", cusum at unit error scale";
        out << "\n";
    }
    for (double alpha : alphas) {
        const int idx = panelcp::quantile_index(alpha, draws);
        const double scale = sigma_hat.value_or(1.0);
        const double cusum_cv = scale * nulls.first.samples[static_cast<std::size_t>(idx - 1)];
        const double ratio_cv = nulls.second.samples[static_cast<std::size_t>(idx - 1)];
        if (as_csv) {
            out << "cusum," << alpha << ',' << cusum_cv << '\n';
            out << "ratio," << alpha << ',' << ratio_cv << '\n';
        } else {
            out << "  alpha " << alpha << ":  cusum " << cusum_cv << "  ratio " << ratio_cv << "\n";
        }
    }
    write_output(out.str(), opts.output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change-point tests for panel data with a small fixed panel length"};
    app.require_subcommand(1);

    CommonOptions test_opts, sim_opts, cv_opts;

    auto* test_cmd = app.add_subcommand("test", "Test a CSV panel dataset for a common change in mean");
    std::string test_input;
    int test_draws = 2000;
    std::string test_statistic = "both";
    test_cmd->add_option("--input", test_input, "Panel CSV (one row per panel)")->required();
    test_cmd->add_option("--draws", test_draws, "Null-simulation draws");
    test_cmd->add_option("--statistic", test_statistic, "Statistic to run")
        ->check(CLI::IsMember({"both", "cusum", "ratio"}));
    add_common(test_cmd, test_opts);
    test_cmd->add_option("--format", test_opts.format, "Output format (text or json-report)")
        ->check(CLI::IsMember({"text", "json-report"}));

    auto* sim_cmd = app.add_subcommand("simulate", "Run a size/power experiment grid");
    std::string sim_config, sim_preset;
    bool sim_full = false;
    int sim_jobs = 1;
    int sim_replications = 0;
    int sim_draws = 0;
    sim_cmd->add_option("--config", sim_config, "Experiment grid JSON");
    sim_cmd->add_option("--preset", sim_preset, "Built-in grid (tables-1-2-3)");
    sim_cmd->add_flag("--full", sim_full, "Full scale: 5000 replications, 2000 null draws");
    sim_cmd->add_option("--jobs", sim_jobs, "Worker threads (output is identical for any value)");
    sim_cmd->add_option("--replications", sim_replications, "Override the replication count");
    sim_cmd->add_option("--draws", sim_draws, "Override the null-simulation draw count");
    add_common(sim_cmd, sim_opts);
    sim_cmd->add_option("--format", sim_opts.format, "Output format (csv or markdown)")
        ->check(CLI::IsMember({"csv", "markdown"}));

    auto* cv_cmd = app.add_subcommand("critical-values", "Tabulate simulated critical values");
    std::string cv_input, cv_structure = "iid";
    int cv_horizon = 0;
    double cv_phi = 0.3;
    int cv_draws = 2000;
    std::vector<double> cv_alphas;
    cv_cmd->add_option("--input", cv_input, "Panel CSV to estimate the covariance from");
    cv_cmd->add_option("--horizon", cv_horizon, "Panel length T for a synthetic structure");
    cv_cmd->add_option("--structure", cv_structure, "Synthetic structure (iid or ar1)")
        ->check(CLI::IsMember({"iid", "ar1"}));
    cv_cmd->add_option("--phi", cv_phi, "AR(1) coefficient for --structure ar1");
    cv_cmd->add_option("--draws", cv_draws, "Null-simulation draws");
    cv_cmd->add_option("--alpha-levels", cv_alphas, "Significance levels to tabulate");
    add_common(cv_cmd, cv_opts);
    cv_cmd->add_option("--format", cv_opts.format, "Output format (text or csv)")
        ->check(CLI::IsMember({"text", "csv"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(test_cmd)) {
            return run_test_command(test_opts, test_input, test_draws, test_statistic);
        }
        if (app.got_subcommand(sim_cmd)) {
            return run_simulate_command(sim_opts, sim_config, sim_preset, sim_full, sim_jobs,
                                        sim_replications, sim_draws,
                                        sim_cmd->count("--seed") > 0, sim_cmd->count("--alpha") > 0,
                                        sim_cmd->count("--kernel") > 0 || sim_cmd->count("--bandwidth") > 0,
                                        sim_cmd->count("--weights") > 0);
        }
        if (app.got_subcommand(cv_cmd)) {
            return run_critical_values_command(cv_opts, cv_input, cv_horizon, cv_structure, cv_phi,
                                               cv_draws, cv_alphas);
        }
    } catch (const panelcp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
