// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the
// process exits nonzero if any criterion fails. Pass the CLI binary path as
// argv[1] to exercise the end-to-end determinism check through the real
// executable.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "panelcp/panelcp.hpp"

#include "oracles.hpp"

namespace {

int g_failures = 0;

void report(bool pass, const std::string& label, const std::string& detail) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << label << ": " << detail << "\n";
    if (!pass) ++g_failures;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << v;
    return out.str();
}

struct CellRates {
    double cusum = 0.0;
    double ratio = 0.0;
};

CellRates rates_for(const panelcp::RejectionTable& table, const std::string& id) {
    CellRates rates;
    for (const auto& row : table.rows) {
        if (row.scenario_id != id) continue;
        (row.kind == panelcp::StatisticKind::cusum ? rates.cusum : rates.ratio) = row.rate();
    }
    return rates;
}

int hardware_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 2 : static_cast<int>(n);
}

std::string run_command(const std::string& command) {
    std::string output;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return output;
    std::array<char, 4096> buffer{};
    std::size_t got = 0;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        output.append(buffer.data(), got);
    }
    pclose(pipe);
    return output;
}

panelcp::ScenarioConfig make_cell(const std::string& id, int horizon, int n,
                                  panelcp::ErrorProcess process, int tau, double fraction) {
    panelcp::ScenarioConfig cfg;
    cfg.id = id;
    cfg.horizon = horizon;
    cfg.n_panels = n;
    cfg.tau = tau;
    cfg.errors.process = process;
    cfg.change_fraction = fraction;
    return cfg;
}

void monte_carlo_criteria() {
    panelcp::ExperimentGrid grid;
    grid.replications = 2000;
    grid.null_draws = 1000;
    grid.alpha = 0.05;
    grid.kernel = panelcp::KernelSpec::parzen(2.0);
    grid.weights = panelcp::quadratic_weights();
    grid.master_seed = 20260810;
    // The early-change cell places the first shifted observation AT time 3;
    // in the generator's strict "shift after tau" convention that is tau = 2.
    // The reference power values correspond to that placement.
    grid.scenarios = {
        make_cell("size/T10/N50/iid", 10, 50, panelcp::ErrorProcess::iid, 10, 0.0),
        make_cell("size/T25/N50/ar1", 25, 50, panelcp::ErrorProcess::ar1, 25, 0.0),
        make_cell("power/T25/N200/iid/full", 25, 200, panelcp::ErrorProcess::iid, 12, 1.0),
        make_cell("power/T10/N50/iid/early", 10, 50, panelcp::ErrorProcess::iid, 2, 1.0),
    };

    const auto table = panelcp::run_experiment(grid, hardware_jobs());

    {
        const auto cell = rates_for(table, "size/T10/N50/iid");
        const double ratio_spec = 1.0 - cell.ratio;
        const double cusum_spec = 1.0 - cell.cusum;
        const bool pass = std::abs(ratio_spec - 0.948) <= 0.025 &&
                          std::abs(cusum_spec - 0.934) <= 0.025;
        report(pass, "criterion 1 (iid specificity, T=10 N=50, 2000 reps)",
               "ratio " + fmt(ratio_spec) + " vs .948 +/- .025, cusum " + fmt(cusum_spec) +
                   " vs .934 +/- .025");
    }
    {
        const auto cell = rates_for(table, "size/T25/N50/ar1");
        const double ratio_spec = 1.0 - cell.ratio;
        const double cusum_spec = 1.0 - cell.cusum;
        const bool pass = cusum_spec < 0.90 && ratio_spec > 0.90;
        report(pass, "criterion 2 (ar(1) size degradation, T=25 N=50)",
               "cusum specificity " + fmt(cusum_spec) + " < 0.90, ratio " + fmt(ratio_spec) +
                   " > 0.90 (reference contrast .780 vs .932)");
    }
    {
        const auto full = rates_for(table, "power/T25/N200/iid/full");
        const auto early = rates_for(table, "power/T10/N50/iid/early");
        const bool ordering = full.cusum >= full.ratio && early.cusum >= early.ratio;
        const bool pass = ordering && full.ratio >= 0.98;
        report(pass, "criterion 3 (power ordering + T=25 N=200 all-changed cell)",
               "ratio " + fmt(full.ratio) + " >= 0.98 (reference .997); cusum >= ratio in every "
               "changed cell run (" +
                   fmt(full.cusum) + ">=" + fmt(full.ratio) + ", " + fmt(early.cusum) +
                   ">=" + fmt(early.ratio) + ")");
    }
    {
        const auto early = rates_for(table, "power/T10/N50/iid/early");
        const bool pass = std::abs(early.ratio - 0.551) <= 0.05;
        report(pass, "criterion 4 (early change, first shift at t=3, T=10 N=50)",
               "ratio power " + fmt(early.ratio) + " vs .551 +/- .05");
    }
}

void oracle_equivalence_criterion() {
    std::mt19937 gen(160809);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> n_dist(1, 3);
    std::uniform_int_distribution<int> t_dist(2, 6);
    // Deviations are measured against 1e-10 * max(1, |oracle|): the ratio
    // statistic occasionally lands at ~1e4 off a near-zero denominator, where
    // two independent double-precision routes cannot agree to 1e-10 absolute.
    double worst = 0.0;
    int ratio_checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = n_dist(gen);
        const int horizon = t_dist(gen);
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
        for (auto& row : rows) {
            row.resize(static_cast<std::size_t>(horizon));
            for (double& v : row) v = normal(gen);
        }
        const auto data = panelcp::PanelDataset::from_rows(rows);
        worst = std::max(worst,
                         std::abs(panelcp::cusum_statistic(data) - oracle::cusum_bruteforce(rows)));
        if (horizon >= 4) {
            const auto expected = oracle::ratio_bruteforce(rows);
            if (expected) {
                worst = std::max(worst, std::abs(panelcp::ratio_statistic(data) - *expected) /
                                            std::max(1.0, std::abs(*expected)));
                ++ratio_checked;
            }
        }
    }
    report(worst <= 1e-10 && ratio_checked > 300,
           "criterion 5 (brute-force oracle equivalence, 1000 panels)",
           "max scaled |statistic - oracle| = " + fmt(worst, 14) + " over N<=3, T<=6 (" +
               std::to_string(ratio_checked) + " ratio comparisons)");
}

void closed_form_null_criterion() {
    const auto lambda = panelcp::build_lambda(panelcp::CorrelationStructure::iid(2),
                                              panelcp::CovarianceSource::true_structure);
    const auto null = panelcp::build_null(lambda, panelcp::StatisticKind::cusum, 100000, 60302);
    const double q95 =
        null.samples[static_cast<std::size_t>(panelcp::quantile_index(0.05, null.size()) - 1)];
    const double target = std::sqrt(0.5) * 1.959963984540054;
    const double rel = std::abs(q95 - target) / target;
    report(rel <= 0.015, "criterion 6 (closed-form cusum null, T=2, M=100000)",
           "empirical q95 " + fmt(q95) + " vs " + fmt(target) + " (rel. err. " + fmt(rel, 5) + ")");
}

void exact_identities_criterion() {
    bool pass = true;
    std::string detail;

    const auto lambda = panelcp::build_lambda(panelcp::CorrelationStructure::iid(10),
                                              panelcp::CovarianceSource::true_structure);
    for (int t = 1; t <= 10 && pass; ++t) {
        for (int v = 1; v <= 10 && pass; ++v) {
            if (lambda.lambda(t - 1, v - 1) != static_cast<double>(std::min(t, v))) {
                pass = false;
                detail = "lambda(" + std::to_string(t) + "," + std::to_string(v) + ") != min(t,v)";
            }
        }
    }

    std::mt19937 gen(4711);
    std::normal_distribution<double> normal;
    std::vector<std::vector<double>> rows(5, std::vector<double>(8));
    for (auto& row : rows) for (double& v : row) v = normal(gen);
    const auto data = panelcp::PanelDataset::from_rows(rows);
    const auto residuals = panelcp::compute_residuals(data, 5);
    const auto rho = panelcp::empirical_autocorrelation(residuals, panelcp::sigma2_hat(residuals));
    if (pass && rho[0] != 1.0) {
        pass = false;
        detail = "rho_0 != 1";
    }

    const double piece_a = 1.0 - 6.0 * 0.5 * 0.5 + 6.0 * 0.5 * 0.5 * 0.5;
    const double piece_b = 2.0 * (1.0 - 0.5) * (1.0 - 0.5) * (1.0 - 0.5);
    const double parzen_half = panelcp::kernel_value(panelcp::KernelSpec::parzen(2.0), 0.5);
    if (pass && !(piece_a == 0.25 && piece_b == 0.25 && parzen_half == 0.25)) {
        pass = false;
        detail = "parzen(0.5) pieces disagree";
    }

    double worst_segment = 0.0;
    for (int tau = 2; tau <= 8; ++tau) {
        const auto res = panelcp::compute_residuals(data, tau);
        for (int i = 0; i < res.n_panels(); ++i) {
            double head = 0.0, tail = 0.0;
            for (int t = 0; t < res.horizon(); ++t) (t < tau ? head : tail) += res.residuals(i, t);
            worst_segment = std::max({worst_segment, std::abs(head), std::abs(tail)});
        }
    }
    if (pass && worst_segment > 1e-10) {
        pass = false;
        detail = "segment sums up to " + fmt(worst_segment, 14);
    }

    report(pass, "criterion 7 (exact structural identities)",
           pass ? "lambda = min(t,v) exact, rho_0 = 1 exact, parzen(0.5) = 0.25 both branches, "
                  "segment sums <= 1e-10 (worst " + fmt(worst_segment, 14) + ")"
                : detail);
}

void invariance_criterion() {
    std::mt19937 gen(321321);
    std::normal_distribution<double> normal;
    std::normal_distribution<double> shift_dist(0.0, 5.0);
    std::uniform_real_distribution<double> scale_dist(0.1, 10.0);
    std::uniform_int_distribution<int> n_dist(1, 5);
    std::uniform_int_distribution<int> t_dist(4, 10);

    double worst_ratio = 0.0;
    double worst_cusum = 0.0;
    int tau_mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = n_dist(gen);
        const int horizon = t_dist(gen);
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
        for (auto& row : rows) {
            row.resize(static_cast<std::size_t>(horizon));
            for (double& v : row) v = normal(gen);
        }
        const auto base = panelcp::PanelDataset::from_rows(rows);
        const double scale = scale_dist(gen);
        auto mapped_rows = rows;
        for (auto& row : mapped_rows) {
            const double shift = shift_dist(gen);
            for (double& v : row) v = scale * v + shift;
        }
        const auto mapped = panelcp::PanelDataset::from_rows(mapped_rows);

        const double ratio_base = panelcp::ratio_statistic(base);
        const double ratio_mapped = panelcp::ratio_statistic(mapped);
        worst_ratio = std::max(worst_ratio, std::abs(ratio_mapped - ratio_base) /
                                                std::max(1.0, std::abs(ratio_base)));

        const double cusum_base = panelcp::cusum_statistic(base);
        const double cusum_mapped = panelcp::cusum_statistic(mapped);
        worst_cusum = std::max(worst_cusum, std::abs(cusum_mapped - scale * cusum_base) /
                                                std::max(1.0, scale * cusum_base));

        if (panelcp::estimate_changepoint(base).tau_hat !=
            panelcp::estimate_changepoint(mapped).tau_hat) {
            ++tau_mismatches;
        }
    }
    const bool pass = worst_ratio <= 1e-10 && worst_cusum <= 1e-10 && tau_mismatches == 0;
    report(pass, "criterion 8 (invariance suite, 500 trials)",
           "ratio rel. dev. " + fmt(worst_ratio, 14) + ", cusum linearity rel. dev. " +
               fmt(worst_cusum, 14) + ", tau mismatches " + std::to_string(tau_mismatches));
}

void determinism_criterion(const char* cli_path) {
    const auto dir = std::filesystem::temp_directory_path() / "panelcp-acceptance";
    std::filesystem::create_directories(dir);
    const auto config_path = dir / "grid.json";
    {
        std::ofstream config(config_path);
        config << R"({
  "replications": 200,
  "null_draws": 120,
  "alpha": 0.05,
  "kernel": "parzen",
  "bandwidth": 2.0,
  "master_seed": 77,
  "scenarios": [
    {"id": "null-cell", "n_panels": 20, "horizon": 8, "tau": 8},
    {"id": "change-cell", "n_panels": 20, "horizon": 8, "tau": 4, "change_fraction": 1.0}
  ]
})";
    }

    if (cli_path != nullptr) {
        const std::string base = std::string("'") + cli_path + "' simulate --config '" +
                                 config_path.string() + "'";
        const std::string one = run_command(base + " --jobs 1 2>/dev/null");
        const std::string eight = run_command(base + " --jobs 8 2>/dev/null");
        const bool pass = !one.empty() && one == eight;
        report(pass, "criterion 9 (simulate determinism across --jobs 1 and --jobs 8)",
               pass ? "byte-identical output (" + std::to_string(one.size()) + " bytes)"
                    : "outputs differ or are empty");
        return;
    }

    // no CLI path supplied: check the same contract at the library level
    panelcp::ExperimentGrid grid;
    grid.replications = 200;
    grid.null_draws = 120;
    grid.master_seed = 77;
    grid.scenarios.push_back(make_cell("null-cell", 8, 20, panelcp::ErrorProcess::iid, 8, 0.0));
    grid.scenarios.push_back(make_cell("change-cell", 8, 20, panelcp::ErrorProcess::iid, 4, 1.0));
    const auto one = panelcp::emit_table(panelcp::run_experiment(grid, 1), panelcp::TableFormat::csv);
    const auto eight = panelcp::emit_table(panelcp::run_experiment(grid, 8), panelcp::TableFormat::csv);
    report(one == eight, "criterion 9 (simulate determinism across jobs 1 and 8, library level)",
           one == eight ? "identical tables" : "tables differ");
}

} // namespace

int main(int argc, char** argv) {
    std::cout << "acceptance suite (2000 replications, 1000 null draws per cell)\n";
    monte_carlo_criteria();
    oracle_equivalence_criterion();
    closed_form_null_criterion();
    exact_identities_criterion();
    invariance_criterion();
    determinism_criterion(argc > 1 ? argv[1] : nullptr);
    std::cout << (g_failures == 0 ? "all criteria passed\n"
                                  : std::to_string(g_failures) + " criteria failed\n");
    return g_failures == 0 ? 0 : 1;
}
