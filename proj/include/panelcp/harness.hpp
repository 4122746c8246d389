#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "panelcp/covariance.hpp"
#include "panelcp/datagen.hpp"
#include "panelcp/errors.hpp"
#include "panelcp/limit.hpp"
#include "panelcp/statistics.hpp"

namespace panelcp {

/// Full description of a size/power experiment: a list of scenarios run with
/// common replication counts, null-simulation size, level, kernel, and
/// weight sequence.
struct ExperimentGrid {
    std::vector<ScenarioConfig> scenarios;
    int replications = 2000;
    int null_draws = 1000;
    double alpha = 0.05;
    KernelSpec kernel = KernelSpec::parzen(2.0);
    WeightFunction weights = quadratic_weights();
    std::uint64_t master_seed = 1;

    void validate() const {
        if (replications < 1) throw ParameterError("experiment needs replications >= 1");
        if (null_draws < kMinNullDraws) {
            throw ParameterError("experiment needs null_draws >= " + std::to_string(kMinNullDraws));
        }
        if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
        if (scenarios.empty()) throw ParameterError("experiment grid has no scenarios");
        std::set<std::string> ids;
        for (const auto& s : scenarios) {
            s.validate();
            if (s.id.empty()) throw ParameterError("every scenario needs a non-empty id");
            if (!ids.insert(s.id).second) throw ParameterError("duplicate scenario id: " + s.id);
        }
    }
};

/// One (scenario, statistic) cell of the output table. Counts are stored so
/// the rate times the replication count is an integer by construction.
struct RejectionRow {
    std::string scenario_id;
    StatisticKind kind = StatisticKind::cusum;
    int rejections = 0;
    int replications = 0; // non-degenerate replications that produced a decision
    int degenerate = 0;

    double rate() const { return static_cast<double>(rejections) / static_cast<double>(replications); }
    double mcse() const {
        const double p = rate();
        return std::sqrt(p * (1.0 - p) / static_cast<double>(replications));
    }
};

struct RejectionTable {
    std::vector<RejectionRow> rows;
};

namespace detail {

inline constexpr std::uint64_t kTagPanel = 0x9A1701;
inline constexpr std::uint64_t kTagNull = 0x9A1702;

struct RepCounts {
    int cusum_rejects = 0;
    int ratio_rejects = 0;
    int decided = 0;
    int degenerate = 0;

    RepCounts& operator+=(const RepCounts& other) {
        cusum_rejects += other.cusum_rejects;
        ratio_rejects += other.ratio_rejects;
        decided += other.decided;
        degenerate += other.degenerate;
        return *this;
    }
};

/// One replication: draw a panel, fit the covariance pipeline, simulate both
/// nulls from one shared set of draws, and record both decisions.
/// Everything depends only on (grid inputs, rep_seed).
inline RepCounts run_replication(const ScenarioConfig& scenario, const ExperimentGrid& grid,
                                 std::uint64_t rep_seed) {
    RepCounts counts;
    try {
        ScenarioConfig cfg = scenario;
        cfg.seed = derive_seed({rep_seed, kTagPanel});
        const PanelDataset data = generate_panel(cfg);

        const CovarianceFit fit = fit_covariance(data, grid.kernel, grid.weights);
        const double cusum_value = cusum_statistic(data);
        const double ratio_value = ratio_statistic(data);

        const auto nulls = build_null_pair(fit.lambda, grid.null_draws,
                                           derive_seed({rep_seed, kTagNull}));
        const TestResult cusum_res =
            decide(cusum_value, nulls.first, grid.alpha, std::sqrt(fit.sigma2));
        const TestResult ratio_res = decide(ratio_value, nulls.second, grid.alpha);

        counts.decided = 1;
        counts.cusum_rejects = cusum_res.reject ? 1 : 0;
        counts.ratio_rejects = ratio_res.reject ? 1 : 0;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::degenerate_data || e.kind() == ErrorKind::estimation_quality) {
            counts.degenerate = 1;
        } else {
            throw;
        }
    }
    return counts;
}

} // namespace detail

/// Called after each scenario completes: (scenario, 1-based index, total).
using ProgressFn = std::function<void(const ScenarioConfig&, int, int)>;

/// Run every scenario of the grid. Replication r of scenario s is seeded by
/// derive_seed({master_seed, hash(s.id), r}), so the output is identical for
/// any degree of parallelism. Degenerate replications are counted per
/// scenario and tolerated up to 1% of the replication budget.
inline RejectionTable run_experiment(const ExperimentGrid& grid, int jobs = 1,
                                     const ProgressFn& progress = {}) {
    grid.validate();
    jobs = std::max(1, jobs);
    int completed = 0;

    RejectionTable table;
    for (const auto& scenario : grid.scenarios) {
        const std::uint64_t scenario_hash = hash_string(scenario.id);
        const int reps = grid.replications;

        auto run_range = [&](int begin, int end) {
            detail::RepCounts partial;
            for (int r = begin; r < end; ++r) {
                const std::uint64_t rep_seed =
                    derive_seed({grid.master_seed, scenario_hash, static_cast<std::uint64_t>(r)});
                partial += detail::run_replication(scenario, grid, rep_seed);
            }
            return partial;
        };

        detail::RepCounts counts;
        if (jobs == 1) {
            counts = run_range(0, reps);
        } else {
            const int chunk = (reps + jobs - 1) / jobs;
            std::vector<std::future<detail::RepCounts>> futures;
            for (int begin = 0; begin < reps; begin += chunk) {
                const int end = std::min(begin + chunk, reps);
                futures.push_back(std::async(std::launch::async, run_range, begin, end));
            }
            for (auto& f : futures) counts += f.get();
        }

        if (static_cast<double>(counts.degenerate) > 0.01 * static_cast<double>(reps)) {
            throw DegenerateDataError("scenario " + scenario.id + ": " +
                                      std::to_string(counts.degenerate) + " of " +
                                      std::to_string(reps) + " replications were degenerate");
        }

        table.rows.push_back({scenario.id, StatisticKind::cusum, counts.cusum_rejects,
                              counts.decided, counts.degenerate});
        table.rows.push_back({scenario.id, StatisticKind::ratio, counts.ratio_rejects,
                              counts.decided, counts.degenerate});
        ++completed;
        if (progress) progress(scenario, completed, static_cast<int>(grid.scenarios.size()));
    }
    return table;
}

enum class TableFormat { csv, markdown };

/// Render the table with a stable column order (scenario, kind, rate, mcse,
/// replications, degenerate). CSV keeps six decimals; markdown keeps four.
inline std::string emit_table(const RejectionTable& table, TableFormat format) {
    std::ostringstream out;
    auto fixed = [&](double v, int digits) {
        std::ostringstream cell;
        cell.setf(std::ios::fixed);
        cell.precision(digits);
        cell << v;
        return cell.str();
    };

    if (format == TableFormat::csv) {
        out << "scenario,kind,rate,mcse,replications,degenerate\n";
        for (const auto& row : table.rows) {
            out << row.scenario_id << ',' << to_string(row.kind) << ',' << fixed(row.rate(), 6)
                << ',' << fixed(row.mcse(), 6) << ',' << row.replications << ','
                << row.degenerate << '\n';
        }
        return out.str();
    }

    out << "| scenario | kind | rate | mcse | replications | degenerate |\n";
    out << "| --- | --- | --- | --- | --- | --- |\n";
    for (const auto& row : table.rows) {
        out << "| " << row.scenario_id << " | " << to_string(row.kind) << " | "
            << fixed(row.rate(), 4) << " | " << fixed(row.mcse(), 4) << " | "
            << row.replications << " | " << row.degenerate << " |\n";
    }
    return out.str();
}

/// The full simulation grid behind the shipped size/power study: H0 cells,
/// mid-panel change cells at 33/66/100% changed panels, and early-change
/// cells, crossed over T, N, error process, and innovation law. Desk scale
/// uses 2000 replications with 1000 null draws; full scale restores
/// 5000/2000.
inline ExperimentGrid tables_preset(bool full_scale) {
    ExperimentGrid grid;
    grid.replications = full_scale ? 5000 : 2000;
    grid.null_draws = full_scale ? 2000 : 1000;

    const int horizons[] = {10, 25};
    const int panel_counts[] = {50, 200};
    const ErrorProcess processes[] = {ErrorProcess::iid, ErrorProcess::ar1, ErrorProcess::garch11};
    const InnovationLaw laws[] = {InnovationLaw::gaussian, InnovationLaw::student_t};

    auto make = [](const std::string& id, int horizon, int n, ErrorProcess process,
                   InnovationLaw law, int tau, double fraction) {
        ScenarioConfig cfg;
        cfg.id = id;
        cfg.horizon = horizon;
        cfg.n_panels = n;
        cfg.tau = tau;
        cfg.errors.process = process;
        cfg.errors.innovations = law;
        cfg.change_fraction = fraction;
        return cfg;
    };

    for (int horizon : horizons) {
        for (int n : panel_counts) {
            for (auto process : processes) {
                for (auto law : laws) {
                    std::string stem = "T" + std::to_string(horizon) + "/N" + std::to_string(n) +
                                       "/" + to_string(process) + "/" + to_string(law);
                    grid.scenarios.push_back(
                        make("h0/" + stem, horizon, n, process, law, horizon, 0.0));
                }
            }
        }
    }
    const double fractions[] = {0.33, 0.66, 1.0};
    for (double fraction : fractions) {
        const std::string block = "h1-" + std::to_string(static_cast<int>(fraction * 100 + 0.5));
        for (int horizon : horizons) {
            for (int n : panel_counts) {
                for (auto process : processes) {
                    for (auto law : laws) {
                        std::string stem = "T" + std::to_string(horizon) + "/N" + std::to_string(n) +
                                           "/" + to_string(process) + "/" + to_string(law);
                        grid.scenarios.push_back(
                            make(block + "/" + stem, horizon, n, process, law, horizon / 2, fraction));
                    }
                }
            }
        }
    }
    // Early-change cells place the FIRST shifted observation at time 3
    // (T=10) resp. 5 (T=25); with the generator's strict shift-after-tau
    // convention that is tau = 2 resp. 4.
    for (int horizon : horizons) {
        const int first_shifted = horizon == 10 ? 3 : 5;
        for (int n : panel_counts) {
            std::string id = "early/T" + std::to_string(horizon) + "/shift" +
                             std::to_string(first_shifted) + "/N" + std::to_string(n);
            grid.scenarios.push_back(make(id, horizon, n, ErrorProcess::iid,
                                          InnovationLaw::gaussian, first_shifted - 1, 1.0));
        }
    }
    return grid;
}

} // namespace panelcp
