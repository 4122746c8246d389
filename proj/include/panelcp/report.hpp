#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "panelcp/covariance.hpp"
#include "panelcp/errors.hpp"
#include "panelcp/limit.hpp"
#include "panelcp/statistics.hpp"

namespace panelcp {

struct TestOptions {
    KernelSpec kernel = KernelSpec::parzen(2.0);
    WeightFunction weights = quadratic_weights();
    double alpha = 0.05;
    int null_draws = 2000;
    std::uint64_t seed = 1;
    bool run_cusum = true;
    bool run_ratio = true;
};

/// Outcome for one statistic. `degenerate_null` marks the perfect-fit branch
/// where the residuals vanish and the asymptotic null collapses to a point
/// mass at zero; the statistic value may be NaN there if it is itself
/// undefined on the input.
struct StatisticDecision {
    StatisticKind kind = StatisticKind::cusum;
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::optional<double> sigma_hat;
    bool degenerate_null = false;
};

struct TestReport {
    int n_panels = 0;
    int horizon = 0;
    double alpha = 0.05;
    int null_draws = 0;
    std::uint64_t seed = 0;
    int tau_hat = 0;
    double sigma2 = 0.0;
    std::vector<double> rho;
    Eigen::MatrixXd lambda;
    std::vector<StatisticDecision> decisions;
    bool perfect_fit = false;
};

namespace detail {

inline constexpr std::uint64_t kTagReportNull = 0xC0FFEE;

inline double statistic_or_nan(const PanelDataset& data, StatisticKind kind) {
    try {
        return kind == StatisticKind::cusum ? cusum_statistic(data) : ratio_statistic(data);
    } catch (const Error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

} // namespace detail

/// Run the selected tests on one dataset and collect everything a report
/// needs: the change-point estimate, the variance and correlation estimates,
/// the limit covariance, and a decision per statistic.
///
/// When the segment-wise residuals vanish identically but the data are not
/// flat (a perfect step fit, e.g. noiseless panels), the change model
/// explains the data exactly and both tests reject with p = 0; truly
/// constant panels keep raising a degenerate-data error.
inline TestReport run_test(const PanelDataset& data, const TestOptions& options) {
    if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
        throw ParameterError("alpha must lie in (0, 1)");
    }
    if (!options.run_cusum && !options.run_ratio) {
        throw ParameterError("at least one statistic must be selected");
    }
    if (options.run_ratio && data.horizon() < 4) {
        throw UnsupportedHorizonError("ratio statistic requires T >= 4, got T = " +
                                      std::to_string(data.horizon()));
    }

    TestReport report;
    report.n_panels = data.n_panels();
    report.horizon = data.horizon();
    report.alpha = options.alpha;
    report.null_draws = options.null_draws;
    report.seed = options.seed;

    auto requested = [&]() {
        std::vector<StatisticKind> kinds;
        if (options.run_cusum) kinds.push_back(StatisticKind::cusum);
        if (options.run_ratio) kinds.push_back(StatisticKind::ratio);
        return kinds;
    }();

    try {
        const CovarianceFit fit = fit_covariance(data, options.kernel, options.weights);
        report.tau_hat = fit.changepoint.tau_hat;
        report.sigma2 = fit.sigma2;
        report.rho = fit.structure.rho;
        report.lambda = fit.lambda.lambda;

        const std::uint64_t null_seed = derive_seed({options.seed, detail::kTagReportNull});
        for (StatisticKind kind : requested) {
            const double value =
                kind == StatisticKind::cusum ? cusum_statistic(data) : ratio_statistic(data);
            const NullDistribution null = build_null(fit.lambda, kind, options.null_draws, null_seed);
            const std::optional<double> sigma_hat =
                kind == StatisticKind::cusum ? std::optional<double>(std::sqrt(fit.sigma2))
                                             : std::nullopt;
            const TestResult res = decide(value, null, options.alpha, sigma_hat);
            report.decisions.push_back({kind, res.statistic_value, res.critical_value, res.p_value,
                                        res.reject, res.sigma_hat_used, false});
        }
        return report;
    } catch (const DegenerateDataError&) {
        const ChangePointEstimate est = estimate_changepoint(data, options.weights);
        const ResidualMatrix at_tau = compute_residuals(data, est.tau_hat);
        const ResidualMatrix global = compute_residuals(data, data.horizon());
        const bool zero_at_tau = at_tau.residuals.squaredNorm() == 0.0;
        const bool flat = global.residuals.squaredNorm() == 0.0;
        if (!zero_at_tau || flat) throw;

        report.perfect_fit = true;
        report.tau_hat = est.tau_hat;
        report.sigma2 = 0.0;
        report.lambda.resize(0, 0);
        for (StatisticKind kind : requested) {
            StatisticDecision decision;
            decision.kind = kind;
            decision.statistic = detail::statistic_or_nan(data, kind);
            decision.critical_value = 0.0;
            decision.p_value = 0.0;
            decision.reject = true;
            decision.degenerate_null = true;
            report.decisions.push_back(decision);
        }
        return report;
    }
}

inline nlohmann::json report_to_json(const TestReport& report) {
    nlohmann::json j;
    j["panels"] = report.n_panels;
    j["horizon"] = report.horizon;
    j["alpha"] = report.alpha;
    j["null_draws"] = report.null_draws;
    j["seed"] = report.seed;
    j["tau_hat"] = report.tau_hat;
    j["sigma2_hat"] = report.sigma2;
    j["perfect_fit"] = report.perfect_fit;
    j["rho"] = report.rho;
    nlohmann::json lambda = nlohmann::json::array();
    for (Eigen::Index t = 0; t < report.lambda.rows(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index v = 0; v < report.lambda.cols(); ++v) row.push_back(report.lambda(t, v));
        lambda.push_back(std::move(row));
    }
    j["lambda"] = std::move(lambda);
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& d : report.decisions) {
        nlohmann::json s;
        s["kind"] = to_string(d.kind);
        if (std::isnan(d.statistic)) s["statistic"] = nullptr; else s["statistic"] = d.statistic;
        s["critical_value"] = d.critical_value;
        s["p_value"] = d.p_value;
        s["reject"] = d.reject;
        if (d.sigma_hat) s["sigma_hat"] = *d.sigma_hat;
        s["degenerate_null"] = d.degenerate_null;
        stats.push_back(std::move(s));
    }
    j["statistics"] = std::move(stats);
    return j;
}

inline std::string render_text(const TestReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << "panels: " << report.n_panels << "  horizon: " << report.horizon << "\n";
    out << "tau_hat: " << report.tau_hat;
    if (report.tau_hat == report.horizon) out << " (no change detected)";
    out << "\n";
    if (report.perfect_fit) {
        out << "residuals vanish at tau_hat: change model fits the data exactly\n";
    } else {
        out << "sigma2_hat: " << report.sigma2 << "\n";
        out << "rho_hat:";
        for (double r : report.rho) out << ' ' << r;
        out << "\n";
        if (report.horizon <= 12) {
            out << "lambda_hat:\n";
            for (Eigen::Index t = 0; t < report.lambda.rows(); ++t) {
                out << " ";
                for (Eigen::Index v = 0; v < report.lambda.cols(); ++v) {
                    out << ' ' << report.lambda(t, v);
                }
                out << "\n";
            }
        } else {
            out << "lambda_hat diagonal:";
            for (Eigen::Index t = 0; t < report.lambda.rows(); ++t) out << ' ' << report.lambda(t, t);
            out << "\n";
        }
    }
    out << "alpha: " << report.alpha << "  null draws: " << report.null_draws
        << "  seed: " << report.seed << "\n";
    for (const auto& d : report.decisions) {
        out << to_string(d.kind) << ": statistic ";
        if (std::isnan(d.statistic)) out << "undefined"; else out << d.statistic;
        out << "  critical " << d.critical_value << "  p " << d.p_value << "  -> "
            << (d.reject ? "REJECT no-change" : "keep no-change");
        if (d.degenerate_null) out << " (degenerate null: perfect step fit)";
        out << "\n";
    }
    return out.str();
}

} // namespace panelcp
