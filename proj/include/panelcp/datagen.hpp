#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelcp/errors.hpp"
#include "panelcp/panel.hpp"
#include "panelcp/rng.hpp"

namespace panelcp {

enum class ErrorProcess { iid, ar1, garch11 };
enum class InnovationLaw { gaussian, student_t };

inline const char* to_string(ErrorProcess p) {
    switch (p) {
        case ErrorProcess::iid: return "iid";
        case ErrorProcess::ar1: return "ar1";
        default: return "garch11";
    }
}

inline const char* to_string(InnovationLaw law) {
    return law == InnovationLaw::gaussian ? "gaussian" : "student_t";
}

/// Within-panel error process. Every variant is standardized to unit
/// marginal variance.
struct ErrorModel {
    ErrorProcess process = ErrorProcess::iid;
    double phi = 0.3;                       // ar1 coefficient
    double alpha0 = 1.0;                    // garch11 parameters
    double alpha1 = 0.1;
    double beta1 = 0.2;
    InnovationLaw innovations = InnovationLaw::gaussian;
    int t_dof = 5;
    bool standardize_t = true; // rescale t innovations to unit variance

    void validate() const {
        if (process == ErrorProcess::ar1 && !(std::abs(phi) < 1.0)) {
            throw ParameterError("ar1 requires |phi| < 1, got phi = " + std::to_string(phi));
        }
        if (process == ErrorProcess::garch11) {
            if (!(alpha0 > 0.0) || alpha1 < 0.0 || beta1 < 0.0 || !(alpha1 + beta1 < 1.0)) {
                throw ParameterError("garch11 requires alpha0 > 0, alpha1, beta1 >= 0 and alpha1 + beta1 < 1");
            }
        }
        if (innovations == InnovationLaw::student_t && t_dof < 3) {
            throw ParameterError("student t innovations need dof >= 3 for a finite variance, got " +
                                 std::to_string(t_dof));
        }
    }
};

namespace detail {

inline constexpr std::uint64_t kTagErrors = 0xE7701;
inline constexpr std::uint64_t kTagMu = 0xE7702;
inline constexpr std::uint64_t kTagDelta = 0xE7703;
inline constexpr std::uint64_t kTagChangeSet = 0xE7704;
inline constexpr int kAr1Burnin = 100;
inline constexpr int kGarchBurnin = 500;

inline double draw_innovation(Rng& rng, const ErrorModel& model) {
    if (model.innovations == InnovationLaw::gaussian) return rng.gaussian();
    const double raw = rng.student_t(model.t_dof);
    if (!model.standardize_t) return raw;
    const double dof = static_cast<double>(model.t_dof);
    return raw * std::sqrt((dof - 2.0) / dof);
}

inline void fill_error_row(Eigen::MatrixXd& out, int row, const ErrorModel& model, Rng& rng) {
    const int horizon = static_cast<int>(out.cols());
    switch (model.process) {
        case ErrorProcess::iid: {
            for (int t = 0; t < horizon; ++t) out(row, t) = draw_innovation(rng, model);
            return;
        }
        case ErrorProcess::ar1: {
            // x <- phi x + sqrt(1 - phi^2) z keeps unit marginal variance;
            // the burn-in washes out the start for any innovation law.
            const double mix = std::sqrt(1.0 - model.phi * model.phi);
            double x = draw_innovation(rng, model);
            for (int k = 0; k < kAr1Burnin; ++k) x = model.phi * x + mix * draw_innovation(rng, model);
            for (int t = 0; t < horizon; ++t) {
                x = model.phi * x + mix * draw_innovation(rng, model);
                out(row, t) = x;
            }
            return;
        }
        case ErrorProcess::garch11: {
            const double uncond = model.alpha0 / (1.0 - model.alpha1 - model.beta1);
            const double scale = 1.0 / std::sqrt(uncond);
            double var = uncond;
            double y = std::sqrt(var) * draw_innovation(rng, model);
            for (int k = 0; k < kGarchBurnin; ++k) {
                var = model.alpha0 + model.alpha1 * y * y + model.beta1 * var;
                y = std::sqrt(var) * draw_innovation(rng, model);
            }
            for (int t = 0; t < horizon; ++t) {
                var = model.alpha0 + model.alpha1 * y * y + model.beta1 * var;
                y = std::sqrt(var) * draw_innovation(rng, model);
                out(row, t) = y * scale;
            }
            return;
        }
    }
}

} // namespace detail

/// N x T matrix of errors: rows are independent panels, each a stationary
/// unit-variance draw of the requested process. Panel i uses the substream
/// derive_seed({seed, kTagErrors, i}), so rows can be generated in any order
/// or in parallel with identical results.
inline Eigen::MatrixXd generate_errors(const ErrorModel& model, int n_panels, int horizon,
                                       std::uint64_t seed) {
    model.validate();
    if (n_panels < 1 || horizon < 1) {
        throw ParameterError("error generation needs N >= 1 and T >= 1");
    }
    Eigen::MatrixXd out(n_panels, horizon);
    for (int i = 0; i < n_panels; ++i) {
        Rng rng(derive_seed({seed, detail::kTagErrors, static_cast<std::uint64_t>(i)}));
        detail::fill_error_row(out, i, model, rng);
    }
    return out;
}

/// Law of the panel-level means mu_i.
struct MuLaw {
    enum class Kind { normal, constant };
    Kind kind = Kind::normal;
    double location = 0.0;
    double scale = 1.0; // standard deviation for the normal kind

    static MuLaw standard_normal() { return {}; }
    static MuLaw constant(double value) { return {Kind::constant, value, 0.0}; }
};

/// One simulation cell: model, change configuration, and seed.
struct ScenarioConfig {
    std::string id;
    int n_panels = 50;
    int horizon = 10;
    int tau = 10; // tau == horizon encodes "no change"
    ErrorModel errors;
    double change_fraction = 0.0; // portion of panels with a nonzero shift
    double change_lo = 1.0;       // shift sizes are uniform on [lo, hi]
    double change_hi = 3.0;
    MuLaw mu_law = MuLaw::standard_normal();
    double sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_panels < 1) throw ParameterError("scenario needs N >= 1 panels");
        if (horizon < 2) throw ParameterError("scenario needs T >= 2");
        if (tau < 1 || tau > horizon) {
            throw ParameterError("tau must lie in 1..T = 1.." + std::to_string(horizon) +
                                 ", got " + std::to_string(tau));
        }
        if (!(change_fraction >= 0.0 && change_fraction <= 1.0)) {
            throw ParameterError("change fraction must lie in [0, 1]");
        }
        if (change_lo > change_hi) throw ParameterError("change size interval is empty");
        if (sigma < 0.0) throw ParameterError("sigma must be nonnegative");
        if (mu_law.kind == MuLaw::Kind::normal && mu_law.scale < 0.0) {
            throw ParameterError("mu scale must be nonnegative");
        }
        errors.validate();
    }

    /// ceil(change_fraction * N), with fuzz so 0.66 * 50 stays 33.
    int n_changed() const {
        return static_cast<int>(std::ceil(change_fraction * static_cast<double>(n_panels) - 1e-9));
    }
};

/// Draw one panel dataset: Y_{i,t} = mu_i + delta_i 1{t > tau} + sigma * e_{i,t}.
/// Exactly ceil(change_fraction * N) panels receive a nonzero shift, chosen
/// by the seeded generator. Fully determined by config.seed.
inline PanelDataset generate_panel(const ScenarioConfig& config) {
    config.validate();
    const int n = config.n_panels;
    const int horizon = config.horizon;

    Eigen::MatrixXd y = config.sigma == 0.0
                            ? Eigen::MatrixXd::Zero(n, horizon).eval()
                            : (config.sigma *
                               generate_errors(config.errors, n, horizon,
                                               derive_seed({config.seed, detail::kTagErrors})))
                                  .eval();

    Rng mu_rng(derive_seed({config.seed, detail::kTagMu}));
    std::vector<double> mu(static_cast<std::size_t>(n), config.mu_law.location);
    if (config.mu_law.kind == MuLaw::Kind::normal) {
        for (double& m : mu) m = config.mu_law.location + config.mu_law.scale * mu_rng.gaussian();
    }

    // Sample the changed-panel set without replacement (partial Fisher-Yates),
    // then assign shifts in ascending panel order.
    const int k = config.n_changed();
    std::vector<int> index(static_cast<std::size_t>(n));
    std::iota(index.begin(), index.end(), 0);
    Rng set_rng(derive_seed({config.seed, detail::kTagChangeSet}));
    for (int j = 0; j < k; ++j) {
        const auto pick = j + static_cast<int>(set_rng.below(static_cast<std::uint64_t>(n - j)));
        std::swap(index[static_cast<std::size_t>(j)], index[static_cast<std::size_t>(pick)]);
    }
    std::vector<int> changed(index.begin(), index.begin() + k);
    std::sort(changed.begin(), changed.end());

    Rng delta_rng(derive_seed({config.seed, detail::kTagDelta}));
    std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
    for (int i : changed) {
        delta[static_cast<std::size_t>(i)] = delta_rng.uniform(config.change_lo, config.change_hi);
    }

    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < horizon; ++t) {
            y(i, t) += mu[static_cast<std::size_t>(i)];
            if (t + 1 > config.tau) y(i, t) += delta[static_cast<std::size_t>(i)];
        }
    }
    return PanelDataset(std::move(y));
}

} // namespace panelcp
