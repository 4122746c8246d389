#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelcp/errors.hpp"
#include "panelcp/panel.hpp"

namespace panelcp {

/// Weight sequence w(t) for the change-point criterion, indexed by 1-based t.
using WeightFunction = std::function<double(int)>;

/// w(t) = t^2, the default used throughout the simulation harness.
inline WeightFunction quadratic_weights() {
    return [](int t) { return static_cast<double>(t) * static_cast<double>(t); };
}

struct ChangePointEstimate {
    int tau_hat = 0;               // 1-based, in 2..T; T reads as "no change"
    std::vector<double> objective; // criterion value at t = 2..T (index t-2)
    std::vector<double> weights;   // w(t) actually used, same indexing
};

/// Least-squares change-point estimate:
///   tau_hat = argmin_{t=2..T} (1/w(t)) sum_i sum_{s<=t} (Y_{i,s} - forward_mean_{i,t})^2.
/// Ties break toward the LARGEST t, so an identically-zero criterion yields
/// tau_hat = T.
inline ChangePointEstimate estimate_changepoint(const PanelDataset& data,
                                                const WeightFunction& weights = quadratic_weights()) {
    const auto& y = data.values();
    const int n = data.n_panels();
    const int horizon = data.horizon();

    ChangePointEstimate est;
    est.objective.reserve(static_cast<std::size_t>(horizon - 1));
    est.weights.reserve(static_cast<std::size_t>(horizon - 1));

    // sum_{s<=t} (Y - mean_t)^2 = Q(t) - P(t)^2 / t via per-panel prefix sums.
    std::vector<double> sum_sq(static_cast<std::size_t>(horizon - 1), 0.0); // t = 2..T
    for (int i = 0; i < n; ++i) {
        double p = y(i, 0);
        double q = y(i, 0) * y(i, 0);
        for (int t = 2; t <= horizon; ++t) {
            p += y(i, t - 1);
            q += y(i, t - 1) * y(i, t - 1);
            double centered = q - p * p / static_cast<double>(t);
            if (centered < 0.0) centered = 0.0; // cancellation guard
            sum_sq[static_cast<std::size_t>(t - 2)] += centered;
        }
    }

    double best = 0.0;
    for (int t = 2; t <= horizon; ++t) {
        const double w = weights(t);
        if (!(w > 0.0)) {
            throw ParameterError("weight function must be positive, got w(" + std::to_string(t) +
                                 ") = " + std::to_string(w));
        }
        const double value = sum_sq[static_cast<std::size_t>(t - 2)] / w;
        est.objective.push_back(value);
        est.weights.push_back(w);
        if (t == 2 || value <= best) {
            best = value;
            est.tau_hat = t;
        }
    }
    return est;
}

struct ResidualMatrix {
    Eigen::MatrixXd residuals; // N x T
    int tau_used = 0;

    int n_panels() const noexcept { return static_cast<int>(residuals.rows()); }
    int horizon() const noexcept { return static_cast<int>(residuals.cols()); }
};

/// Segment-wise centering at the supplied change point: observations up to
/// tau lose the head mean, observations after tau lose the tail mean. Both
/// segments of every panel sum to zero (up to rounding).
inline ResidualMatrix compute_residuals(const PanelDataset& data, int tau) {
    const int horizon = data.horizon();
    if (tau < 2 || tau > horizon) {
        throw ParameterError("change point must lie in 2..T = 2.." + std::to_string(horizon) +
                             ", got " + std::to_string(tau));
    }
    const auto& y = data.values();
    const int n = data.n_panels();

    ResidualMatrix out;
    out.tau_used = tau;
    out.residuals.resize(n, horizon);
    for (int i = 0; i < n; ++i) {
        double head = 0.0;
        for (int t = 0; t < tau; ++t) head += y(i, t);
        head /= static_cast<double>(tau);
        double tail = 0.0;
        if (tau < horizon) {
            for (int t = tau; t < horizon; ++t) tail += y(i, t);
            tail /= static_cast<double>(horizon - tau);
        }
        for (int t = 0; t < horizon; ++t) {
            out.residuals(i, t) = y(i, t) - (t < tau ? head : tail);
        }
    }
    return out;
}

} // namespace panelcp
