#pragma once

#include <cmath>
#include <vector>

#include "panelcp/functionals.hpp"
#include "panelcp/panel.hpp"

namespace panelcp {

/// Centering applied per panel before accumulating partial sums.
enum class CenterMode {
    none,       // raw observations
    panel_mean, // subtract each panel's full-horizon mean
};

namespace detail {

/// Unscaled cross-panel cumulative sums: entry t-1 is sum_i sum_{s<=t} Y_{i,s}.
/// Integer-valued data keeps these exact, which the ratio skip rule needs.
inline std::vector<double> aggregate_partial_sums(const PanelDataset& data) {
    const auto& y = data.values();
    const int n = data.n_panels();
    const int horizon = data.horizon();
    std::vector<double> path(static_cast<std::size_t>(horizon), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int t = 0; t < horizon; ++t) {
            acc += y(i, t);
            path[static_cast<std::size_t>(t)] += acc;
        }
    }
    return path;
}

} // namespace detail

/// Cross-panel partial-sum process: entry t-1 holds
/// (1/sqrt(N)) * sum_i sum_{s<=t} (Y_{i,s} - m_i), with m_i chosen by mode.
inline std::vector<double> partial_sum_process(const PanelDataset& data, CenterMode mode) {
    const auto& y = data.values();
    const int n = data.n_panels();
    const int horizon = data.horizon();
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

    std::vector<double> path(static_cast<std::size_t>(horizon), 0.0);
    for (int i = 0; i < n; ++i) {
        const double center = (mode == CenterMode::panel_mean) ? y.row(i).mean() : 0.0;
        double acc = 0.0;
        for (int t = 0; t < horizon; ++t) {
            acc += y(i, t) - center;
            path[static_cast<std::size_t>(t)] += acc;
        }
    }
    for (double& v : path) v *= scale;
    return path;
}

/// CUSUM statistic: (1/sqrt(N)) * max_{t=1..T-1} |sum_i sum_{s<=t} (Y_{i,s} - mean_i)|
/// where mean_i is the full-horizon mean of panel i. Deterministic, >= 0,
/// and exactly linear in a global positive rescaling of the data.
inline double cusum_statistic(const PanelDataset& data) {
    // Full-mean centering cancels inside the bridge, so the raw sums suffice.
    const auto path = detail::aggregate_partial_sums(data);
    return cusum_limit_functional(path) / std::sqrt(static_cast<double>(data.n_panels()));
}

/// Ratio statistic: forward/backward bridge ratio of the cross-panel partial
/// sums. Scale-free, so no variance estimate is needed to calibrate it.
/// Requires T >= 4; throws DegenerateDataError when the denominator vanishes
/// at every admissible t.
inline double ratio_statistic(const PanelDataset& data) {
    return ratio_limit_functional(detail::aggregate_partial_sums(data));
}

} // namespace panelcp
