#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "panelcp/errors.hpp"

namespace panelcp {

/// Immutable N x T panel of observations. Row i-1 holds panel i, column t-1
/// holds time t; all public time/panel labels are 1-based.
class PanelDataset {
public:
    explicit PanelDataset(Eigen::MatrixXd values) : values_(std::move(values)) {
        if (values_.rows() < 1 || values_.cols() < 2) {
            throw InvalidDataError("panel dataset requires N >= 1 panels and T >= 2 time points, got " +
                                   std::to_string(values_.rows()) + " x " + std::to_string(values_.cols()));
        }
        if (!values_.allFinite()) {
            throw InvalidDataError("panel dataset contains non-finite values");
        }
    }

    static PanelDataset from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw InvalidDataError("panel dataset requires at least one panel");
        const std::size_t t = rows.front().size();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != t) {
                throw InvalidDataError("panel " + std::to_string(i + 1) + " has " +
                                       std::to_string(rows[i].size()) + " observations, expected " +
                                       std::to_string(t));
            }
            for (std::size_t s = 0; s < t; ++s) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = rows[i][s];
        }
        return PanelDataset(std::move(m));
    }

    int n_panels() const noexcept { return static_cast<int>(values_.rows()); }
    int horizon() const noexcept { return static_cast<int>(values_.cols()); }

    /// 1-based access: panel i in 1..N, time t in 1..T.
    double at(int panel, int t) const { return values_(panel - 1, t - 1); }

    const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
    Eigen::MatrixXd values_;
};

/// Per-panel running means: forward(i,t) averages the first t observations,
/// backward(i,t) the last T-t. They satisfy
///   t * forward(i,t) + (T-t) * backward(i,t) = T * forward(i,T).
struct PartialMeans {
    Eigen::MatrixXd forward;  // N x T
    Eigen::MatrixXd backward; // N x (T-1), column t-1 is the mean over s > t

    static PartialMeans compute(const PanelDataset& data) {
        const auto& y = data.values();
        const int n = data.n_panels();
        const int t_max = data.horizon();
        PartialMeans pm;
        pm.forward.resize(n, t_max);
        pm.backward.resize(n, t_max - 1);
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int t = 0; t < t_max; ++t) {
                acc += y(i, t);
                pm.forward(i, t) = acc / static_cast<double>(t + 1);
            }
            const double total = acc;
            double head = 0.0;
            for (int t = 0; t < t_max - 1; ++t) {
                head += y(i, t);
                pm.backward(i, t) = (total - head) / static_cast<double>(t_max - t - 1);
            }
        }
        return pm;
    }
};

} // namespace panelcp
