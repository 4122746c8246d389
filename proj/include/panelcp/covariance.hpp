#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "panelcp/changepoint.hpp"
#include "panelcp/errors.hpp"
#include "panelcp/kernel.hpp"
#include "panelcp/panel.hpp"

namespace panelcp {

/// Mean of squared residuals over all N*T cells. Accumulates panel-by-panel
/// in time order, the same order empirical_autocorrelation uses at lag zero,
/// so rho_0 comes out as exactly 1 when fed this estimate.
inline double sigma2_hat(const ResidualMatrix& residuals) {
    const auto& e = residuals.residuals;
    double total = 0.0;
    for (int i = 0; i < residuals.n_panels(); ++i) {
        for (int s = 0; s < residuals.horizon(); ++s) total += e(i, s) * e(i, s);
    }
    const double value = total / static_cast<double>(e.size());
    if (value <= 0.0) {
        throw DegenerateDataError("all residuals are zero; error variance cannot be estimated");
    }
    return value;
}

/// Empirical autocorrelations of the residuals:
///   rho_t = (1 / (sigma2 * N * T)) * sum_i sum_{s<=T-t} e_{i,s} e_{i,s+t},
/// for t = 0..T-1. The divisor is N*T at every lag, which shrinks high lags
/// toward zero; estimates are clamped to [-1, 1].
inline std::vector<double> empirical_autocorrelation(const ResidualMatrix& residuals,
                                                     double sigma2) {
    if (!(sigma2 > 0.0)) {
        throw DegenerateDataError("residual variance is zero; autocorrelation undefined");
    }
    const auto& e = residuals.residuals;
    const int n = residuals.n_panels();
    const int horizon = residuals.horizon();
    const double cells = static_cast<double>(e.size());

    std::vector<double> rho(static_cast<std::size_t>(horizon), 0.0);
    for (int lag = 0; lag < horizon; ++lag) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int s = 0; s + lag < horizon; ++s) {
                acc += e(i, s) * e(i, s + lag);
            }
        }
        // (acc / (N T)) / sigma2: dividing the lag-zero sum by itself keeps
        // rho_0 at exactly 1 when sigma2 comes from the same residuals.
        rho[static_cast<std::size_t>(lag)] = std::clamp((acc / cells) / sigma2, -1.0, 1.0);
    }
    return rho;
}

/// Kernel-smoothed cumulative autocorrelation:
///   r(t) = sum_{|s|<t} (t - |s|) kappa(s/h) rho_{|s|},  t = 1..T.
inline std::vector<double> cumulative_autocorrelation(const std::vector<double>& rho,
                                                      const KernelSpec& kernel) {
    const int horizon = static_cast<int>(rho.size());
    const double h = kernel.bandwidth();
    std::vector<double> r(rho.size(), 0.0);
    for (int t = 1; t <= horizon; ++t) {
        double acc = static_cast<double>(t) * kernel(0.0) * rho[0];
        for (int s = 1; s < t; ++s) {
            acc += 2.0 * static_cast<double>(t - s) * kernel(static_cast<double>(s) / h) *
                   rho[static_cast<std::size_t>(s)];
        }
        r[static_cast<std::size_t>(t - 1)] = acc;
    }
    return r;
}

/// Kernel-smoothed shifted cumulative correlation:
///   R(t,v) = sum_{s=1..t} sum_{u=t+1..v} kappa((u-s)/h) rho_{u-s},  t < v.
/// Returned as a T x T matrix with the strict upper triangle populated.
inline Eigen::MatrixXd shifted_cumulative_correlation(const std::vector<double>& rho,
                                                      const KernelSpec& kernel) {
    const int horizon = static_cast<int>(rho.size());
    const double h = kernel.bandwidth();

    // Dampened lag weights are shared by every (t, v) pair.
    std::vector<double> weighted(rho.size(), 0.0);
    for (int lag = 1; lag < horizon; ++lag) {
        weighted[static_cast<std::size_t>(lag)] =
            kernel(static_cast<double>(lag) / h) * rho[static_cast<std::size_t>(lag)];
    }

    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(horizon, horizon);
    for (int t = 1; t < horizon; ++t) {
        for (int v = t + 1; v <= horizon; ++v) {
            double acc = 0.0;
            for (int s = 1; s <= t; ++s) {
                for (int u = t + 1; u <= v; ++u) {
                    acc += weighted[static_cast<std::size_t>(u - s)];
                }
            }
            table(t - 1, v - 1) = acc;
        }
    }
    return table;
}

/// Intra-panel correlation structure on a fixed horizon: the lagwise
/// autocorrelations rho_t, the cumulative autocorrelation r(t), and the
/// shifted cumulative correlation R(t,v).
struct CorrelationStructure {
    std::vector<double> rho;  // lag 0..T-1
    std::vector<double> r;    // r(t), index t-1
    Eigen::MatrixXd shifted;  // R(t,v) in the strict upper triangle

    int horizon() const noexcept { return static_cast<int>(r.size()); }

    double rho_at(int lag) const { return rho.at(static_cast<std::size_t>(lag)); }
    double r_at(int t) const { return r.at(static_cast<std::size_t>(t - 1)); }
    double R_at(int t, int v) const { return shifted(t - 1, v - 1); } // requires t < v

    /// Assemble from an autocorrelation sequence, smoothing with the kernel.
    static CorrelationStructure from_rho(std::vector<double> rho_in, const KernelSpec& kernel) {
        CorrelationStructure cs;
        cs.r = cumulative_autocorrelation(rho_in, kernel);
        cs.shifted = shifted_cumulative_correlation(rho_in, kernel);
        cs.rho = std::move(rho_in);
        return cs;
    }

    /// Independent observations: rho = (1, 0, ...), r(t) = t, R == 0.
    static CorrelationStructure iid(int horizon) {
        std::vector<double> rho(static_cast<std::size_t>(horizon), 0.0);
        rho[0] = 1.0;
        return from_rho(std::move(rho), KernelSpec::flat());
    }

    /// Exact structure of a unit-variance AR(1) with coefficient phi.
    static CorrelationStructure ar1(double phi, int horizon) {
        if (!(std::abs(phi) < 1.0)) {
            throw ParameterError("ar1 structure requires |phi| < 1, got " + std::to_string(phi));
        }
        std::vector<double> rho(static_cast<std::size_t>(horizon), 0.0);
        double p = 1.0;
        for (int lag = 0; lag < horizon; ++lag) {
            rho[static_cast<std::size_t>(lag)] = p;
            p *= phi;
        }
        return from_rho(std::move(rho), KernelSpec::flat());
    }
};

enum class CovarianceSource { true_structure, estimated };

/// T x T covariance of the limiting Gaussian partial-sum vector.
struct LimitCovariance {
    Eigen::MatrixXd lambda;
    CovarianceSource source = CovarianceSource::estimated;

    int horizon() const noexcept { return static_cast<int>(lambda.rows()); }
};

/// Populate lambda from a correlation structure:
///   lambda_{t,t} = r(t),  lambda_{t,v} = r(t) + R(t,v) for t < v,
/// then repair indefiniteness by clipping negative eigenvalues to zero.
/// A matrix whose smallest eigenvalue is below -0.1 * largest is rejected
/// as too indefinite to repair.
inline LimitCovariance build_lambda(const CorrelationStructure& structure,
                                    CovarianceSource source = CovarianceSource::estimated) {
    const int horizon = structure.horizon();
    Eigen::MatrixXd lambda(horizon, horizon);
    for (int t = 1; t <= horizon; ++t) {
        lambda(t - 1, t - 1) = structure.r_at(t);
        for (int v = t + 1; v <= horizon; ++v) {
            const double value = structure.r_at(t) + structure.R_at(t, v);
            lambda(t - 1, v - 1) = value;
            lambda(v - 1, t - 1) = value;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(lambda);
    if (eigen.info() != Eigen::Success) {
        throw EstimationQualityError("eigendecomposition of the limit covariance failed");
    }
    const double min_eig = eigen.eigenvalues().minCoeff();
    const double max_eig = eigen.eigenvalues().maxCoeff();
    if (min_eig < -0.1 * std::max(max_eig, 0.0)) {
        throw EstimationQualityError("estimated covariance is too indefinite to repair (min eigenvalue " +
                                     std::to_string(min_eig) + ", max " + std::to_string(max_eig) + ")");
    }
    if (min_eig < 0.0) {
        Eigen::VectorXd clipped = eigen.eigenvalues().cwiseMax(0.0);
        lambda = eigen.eigenvectors() * clipped.asDiagonal() * eigen.eigenvectors().transpose();
        lambda = ((lambda + lambda.transpose()) * 0.5).eval();
    }
    return LimitCovariance{std::move(lambda), source};
}

/// Everything the fitting pipeline produces on the way to the limit
/// covariance; kept so callers can report intermediate estimates.
struct CovarianceFit {
    ChangePointEstimate changepoint;
    double sigma2 = 0.0;
    CorrelationStructure structure;
    LimitCovariance lambda;
};

/// Full estimation pipeline: locate the change point, center segment-wise,
/// estimate the error variance and autocorrelations from the residuals, and
/// assemble the kernel-smoothed limit covariance.
inline CovarianceFit fit_covariance(const PanelDataset& data,
                                    const KernelSpec& kernel,
                                    const WeightFunction& weights = quadratic_weights()) {
    if (data.horizon() < 4) {
        throw UnsupportedHorizonError("covariance pipeline requires T >= 4, got T = " +
                                      std::to_string(data.horizon()));
    }
    CovarianceFit fit;
    fit.changepoint = estimate_changepoint(data, weights);
    const ResidualMatrix residuals = compute_residuals(data, fit.changepoint.tau_hat);
    fit.sigma2 = sigma2_hat(residuals);
    fit.structure = CorrelationStructure::from_rho(
        empirical_autocorrelation(residuals, fit.sigma2), kernel);
    fit.lambda = build_lambda(fit.structure, CovarianceSource::estimated);
    return fit;
}

/// Pipeline composition returning only the limit covariance.
inline LimitCovariance estimate_covariance_pipeline(const PanelDataset& data,
                                                    const KernelSpec& kernel,
                                                    const WeightFunction& weights = quadratic_weights()) {
    return fit_covariance(data, kernel, weights).lambda;
}

} // namespace panelcp
