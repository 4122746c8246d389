#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "panelcp/covariance.hpp"
#include "panelcp/errors.hpp"
#include "panelcp/functionals.hpp"
#include "panelcp/rng.hpp"

namespace panelcp {

enum class StatisticKind { cusum, ratio };

inline const char* to_string(StatisticKind kind) {
    return kind == StatisticKind::cusum ? "cusum" : "ratio";
}

namespace detail {

/// Square root factor F with F F^T = lambda, via symmetric eigendecomposition
/// with tiny negative eigenvalues clipped to zero.
inline Eigen::MatrixXd mvn_factor(const LimitCovariance& lambda) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(lambda.lambda);
    if (eigen.info() != Eigen::Success) {
        throw ParameterError("eigendecomposition of the sampling covariance failed");
    }
    const double max_eig = std::max(eigen.eigenvalues().maxCoeff(), 0.0);
    if (eigen.eigenvalues().minCoeff() < -1e-8 * std::max(max_eig, 1.0)) {
        throw ParameterError("sampling covariance is not positive semidefinite");
    }
    Eigen::VectorXd scale = eigen.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eigen.eigenvectors() * scale.asDiagonal();
}

/// Drive `consume` with `count` draws from N(0, lambda). Draw j is fully
/// determined by (lambda, seed, j), independent of what consumers do.
template <typename Consumer>
void for_each_mvn_draw(const LimitCovariance& lambda, int count, std::uint64_t seed,
                       Consumer&& consume) {
    if (count < 1) throw ParameterError("draw count must be >= 1");
    const Eigen::MatrixXd factor = mvn_factor(lambda);
    const int dim = lambda.horizon();
    Rng rng(seed);
    Eigen::VectorXd z(dim);
    Eigen::VectorXd x(dim);
    for (int j = 0; j < count; ++j) {
        for (int k = 0; k < dim; ++k) z(k) = rng.gaussian();
        x.noalias() = factor * z;
        consume(x);
    }
}

} // namespace detail

/// count x T matrix of draws from N(0, lambda); row j is draw j.
inline Eigen::MatrixXd sample_mvn(const LimitCovariance& lambda, int count, std::uint64_t seed) {
    Eigen::MatrixXd out(count, lambda.horizon());
    int row = 0;
    detail::for_each_mvn_draw(lambda, count, seed,
                              [&](const Eigen::VectorXd& x) { out.row(row++) = x.transpose(); });
    return out;
}

/// Monte Carlo sample of a limiting max-functional, sorted ascending.
struct NullDistribution {
    StatisticKind kind = StatisticKind::cusum;
    std::vector<double> samples; // sorted ascending, all >= 0
    LimitCovariance lambda_used;
    std::uint64_t seed = 0;

    int size() const noexcept { return static_cast<int>(samples.size()); }
};

inline constexpr int kMinNullDraws = 100;

namespace detail {

inline void check_null_request(const LimitCovariance& lambda, StatisticKind kind, int draws) {
    if (draws < kMinNullDraws) {
        throw ParameterError("null simulation needs at least " + std::to_string(kMinNullDraws) +
                             " draws, got " + std::to_string(draws));
    }
    if (kind == StatisticKind::ratio && lambda.horizon() < 4) {
        throw UnsupportedHorizonError("ratio null requires T >= 4, got T = " +
                                      std::to_string(lambda.horizon()));
    }
}

} // namespace detail

/// Simulate the asymptotic null of one statistic: `draws` functional
/// evaluations over N(0, lambda) paths. Bit-reproducible for a fixed seed.
inline NullDistribution build_null(const LimitCovariance& lambda, StatisticKind kind,
                                   int draws, std::uint64_t seed) {
    detail::check_null_request(lambda, kind, draws);
    NullDistribution null;
    null.kind = kind;
    null.lambda_used = lambda;
    null.seed = seed;
    null.samples.reserve(static_cast<std::size_t>(draws));
    detail::for_each_mvn_draw(lambda, draws, seed, [&](const Eigen::VectorXd& x) {
        const std::span<const double> path(x.data(), static_cast<std::size_t>(x.size()));
        null.samples.push_back(kind == StatisticKind::cusum ? cusum_limit_functional(path)
                                                            : ratio_limit_functional(path));
    });
    std::sort(null.samples.begin(), null.samples.end());
    return null;
}

/// Nulls for both statistics over one shared set of draws. Each equals
/// build_null(lambda, kind, draws, seed) for its kind.
inline std::pair<NullDistribution, NullDistribution>
build_null_pair(const LimitCovariance& lambda, int draws, std::uint64_t seed) {
    detail::check_null_request(lambda, StatisticKind::cusum, draws);
    detail::check_null_request(lambda, StatisticKind::ratio, draws);
    NullDistribution cusum_null{StatisticKind::cusum, {}, lambda, seed};
    NullDistribution ratio_null{StatisticKind::ratio, {}, lambda, seed};
    cusum_null.samples.reserve(static_cast<std::size_t>(draws));
    ratio_null.samples.reserve(static_cast<std::size_t>(draws));
    detail::for_each_mvn_draw(lambda, draws, seed, [&](const Eigen::VectorXd& x) {
        const std::span<const double> path(x.data(), static_cast<std::size_t>(x.size()));
        cusum_null.samples.push_back(cusum_limit_functional(path));
        ratio_null.samples.push_back(ratio_limit_functional(path));
    });
    std::sort(cusum_null.samples.begin(), cusum_null.samples.end());
    std::sort(ratio_null.samples.begin(), ratio_null.samples.end());
    return {std::move(cusum_null), std::move(ratio_null)};
}

/// 1-based order-statistic index ceil((1-alpha) * m), computed with a small
/// fuzz so exact rational products land on the intended integer.
inline int quantile_index(double alpha, int m) {
    const int idx = static_cast<int>(std::ceil((1.0 - alpha) * static_cast<double>(m) - 1e-9));
    return std::clamp(idx, 1, m);
}

struct TestResult {
    double statistic_value = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
    std::optional<double> sigma_hat_used; // set for the cusum test only
};

/// Compare a statistic against its simulated null.
///
/// The cusum limit carries the error scale, so its critical value is the
/// empirical quantile multiplied by sigma_hat; the ratio test is scale-free
/// and ignores it. The p-value is the fraction of (scaled) null samples
/// >= the observed statistic.
inline TestResult decide(double statistic_value, const NullDistribution& null, double alpha,
                         std::optional<double> sigma_hat = std::nullopt) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ParameterError("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
    if (!std::isfinite(statistic_value)) {
        throw InvalidDataError("statistic value is not finite");
    }
    double scale = 1.0;
    TestResult result;
    if (null.kind == StatisticKind::cusum) {
        if (!sigma_hat.has_value()) {
            throw ParameterError("the cusum test needs sigma_hat to scale its critical value");
        }
        if (!(*sigma_hat > 0.0)) {
            throw ParameterError("sigma_hat must be positive, got " + std::to_string(*sigma_hat));
        }
        scale = *sigma_hat;
        result.sigma_hat_used = scale;
    }

    const int m = null.size();
    const int idx = quantile_index(alpha, m);
    result.statistic_value = statistic_value;
    result.alpha = alpha;
    result.critical_value = scale * null.samples[static_cast<std::size_t>(idx - 1)];

    std::size_t tail = 0;
    for (double s : null.samples) {
        if (scale * s >= statistic_value) ++tail;
    }
    result.p_value = static_cast<double>(tail) / static_cast<double>(m);
    result.reject = statistic_value > result.critical_value;
    return result;
}

} // namespace panelcp
