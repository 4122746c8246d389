#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "panelcp/errors.hpp"

namespace panelcp {

enum class KernelKind { parzen, bartlett, custom };

inline double parzen_kernel(double x) {
    const double a = std::abs(x);
    if (a <= 0.5) return 1.0 - 6.0 * x * x + 6.0 * a * a * a;
    if (a <= 1.0) {
        const double b = 1.0 - a;
        return 2.0 * b * b * b;
    }
    return 0.0;
}

inline double bartlett_kernel(double x) {
    const double a = std::abs(x);
    return a < 1.0 ? 1.0 - a : 0.0;
}

/// Smoothing kernel plus bandwidth. Custom kernels are sanity-checked on a
/// sample grid at construction: kappa(0) = 1, even, bounded by 1 in absolute
/// value. Analytic properties (square integrability, continuity) are the
/// caller's responsibility.
class KernelSpec {
public:
    static KernelSpec parzen(double bandwidth = 2.0) {
        return KernelSpec(KernelKind::parzen, bandwidth, nullptr);
    }

    static KernelSpec bartlett(double bandwidth = 2.0) {
        return KernelSpec(KernelKind::bartlett, bandwidth, nullptr);
    }

    static KernelSpec custom(std::function<double(double)> fn, double bandwidth) {
        if (!fn) throw ParameterError("custom kernel requires a callable");
        validate_on_grid(fn);
        return KernelSpec(KernelKind::custom, bandwidth, std::move(fn));
    }

    /// kappa == 1 everywhere: undamped cumulative sums, used to build exact
    /// correlation structures from a known autocorrelation sequence.
    static KernelSpec flat(double bandwidth = 1.0) {
        return KernelSpec(KernelKind::custom, bandwidth, [](double) { return 1.0; });
    }

    KernelKind kind() const noexcept { return kind_; }
    double bandwidth() const noexcept { return bandwidth_; }

    double operator()(double x) const {
        switch (kind_) {
            case KernelKind::parzen: return parzen_kernel(x);
            case KernelKind::bartlett: return bartlett_kernel(x);
            default: return fn_(x);
        }
    }

private:
    KernelSpec(KernelKind kind, double bandwidth, std::function<double(double)> fn)
        : kind_(kind), bandwidth_(bandwidth), fn_(std::move(fn)) {
        if (!(bandwidth_ > 0.0)) {
            throw ParameterError("kernel bandwidth must be positive, got " + std::to_string(bandwidth_));
        }
    }

    static void validate_on_grid(const std::function<double(double)>& fn) {
        if (std::abs(fn(0.0) - 1.0) > 1e-12) {
            throw ParameterError("custom kernel must satisfy kappa(0) = 1");
        }
        for (int k = 1; k <= 40; ++k) {
            const double x = 0.1 * k;
            const double fwd = fn(x);
            const double bwd = fn(-x);
            if (std::abs(fwd - bwd) > 1e-12) {
                throw ParameterError("custom kernel must be even; mismatch at x = " + std::to_string(x));
            }
            if (std::abs(fwd) > 1.0 + 1e-12) {
                throw ParameterError("custom kernel must map into [-1, 1]; violated at x = " + std::to_string(x));
            }
        }
    }

    KernelKind kind_;
    double bandwidth_;
    std::function<double(double)> fn_;
};

/// kappa(x) for the given spec. Bandwidth is not applied here; callers pass
/// pre-scaled arguments such as lag/h.
inline double kernel_value(const KernelSpec& spec, double x) {
    return spec(x);
}

} // namespace panelcp
