#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "panelcp/errors.hpp"

namespace panelcp {

// Both test statistics and their simulated asymptotic laws are maxima of the
// same bridge-type functionals, applied to a length-T partial-sum path
// (aggregated data sums on one side, Gaussian draws on the other). x[k]
// holds the path value at time k+1.
//
// Bridge deviations are computed in the integer-weighted form
// |a*x_s - b*x_t| / a rather than |x_s - (b/a)*x_t|, so that paths built
// from integer data produce exact zeros where the real value is zero. The
// ratio functional's skip rule relies on that exactness.

/// max_{t=1..T-1} |x_t - (t/T) x_T|.
inline double cusum_limit_functional(std::span<const double> x) {
    const std::size_t t_len = x.size();
    if (t_len < 2) {
        throw UnsupportedHorizonError("cusum functional requires T >= 2, got T = " +
                                      std::to_string(t_len));
    }
    const double tail = x[t_len - 1];
    const auto horizon = static_cast<double>(t_len);
    double best = 0.0;
    for (std::size_t t = 1; t < t_len; ++t) {
        const double dev = std::abs(horizon * x[t - 1] - static_cast<double>(t) * tail) / horizon;
        if (dev > best) best = dev;
    }
    return best;
}

/// Forward/backward bridge ratio:
///   max_{t=2..T-2}  max_{s=1..t} |x_s - (s/t) x_t|
///                 / max_{s=t..T-1} |z_s - ((T-s)/(T-t)) z_t|,   z_s = x_T - x_s.
/// Any t whose denominator is exactly zero is skipped (a probability-zero
/// event for continuous paths); if every t is skipped the path is degenerate.
inline double ratio_limit_functional(std::span<const double> x) {
    const std::size_t t_len = x.size();
    if (t_len < 4) {
        throw UnsupportedHorizonError("ratio functional requires T >= 4, got T = " +
                                      std::to_string(t_len));
    }
    const double tail = x[t_len - 1];
    double best = -1.0;
    for (std::size_t t = 2; t + 2 <= t_len; ++t) {
        double num = 0.0;
        for (std::size_t s = 1; s <= t; ++s) {
            const double dev = std::abs(static_cast<double>(t) * x[s - 1] -
                                        static_cast<double>(s) * x[t - 1]) /
                               static_cast<double>(t);
            if (dev > num) num = dev;
        }
        double den = 0.0;
        const double z_t = tail - x[t - 1];
        const double span_t = static_cast<double>(t_len - t);
        for (std::size_t s = t; s <= t_len - 1; ++s) {
            const double z_s = tail - x[s - 1];
            const double dev = std::abs(span_t * z_s - static_cast<double>(t_len - s) * z_t) / span_t;
            if (dev > den) den = dev;
        }
        if (den == 0.0) continue;
        const double candidate = num / den;
        if (candidate > best) best = candidate;
    }
    if (best < 0.0) {
        throw DegenerateDataError("ratio statistic undefined: denominator zero at every admissible t");
    }
    return best;
}

} // namespace panelcp
