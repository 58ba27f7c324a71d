#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ccx/errors.hpp"

namespace ccx {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standard normal quantile function.
//
// Rational minimax approximation (relative error < 1.15e-9) refined with one
// Halley step against the erfc-based CDF; absolute error is well below 1e-9
// over [1e-10, 1 - 1e-10].
inline double inv_normal_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) throw domain_error("inv_normal_cdf: argument must be in (0,1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;
    constexpr double high = 1.0 - low;

    double x;
    if (u < low) {
        double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= high) {
        double q = u - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley refinement step.
    constexpr double sqrt_2pi = 2.5066282746310005024;
    double e = normal_cdf(x) - u;
    double pdf = std::exp(-0.5 * x * x) / sqrt_2pi;
    if (pdf > 0.0) {
        double r = e / pdf;
        x = x - r / (1.0 + 0.5 * x * r);
    }
    return x;
}

// Empirical quantile map fitted on a sample, supporting monotone transforms to
// uniform on [eps, 1-eps] and to standard normal. Reference order statistics
// are subsampled to at most kMaxReferences evenly spaced quantiles.
struct QuantileMap {
    static constexpr std::int64_t kMaxReferences = 1000;

    std::vector<double> references;  // ascending
    std::int64_t fit_size = 0;
    double eps = 1e-7;

    bool fitted() const { return references.size() >= 2; }
};

inline QuantileMap fit_quantile_map(std::vector<double> values, double eps = 1e-7) {
    if (values.size() < 2) throw fit_error("fit_quantile_map: need at least 2 values");
    if (!(eps > 0.0 && eps < 0.5)) throw fit_error("fit_quantile_map: eps must be in (0, 0.5)");
    for (double v : values)
        if (!std::isfinite(v)) throw fit_error("fit_quantile_map: non-finite value");
    std::sort(values.begin(), values.end());

    QuantileMap q;
    q.fit_size = static_cast<std::int64_t>(values.size());
    q.eps = eps;
    const std::int64_t n = q.fit_size;
    if (n <= QuantileMap::kMaxReferences) {
        q.references = std::move(values);
    } else {
        // evenly spaced quantiles, linear interpolation between order statistics
        const std::int64_t m = QuantileMap::kMaxReferences;
        q.references.resize(static_cast<std::size_t>(m));
        for (std::int64_t i = 0; i < m; ++i) {
            double pos = static_cast<double>(i) / static_cast<double>(m - 1) *
                         static_cast<double>(n - 1);
            auto lo = static_cast<std::size_t>(pos);
            double frac = pos - static_cast<double>(lo);
            double v = values[lo];
            if (frac > 0.0 && lo + 1 < values.size())
                v += frac * (values[lo + 1] - values[lo]);
            q.references[static_cast<std::size_t>(i)] = v;
        }
    }
    return q;
}

namespace detail {

// CDF value attached to the tied run [i, j] of reference indices: the
// midpoint of the run's rank range, so constant fits map to 0.5.
inline double plateau_cdf(std::size_t i, std::size_t j, std::size_t m) {
    if (m <= 1) return 0.5;
    return (static_cast<double>(i) + static_cast<double>(j)) / (2.0 * static_cast<double>(m - 1));
}

}  // namespace detail

// Empirical CDF with linear interpolation between distinct reference values
// and plateau-midpoint handling of ties. Result clipped to [eps, 1-eps].
inline double to_uniform(const QuantileMap& q, double x) {
    if (!std::isfinite(x)) throw domain_error("to_uniform: non-finite input");
    const auto& r = q.references;
    const std::size_t m = r.size();
    if (m == 0) throw fit_error("to_uniform: map not fitted");

    double u;
    if (x < r.front()) {
        u = 0.0;
    } else if (x > r.back()) {
        u = 1.0;
    } else {
        auto lo_it = std::lower_bound(r.begin(), r.end(), x);
        auto hi_it = std::upper_bound(lo_it, r.end(), x);
        std::size_t i1 = static_cast<std::size_t>(lo_it - r.begin());
        std::size_t i2 = static_cast<std::size_t>(hi_it - r.begin());
        if (i1 < i2) {
            // x equals the tied run [i1, i2-1]
            u = detail::plateau_cdf(i1, i2 - 1, m);
        } else {
            // r[i1-1] < x < r[i1]: interpolate between the plateau CDFs of the
            // two neighboring distinct values
            std::size_t hi = i1;
            std::size_t hi_end = hi;
            while (hi_end + 1 < m && r[hi_end + 1] == r[hi]) ++hi_end;
            std::size_t lo = i1 - 1;
            std::size_t lo_begin = lo;
            while (lo_begin > 0 && r[lo_begin - 1] == r[lo]) --lo_begin;
            double c_lo = detail::plateau_cdf(lo_begin, lo, m);
            double c_hi = detail::plateau_cdf(hi, hi_end, m);
            double t = (x - r[lo]) / (r[hi] - r[lo]);
            u = c_lo + t * (c_hi - c_lo);
        }
    }
    return std::clamp(u, q.eps, 1.0 - q.eps);
}

inline double to_normal(const QuantileMap& q, double x) { return inv_normal_cdf(to_uniform(q, x)); }

}  // namespace ccx
