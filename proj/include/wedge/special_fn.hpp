/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wedge/errors.hpp"
#include "wedge/vec2.hpp"

// Modified Bessel functions of the first kind with real, fractional order,
// plus the Gaussian helpers shared by the density code.
//
// I_v(z) is summed directly from its power series
//
//     I_v(z) = sum_k (z/2)^(2k+v) / (k! Gamma(v+k+1)),
//
// in log space. The summation starts at the largest term and walks outwards
// in both directions with the exact term ratio, so neither the scaled nor the
// unscaled value ever needs an intermediate that overflows. All terms are
// positive; there is no cancellation.

namespace wedge {

class BesselOrder {
public:
    explicit BesselOrder(double v) : v_(v) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw DomainError("Bessel order must be finite and nonnegative, got " + std::to_string(v));
    }
    double value() const noexcept { return v_; }

private:
    double v_;
};

class SeriesBudget {
public:
    SeriesBudget() = default;
    SeriesBudget(double rel_tol, int max_terms) : rel_tol_(rel_tol), max_terms_(max_terms) {
        if (!(rel_tol > 0.0 && rel_tol < 1.0))
            throw DomainError("series rel_tol must lie in (0, 1)");
        if (max_terms < 1)
            throw DomainError("series max_terms must be at least 1");
    }
    double rel_tol() const noexcept { return rel_tol_; }
    int max_terms() const noexcept { return max_terms_; }

private:
    double rel_tol_ = 1e-12;
    int max_terms_ = 400;
};

// lgamma without touching the global signgam (std::lgamma is not reentrant on glibc).
inline double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

namespace detail {

inline double log_bessel_i_series(double v, double z) {
    if (z == 0.0)
        return v == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();

    constexpr double eps = 0.5 * std::numeric_limits<double>::epsilon();
    const double half = 0.5 * z;
    const double half2 = half * half;

    // Positive root of (k+1)(k+v+1) = (z/2)^2; terms grow up to it.
    const double root = 0.5 * (std::sqrt(v * v + z * z) - (v + 2.0));
    const double k0 = root > 0.0 ? std::floor(root + 1.0) : 0.0;
    const double log_peak = (2.0 * k0 + v) * std::log(half) - log_gamma(k0 + 1.0) - log_gamma(k0 + v + 1.0);

    double sum = 1.0;
    double term = 1.0;
    for (double k = k0;; k += 1.0) {
        term *= half2 / ((k + 1.0) * (k + v + 1.0));
        sum += term;
        if (term <= eps * sum)
            break;
    }
    term = 1.0;
    for (double k = k0; k > 0.0; k -= 1.0) {
        term *= k * (k + v) / half2;
        sum += term;
        if (term <= eps * sum)
            break;
    }
    return log_peak + std::log(sum);
}

inline void check_bessel_argument(double z) {
    if (!(z >= 0.0) || !std::isfinite(z))
        throw DomainError("Bessel argument must be finite and nonnegative, got " + std::to_string(z));
}

}  // namespace detail

/// log I_v(z); -inf where I_v(z) = 0 (z = 0, v > 0).
inline double log_bessel_i(BesselOrder v, double z) {
    detail::check_bessel_argument(z);
    return detail::log_bessel_i_series(v.value(), z);
}

inline double bessel_i(BesselOrder v, double z) {
    const double l = log_bessel_i(v, z);
    if (l > std::log(std::numeric_limits<double>::max()))
        throw OverflowError("I_v(z) overflows for v=" + std::to_string(v.value()) + ", z=" + std::to_string(z) +
                            "; use bessel_i_scaled");
    return std::exp(l);
}

/// e^{-z} I_v(z). Never overflows.
inline double bessel_i_scaled(BesselOrder v, double z) {
    return std::exp(log_bessel_i(v, z) - z);
}

/// Standard bivariate normal density (2 pi)^{-1} exp(-x.x / 2).
inline double gauss2(const Vec2& x) {
    return std::exp(-0.5 * dot(x, x)) / (2.0 * std::numbers::pi);
}

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// log Phi(x), accurate in both tails.
inline double log_normal_cdf(double x) {
    if (x > 0.0)
        return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
    if (x > -35.0)
        return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

/// e * sum_{n>N} n q^n with q = (z/2)^{pi/alpha}: the tail bound on
/// sum_n n I_{n pi/alpha}(z) implied by I_v(z) < e (z/2)^v for z < 2.
/// Infinite when q >= 1.
inline double series_tail_bound(double alpha, double z, int n_terms) {
    const double q = std::pow(0.5 * z, std::numbers::pi / alpha);
    if (!(q < 1.0))
        return std::numeric_limits<double>::infinity();
    const double n = n_terms;
    return std::numbers::e * std::pow(q, n + 1.0) * ((n + 1.0) - n * q) / ((1.0 - q) * (1.0 - q));
}

struct Truncation {
    int terms = 1;
    bool bound_met = true;
};

/// Smallest N whose series tail bound is below rel_tol times the partial sum
/// sum_{n<=N} n I_{n pi/alpha}(z). Reports bound_met = false (with
/// N = max_terms) when the bound cannot certify any N in the budget.
inline Truncation truncation_length(double alpha, double z, const SeriesBudget& budget) {
    if (!(alpha > 0.0 && alpha < std::numbers::pi))
        throw DomainError("wedge angle must lie in (0, pi)");
    detail::check_bessel_argument(z);
    if (z == 0.0)
        return {1, true};

    const double nu = std::numbers::pi / alpha;
    double partial = 0.0;
    for (int n = 1; n <= budget.max_terms(); ++n) {
        partial += n * std::exp(detail::log_bessel_i_series(n * nu, z));
        const double tail = series_tail_bound(alpha, z, n);
        if (!std::isfinite(tail))
            break;
        if (tail < budget.rel_tol() * partial)
            return {n, true};
    }
    return {budget.max_terms(), false};
}

}  // namespace wedge
