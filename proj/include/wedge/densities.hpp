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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wedge/errors.hpp"
#include "wedge/geometry.hpp"
#include "wedge/quadrature.hpp"
#include "wedge/special_fn.hpp"
#include "wedge/vec2.hpp"

// Densities of the two-firm first-passage problem in wedge coordinates.
//
// All functions take a WedgeState describing the starting point z0 = (r0,
// theta0), the wedge angle alpha and the drift m. Time arguments are measured
// from the instant of that state. Firm 2 defaults on theta = 0, firm 1 on
// theta = alpha; quantities for the opposite edge are obtained by passing the
// tilde state (geometry.hpp), which swaps the edges.
//
// The Bessel series are evaluated as exp(-(r - r0)^2 / 2t) e^{-z} I_v(z),
// z = r r0 / t, with every exponent gathered in log space.

namespace wedge {

struct EvalQuality {
    int series_terms_used = 1;
    bool truncation_flag = false;
    double quadrature_estimate_error = 0.0;
    // A value below -1e-12 was clamped to zero.
    bool clamped = false;

    void merge(const EvalQuality& o) {
        series_terms_used = std::max(series_terms_used, o.series_terms_used);
        truncation_flag = truncation_flag || o.truncation_flag;
        clamped = clamped || o.clamped;
    }
};

struct DensityValue {
    double value = 0.0;
    EvalQuality quality;
};

namespace detail {

inline constexpr double kLogUnderflow = -745.0;

inline DensityValue finish(double value, EvalQuality q) {
    if (value < 0.0) {
        if (value < -1e-12)
            q.clamped = true;
        value = 0.0;
    }
    return {value, q};
}

inline Vec2 polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

inline double log_tilt(const WedgeState& s, Vec2 z, double t) {
    return dot(s.m, z - s.z) - 0.5 * dot(s.m, s.m) * t;
}

inline void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(name) + " must be finite and positive, got " + std::to_string(v));
}

struct SeriesSum {
    double log_scale = 0.0;  // log e^{-z} I_nu(z)
    double sum = 0.0;        // sum_n w_n e^{-z} I_{n nu}(z) / e^{log_scale}
    int terms = 1;
    bool truncated = false;
};

// sum_{n>=1} w(n) e^{-z} I_{n nu}(z) with |w(n)| <= n. Stops once a bound on
// the remaining terms is below rel_tol times the accumulated |terms|. The
// bound is the series tail bound when z < 2, and the geometric ratio bound once
// n e^{-z} I_{n nu}(z) is decreasing (I_v is log-concave in v).
template <class W>
SeriesSum wedge_series(double alpha, double z, W&& weight, const SeriesBudget& budget, std::vector<double>* coef = nullptr) {
    const double nu = std::numbers::pi / alpha;
    SeriesSum out;
    out.log_scale = log_bessel_i_series(nu, z) - z;
    if (coef)
        coef->clear();
    double abs_sum = 0.0;
    double env_sum = 0.0;
    double prev_env = std::numeric_limits<double>::infinity();
    const double tail_scale = std::exp(-z - out.log_scale);
    for (int n = 1; n <= budget.max_terms(); ++n) {
        const double a = n == 1 ? 1.0 : std::exp(log_bessel_i_series(n * nu, z) - z - out.log_scale);
        if (coef)
            coef->push_back(a);
        const double term = weight(n) * a;
        out.sum += term;
        abs_sum += std::abs(term);
        const double env = n * a;
        env_sum += env;

        double tail = std::numeric_limits<double>::infinity();
        if (z < 2.0)
            tail = tail_scale * series_tail_bound(alpha, z, n);
        if (env < prev_env && n >= 2) {
            const double ratio = env / prev_env;
            tail = std::min(tail, env * ratio / (1.0 - ratio));
        }
        prev_env = env;
        out.terms = n;
        if (tail <= budget.rel_tol() * abs_sum || tail <= 1e-17 * env_sum || a == 0.0)
            return out;
    }
    out.truncated = true;
    return out;
}

// Merge sorted unique breakpoints inside (lo, hi) with the ends.
inline std::vector<double> panel_points(double lo, double hi, std::vector<double> inner) {
    std::vector<double> pts{lo};
    std::sort(inner.begin(), inner.end());
    for (double x : inner)
        if (x > pts.back() && x < hi && std::isfinite(x))
            pts.push_back(x);
    pts.push_back(hi);
    return pts;
}

// Radial range carrying the exit density through the theta = alpha edge at time t.
inline std::vector<double> exit_radial_points(const WedgeState& s, double t, const QuadConfig& q,
                                              std::vector<double> extra = {}) {
    const double w = std::sqrt(t);
    const double hi = s.r + norm(s.m) * t + q.tail_sigma * w;
    const Vec2 e{std::cos(s.alpha), std::sin(s.alpha)};
    const double rc = dot(s.z + s.m * t, e);
    for (double k : {-3.0, -1.0, 0.0, 1.0, 3.0})
        extra.push_back(rc + k * w);
    return panel_points(0.0, hi, std::move(extra));
}

// For z = r r0 / t >= kImageSwitch the angular Bessel sums are evaluated in
// closed form. Schlafli's integral for I_v turns sum_n cos(n nu phi) I_{n nu}(z)
// into a finite sum over geometric images (angles phi + 2k alpha inside
// (-pi, pi)) plus a diffraction integral over u in (0, inf) with kernel
// G(x, w) = sin x / (2 cosh w - 2 cos x), w = nu u. Both pieces are sums of
// positive exponentials or bounded integrands, so nothing cancels
// catastrophically when t is small. For integer nu the diffraction part
// vanishes identically and the images are the reflection group.
inline constexpr double kImageSwitch = 2.0;

inline constexpr double kCutSnap = 1e-11;

inline double kernel_g(double x, double w) {
    const double sh = std::sinh(0.5 * w);
    const double sn = std::sin(0.5 * x);
    return std::sin(x) / (4.0 * (sh * sh + sn * sn));
}

// d/dx kernel_g.
inline double kernel_gx(double x, double w) {
    const double sh = std::sinh(0.5 * w);
    const double sn = std::sin(0.5 * x);
    const double sh2 = sh * sh;
    const double sn2 = sn * sn;
    const double den = sh2 + sn2;
    return (sh2 - sn2 - 2.0 * sn2 * sh2) / (4.0 * den * den);
}

// Integral of kernel_g(x, w) over w in (0, inf).
inline double kernel_g_mass(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(x, two_pi);
    if (y < 0.0)
        y += two_pi;
    // On the lattice the image sits on the cut and carries half weight instead.
    if (y < kCutSnap || two_pi - y < kCutSnap)
        return 0.0;
    return 0.5 * (std::numbers::pi - y);
}

inline double distance_to_2pi_lattice(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return std::abs(x - two_pi * std::round(x / two_pi));
}

inline bool integer_order(double nu) { return std::abs(nu - std::round(nu)) < 1e-12 * nu; }

// Calls fn(beta, weight) for every image angle beta = phi + 2k alpha with
// |beta| < pi; an image on the cut |beta| = pi gets weight 1/2.
template <class Fn>
void for_each_image(double phi, double alpha, Fn&& fn) {
    const double pi = std::numbers::pi;
    const long k_lo = static_cast<long>(std::floor((-pi - phi) / (2.0 * alpha)));
    const long k_hi = static_cast<long>(std::ceil((pi - phi) / (2.0 * alpha)));
    for (long k = k_lo; k <= k_hi; ++k) {
        const double beta = phi + 2.0 * k * alpha;
        const double gap = pi - std::abs(beta);
        if (std::abs(gap) < kCutSnap * alpha)
            fn(beta, 0.5);
        else if (gap > 0.0)
            fn(beta, 1.0);
    }
}

// Integral over u in (0, inf) of expm1(-z (cosh u - 1)) * kern(u). The
// kernels decay like e^{-nu u}; spikes of width eps/nu sit at the origin when
// an argument approaches the 2 pi lattice.
// Bound on |diffraction_integral| per kernel term: |G|, |G_x| <= 1/w^2 and
// |expm1(-z (cosh u - 1))| <= min(1, z u^2), so each term is at most 2 sqrt(z) / nu^2.
inline double diffraction_bound(double z, double nu, int kernels) { return kernels * 2.0 * std::sqrt(z) / (nu * nu); }

template <class K>
double diffraction_integral(K&& kern, double z, double nu, std::vector<double> widths, double abs_tol, double rel_tol) {
    const double u_max = 40.0 / nu + 1.0;
    std::vector<double> pts{1.0 / std::sqrt(z), 3.0 / std::sqrt(z)};
    for (double w : widths)
        for (double k : {1.0, 4.0})
            pts.push_back(k * w / nu);
    auto f = [&](double u) { return std::expm1(-z * (std::cosh(u) - 1.0)) * kern(u); };
    QuadConfig c;
    c.rel_tol = rel_tol;
    c.abs_tol = std::max(abs_tol, 1e-300);
    c.max_depth = 50;
    const QuadResult r = integrate_1d(f, panel_points(0.0, u_max, pts), c);
    return r.value;
}

// Radii where x = r sin(alpha) sits at the scale of a first passage within h.
inline void hitting_scale_points(std::vector<double>& pts, double sin_a, double h) {
    const double w = std::sqrt(h) / sin_a;
    for (double k : {0.25, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0})
        pts.push_back(k * w);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One-dimensional closed forms

/// Density of the first time a unit-variance Brownian motion with drift m2
/// started at x > 0 reaches 0.
inline double pi_hit(double x, double h, double m2) {
    detail::check_positive(x, "level x");
    detail::check_positive(h, "time h");
    const double d = x + m2 * h;
    return x / std::sqrt(2.0 * std::numbers::pi * h * h * h) * std::exp(-d * d / (2.0 * h));
}

/// P(no hit of 0 before u) for the same motion.
inline double pi_survival(double x, double u, double m2) {
    detail::check_positive(x, "level x");
    detail::check_positive(u, "time u");
    const double su = std::sqrt(u);
    const double b = (x + m2 * u) / su;
    const double a = (-x + m2 * u) / su;
    const double k = -2.0 * m2 * x;
    double s;
    if (k > 30.0) {
        s = normal_cdf(b) - std::exp(k + log_normal_cdf(a));
    } else {
        // Phi(b) - Phi(a) + (1 - e^k) Phi(a), each piece without cancellation.
        constexpr double r2 = std::numbers::sqrt2;
        double diff;
        if (a >= 0.0)
            diff = 0.5 * (std::erfc(a / r2) - std::erfc(b / r2));
        else if (b <= 0.0)
            diff = 0.5 * (std::erfc(-b / r2) - std::erfc(-a / r2));
        else
            diff = 0.5 * (std::erf(b / r2) - std::erf(a / r2));
        s = diff - std::expm1(k) * normal_cdf(a);
    }
    return std::clamp(s, 0.0, 1.0);
}

// pi_survival extended by 1 at h <= 0.
inline double survival_or_one(double x, double h, double m2) { return h > 0.0 ? pi_survival(x, h, m2) : 1.0; }

/// Density of the position at time h of the motion started at x0 > 0 and
/// killed at 0.
inline double pi_tilde(double x, double x0, double h, double m2) {
    detail::check_positive(x0, "start x0");
    detail::check_positive(h, "time h");
    if (!(x > 0.0))
        return 0.0;
    const double d = x - x0 - m2 * h;
    return std::exp(-d * d / (2.0 * h)) / std::sqrt(2.0 * std::numbers::pi * h) * -std::expm1(-2.0 * x0 * x / h);
}

// ---------------------------------------------------------------------------
// Series densities

namespace detail {

// b for z >= kImageSwitch, psi = alpha - theta0:
//   r0/(2 pi t^2) sum_k sin(beta_k) exp(-|r e0 - r0 e_beta|^2 / 2t)
//   + exp(-(r + r0)^2 / 2t) / (2 alpha^2 t r) * diffraction.
inline DensityValue b_images(double r, double t, const WedgeState& s, const QuadConfig& q) {
    const double a = s.alpha;
    const double nu = std::numbers::pi / a;
    const double psi = a - s.theta;
    const double z = r * s.r / t;
    const double base = -(r - s.r) * (r - s.r) / (2.0 * t);
    double images = 0.0;
    int count = 0;
    for_each_image(psi, a, [&](double beta, double weight) {
        const double sh = std::sin(0.5 * beta);
        images += weight * std::sin(beta) * std::exp(base - 2.0 * z * sh * sh);
        ++count;
    });
    images *= s.r / (2.0 * std::numbers::pi * t * t);

    double diffraction = 0.0;
    const double coef = std::exp(-(r + s.r) * (r + s.r) / (2.0 * t)) / (2.0 * a * a * t * r);
    if (!integer_order(nu) && coef > 0.0) {
        const double xp = nu * (std::numbers::pi + psi);
        const double xm = nu * (std::numbers::pi - psi);
        auto kern = [&](double u) { return kernel_gx(xp, nu * u) - kernel_gx(xm, nu * u); };
        const double tol = q.series_rel_tol * std::abs(images) / coef;
        if (diffraction_bound(z, nu, 2) > 0.1 * tol)
            diffraction = coef * diffraction_integral(kern, z, nu, {distance_to_2pi_lattice(xp), distance_to_2pi_lattice(xm)},
                                                  tol, q.series_rel_tol);
    }
    EvalQuality qual;
    qual.series_terms_used = std::max(1, count);
    return finish(images + diffraction, qual);
}

// h (without drift) for z >= kImageSwitch:
//   r/(2 pi t) [sum over images of theta - theta0 minus images of theta + theta0]
//   - r exp(-(r + r0)^2 / 2t) / (2 pi t alpha) * diffraction.
inline DensityValue h_images(double r, double theta, double t, const WedgeState& s, const QuadConfig& q) {
    const double a = s.alpha;
    const double nu = std::numbers::pi / a;
    const double z = r * s.r / t;
    const double base = -(r - s.r) * (r - s.r) / (2.0 * t);
    double images = 0.0;
    double magnitude = 0.0;
    int count = 0;
    const double fm = theta - s.theta;
    const double fp = theta + s.theta;
    for_each_image(fm, a, [&](double beta, double weight) {
        const double sh = std::sin(0.5 * beta);
        const double e = weight * std::exp(base - 2.0 * z * sh * sh);
        images += e;
        magnitude += e;
        ++count;
    });
    for_each_image(fp, a, [&](double beta, double weight) {
        const double sh = std::sin(0.5 * beta);
        const double e = weight * std::exp(base - 2.0 * z * sh * sh);
        images -= e;
        magnitude += e;
        ++count;
    });
    const double scale = r / (2.0 * std::numbers::pi * t);
    images *= scale;
    magnitude *= scale;

    double diffraction = 0.0;
    const double coef = r * std::exp(-(r + s.r) * (r + s.r) / (2.0 * t)) / (2.0 * std::numbers::pi * t * a);
    if (!integer_order(nu) && coef > 0.0) {
        const double x1 = nu * (std::numbers::pi + fm);
        const double x2 = nu * (std::numbers::pi - fm);
        const double x3 = nu * (std::numbers::pi + fp);
        const double x4 = nu * (std::numbers::pi - fp);
        auto kern = [&](double u) {
            const double w = nu * u;
            return kernel_g(x1, w) + kernel_g(x2, w) - kernel_g(x3, w) - kernel_g(x4, w);
        };
        const double mass = (kernel_g_mass(x1) + kernel_g_mass(x2) - kernel_g_mass(x3) - kernel_g_mass(x4)) / nu;
        const double tol = q.series_rel_tol * magnitude / coef;
        double j = 0.0;
        if (diffraction_bound(z, nu, 4) > 0.1 * tol)
            j = diffraction_integral(kern, z, nu,
                                     {distance_to_2pi_lattice(x1), distance_to_2pi_lattice(x2),
                                      distance_to_2pi_lattice(x3), distance_to_2pi_lattice(x4)},
                                     tol, q.series_rel_tol);
        diffraction = -coef * (mass + j);
    }
    EvalQuality qual;
    qual.series_terms_used = std::max(1, count);
    return finish(images + diffraction, qual);
}

}  // namespace detail

/// Driftless exit density through the theta = alpha edge at distance r from
/// the apex and time t.
inline DensityValue b_series(double r, double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(r, "radius r");
    detail::check_positive(t, "time t");
    const double a = s.alpha;
    const double d = s.r * std::sin(a - s.theta);  // distance of z0 to the edge line
    if (!(d > 0.0))
        return {0.0, {}};
    // Upper bound: first passage density of the half-plane bounded by the edge line.
    const double y0 = s.r * std::cos(a - s.theta);
    const double bound = std::log(d / (2.0 * std::numbers::pi * t * t)) - (d * d + (r - y0) * (r - y0)) / (2.0 * t);
    if (bound < detail::kLogUnderflow)
        return {0.0, {}};

    const double z = r * s.r / t;
    if (z >= detail::kImageSwitch)
        return detail::b_images(r, t, s, q);
    const double phase = std::numbers::pi * (a - s.theta) / a;
    const auto ser = detail::wedge_series(a, z, [&](int n) { return n * std::sin(n * phase); }, q.series());
    const double logpref = std::log(std::numbers::pi / (a * a * t * r)) - (r - s.r) * (r - s.r) / (2.0 * t) + ser.log_scale;
    EvalQuality qual;
    qual.series_terms_used = ser.terms;
    qual.truncation_flag = ser.truncated;
    return detail::finish(std::exp(logpref) * ser.sum, qual);
}

/// Exit density with drift: the sub-density of (tau1, Z(tau1)) on {tau1 <= tau2}.
inline DensityValue f_exit(double r, double t, const WedgeState& s, const QuadConfig& q) {
    DensityValue b = b_series(r, t, s, q);
    if (b.value == 0.0)
        return b;
    b.value *= std::exp(detail::log_tilt(s, detail::polar(r, s.alpha), t));
    return b;
}

/// Surviving-position density at (r, theta) and time t, with respect to dr dtheta.
inline DensityValue h_survive(double r, double theta, double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(r, "radius r");
    detail::check_positive(t, "time t");
    if (!(theta > 0.0 && theta < s.alpha))
        return {0.0, {}};
    const Vec2 zp = detail::polar(r, theta);
    const double tilt = detail::log_tilt(s, zp, t);
    const Vec2 dz = zp - s.z;
    if (std::log(r / (2.0 * std::numbers::pi * t)) - dot(dz, dz) / (2.0 * t) + tilt < detail::kLogUnderflow)
        return {0.0, {}};

    const double z = r * s.r / t;
    if (z >= detail::kImageSwitch) {
        DensityValue v = detail::h_images(r, theta, t, s, q);
        v.value *= std::exp(tilt);
        return v;
    }
    const double k = std::numbers::pi / s.alpha;
    const auto ser = detail::wedge_series(
        s.alpha, z, [&](int n) { return std::sin(n * k * theta) * std::sin(n * k * s.theta); }, q.series());
    const double logpref = std::log(2.0 * r / (t * s.alpha)) - (r - s.r) * (r - s.r) / (2.0 * t) + ser.log_scale + tilt;
    EvalQuality qual;
    qual.series_terms_used = ser.terms;
    qual.truncation_flag = ser.truncated;
    return detail::finish(std::exp(logpref) * ser.sum, qual);
}

// ---------------------------------------------------------------------------
// Quadratures over the exit density

/// Density of tau1 at t on {tau1 < tau2}: the exit density integrated along the edge.
inline DensityValue exit_time_density(double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(t, "time t");
    EvalQuality acc;
    auto fr = [&](double r) {
        const DensityValue v = f_exit(r, t, s, q);
        acc.merge(v.quality);
        return v.value;
    };
    const QuadResult res = integrate_1d(fr, detail::exit_radial_points(s, t, q), q);
    res.require("exit_time_density(t=" + std::to_string(t) + ")");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

/// Joint density of (tau1, tau2) at (st, t) on {tau1 < tau2}.
inline DensityValue g_joint(double st, double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(st, "default time s");
    if (!(st < t))
        throw DomainError("g_joint needs s < t, got s=" + std::to_string(st) + ", t=" + std::to_string(t));
    const double h = t - st;
    const double sa = std::sin(s.alpha);
    const double m2 = s.m.y;
    EvalQuality acc;
    auto fr = [&](double r) {
        const DensityValue v = f_exit(r, st, s, q);
        acc.merge(v.quality);
        return v.value == 0.0 ? 0.0 : v.value * pi_hit(r * sa, h, m2);
    };
    std::vector<double> extra;
    detail::hitting_scale_points(extra, sa, h);
    const QuadResult res = integrate_1d(fr, detail::exit_radial_points(s, st, q, extra), q);
    res.require("g_joint(s=" + std::to_string(st) + ", t=" + std::to_string(t) + ")");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

/// Density of tau1 at st jointly with {tau1 < tau2, tau2 > u}, u >= st.
inline DensityValue g_tail(double st, double u, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(st, "default time s");
    if (!(st <= u))
        throw DomainError("g_tail needs s <= u, got s=" + std::to_string(st) + ", u=" + std::to_string(u));
    const double h = u - st;
    const double sa = std::sin(s.alpha);
    const double m2 = s.m.y;
    EvalQuality acc;
    auto fr = [&](double r) {
        const DensityValue v = f_exit(r, st, s, q);
        acc.merge(v.quality);
        return v.value == 0.0 ? 0.0 : v.value * survival_or_one(r * sa, h, m2);
    };
    std::vector<double> extra;
    if (h > 0.0)
        detail::hitting_scale_points(extra, sa, h);
    const QuadResult res = integrate_1d(fr, detail::exit_radial_points(s, st, q, extra), q);
    res.require("g_tail(s=" + std::to_string(st) + ", u=" + std::to_string(u) + ")");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

namespace detail {

// Largest s_min in [0, u] with P(tau1 <= s_min) * bound <= eps, by bisection on
// the closed-form first-passage law of the theta = alpha edge.
inline double negligible_start(double u, const WedgeState& s, double eps, double bound) {
    const double d = distance_to_edge_alpha(s.z, s.alpha);
    const double md = s.m.x * std::sin(s.alpha) - s.m.y * std::cos(s.alpha);
    auto mass = [&](double t) { return t > 0.0 ? 1.0 - pi_survival(d, t, md) : 0.0; };
    if (!(bound > 0.0) || mass(u) * bound <= eps)
        return u;
    double lo = 0.0;
    double hi = u;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mass(mid) * bound <= eps ? lo : hi) = mid;
    }
    return lo;
}

// sup over x of pi_hit(x, h, m2) for times >= h (attained at the smallest time).
inline double pi_hit_peak(double h, double m2) {
    const double x = 0.5 * (std::sqrt(m2 * m2 * h * h + 4.0 * h) - m2 * h);
    return pi_hit(x, h, m2);
}

}  // namespace detail

/// Integral over s in (0, u) of g(s, v), u <= v. For u = v and alpha > pi/2
/// the integrand blows up like (v - s)^{pi/2alpha - 1}; the substitution
/// w = (v - s)^{pi/2alpha} removes it.
inline DensityValue g_time_integral(double u, double v, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(u, "time u");
    if (!(u <= v))
        throw DomainError("g_time_integral needs u <= v");
    const double sa = std::sin(s.alpha);
    const double m2 = s.m.y;
    QuadConfig inner = q.tightened(1e-2);
    EvalQuality acc;
    double inner_err = 0.0;

    auto g_at = [&](double st, double h) -> double {
        if (!(st > 0.0) || !(h > 0.0))
            return 0.0;
        auto fr = [&](double r) {
            const DensityValue fv = f_exit(r, st, s, q);
            acc.merge(fv.quality);
            return fv.value == 0.0 ? 0.0 : fv.value * pi_hit(r * sa, h, m2);
        };
        std::vector<double> extra;
        detail::hitting_scale_points(extra, sa, h);
        const QuadResult res = integrate_1d(fr, detail::exit_radial_points(s, st, inner, extra), inner);
        res.require("g(s=" + std::to_string(st) + ", t=" + std::to_string(st + h) + ")");
        inner_err += res.error;
        return res.value;
    };

    // Skip the initial stretch where tau1 has essentially no mass. The
    // skipped part is bounded by that mass times the peak of pi over the
    // remaining times; at u = v only s <= u/2 is eligible so that v - s >= v/2.
    const double s_lo = u < v ? detail::negligible_start(u, s, 1e-3 * q.abs_tol, detail::pi_hit_peak(v - u, m2))
                              : detail::negligible_start(0.5 * u, s, 1e-3 * q.abs_tol, detail::pi_hit_peak(0.5 * v, m2));
    if (!(s_lo < u))
        return {0.0, acc};

    QuadResult res;
    if (u < v) {
        res = integrate_1d([&](double st) { return g_at(st, v - st); }, s_lo, u, q);
    } else {
        const double gamma = std::min(0.0, std::numbers::pi / (2.0 * s.alpha) - 1.0);
        res = integrate_1d([&](double st, double dist) { return g_at(st, dist); }, s_lo, u,
                           Singularity{gamma, SingularEnd::Upper}, q);
    }
    res.require("integral of g over (0, " + std::to_string(u) + ")");
    acc.quadrature_estimate_error = res.error + inner_err / std::max<long>(1, res.evaluations) * (u - s_lo);
    return detail::finish(res.value, acc);
}

/// P(tau1 <= t, tau1 < tau2).
inline DensityValue exit_probability(double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(t, "time t");
    QuadConfig inner = q.tightened(1e-2);
    EvalQuality acc;
    const double s_lo = detail::negligible_start(t, s, 1e-3 * q.abs_tol, 1.0);
    if (!(s_lo < t))
        return {0.0, acc};
    auto dens = [&](double u) {
        const DensityValue v = exit_time_density(u, s, inner);
        acc.merge(v.quality);
        return v.value;
    };
    const QuadResult res = integrate_1d(dens, s_lo, t, q);
    res.require("exit_probability(t=" + std::to_string(t) + ")");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

/// P(tau > t), tau = min(tau1, tau2): the surviving-position density
/// integrated over the wedge.
inline DensityValue survival_prob(double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(t, "time t");
    q.validate();
    const double a = s.alpha;

    // When one firm can barely default, inclusion-exclusion is exact to
    // within the smaller marginal: P(both) <= min(P1, P2).
    const double d1 = distance_to_edge_alpha(s.z, a);
    const double m1 = s.m.x * std::sin(a) - s.m.y * std::cos(a);
    const double p1 = 1.0 - pi_survival(d1, t, m1);
    const double p2 = 1.0 - pi_survival(s.z.y, t, s.m.y);
    if (2.0 * std::min(p1, p2) <= q.abs_tol) {
        EvalQuality qual;
        qual.quadrature_estimate_error = std::min(p1, p2);
        return detail::finish(1.0 - p1 - p2, qual);
    }

    const double k = std::numbers::pi / a;
    const double w = std::sqrt(t);
    const double spread = norm(s.m) * t + q.tail_sigma * w;
    const double lo = std::max(0.0, s.r - spread);
    const double hi = s.r + spread;
    const double rc = dot(s.z + s.m * t, s.z) / s.r;
    const SeriesBudget budget = q.series();
    EvalQuality acc;

    // For each radius, the Bessel coefficients are computed once and the
    // angular sum runs by the sine recurrence.
    auto slice = [&](double r) {
        std::vector<double> coef;
        double log_pref = -std::numeric_limits<double>::infinity();
        const double z = r * s.r / t;
        if (r > 0.0 && z > 0.0) {
            const auto ser = detail::wedge_series(
                a, z, [&](int n) { return std::sin(n * k * s.theta); }, budget, &coef);
            for (std::size_t n = 0; n < coef.size(); ++n)
                coef[n] *= std::sin((n + 1) * k * s.theta);
            EvalQuality qq;
            qq.series_terms_used = ser.terms;
            qq.truncation_flag = ser.truncated;
            acc.merge(qq);
            log_pref = std::log(2.0 * r / (t * a)) - (r - s.r) * (r - s.r) / (2.0 * t) + ser.log_scale - dot(s.m, s.z) -
                       0.5 * dot(s.m, s.m) * t;
        }
        return [coef = std::move(coef), log_pref, r, k, &s](double theta) {
            if (coef.empty())
                return 0.0;
            const double x = k * theta;
            const double c2 = 2.0 * std::cos(x);
            double sm1 = 0.0;
            double sn = std::sin(x);
            double sum = 0.0;
            for (double c : coef) {
                sum += c * sn;
                const double next = c2 * sn - sm1;
                sm1 = sn;
                sn = next;
            }
            const double e = log_pref + r * (s.m.x * std::cos(theta) + s.m.y * std::sin(theta));
            return e < detail::kLogUnderflow ? 0.0 : std::exp(e) * sum;
        };
    };

    std::vector<double> pts{lo};
    for (double c : {rc - 3 * w, rc - w, rc, rc + w, rc + 3 * w})
        if (c > pts.back() && c < hi)
            pts.push_back(c);
    pts.push_back(hi);
    // integrate_wedge works on (0, r_hi]; shift the radial variable to start at lo.
    auto shifted = [&](double rr) { return slice(rr + lo); };
    std::vector<double> breaks;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i)
        breaks.push_back(pts[i] - lo);
    const QuadResult res = integrate_wedge(shifted, a, hi - lo, q, breaks);
    res.require("survival_prob(t=" + std::to_string(t) + ")");
    acc.quadrature_estimate_error = res.error;
    DensityValue out = detail::finish(res.value, acc);
    out.value = std::min(out.value, 1.0);
    return out;
}

// ---------------------------------------------------------------------------
// Conditional asset-value kernels

/// l(s, t, x): tau1 at s before tau2, and Z2(t) at x with tau2 > t.
inline DensityValue l_kernel(double st, double t, double x, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(st, "default time s");
    if (!(st < t))
        throw DomainError("l_kernel needs s < t");
    if (!(x > 0.0))
        return {0.0, {}};
    const double h = t - st;
    const double sa = std::sin(s.alpha);
    const double m2 = s.m.y;
    EvalQuality acc;
    auto fr = [&](double r) {
        const DensityValue v = f_exit(r, st, s, q);
        acc.merge(v.quality);
        return v.value == 0.0 ? 0.0 : v.value * pi_tilde(x, r * sa, h, m2);
    };
    std::vector<double> extra;
    const double rc = (x - m2 * h) / sa;
    const double w = std::sqrt(h) / sa;
    for (double k : {-3.0, -1.0, 0.0, 1.0, 3.0})
        extra.push_back(rc + k * w);
    const QuadResult res = integrate_1d(fr, detail::exit_radial_points(s, st, q, extra), q);
    res.require("l_kernel(s=" + std::to_string(st) + ", t=" + std::to_string(t) + ", x=" + std::to_string(x) + ")");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

/// p(x, t) = integral of l(s, t, x) over s in (0, t); graded near s = t,
/// where the inner integrand narrows to a spike of width sqrt(t - s).
inline DensityValue p_kernel(double x, double t, const WedgeState& s, const QuadConfig& q) {
    detail::check_positive(t, "time t");
    if (!(x > 0.0))
        return {0.0, {}};
    const QuadConfig inner = q.tightened(1e-2);
    EvalQuality acc;
    auto integrand = [&](double st, double h) -> double {
        if (!(st > 0.0) || !(h > 0.0))
            return 0.0;
        const DensityValue v = l_kernel(st, st + h, x, s, inner);
        acc.merge(v.quality);
        return v.value;
    };
    // pi_tilde(x, ., h) <= 1 / sqrt(2 pi h) bounds the skipped initial stretch.
    const double s_lo = detail::negligible_start(0.5 * t, s, 1e-3 * q.abs_tol, 1.0 / std::sqrt(std::numbers::pi * t));
    if (!(s_lo < t))
        return {0.0, acc};
    const QuadResult res = integrate_1d(integrand, s_lo, t, Singularity{-0.5, SingularEnd::Upper}, q);
    res.require("p_kernel(x=" + std::to_string(x) + ", t=" + std::to_string(t) + ")");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

/// P(tau1 in [s_lo, s_hi), tau2 in [t_lo, t_hi), tau1 < tau2).
inline DensityValue joint_box_mass(double s_lo, double s_hi, double t_lo, double t_hi, const WedgeState& s,
                                   const QuadConfig& q) {
    if (!(0.0 <= s_lo && s_lo < s_hi && t_lo < t_hi))
        throw DomainError("joint_box_mass needs 0 <= s_lo < s_hi and t_lo < t_hi");
    s_hi = std::min(s_hi, t_hi);
    if (!(s_lo < s_hi))
        return {0.0, {}};
    const double sa = std::sin(s.alpha);
    const double m2 = s.m.y;
    const QuadConfig inner = q.tightened(1e-2);
    EvalQuality acc;
    auto per_s = [&](double st) -> double {
        if (!(st > 0.0))
            return 0.0;
        auto fr = [&](double r) {
            const DensityValue v = f_exit(r, st, s, inner);
            acc.merge(v.quality);
            if (v.value == 0.0)
                return 0.0;
            const double x = r * sa;
            return v.value * (survival_or_one(x, t_lo - st, m2) - survival_or_one(x, t_hi - st, m2));
        };
        std::vector<double> extra;
        if (t_lo - st > 0.0)
            detail::hitting_scale_points(extra, sa, t_lo - st);
        detail::hitting_scale_points(extra, sa, t_hi - st);
        const QuadResult r = integrate_1d(fr, detail::exit_radial_points(s, st, inner, extra), inner);
        r.require("joint_box_mass inner");
        return r.value;
    };
    std::vector<double> pts{s_lo};
    if (t_lo > s_lo && t_lo < s_hi)
        pts.push_back(t_lo);
    pts.push_back(s_hi);
    const double start = detail::negligible_start(s_hi, s, 1e-3 * q.abs_tol, 1.0);
    if (start >= s_hi)
        return {0.0, acc};
    if (start > s_lo) {
        pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double p) { return p <= start; }), pts.end());
        pts.insert(pts.begin(), start);
    }
    const QuadResult res = integrate_1d(per_s, pts, q);
    res.require("joint_box_mass");
    acc.quadrature_estimate_error = res.error;
    return detail::finish(res.value, acc);
}

// ---------------------------------------------------------------------------
// Closed forms when alpha = pi/k: finite sums over the 2k reflection images

namespace detail {

inline const ReflectionSet& checked_reflections(const WedgeState& s, int k, ReflectionSet& storage) {
    storage = reflection_set(k);
    if (std::abs(s.alpha - storage.alpha_k) > 1e-12)
        throw DomainError("reflection forms need alpha = pi/" + std::to_string(k) + ", got alpha = " + std::to_string(s.alpha));
    return storage;
}

}  // namespace detail

/// Density of Z(t) at the Cartesian point z with tau > t.
inline double surviving_position_reflect(Vec2 z, double t, const WedgeState& s, int k) {
    detail::check_positive(t, "time t");
    ReflectionSet storage;
    const ReflectionSet& set = detail::checked_reflections(s, k, storage);
    const double st = std::sqrt(t);
    double sum = 0.0;
    for (std::size_t j = 0; j < set.matrices.size(); ++j) {
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        sum += sign * gauss2((s.z - set.matrices[j] * z) * (1.0 / st));
    }
    return std::max(0.0, std::exp(detail::log_tilt(s, z, t)) * sum / t);
}

/// h_survive by images: r times the surviving-position density.
inline double h_reflect(double r, double theta, double t, const WedgeState& s, int k) {
    detail::check_positive(r, "radius r");
    if (!(theta > 0.0 && theta < s.alpha))
        return 0.0;
    return r * surviving_position_reflect(detail::polar(r, theta), t, s, k);
}

/// Exit density through theta = alpha by images, computed in the frame where
/// that edge is the positive x-axis: z~0 at angle alpha - theta0, z~ = (r, 0).
inline double b_reflect(double r, double t, const WedgeState& s, int k) {
    detail::check_positive(r, "radius r");
    detail::check_positive(t, "time t");
    ReflectionSet storage;
    const ReflectionSet& set = detail::checked_reflections(s, k, storage);
    const Vec2 z0 = detail::polar(s.r, s.alpha - s.theta);
    const Vec2 zt{r, 0.0};
    const double st = std::sqrt(t);
    double sum = 0.0;
    for (std::size_t j = 0; j < set.matrices.size(); ++j) {
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        const Mat2& S = set.matrices[j];
        const Vec2 col{S.b, S.d};  // S_j e2
        sum += sign * gauss2((z0 - S * zt) * (1.0 / st)) * dot(z0, col);
    }
    return std::max(0.0, sum / (2.0 * t * t));
}

inline double f_reflect(double r, double t, const WedgeState& s, int k) {
    const double b = b_reflect(r, t, s, k);
    return b == 0.0 ? 0.0 : b * std::exp(detail::log_tilt(s, detail::polar(r, s.alpha), t));
}

}  // namespace wedge
