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
#include <optional>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wedge/errors.hpp"
#include "wedge/special_fn.hpp"

// Globally adaptive Gauss-Kronrod integration.
//
// Every panel is a 10/21-point Gauss/Kronrod pair; |K - G| is the panel error
// estimate. The panel with the largest estimate is bisected until the summed
// estimate meets max(abs_tol, rel_tol |value|). Final values are summed in
// left-to-right panel order so results do not depend on refinement history.

namespace wedge {

struct QuadConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    int max_depth = 40;
    double tail_sigma = 8.5;
    double series_rel_tol = 1e-12;
    int series_max_terms = 400;
    // Use the finite image sums when alpha = pi/k and the drift allows it.
    bool use_reflection = false;
    int max_panels = 20000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(series_rel_tol > 0.0 && series_rel_tol < 1.0))
            throw DomainError("QuadConfig tolerances must be positive");
        if (max_depth < 4)
            throw DomainError("QuadConfig max_depth must be at least 4");
        if (!(tail_sigma > 0.0))
            throw DomainError("QuadConfig tail_sigma must be positive");
        if (series_max_terms < 1 || max_panels < 1)
            throw DomainError("QuadConfig term and panel caps must be positive");
    }

    SeriesBudget series() const { return SeriesBudget(series_rel_tol, series_max_terms); }

    // Same config with both tolerances multiplied by f.
    QuadConfig tightened(double f) const {
        QuadConfig c = *this;
        c.rel_tol *= f;
        c.abs_tol *= f;
        return c;
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    long evaluations = 0;

    // Value if converged, QuadratureError naming `what` otherwise.
    double require(const std::string& what) const {
        if (!converged)
            throw QuadratureError(what + ": quadrature did not converge", value, error);
        return value;
    }
};

enum class SingularEnd { Lower, Upper };

// f(s) ~ |end - s|^exponent near the named end, exponent in (-1, 0].
struct Singularity {
    double exponent = 0.0;
    SingularEnd end = SingularEnd::Upper;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace detail {

struct Panel {
    double a;
    double b;
    double value;
    double error;
    int depth;
};

struct PanelByError {
    bool operator()(const Panel& x, const Panel& y) const { return x.error < y.error; }
};

template <class F>
Panel gk21_panel(F& f, double a, double b, int depth) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    using G = boost::math::quadrature::gauss<double, 10>;
    static const auto& xk = GK::abscissa();
    static const auto& wk = GK::weights();
    static const auto& wg = G::weights();

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    // Kronrod abscissae: index 0 is the centre, odd indices are the Gauss
    // nodes of the 10-point rule (which has no centre node).
    const double f0 = f(mid);
    double k = f0 * wk[0];
    double g = 0.0;
    double l1 = std::abs(f0) * wk[0];
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double fp = f(mid + half * xk[i]);
        const double fm = f(mid - half * xk[i]);
        k += (fp + fm) * wk[i];
        l1 += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 1)
            g += (fp + fm) * wg[i / 2];
    }
    const double value = half * k;
    const double err = std::max(std::abs(half * (k - g)), 50.0 * std::numeric_limits<double>::epsilon() * half * l1);
    return {a, b, value, err, depth};
}

template <class F>
QuadResult adaptive(F& f, const std::vector<double>& points, double rel_tol, double abs_tol, int max_depth, int max_panels) {
    std::priority_queue<Panel, std::vector<Panel>, PanelByError> open;
    std::vector<Panel> frozen;
    QuadResult res;
    double total = 0.0;
    double total_err = 0.0;

    auto push = [&](const Panel& p) {
        total += p.value;
        total_err += p.error;
        res.evaluations += 21;
        if (!std::isfinite(p.value))
            res.converged = false;
        open.push(p);
    };

    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        if (points[i + 1] > points[i])
            push(gk21_panel(f, points[i], points[i + 1], 0));

    int n_panels = static_cast<int>(open.size());
    while (res.converged && !open.empty()) {
        if (total_err <= std::max(abs_tol, rel_tol * std::abs(total)))
            break;
        Panel worst = open.top();
        open.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (worst.depth >= max_depth || !(mid > worst.a && mid < worst.b)) {
            frozen.push_back(worst);
            continue;
        }
        if (n_panels >= max_panels) {
            open.push(worst);
            res.converged = false;
            break;
        }
        total -= worst.value;
        total_err -= worst.error;
        push(gk21_panel(f, worst.a, mid, worst.depth + 1));
        push(gk21_panel(f, mid, worst.b, worst.depth + 1));
        ++n_panels;
    }

    while (!open.empty()) {
        frozen.push_back(open.top());
        open.pop();
    }
    std::sort(frozen.begin(), frozen.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    res.value = 0.0;
    res.error = 0.0;
    for (const Panel& p : frozen) {
        res.value += p.value;
        res.error += p.error;
    }
    if (!std::isfinite(res.value) || res.error > std::max(abs_tol, rel_tol * std::abs(res.value)))
        res.converged = false;
    return res;
}

inline void check_interval(double a, double b) {
    if (!std::isfinite(a) || std::isnan(b) || !(a < b))
        throw DomainError("integration interval must satisfy finite a < b");
}

}  // namespace detail

/// Integral of f over consecutive panels [p0, p1], [p1, p2], ... The last
/// point may be kInfinity; that panel is mapped to (0, 1] by
/// x = p + L (1/w^2 - 1) with L = max(1, p).
template <class F>
QuadResult integrate_1d(F&& f, std::vector<double> points, const QuadConfig& q) {
    q.validate();
    if (points.size() < 2)
        throw DomainError("integrate_1d needs at least two points");
    for (std::size_t i = 0; i + 1 < points.size(); ++i)
        detail::check_interval(points[i], points[i + 1]);

    if (!std::isinf(points.back())) {
        auto g = [&](double x) { return static_cast<double>(f(x)); };
        return detail::adaptive(g, points, q.rel_tol, q.abs_tol, q.max_depth, q.max_panels);
    }

    // Finite part plus the mapped tail, refined together.
    const double a = points[points.size() - 2];
    const double scale = std::max(1.0, std::abs(a));
    const std::size_t n_finite = points.size() - 2;
    std::vector<double> mapped;
    for (std::size_t i = 0; i <= n_finite + 1; ++i)
        mapped.push_back(static_cast<double>(i));
    const double origin = static_cast<double>(n_finite);
    auto g = [&](double y) -> double {
        if (y < origin) {
            const auto i = static_cast<std::size_t>(y);
            const double x = points[i] + (y - static_cast<double>(i)) * (points[i + 1] - points[i]);
            return static_cast<double>(f(x)) * (points[i + 1] - points[i]);
        }
        const double w = 1.0 - (y - origin);  // w in (0, 1], w -> 0 at infinity
        const double x = a + scale * (1.0 / (w * w) - 1.0);
        if (!std::isfinite(x))
            return 0.0;
        const double fx = static_cast<double>(f(x));
        return fx == 0.0 ? 0.0 : fx * 2.0 * scale / (w * w * w);
    };
    return detail::adaptive(g, mapped, q.rel_tol, q.abs_tol, q.max_depth, q.max_panels);
}

template <class F>
QuadResult integrate_1d(F&& f, double a, double b, const QuadConfig& q) {
    return integrate_1d(std::forward<F>(f), std::vector<double>{a, b}, q);
}

/// Endpoint-singular integral: with f ~ |end - s|^g near the named end, the
/// substitution w = |end - s|^{g+1} leaves a bounded integrand. If f accepts
/// (s, d) it also receives d = |end - s| computed without cancellation.
template <class F>
QuadResult integrate_1d(F&& f, double a, double b, Singularity sing, const QuadConfig& q) {
    q.validate();
    detail::check_interval(a, b);
    if (std::isinf(b))
        throw DomainError("singular substitution needs a finite interval");
    const double g = sing.exponent;
    if (!(g > -1.0 && g <= 0.0))
        throw DomainError("singular exponent must lie in (-1, 0], got " + std::to_string(g));

    const double p = 1.0 / (g + 1.0);
    const bool upper = sing.end == SingularEnd::Upper;
    auto h = [&](double w) -> double {
        const double d = std::pow(w, p);
        const double s = upper ? b - d : a + d;
        double fs;
        if constexpr (std::is_invocable_v<F, double, double>)
            fs = static_cast<double>(f(s, d));
        else
            fs = static_cast<double>(f(s));
        return fs * p * std::pow(w, p - 1.0);
    };
    return detail::adaptive(h, {0.0, std::pow(b - a, g + 1.0)}, q.rel_tol, q.abs_tol, q.max_depth, q.max_panels);
}

/// Integral over the polar wedge 0 < r < r_hi, 0 < theta < alpha of
/// f(r, theta) dr dtheta (no Jacobian is added). Adaptive in r; for each r the
/// theta integral is itself adaptive at a tenth of the tolerance. `f` is either
/// f(r, theta) or a factory r -> (theta -> value), which lets callers hoist
/// per-radius work out of the inner loop.
template <class F>
QuadResult integrate_wedge(F&& f, double alpha, double r_hi, const QuadConfig& q, std::vector<double> r_breaks = {}) {
    q.validate();
    if (!(alpha > 0.0 && alpha < std::numbers::pi))
        throw DomainError("wedge angle must lie in (0, pi)");
    if (!(r_hi > 0.0) || !std::isfinite(r_hi))
        throw DomainError("wedge radius must be finite and positive");

    QuadConfig inner = q.tightened(0.1);
    inner.abs_tol = q.abs_tol * 0.1 / r_hi;
    double inner_err = 0.0;
    bool inner_ok = true;
    long evals = 0;

    auto radial = [&](double r) -> double {
        QuadResult slice;
        if constexpr (std::is_invocable_r_v<double, F, double, double>) {
            slice = integrate_1d([&](double th) { return f(r, th); }, 0.0, alpha, inner);
        } else {
            auto at_r = f(r);
            slice = integrate_1d(at_r, 0.0, alpha, inner);
        }
        inner_err += slice.error;
        inner_ok = inner_ok && slice.converged;
        evals += slice.evaluations;
        return slice.value;
    };

    std::vector<double> pts{0.0};
    std::sort(r_breaks.begin(), r_breaks.end());
    for (double x : r_breaks)
        if (x > pts.back() && x < r_hi)
            pts.push_back(x);
    pts.push_back(r_hi);

    QuadResult out = detail::adaptive(radial, pts, q.rel_tol, q.abs_tol, q.max_depth, q.max_panels);
    // Each radial node contributes its inner error weighted by at most r_hi.
    const double nodes = static_cast<double>(out.evaluations);
    out.error += nodes > 0.0 ? inner_err / nodes * r_hi : 0.0;
    out.evaluations += evals;
    out.converged = out.converged && inner_ok;
    return out;
}

}  // namespace wedge
