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
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "wedge/densities.hpp"
#include "wedge/errors.hpp"
#include "wedge/geometry.hpp"
#include "wedge/parallel.hpp"

// Default intensities of the two firms under discrete asset observations.
//
// Between observations t_j <= u < t_{j+1} the market knows X(t_j) for the
// firms alive at t_j and the default indicators up to u. Every quantity is
// evaluated in window-relative time u' = u - t_j from the wedge state at
// X(t_j). lambda1 uses the same machinery in the tilde frame.

namespace wedge {

// Grid points on an observation or default instant are evaluated at u + eps,
// so the reported path is right-continuous.
inline constexpr double kRightLimit = 1e-9;
inline constexpr double kMinDenominator = 1e-14;

enum class RegimeTag { BothAlive, CoDefaultInWindow, CoDefaultBeforeWindow, TargetDefaulted };

struct Regime {
    RegimeTag tag = RegimeTag::BothAlive;
    double s = 0.0;  // CoDefaultInWindow: default time of the other firm minus t_j

    bool operator==(const Regime&) const = default;
};

inline std::string regime_name(RegimeTag tag) {
    switch (tag) {
    case RegimeTag::BothAlive:
        return "both_alive";
    case RegimeTag::CoDefaultInWindow:
        return "co_default_in_window";
    case RegimeTag::CoDefaultBeforeWindow:
        return "co_default_before_window";
    case RegimeTag::TargetDefaulted:
        return "target_defaulted";
    }
    return "unknown";
}

/// What the market knows at time as_of. Observations are stored as asset
/// log-distances X(t_j); a component is present only if that firm was alive
/// at t_j. (Z = Sigma^{-1} X mixes both components when rho != 0, so a
/// partial observation has no meaningful z.)
struct InformationState {
    std::vector<double> obs_times;
    std::size_t last_obs = 0;
    std::optional<double> x1;
    std::optional<double> x2;
    std::optional<double> default_time1;
    std::optional<double> default_time2;
    double as_of = 0.0;

    double t_j() const { return obs_times.at(last_obs); }

    void validate() const {
        if (obs_times.empty() || last_obs >= obs_times.size())
            throw InconsistentStateError("information state has no observation at or before u");
        for (std::size_t i = 1; i < obs_times.size(); ++i)
            if (!(obs_times[i] > obs_times[i - 1]))
                throw InconsistentStateError("observation times must be strictly increasing");
        const double tj = t_j();
        if (!(tj <= as_of) || (last_obs + 1 < obs_times.size() && !(as_of < obs_times[last_obs + 1])))
            throw InconsistentStateError("u = " + std::to_string(as_of) + " is not in [t_j, t_{j+1})");
        auto check = [&](const std::optional<double>& d, const std::optional<double>& x, int firm) {
            const std::string name = "firm " + std::to_string(firm);
            if (d && *d > as_of)
                throw InconsistentStateError(name + " default time " + std::to_string(*d) + " is after u");
            if (d && *d < tj && x)
                throw InconsistentStateError(name + " defaulted before t_j but has an observation at t_j");
            if (!d && !x)
                throw InconsistentStateError(name + " is alive but unobserved at t_j");
            if (x && !(*x > 0.0))
                throw InconsistentStateError(name + " observation must be positive");
        };
        check(default_time1, x1, 1);
        check(default_time2, x2, 2);
    }
};

/// Regime of firm i (1 or 2) under info.
inline Regime regime_of(int firm, const InformationState& info) {
    if (firm != 1 && firm != 2)
        throw DomainError("firm index must be 1 or 2");
    info.validate();
    const auto& own = firm == 1 ? info.default_time1 : info.default_time2;
    const auto& other = firm == 1 ? info.default_time2 : info.default_time1;
    if (own)
        return {RegimeTag::TargetDefaulted, 0.0};
    if (!other)
        return {RegimeTag::BothAlive, 0.0};
    if (*other >= info.t_j())
        return {RegimeTag::CoDefaultInWindow, *other - info.t_j()};
    return {RegimeTag::CoDefaultBeforeWindow, 0.0};
}

struct IntensitySample {
    double u = 0.0;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    Regime regime1;
    Regime regime2;
    EvalQuality quality;
};

struct Observation {
    double t = 0.0;
    std::optional<double> x1;
    std::optional<double> x2;
};

struct DefaultEvent {
    int firm = 1;
    double time = 0.0;
};

struct TimeGrid {
    double start = 0.0;
    double stop = 1.0;
    double step = 0.1;

    /// start, start + step, ... up to stop (inclusive within step * 1e-9).
    std::vector<double> points() const {
        if (!(step > 0.0) || !(stop >= start) || !std::isfinite(start) || !std::isfinite(stop))
            throw DomainError("time grid needs step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
        std::vector<double> out;
        out.reserve(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
};

struct Scenario {
    ModelParams model;
    std::vector<Observation> observations;
    std::vector<DefaultEvent> defaults;
    TimeGrid grid;

    std::vector<double> obs_times() const {
        std::vector<double> t;
        for (const auto& o : observations)
            t.push_back(o.t);
        return t;
    }

    std::optional<double> default_time(int firm) const {
        for (const auto& d : defaults)
            if (d.firm == firm)
                return d.time;
        return std::nullopt;
    }

    void validate() const {
        model.validate();
        if (observations.empty())
            throw InconsistentStateError("scenario needs at least one observation");
        for (std::size_t i = 1; i < observations.size(); ++i)
            if (!(observations[i].t > observations[i - 1].t))
                throw InconsistentStateError("observation times must be strictly increasing");
        for (const auto& d : defaults) {
            if (d.firm != 1 && d.firm != 2)
                throw InconsistentStateError("default event firm must be 1 or 2");
            if (!(d.time >= observations.front().t))
                throw InconsistentStateError("default event before the first observation");
        }
        if (defaults.size() > 2 || (defaults.size() == 2 && defaults[0].firm == defaults[1].firm))
            throw InconsistentStateError("at most one default event per firm");
        for (const auto& o : observations) {
            for (int firm : {1, 2}) {
                const auto d = default_time(firm);
                const auto& x = firm == 1 ? o.x1 : o.x2;
                const std::string where = "observation at t=" + std::to_string(o.t) + ", firm " + std::to_string(firm);
                if (x && !(*x > 0.0))
                    throw InconsistentStateError(where + ": log-distance must be positive");
                if (d && *d < o.t && x)
                    throw InconsistentStateError(where + ": firm defaulted at " + std::to_string(*d) + " but is observed");
                if ((!d || *d > o.t) && !x)
                    throw InconsistentStateError(where + ": firm alive but not observed");
            }
        }
    }
};

/// Information state of a scenario at time u.
inline InformationState information_at(const Scenario& sc, double u) {
    InformationState info;
    info.obs_times = sc.obs_times();
    if (info.obs_times.empty() || u < info.obs_times.front())
        throw InconsistentStateError("u = " + std::to_string(u) + " precedes the first observation");
    info.last_obs = static_cast<std::size_t>(std::upper_bound(info.obs_times.begin(), info.obs_times.end(), u) -
                                             info.obs_times.begin()) -
                    1;
    const Observation& o = sc.observations[info.last_obs];
    info.x1 = o.x1;
    info.x2 = o.x2;
    for (int firm : {1, 2}) {
        const auto d = sc.default_time(firm);
        if (d && *d <= u)
            (firm == 1 ? info.default_time1 : info.default_time2) = d;
    }
    // A firm that defaults exactly at t_j sits on its barrier there.
    if (info.default_time1 && *info.default_time1 == info.t_j())
        info.x1.reset();
    if (info.default_time2 && *info.default_time2 == info.t_j())
        info.x2.reset();
    info.as_of = u;
    return info;
}

namespace detail {

// The pieces of one firm's intensity: firm 2 in the original frame, firm 1
// in the tilde frame. "Target" is the firm whose intensity is computed; its
// barrier is the theta = 0 edge, the other firm's is theta = alpha.
struct Frame {
    int firm = 2;
    const ModelParams* model = nullptr;
    const InformationState* info = nullptr;

    double window_time(double u) const {
        const double up = u - info->t_j();
        if (!(up > 0.0))
            throw DomainError("intensity at u = t_j is undefined; evaluate the right limit u = t_j + eps");
        return up;
    }

    // Scaled target log-distance and drift: Z2 or Z~2 at t_j.
    double z_target() const {
        const auto& x = firm == 2 ? info->x2 : info->x1;
        const double sigma = firm == 2 ? model->sigma2 : model->sigma1;
        if (!x)
            throw InconsistentStateError("firm " + std::to_string(firm) + " has no observation at t_j");
        return *x / sigma;
    }
    double m_target() const { return firm == 2 ? model->mu.y / model->sigma2 : model->mu.x / model->sigma1; }

    WedgeState state() const {
        if (!info->x1 || !info->x2)
            throw InconsistentStateError("both firms must be observed at t_j");
        const Vec2 x{*info->x1, *info->x2};
        return firm == 2 ? state_at(*model, x) : tilde_state_at(*model, x);
    }
};

inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void check_denominator(double den, const std::string& what) {
    if (!(den >= kMinDenominator))
        throw DegenerateConditioningError(what + " = " + short_num(den) + " is below " + short_num(kMinDenominator));
}

inline DensityValue ratio(const DensityValue& num, const DensityValue& den, const std::string& what) {
    check_denominator(den.value, what);
    EvalQuality q = num.quality;
    q.merge(den.quality);
    const double v = std::max(0.0, num.value) / den.value;
    q.quadrature_estimate_error = num.quality.quadrature_estimate_error / den.value +
                                  v * den.quality.quadrature_estimate_error / den.value;
    if (num.value < -1e-12)
        q.clamped = true;
    return {v, q};
}

inline DensityValue single_name_ratio(double num, double den, const std::string& what) {
    return ratio({num, {}}, {den, {}}, what);
}

// Target intensity at u from the window-relative formulas; regime already known.
inline DensityValue intensity_value(const Frame& fr, const Regime& reg, double u, const QuadConfig& q) {
    const double up = fr.window_time(u);
    switch (reg.tag) {
    case RegimeTag::BothAlive: {
        const WedgeState s = fr.state();
        const DensityValue gi = g_time_integral(up, up, s, q);
        DensityValue num{pi_hit(s.z.y, up, s.m.y) - gi.value, gi.quality};
        const DensityValue den = survival_prob(up, s, q);
        return ratio(num, den, "P(tau > u - t_j)");
    }
    case RegimeTag::CoDefaultInWindow: {
        if (!(reg.s < up))
            throw DomainError("co-default at s = u; evaluate the right limit");
        if (reg.s == 0.0)
            // The other firm defaulted at t_j itself: from then on the target
            // is a one-dimensional motion started at its observed level.
            return single_name_ratio(pi_hit(fr.z_target(), up, fr.m_target()),
                                     pi_survival(fr.z_target(), up, fr.m_target()), "single-name survival");
        const WedgeState s = fr.state();
        return ratio(g_joint(reg.s, up, s, q), g_tail(reg.s, up, s, q), "g tail mass");
    }
    case RegimeTag::CoDefaultBeforeWindow:
        return single_name_ratio(pi_hit(fr.z_target(), up, fr.m_target()),
                                 pi_survival(fr.z_target(), up, fr.m_target()), "single-name survival");
    case RegimeTag::TargetDefaulted:
        break;
    }
    throw InvalidStateError("no intensity after the target firm has defaulted");
}

inline IntensitySample lambda_sample(int firm, double u, const InformationState& info, const ModelParams& model,
                                     const QuadConfig& q) {
    IntensitySample out;
    out.u = u;
    out.regime1 = regime_of(1, info);
    out.regime2 = regime_of(2, info);
    const Regime& reg = firm == 1 ? out.regime1 : out.regime2;
    if (reg.tag == RegimeTag::TargetDefaulted)
        return out;
    if (std::abs(u - info.as_of) > 0.0)
        throw InconsistentStateError("information state is as of " + std::to_string(info.as_of) + ", not u");
    const DensityValue v = intensity_value(Frame{firm, &model, &info}, reg, u, q);
    (firm == 1 ? out.lambda1 : out.lambda2) = v.value;
    out.quality = v.quality;
    return out;
}

}  // namespace detail

/// Default intensity of firm 2 at u (per year).
inline IntensitySample lambda2(double u, const InformationState& info, const ModelParams& model, const QuadConfig& q) {
    return detail::lambda_sample(2, u, info, model, q);
}

/// Default intensity of firm 1 at u, from the tilde frame.
inline IntensitySample lambda1(double u, const InformationState& info, const ModelParams& model, const QuadConfig& q) {
    return detail::lambda_sample(1, u, info, model, q);
}

/// Density at v > u of the target firm's default time given the information
/// at u. Firm 2 by default.
inline DensityValue conditional_default_density(double v, const InformationState& info, const ModelParams& model,
                                                const QuadConfig& q, int firm = 2) {
    const Regime reg = regime_of(firm, info);
    if (reg.tag == RegimeTag::TargetDefaulted)
        throw InvalidStateError("target firm has already defaulted");
    if (!(v > info.as_of))
        throw DomainError("conditional default density needs v > u");
    const detail::Frame fr{firm, &model, &info};
    const double up = fr.window_time(info.as_of);
    const double vp = v - info.t_j();
    switch (reg.tag) {
    case RegimeTag::BothAlive: {
        const WedgeState s = fr.state();
        const DensityValue gi = g_time_integral(up, vp, s, q);
        return detail::ratio({pi_hit(s.z.y, vp, s.m.y) - gi.value, gi.quality}, survival_prob(up, s, q),
                             "P(tau > u - t_j)");
    }
    case RegimeTag::CoDefaultInWindow:
        if (reg.s > 0.0) {
            const WedgeState s = fr.state();
            return detail::ratio(g_joint(reg.s, vp, s, q), g_tail(reg.s, up, s, q), "g tail mass");
        }
        [[fallthrough]];
    default:
        return detail::single_name_ratio(pi_hit(fr.z_target(), vp, fr.m_target()),
                                         pi_survival(fr.z_target(), up, fr.m_target()), "single-name survival");
    }
}

/// Density of the target's scaled log-distance (Z2, or Z~2 for firm 1) at
/// level x at time u, given the information at u.
inline DensityValue conditional_asset_density(double x, const InformationState& info, const ModelParams& model,
                                              const QuadConfig& q, int firm = 2) {
    const Regime reg = regime_of(firm, info);
    if (reg.tag == RegimeTag::TargetDefaulted)
        throw InvalidStateError("target firm has already defaulted");
    if (!(x > 0.0))
        return {0.0, {}};
    const detail::Frame fr{firm, &model, &info};
    const double up = fr.window_time(info.as_of);
    switch (reg.tag) {
    case RegimeTag::BothAlive: {
        const WedgeState s = fr.state();
        const DensityValue p = p_kernel(x, up, s, q);
        return detail::ratio({pi_tilde(x, s.z.y, up, s.m.y) - p.value, p.quality}, survival_prob(up, s, q),
                             "P(tau > u - t_j)");
    }
    case RegimeTag::CoDefaultInWindow:
        if (reg.s > 0.0) {
            const WedgeState s = fr.state();
            return detail::ratio(l_kernel(reg.s, up, x, s, q), g_tail(reg.s, up, s, q), "g tail mass");
        }
        [[fallthrough]];
    default:
        return detail::single_name_ratio(pi_tilde(x, fr.z_target(), up, fr.m_target()),
                                         pi_survival(fr.z_target(), up, fr.m_target()), "single-name survival");
    }
}

enum class Firms { Both, First, Second };

/// Intensities at u for a scenario. On an observation or default instant the
/// right limit u + kRightLimit is evaluated; the sample keeps u.
inline IntensitySample intensity_at(const Scenario& sc, double u, const QuadConfig& q, Firms firms = Firms::Both) {
    InformationState info = information_at(sc, u);
    bool on_event = u == info.t_j();
    for (int firm : {1, 2}) {
        const auto d = sc.default_time(firm);
        on_event = on_event || (d && *d == u);
    }
    double ue = u;
    if (on_event) {
        ue = u + kRightLimit;
        if (info.last_obs + 1 < info.obs_times.size() && !(ue < info.obs_times[info.last_obs + 1]))
            throw InconsistentStateError("observations closer than the right-limit offset");
        info.as_of = ue;
    }
    IntensitySample out;
    out.u = u;
    out.regime1 = regime_of(1, info);
    out.regime2 = regime_of(2, info);
    double err = 0.0;
    if (firms != Firms::Second) {
        const IntensitySample a = lambda1(ue, info, sc.model, q);
        out.lambda1 = a.lambda1;
        out.quality.merge(a.quality);
        err = a.quality.quadrature_estimate_error;
    }
    if (firms != Firms::First) {
        const IntensitySample b = lambda2(ue, info, sc.model, q);
        out.lambda2 = b.lambda2;
        out.quality.merge(b.quality);
        err = std::max(err, b.quality.quadrature_estimate_error);
    }
    out.quality.quadrature_estimate_error = err;
    return out;
}

/// intensity_at over a strictly increasing grid, in parallel.
inline std::vector<IntensitySample> intensity_path(const Scenario& sc, const std::vector<double>& grid,
                                                   const QuadConfig& q, Firms firms = Firms::Both) {
    sc.validate();
    q.validate();
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("time grid must be strictly increasing");
    std::vector<IntensitySample> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { out[i] = intensity_at(sc, grid[i], q, firms); });
    return out;
}

}  // namespace wedge
