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
#include <cstdint>
#include <string>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "wedge/errors.hpp"
#include "wedge/geometry.hpp"
#include "wedge/intensity.hpp"
#include "wedge/parallel.hpp"
#include "wedge/rng.hpp"

// Simulation oracle for the first-passage quantities. Z = Sigma^{-1} X moves
// as a standard planar Brownian motion with drift m; each step adds an exact
// Gaussian increment. A firm defaults in a step if its edge distance ends
// nonpositive or, with the bridge correction, with the one-dimensional bridge
// crossing probability exp(-2 d_start d_end / dt) for that edge.
//
// Each path draws from two Philox substreams keyed by (seed, path): one for
// the Gaussian increments (Boost's ziggurat sampler), one for the bridge
// uniforms, which are consumed only near an edge.
//
// Default times are recorded as step indices k (time k dt, the end of the
// step), so every estimator below is integer counting and does not depend on
// the thread schedule.

namespace wedge {

struct SimConfig {
    long n_paths = 100000;
    double dt = 5e-4;
    double horizon = 2.0;
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    double hist_bin = 0.05;              // width of the (tau1, tau2) histogram bins
    std::vector<double> survival_times;  // empty: 40 equally spaced points up to horizon

    long steps() const { return std::lround(horizon / dt); }
    long steps_per_bin() const { return std::lround(hist_bin / dt); }

    void validate() const {
        if (n_paths < 1)
            throw DomainError("n_paths must be at least 1");
        if (!(dt > 0.0) || !(horizon > 0.0) || !std::isfinite(horizon) || !(dt <= horizon))
            throw DomainError("need 0 < dt <= horizon");
        if (std::abs(horizon / dt - static_cast<double>(steps())) > 1e-6)
            throw DomainError("horizon must be a whole number of steps");
        if (static_cast<double>(steps()) > 2e9)
            throw DomainError("too many time steps");
        if (!(hist_bin >= dt) || std::abs(hist_bin / dt - static_cast<double>(steps_per_bin())) > 1e-6)
            throw DomainError("hist_bin must be a whole number of steps");
        for (double t : survival_times)
            if (!(t >= 0.0 && t <= horizon * (1.0 + 1e-12)))
                throw DomainError("survival time " + std::to_string(t) + " outside [0, horizon]");
    }
};

/// Default step of each firm on each path; -1 if it survived the horizon.
struct PathOutcomes {
    double dt = 0.0;
    long steps = 0;
    std::vector<std::int32_t> step1;
    std::vector<std::int32_t> step2;

    std::size_t size() const { return step1.size(); }

    // Index of the last step ending at or before t.
    long step_at(double t) const { return static_cast<long>(std::floor(t / dt + 1e-9)); }
};

struct CurvePoint {
    double t = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Counts of (tau1, tau2) with both defaults inside the horizon. Bin i covers
/// times in (i w, (i + 1) w].
struct Hist2D {
    double bin = 0.0;
    std::size_t n = 0;
    std::vector<std::uint64_t> counts;  // row = tau1 bin, column = tau2 bin

    std::uint64_t at(std::size_t i, std::size_t j) const { return counts.at(i * n + j); }
    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts)
            s += c;
        return s;
    }
};

struct EscapeCounts {
    std::uint64_t neither = 0;     // both alive at the horizon
    std::uint64_t only_firm1 = 0;  // firm 1 defaulted, firm 2 alive at the horizon
    std::uint64_t only_firm2 = 0;

    std::uint64_t total() const { return neither + only_firm1 + only_firm2; }
};

struct SimEstimates {
    long n_paths = 0;
    std::vector<CurvePoint> survival_curve;  // P(tau1 > t, tau2 > t)
    Hist2D default_time_hist2d;
    EscapeCounts escape_counts;
};

/// Simulates cfg.n_paths paths of the model and records the default steps.
inline PathOutcomes simulate_paths(const ModelParams& model, const SimConfig& cfg) {
    cfg.validate();
    const WedgeState s = build_model(model);
    const double sa = std::sin(s.alpha);
    const double ca = std::cos(s.alpha);
    const double dt = cfg.dt;
    const double sdt = std::sqrt(dt);
    const Vec2 drift = s.m * dt;
    const long n_steps = cfg.steps();
    // Beyond this exponent the bridge crossing probability is below 1e-17.
    constexpr double kBridgeCutoff = 40.0;

    PathOutcomes out;
    out.dt = dt;
    out.steps = n_steps;
    const auto n = static_cast<std::size_t>(cfg.n_paths);
    out.step1.assign(n, -1);
    out.step2.assign(n, -1);

    constexpr std::size_t kChunk = 2048;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t end = std::min(n, (c + 1) * kChunk);
        for (std::size_t path = c * kChunk; path < end; ++path) {
            rng::PhiloxEngine normals(cfg.seed, path, 0);
            rng::PhiloxEngine uniforms(cfg.seed, path, 1);
            boost::random::normal_distribution<double> gauss;
            Vec2 z = s.z;
            double d1 = distance_to_edge_alpha(z, s.alpha);
            double d2 = z.y;
            std::int32_t k1 = -1;
            std::int32_t k2 = -1;
            for (long k = 0; k < n_steps; ++k) {
                const double g1 = gauss(normals);
                const double g2 = gauss(normals);
                z = z + drift + Vec2{g1, g2} * sdt;
                const double e1 = z.x * sa - z.y * ca;
                const double e2 = z.y;
                bool hit1 = k1 < 0 && e1 <= 0.0;
                bool hit2 = k2 < 0 && e2 <= 0.0;
                if (cfg.bridge_correction) {
                    const double x1 = k1 < 0 && !hit1 ? 2.0 * d1 * e1 / dt : kBridgeCutoff;
                    const double x2 = k2 < 0 && !hit2 ? 2.0 * d2 * e2 / dt : kBridgeCutoff;
                    if (x1 < kBridgeCutoff)
                        hit1 = uniforms.unit() < std::exp(-x1);
                    if (x2 < kBridgeCutoff)
                        hit2 = uniforms.unit() < std::exp(-x2);
                }
                if (hit1)
                    k1 = static_cast<std::int32_t>(k + 1);
                if (hit2)
                    k2 = static_cast<std::int32_t>(k + 1);
                if (k1 >= 0 && k2 >= 0)
                    break;
                d1 = e1;
                d2 = e2;
            }
            out.step1[path] = k1;
            out.step2[path] = k2;
        }
    });
    return out;
}

namespace detail {

inline bool alive_after(std::int32_t step, long k) { return step < 0 || step > k; }

inline CurvePoint proportion(double t, std::uint64_t hits, std::uint64_t n) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {t, p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

}  // namespace detail

/// Survival curve, histogram and escape counts from simulated outcomes.
inline SimEstimates estimate(const PathOutcomes& paths, const SimConfig& cfg) {
    cfg.validate();
    if (paths.size() == 0)
        throw InsufficientSampleError("no simulated paths");
    SimEstimates est;
    est.n_paths = static_cast<long>(paths.size());
    const std::uint64_t n = paths.size();

    std::vector<double> times = cfg.survival_times;
    if (times.empty())
        for (int i = 1; i <= 40; ++i)
            times.push_back(cfg.horizon * i / 40.0);
    for (double t : times) {
        const long k = paths.step_at(t);
        std::uint64_t alive = 0;
        for (std::size_t p = 0; p < paths.size(); ++p)
            alive += detail::alive_after(paths.step1[p], k) && detail::alive_after(paths.step2[p], k);
        est.survival_curve.push_back(detail::proportion(t, alive, n));
    }

    const long spb = cfg.steps_per_bin();
    Hist2D& h = est.default_time_hist2d;
    h.bin = cfg.hist_bin;
    h.n = static_cast<std::size_t>((paths.steps + spb - 1) / spb);
    h.counts.assign(h.n * h.n, 0);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const std::int32_t a = paths.step1[p];
        const std::int32_t b = paths.step2[p];
        if (a < 0 && b < 0)
            ++est.escape_counts.neither;
        else if (b < 0)
            ++est.escape_counts.only_firm1;
        else if (a < 0)
            ++est.escape_counts.only_firm2;
        else
            ++h.counts[static_cast<std::size_t>((a - 1) / spb) * h.n + static_cast<std::size_t>((b - 1) / spb)];
    }
    return est;
}

inline SimEstimates simulate(const ModelParams& model, const SimConfig& cfg) {
    return estimate(simulate_paths(model, cfg), cfg);
}

/// Which paths a conditional rate is computed over: both alive at u, or firm 1
/// defaulted in (s_lo, s_hi] (absolute times, s_hi <= u) with firm 2 alive at u.
struct RateConditioning {
    RegimeTag tag = RegimeTag::BothAlive;
    double s_lo = 0.0;
    double s_hi = 0.0;
};

struct RateEstimate {
    double rate = 0.0;
    double std_error = 0.0;
    std::uint64_t conditioned = 0;
    std::uint64_t events = 0;
};

inline constexpr std::uint64_t kMinConditionedPaths = 1000;

/// Fraction of conditioned paths on which firm 2 defaults in (u, u + delta],
/// divided by delta.
inline RateEstimate conditional_rate(const PathOutcomes& paths, double u, double delta, const RateConditioning& cond) {
    if (!(delta > 0.0) || !(u >= 0.0))
        throw DomainError("conditional rate needs u >= 0 and delta > 0");
    const long ku = paths.step_at(u);
    const long kv = paths.step_at(u + delta);
    if (kv > paths.steps)
        throw DomainError("u + delta is beyond the simulated horizon");
    if (kv == ku)
        throw DomainError("delta is shorter than one time step");
    long klo = 0;
    long khi = 0;
    if (cond.tag == RegimeTag::CoDefaultInWindow) {
        klo = paths.step_at(cond.s_lo);
        khi = paths.step_at(cond.s_hi);
        if (!(cond.s_lo < cond.s_hi) || khi > ku)
            throw DomainError("conditioning window must satisfy s_lo < s_hi <= u");
    } else if (cond.tag != RegimeTag::BothAlive) {
        throw DomainError("conditional rate supports both_alive and co_default_in_window conditioning");
    }
    RateEstimate r;
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const std::int32_t a = paths.step1[p];
        const std::int32_t b = paths.step2[p];
        if (!detail::alive_after(b, ku))
            continue;
        const bool ok = cond.tag == RegimeTag::BothAlive ? detail::alive_after(a, ku) : (a > klo && a <= khi);
        if (!ok)
            continue;
        ++r.conditioned;
        r.events += b >= 0 && b <= kv;
    }
    if (r.conditioned < kMinConditionedPaths)
        throw InsufficientSampleError("only " + std::to_string(r.conditioned) + " paths satisfy the conditioning (need " +
                                      std::to_string(kMinConditionedPaths) + ")");
    const double width = static_cast<double>(kv - ku) * paths.dt;
    const CurvePoint pr = detail::proportion(u, r.events, r.conditioned);
    r.rate = pr.estimate / width;
    r.std_error = pr.std_error / width;
    return r;
}

/// Simulates up to u + delta and estimates the conditional rate.
inline RateEstimate conditional_rate(const ModelParams& model, SimConfig cfg, double u, double delta,
                                     const RateConditioning& cond) {
    cfg.horizon = std::ceil((u + delta) / cfg.dt - 1e-9) * cfg.dt;
    cfg.hist_bin = cfg.dt;
    return conditional_rate(simulate_paths(model, cfg), u, delta, cond);
}

}  // namespace wedge
