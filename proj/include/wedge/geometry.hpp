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
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "wedge/errors.hpp"
#include "wedge/vec2.hpp"

// Two-firm model X(t) = X(0) + mu t + Sigma W(t) and its wedge coordinates.
//
// With Sigma = [[s1 c, s1 rho], [0, s2]], c = sqrt(1 - rho^2), the process
// Z = Sigma^{-1} X is a standard Brownian motion with drift m = Sigma^{-1} mu.
// Firm 2 defaults when Z hits the ray theta = 0 (X2 = 0) and firm 1 when it
// hits theta = alpha (X1 = 0), alpha = arccos(-rho).

namespace wedge {

inline constexpr double kRhoCap = 1.0 - 1e-6;

struct ModelParams {
    Vec2 mu;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;
    Vec2 x0{1.0, 1.0};

    void validate() const {
        if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2))
            throw DomainError("volatilities must be finite and positive");
        if (!std::isfinite(mu.x) || !std::isfinite(mu.y))
            throw DomainError("drifts must be finite");
        if (!(std::abs(rho) < kRhoCap))
            throw SingularModelError("|rho| = " + std::to_string(std::abs(rho)) +
                                     " is at or beyond the cap 1 - 1e-6; Sigma is numerically singular");
        if (!(x0.x > 0.0) || !(x0.y > 0.0) || !std::isfinite(x0.x) || !std::isfinite(x0.y))
            throw DomainError("initial log-distances must be finite and positive (a firm at or below its barrier has defaulted)");
    }
};

struct WedgeState {
    Vec2 z;
    double r = 0.0;
    double theta = 0.0;
    double alpha = 0.0;
    Vec2 m;
};

inline double wedge_angle(double rho) {
    if (!(std::abs(rho) < kRhoCap))
        throw SingularModelError("|rho| too close to 1 for a wedge angle");
    return std::acos(-rho);
}

inline Mat2 sigma_matrix(const ModelParams& p) {
    const double c = std::sqrt(1.0 - p.rho * p.rho);
    return {p.sigma1 * c, p.sigma1 * p.rho, 0.0, p.sigma2};
}

inline Mat2 sigma_inverse(const ModelParams& p) {
    const double c = std::sqrt(1.0 - p.rho * p.rho);
    return {1.0 / (p.sigma1 * c), -p.rho / (p.sigma2 * c), 0.0, 1.0 / p.sigma2};
}

// Symmetric orthogonal involution swapping the two edges of the wedge.
inline Mat2 tilde_matrix(double rho) {
    const double c = std::sqrt(1.0 - rho * rho);
    return {-rho, c, c, rho};
}

/// Wedge state for a point z with drift m; throws InvalidStateError unless
/// 0 < theta < alpha.
inline WedgeState make_state(Vec2 z, Vec2 m, double alpha) {
    WedgeState s;
    s.z = z;
    s.m = m;
    s.alpha = alpha;
    s.r = norm(z);
    s.theta = std::atan2(z.y, z.x);
    if (!(s.r > 0.0) || !(s.theta > 0.0 && s.theta < alpha))
        throw InvalidStateError("point (" + std::to_string(z.x) + ", " + std::to_string(z.y) +
                                ") is not inside the wedge of angle " + std::to_string(alpha));
    return s;
}

/// Wedge state of the asset log-distances x (both positive).
inline WedgeState state_at(const ModelParams& p, Vec2 x) {
    p.validate();
    const Mat2 inv = sigma_inverse(p);
    return make_state(inv * x, inv * p.mu, wedge_angle(p.rho));
}

/// Same, in the tilde frame where firm 1 defaults on theta = 0.
inline WedgeState tilde_state_at(const ModelParams& p, Vec2 x) {
    p.validate();
    const Mat2 t = tilde_matrix(p.rho) * sigma_inverse(p);
    return make_state(t * x, t * p.mu, wedge_angle(p.rho));
}

inline WedgeState build_model(const ModelParams& p) { return state_at(p, p.x0); }

inline WedgeState tilde_model(const ModelParams& p) { return tilde_state_at(p, p.x0); }

// Unit-diffusion distances of z to the theta = 0 edge and the theta = alpha edge.
inline double distance_to_edge0(Vec2 z) { return z.y; }
inline double distance_to_edge_alpha(Vec2 z, double alpha) { return z.x * std::sin(alpha) - z.y * std::cos(alpha); }

struct ReflectionSet {
    int k = 2;
    double alpha_k = std::numbers::pi / 2;
    std::vector<Mat2> matrices;  // S_0 ... S_{2k-1}
};

inline ReflectionSet reflection_set(int k) {
    if (k < 2)
        throw DomainError("reflection set needs k >= 2, got " + std::to_string(k));
    ReflectionSet set;
    set.k = k;
    set.alpha_k = std::numbers::pi / k;
    set.matrices.reserve(2 * k);
    set.matrices.push_back(Mat2::identity());
    for (int j = 1; j < 2 * k; ++j) {
        const double a = 2.0 * j * set.alpha_k;
        const Mat2 t{std::cos(a), std::sin(a), std::sin(a), -std::cos(a)};
        set.matrices.push_back(t * set.matrices.back());
    }
    return set;
}

/// k in [2, 64] with |rho + cos(pi/k)| < tol, if any.
inline std::optional<int> special_case_k(double rho, double tol = 1e-12) {
    for (int k = 2; k <= 64; ++k)
        if (std::abs(rho + std::cos(std::numbers::pi / k)) < tol)
            return k;
    return std::nullopt;
}

}  // namespace wedge
