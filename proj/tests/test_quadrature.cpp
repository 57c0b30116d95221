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

#include <cmath>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wedge/quadrature.hpp"

using namespace wedge;
using std::numbers::pi;

namespace {

struct Case {
    std::string name;
    std::function<double(double)> f;
    double a;
    double b;
    double exact;
    std::optional<Singularity> sing;
    // Distance-aware form for singular ends where b - s cancels.
    std::function<double(double, double)> fd = nullptr;
};

std::vector<Case> battery() {
    return {
        {"exp(-x) on [0,inf)", [](double x) { return std::exp(-x); }, 0, kInfinity, 1.0, {}},
        {"x^2 on [0,1]", [](double x) { return x * x; }, 0, 1, 1.0 / 3.0, {}},
        {"sin on [0,pi]", [](double x) { return std::sin(x); }, 0, pi, 2.0, {}},
        {"cos on [0,10]", [](double x) { return std::cos(x); }, 0, 10, std::sin(10.0), {}},
        {"1/(1+x^2) on [0,inf)", [](double x) { return 1.0 / (1.0 + x * x); }, 0, kInfinity, pi / 2, {}},
        {"gaussian on [-8,8]", [](double x) { return std::exp(-0.5 * x * x); }, -8, 8, std::sqrt(2 * pi) * std::erf(8 / std::sqrt(2.0)), {}},
        {"gaussian on [0,inf)", [](double x) { return std::exp(-0.5 * x * x); }, 0, kInfinity, std::sqrt(pi / 2), {}},
        {"sqrt(x) on [0,1]", [](double x) { return std::sqrt(x); }, 0, 1, 2.0 / 3.0, {}},
        {"log(x) on (0,1]", [](double x) { return std::log(x); }, 0, 1, -1.0, {}},
        {"x^-1/2 on (0,1] lower", [](double x) { return 1.0 / std::sqrt(x); }, 0, 1, 2.0, Singularity{-0.5, SingularEnd::Lower}},
        {"(1-x)^-1/2 on [0,1) upper", [](double x) { return 1.0 / std::sqrt(1.0 - x); }, 0, 1, 2.0, Singularity{-0.5, SingularEnd::Upper}},
        {"(2-x)^-0.8 on [0,2)", [](double x) { return std::pow(2.0 - x, -0.8); }, 0, 2, 5.0 * std::pow(2.0, 0.2), Singularity{-0.8, SingularEnd::Upper},
         [](double, double d) { return std::pow(d, -0.8); }},
        {"x^-1/3 e^-x on (0,3]", [](double x) { return std::pow(x, -1.0 / 3.0) * std::exp(-x); }, 0, 3, 1.322404947170042, Singularity{-1.0 / 3.0, SingularEnd::Lower}},
        {"exp(x) on [0,5]", [](double x) { return std::exp(x); }, 0, 5, std::exp(5.0) - 1.0, {}},
        {"1/x on [1,e]", [](double x) { return 1.0 / x; }, 1, std::numbers::e, 1.0, {}},
        {"x^-3/2 on [1,inf)", [](double x) { return std::pow(x, -1.5); }, 1, kInfinity, 2.0, {}},
        {"runge on [-1,1]", [](double x) { return 1.0 / (1.0 + 25.0 * x * x); }, -1, 1, 0.4 * std::atan(5.0), {}},
        {"peak at 0.3", [](double x) { return 1.0 / ((x - 0.3) * (x - 0.3) + 1e-4); }, 0, 1, 100.0 * (std::atan(70.0) + std::atan(30.0)), {}},
        {"|x-0.4| on [0,1]", [](double x) { return std::abs(x - 0.4); }, 0, 1, 0.08 + 0.18, {}},
        {"x e^-x on [0,inf)", [](double x) { return x * std::exp(-x); }, 0, kInfinity, 1.0, {}},
        {"sin^2(20x) on [0,pi]", [](double x) { return std::sin(20 * x) * std::sin(20 * x); }, 0, pi, pi / 2, {}},
        {"x^5 on [-1,2]", [](double x) { return std::pow(x, 5); }, -1, 2, (64.0 - 1.0) / 6.0, {}},
        {"step-free kink exp(-|x|) on [-3,4]", [](double x) { return std::exp(-std::abs(x)); }, -3, 4, 2.0 - std::exp(-3.0) - std::exp(-4.0), {}},
        {"1/(1+x)^2 on [0,inf)", [](double x) { return 1.0 / ((1 + x) * (1 + x)); }, 0, kInfinity, 1.0, {}},
    };
}

QuadResult run(const Case& c, const QuadConfig& q) {
    if (c.sing && c.fd)
        return integrate_1d(c.fd, c.a, c.b, *c.sing, q);
    if (c.sing)
        return integrate_1d(c.f, c.a, c.b, *c.sing, q);
    return integrate_1d(c.f, c.a, c.b, q);
}

}  // namespace

TEST(Integrate1d, ExponentialTail) {
    const QuadResult r = integrate_1d([](double x) { return std::exp(-x); }, 0.0, kInfinity, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Integrate1d, InverseSquareRootWithSubstitution) {
    const QuadResult r = integrate_1d([](double s) { return 1.0 / std::sqrt(s); }, 0.0, 1.0,
                                      Singularity{-0.5, SingularEnd::Lower}, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 2.0, 1e-10);
}

TEST(Integrate1d, HittingDensityTotalMass) {
    auto pi_hit = [](double h) { return 1.0 / std::sqrt(2 * pi * h * h * h) * std::exp(-1.0 / (2 * h)); };
    const QuadResult r = integrate_1d(pi_hit, 0.0, kInfinity, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-7);
}

TEST(Integrate1d, BatteryMeetsToleranceAndEstimatesAreConservative) {
    const auto cases = battery();
    ASSERT_GE(cases.size(), 20u);
    int within3 = 0;
    for (const Case& c : cases) {
        QuadConfig q;
        q.rel_tol = 1e-10;
        q.abs_tol = 1e-13;
        const QuadResult r = run(c, q);
        EXPECT_TRUE(r.converged) << c.name;
        const double err = std::abs(r.value - c.exact);
        EXPECT_LE(err, std::max(1e-9 * std::abs(c.exact), 1e-12)) << c.name;
        EXPECT_LE(err, 10.0 * r.error + 1e-15) << c.name;
        within3 += err <= 3.0 * r.error + 1e-15;
    }
    EXPECT_GE(within3, static_cast<int>(0.95 * cases.size()));
}

TEST(Integrate1d, EstimatesConservativeAtLooseTolerance) {
    // Loose tolerances stop refinement early, where estimates matter most.
    const auto cases = battery();
    int within3 = 0;
    for (const Case& c : cases) {
        QuadConfig q;
        q.rel_tol = 1e-4;
        q.abs_tol = 1e-6;
        const QuadResult r = run(c, q);
        const double err = std::abs(r.value - c.exact);
        EXPECT_LE(err, 10.0 * r.error + 1e-15) << c.name;
        within3 += err <= 3.0 * r.error + 1e-15;
    }
    EXPECT_GE(within3, static_cast<int>(0.95 * cases.size()));
}

TEST(Integrate1d, Breakpoints) {
    const QuadResult r = integrate_1d([](double x) { return std::abs(x - 0.4); }, std::vector<double>{0.0, 0.4, 1.0}, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 0.26, 1e-14);
    EXPECT_EQ(r.evaluations, 42);
}

TEST(Integrate1d, BreakpointsWithInfiniteTail) {
    const QuadResult r = integrate_1d([](double x) { return std::exp(-x); }, std::vector<double>{0.0, 1.0, 3.0, kInfinity}, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Integrate1d, DeterministicBitIdentical) {
    auto f = [](double x) { return std::exp(-x) * std::sin(3 * x) * std::sin(3 * x); };
    const QuadResult a = integrate_1d(f, 0.0, kInfinity, QuadConfig{});
    const QuadResult b = integrate_1d(f, 0.0, kInfinity, QuadConfig{});
    EXPECT_EQ(std::memcmp(&a.value, &b.value, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&a.error, &b.error, sizeof(double)), 0);
}

TEST(Integrate1d, FailureCarriesEstimate) {
    QuadConfig q;
    q.max_depth = 4;
    q.rel_tol = 1e-14;
    q.abs_tol = 1e-16;
    const QuadResult r = integrate_1d([](double x) { return std::sin(1.0 / x); }, 1e-4, 1.0, q);
    EXPECT_FALSE(r.converged);
    EXPECT_THROW(r.require("oscillatory test"), QuadratureError);
    try {
        r.require("oscillatory test");
    } catch (const QuadratureError& e) {
        EXPECT_EQ(e.value(), r.value);
        EXPECT_NE(std::string(e.what()).find("oscillatory test"), std::string::npos);
    }
}

TEST(Integrate1d, PreconditionErrors) {
    auto f = [](double) { return 1.0; };
    EXPECT_THROW(integrate_1d(f, 1.0, 0.0, QuadConfig{}), DomainError);
    EXPECT_THROW(integrate_1d(f, 0.0, 1.0, Singularity{-1.0, SingularEnd::Upper}, QuadConfig{}), DomainError);
    EXPECT_THROW(integrate_1d(f, 0.0, 1.0, Singularity{0.5, SingularEnd::Upper}, QuadConfig{}), DomainError);
    QuadConfig bad;
    bad.max_depth = 3;
    EXPECT_THROW(integrate_1d(f, 0.0, 1.0, bad), DomainError);
    bad = QuadConfig{};
    bad.rel_tol = 0.0;
    EXPECT_THROW(integrate_1d(f, 0.0, 1.0, bad), DomainError);
}

TEST(IntegrateWedge, ConstantGivesRectangleArea) {
    const QuadResult r = integrate_wedge([](double, double) { return 1.0; }, pi / 2, 1.0, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, pi / 2, 1e-14);
}

TEST(IntegrateWedge, ZeroIntegrand) {
    const QuadResult r = integrate_wedge([](double, double) { return 0.0; }, pi / 3, 2.0, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_EQ(r.value, 0.0);
}

TEST(IntegrateWedge, PolarGaussianMass) {
    // r exp(-r^2/2) over the quarter plane is pi/4 (with the r Jacobian supplied).
    auto f = [](double r, double) { return r * std::exp(-0.5 * r * r); };
    const QuadResult r = integrate_wedge(f, pi / 2, 12.0, QuadConfig{});
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, pi / 2 * (1 - std::exp(-72.0)), 1e-12);
}

TEST(IntegrateWedge, SliceFactoryMatchesDirectForm) {
    auto direct = [](double r, double th) { return r * std::sin(3 * th) * std::exp(-r); };
    auto factory = [](double r) {
        const double radial = r * std::exp(-r);
        return [radial](double th) { return radial * std::sin(3 * th); };
    };
    const QuadResult a = integrate_wedge(direct, pi / 3, 30.0, QuadConfig{}, {1.0, 3.0});
    const QuadResult b = integrate_wedge(factory, pi / 3, 30.0, QuadConfig{}, {1.0, 3.0});
    EXPECT_EQ(a.value, b.value);
    EXPECT_NEAR(a.value, 2.0 / 3.0 * (1 - 31 * std::exp(-30.0)), 1e-12);
}
