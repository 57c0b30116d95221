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

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "wedge/special_fn.hpp"

using namespace wedge;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

// Straight power series in 50-digit arithmetic; the reference for I_v.
big series_oracle(double v, double z) {
    const big half = big(z) / 2;
    big term = pow(half, big(v)) / boost::multiprecision::tgamma(big(v) + 1);
    big sum = term;
    for (int k = 0; k < 5000; ++k) {
        term *= half * half / ((big(k) + 1) * (big(k) + big(v) + 1));
        sum += term;
        if (term < sum * big("1e-45"))
            break;
    }
    return sum;
}

double half_order_identity(double z) { return std::sqrt(2.0 / (std::numbers::pi * z)) * std::sinh(z); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(BesselI, LeadingTermAtZero) {
    EXPECT_EQ(bessel_i(BesselOrder(0.0), 0.0), 1.0);
    EXPECT_EQ(bessel_i(BesselOrder(1.5), 0.0), 0.0);
    EXPECT_EQ(bessel_i_scaled(BesselOrder(0.0), 0.0), 1.0);
}

TEST(BesselI, HalfOrderValue) {
    EXPECT_NEAR(bessel_i(BesselOrder(0.5), 1.0), half_order_identity(1.0), 1e-15);
    EXPECT_NEAR(bessel_i(BesselOrder(0.5), 1.0), 0.937674, 1e-6);
}

TEST(BesselI, OrderOneAgainstExtendedSeries) {
    const double oracle = static_cast<double>(series_oracle(1.0, 2.0));
    EXPECT_LT(rel(bessel_i(BesselOrder(1.0), 2.0), oracle), 1e-14);
    EXPECT_NEAR(bessel_i(BesselOrder(1.0), 2.0), 1.590637, 5e-7);
}

TEST(BesselI, ScaledHalfOrder) {
    const double expect = std::exp(-10.0) * half_order_identity(10.0);
    EXPECT_LT(rel(bessel_i_scaled(BesselOrder(0.5), 10.0), expect), 1e-13);
    // e^{-10} sqrt(2/(10 pi)) sinh(10) = 0.1261566...
    EXPECT_NEAR(bessel_i_scaled(BesselOrder(0.5), 10.0), 0.1261566, 1e-7);
}

TEST(BesselI, ScaledOrderTwoAtFifty) {
    const double oracle = static_cast<double>(series_oracle(2.0, 50.0) * exp(big(-50)));
    EXPECT_LT(rel(bessel_i_scaled(BesselOrder(2.0), 50.0), oracle), 1e-13);
}

TEST(BesselI, HalfOrderIdentityOnGrid) {
    for (int i = 1; i <= 3000; ++i) {
        const double z = 0.01 * i;
        const double got = bessel_i(BesselOrder(0.5), z);
        ASSERT_LT(std::abs(got - half_order_identity(z)) / got, 1e-12) << "z=" << z;
    }
}

TEST(BesselI, FractionalOrdersAgainstExtendedSeries) {
    for (double v : {0.0, 1.0 / 3.0, 0.75, 1.2, 2.0, 3.0, 6.5, 17.25, 60.0, 150.0}) {
        for (double z : {1e-6, 0.01, 0.3, 1.0, 2.7, 9.0, 33.0, 120.0, 600.0}) {
            const big ref = series_oracle(v, z);
            const double scaled_ref = static_cast<double>(ref * exp(big(-z)));
            if (scaled_ref < 1e-300)
                continue;
            // Log-space summation loses about z * eps relative accuracy.
            const double tol = std::max(2e-13, 2e-15 * z);
            EXPECT_LT(rel(bessel_i_scaled(BesselOrder(v), z), scaled_ref), tol) << "v=" << v << " z=" << z;
        }
    }
}

TEST(BesselI, ScaledMatchesUnscaled) {
    for (double v : {0.0, 0.5, 1.5, 4.0, 12.0}) {
        for (double z : {0.1, 1.0, 5.0, 40.0, 300.0}) {
            const double a = bessel_i_scaled(BesselOrder(v), z);
            const double b = bessel_i(BesselOrder(v), z) * std::exp(-z);
            EXPECT_LT(rel(a, b), 1e-13) << v << " " << z;
        }
    }
}

TEST(BesselI, LargeArgumentOverflowAndScaledStability) {
    EXPECT_THROW(bessel_i(BesselOrder(1.0), 800.0), OverflowError);
    const double s = bessel_i_scaled(BesselOrder(1.0), 1e5);
    // e^{-z} I_v(z) ~ 1/sqrt(2 pi z) (1 - (4v^2-1)/(8z))
    const double asym = 1.0 / std::sqrt(2.0 * std::numbers::pi * 1e5) * (1.0 - 3.0 / 8e5);
    EXPECT_LT(rel(s, asym), 1e-9);
}

TEST(BesselI, DomainErrors) {
    EXPECT_THROW(BesselOrder(-0.1), DomainError);
    EXPECT_THROW(bessel_i(BesselOrder(1.0), -1.0), DomainError);
    EXPECT_THROW(bessel_i_scaled(BesselOrder(1.0), std::nan("")), DomainError);
}

TEST(BesselI, IncreasingInArgument) {
    for (double v : {0.25, 1.0, 3.0, 9.5}) {
        double prev = bessel_i(BesselOrder(v), 0.0);
        for (int i = 1; i <= 400; ++i) {
            const double cur = bessel_i(BesselOrder(v), 0.05 * i);
            ASSERT_GT(cur, prev) << "v=" << v << " z=" << 0.05 * i;
            prev = cur;
        }
    }
}

TEST(Gauss2, ClosedForms) {
    EXPECT_NEAR(gauss2({0, 0}), 1.0 / (2.0 * std::numbers::pi), 1e-16);
    EXPECT_NEAR(gauss2({2, 0}), std::exp(-2.0) / (2.0 * std::numbers::pi), 1e-17);
    EXPECT_NEAR(gauss2({2, 2}), std::exp(-4.0) / (2.0 * std::numbers::pi), 1e-17);
    EXPECT_NEAR(gauss2({0, 0}), 0.159155, 5e-7);
    EXPECT_NEAR(gauss2({2, 0}), 0.021539, 5e-7);
    EXPECT_NEAR(gauss2({2, 2}), 0.002915, 5e-7);
}

TEST(NormalCdf, LogTails) {
    EXPECT_NEAR(std::exp(log_normal_cdf(0.3)), normal_cdf(0.3), 1e-16);
    // Mills ratio check deep in the lower tail.
    for (double x : {-36.0, -50.0, -200.0}) {
        const big ref = log(erfc(big(-x) / sqrt(big(2))) / 2);
        EXPECT_LT(std::abs(log_normal_cdf(x) - static_cast<double>(ref)) / std::abs(static_cast<double>(ref)), 1e-13);
    }
    EXPECT_NEAR(log_normal_cdf(10.0), -7.619853024160526e-24, 1e-36);
}

TEST(Truncation, ZeroArgument) {
    EXPECT_EQ(truncation_length(std::numbers::pi / 2, 0.0, SeriesBudget(0.5, 10)).terms, 1);
    EXPECT_EQ(truncation_length(std::numbers::pi / 2, 0.0, SeriesBudget(1e-12, 400)).terms, 1);
}

TEST(Truncation, RightAngleUnitArgumentIsMinimal) {
    const double a = std::numbers::pi / 2;
    const Truncation t = truncation_length(a, 1.0, SeriesBudget(1e-12, 400));
    ASSERT_TRUE(t.bound_met);
    // Independent evaluation: the bound with q = 1/4 against the partial sum.
    auto partial = [&](int n) {
        double s = 0.0;
        for (int i = 1; i <= n; ++i)
            s += i * bessel_i(BesselOrder(2.0 * i), 1.0);
        return s;
    };
    auto bound = [](int n) {
        const double q = 0.25;
        double tail = 0.0;
        for (int i = n + 1; i < n + 400; ++i)
            tail += i * std::numbers::e * std::pow(q, i);
        return tail;
    };
    EXPECT_LT(bound(t.terms), 1e-12 * partial(t.terms));
    EXPECT_GE(bound(t.terms - 1), 1e-12 * partial(t.terms - 1));
}

TEST(Truncation, OversummationConfirmsTail) {
    const double a = std::numbers::pi / 3;
    const double z = 1.9;
    const Truncation t = truncation_length(a, z, SeriesBudget(1e-10, 400));
    ASSERT_TRUE(t.bound_met);
    double head = 0.0;
    double tail = 0.0;
    for (int n = 1; n <= 11 * t.terms; ++n) {
        const double term = n * bessel_i(BesselOrder(3.0 * n), z);
        (n <= t.terms ? head : tail) += term;
    }
    EXPECT_LT(tail, 1e-10 * head);
}

TEST(Truncation, FlagWhenBoundUnusable) {
    const Truncation t = truncation_length(std::numbers::pi / 2, 5.0, SeriesBudget(1e-12, 50));
    EXPECT_FALSE(t.bound_met);
    EXPECT_EQ(t.terms, 50);
}

TEST(SeriesTailBound, ExplicitConstantHolds) {
    // sum_n n I_{n pi/2a}(z) <= e q / (1 - (1/2)^{pi/2a})^2, q = (z/2)^{pi/2a}.
    for (double a : {std::numbers::pi / 2, std::numbers::pi / 3, std::numbers::pi / 4}) {
        const double p = std::numbers::pi / (2.0 * a);
        for (int i = 1; i < 100; ++i) {
            const double z = 0.01 * i;
            double sum = 0.0;
            for (int n = 1; n <= 200; ++n)
                sum += n * bessel_i(BesselOrder(n * p), z);
            const double bound = std::numbers::e * std::pow(0.5, p) * std::pow(z, p) / std::pow(1.0 - std::pow(0.5, p), 2);
            ASSERT_LE(sum, bound) << "alpha=" << a << " z=" << z;
        }
    }
}

TEST(SeriesTailBound, TailFormulaMatchesDirectSum) {
    const double a = std::numbers::pi / 3;
    const double z = 1.2;
    const double q = std::pow(0.5 * z, 3.0);
    for (int n : {1, 3, 10}) {
        double direct = 0.0;
        for (int i = n + 1; i < n + 2000; ++i)
            direct += std::numbers::e * i * std::pow(q, i);
        EXPECT_LT(rel(series_tail_bound(a, z, n), direct), 1e-12);
    }
    EXPECT_TRUE(std::isinf(series_tail_bound(a, 2.5, 3)));
}

TEST(SeriesBudget, Invariants) {
    EXPECT_THROW(SeriesBudget(0.0, 10), DomainError);
    EXPECT_THROW(SeriesBudget(1.0, 10), DomainError);
    EXPECT_THROW(SeriesBudget(0.1, 0), DomainError);
}
