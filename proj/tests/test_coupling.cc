// Copyright 2026 The unprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unprobe/coupling.h"

#include <gtest/gtest.h>

#include <cmath>

#include "oracle.h"
#include "unprobe/pulse.h"

namespace unprobe {
namespace {

CouplingParams with_eta(double eta) {
    CouplingParams cp;
    cp.eta = eta;
    return cp;
}

TEST(Laguerre, LowOrdersInClosedForm) {
    for (double x : {0.0, 0.01, 0.5, 3.0}) {
        EXPECT_EQ(laguerre_assoc(0, 1, x), 1.0);
        EXPECT_NEAR(laguerre_assoc(1, 1, x), 2.0 - x, 1e-15);
        EXPECT_NEAR(laguerre_assoc(2, 1, x), (x * x - 6.0 * x + 6.0) / 2.0, 1e-14);
        EXPECT_NEAR(laguerre_assoc(3, 0, x), (-x * x * x + 9 * x * x - 18 * x + 6) / 6.0, 1e-14);
    }
    EXPECT_NEAR(laguerre_assoc(2, 1, 0.001296), 2.99611, 5e-6);
}

TEST(Laguerre, RejectsNegativeIndices) {
    EXPECT_THROW(laguerre_assoc(-1, 1, 0.1), std::invalid_argument);
    EXPECT_THROW(laguerre_assoc(3, -1, 0.1), std::invalid_argument);
}

TEST(Laguerre, MatchesSeriesToRelativeTenDigits) {
    double worst = 0.0;
    for (int n = 0; n <= 300; n += 3) {
        for (int i = 0; i <= 100; ++i) {
            const double x = 0.002 * i;
            const double ref = oracle::laguerre(n, 1, x);
            worst = std::max(worst, std::abs(laguerre_assoc(n, 1, x) - ref) / std::abs(ref));
        }
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(Laguerre, TracksSignChangesAtRoots) {
    // First root of L^1_295 lies near x = 0.0124; bracket it with the series.
    using oracle::Real;
    Real lo = 0.010;
    Real hi = 0.014;
    ASSERT_GT(oracle::laguerre_series(295, 1, lo), 0);
    ASSERT_LT(oracle::laguerre_series(295, 1, hi), 0);
    for (int i = 0; i < 80; ++i) {
        const Real mid = (lo + hi) / 2;
        (oracle::laguerre_series(295, 1, mid) > 0 ? lo : hi) = mid;
    }
    const double root = static_cast<double>(lo);
    for (double rel : {1e-9, 1e-7, 1e-5}) {
        const double below = root * (1.0 - rel);
        const double above = root * (1.0 + rel);
        EXPECT_GT(laguerre_assoc(295, 1, below), 0.0) << rel;
        EXPECT_LT(laguerre_assoc(295, 1, above), 0.0) << rel;
        EXPECT_NEAR(laguerre_assoc(295, 1, below) / oracle::laguerre(295, 1, below), 1.0, 1e-6);
    }
}

TEST(Sideband, GroundTransitionValue) {
    EXPECT_NEAR(bsb_coupling(0, with_eta(0.036)), 0.036 * std::exp(-0.000648), 1e-15);
    EXPECT_NEAR(bsb_coupling(0, with_eta(0.036)), 0.0359767, 1e-7);
}

TEST(Sideband, AgreesWithOracleForLargeN) {
    for (const auto &[eta, n] : {std::pair{0.036, 213}, {0.11, 100}, {0.015, 213}, {0.3, 5}}) {
        const double ref = oracle::sideband(n, eta);
        EXPECT_NEAR(bsb_coupling_signed(n, with_eta(eta)) / ref, 1.0, 1e-12) << eta << " " << n;
    }
}

TEST(Sideband, LambDickeLimitWithinOnePercentAtModerateN) {
    const CouplingParams cp = with_eta(0.036);
    EXPECT_LT(std::abs(bsb_coupling(8, cp) / ld_coupling(8, cp) - 1.0), 0.01);
}

TEST(Sideband, LambDickeAgreementSweep) {
    for (double eta : {0.005, 0.01, 0.02, 0.036}) {
        for (int n = 0; n <= 20; ++n) {
            const CouplingParams cp = with_eta(eta);
            EXPECT_LT(std::abs(bsb_coupling(n, cp) / ld_coupling(n, cp) - 1.0), 0.02) << eta << n;
        }
    }
    // Stronger confinement departs quickly from sqrt(n+1) scaling.
    const CouplingParams strong = with_eta(0.1);
    EXPECT_LT(std::abs(bsb_coupling(3, strong) / ld_coupling(3, strong) - 1.0), 0.02);
    EXPECT_NEAR(bsb_coupling(20, strong) / ld_coupling(20, strong),
                oracle::sideband(20, 0.1) / (0.1 * std::sqrt(21.0)), 1e-12);
    EXPECT_LT(bsb_coupling(20, strong) / ld_coupling(20, strong), 0.9);
}

TEST(Sideband, OutsideLambDickeRatioFromOracle) {
    const CouplingParams cp = with_eta(0.11);
    const double ratio = bsb_coupling(100, cp) / ld_coupling(100, cp);
    EXPECT_NEAR(ratio, oracle::sideband(100, 0.11) / (0.11 * std::sqrt(101.0)), 1e-12);
    EXPECT_LT(ratio, 0.6);
}

TEST(Sideband, MonotoneInLambDickeRegime) {
    const CouplingParams cp = with_eta(0.036);
    for (int n = 0; n < 50; ++n) {
        EXPECT_LT(bsb_coupling(n, cp), bsb_coupling(n + 1, cp));
    }
}

TEST(Sideband, FlagsSignChange) {
    const CouplingParams cp = with_eta(0.3);
    const int zero = first_nonpositive_coupling(cp, 1000);
    ASSERT_LE(zero, 1000);
    EXPECT_GT(oracle::sideband(zero - 1, 0.3), 0.0);
    EXPECT_LE(oracle::sideband(zero, 0.3), 0.0);
    try {
        bsb_coupling(zero, cp);
        FAIL() << "expected CouplingSignError";
    } catch (const CouplingSignError &e) {
        EXPECT_EQ(e.n(), zero);
    }
    EXPECT_EQ(first_nonpositive_coupling(with_eta(0.036), 100), 101);
}

TEST(LambDicke, ScalesAsSqrtNPlusOne) {
    const CouplingParams cp = with_eta(0.036);
    EXPECT_DOUBLE_EQ(ld_coupling(0, cp), 0.036);
    EXPECT_DOUBLE_EQ(ld_coupling(1, cp), 0.036 * std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(ld_coupling(1, cp) / ld_coupling(0, cp), std::sqrt(2.0));
}

TEST(RelativeArea, CalibratedTransitionIsPi) {
    for (bool full : {false, true}) {
        for (int n : {0, 4, 70}) {
            EXPECT_DOUBLE_EQ(relative_area(n, n, with_eta(0.036), full), kPi);
        }
    }
}

TEST(RelativeArea, LambDickeRatios) {
    const CouplingParams cp = with_eta(0.036);
    EXPECT_NEAR(relative_area(1, 0, cp, false), kPi * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(relative_area(0, 4, cp, false) / kPi, std::sqrt(0.2), 1e-15);
    EXPECT_NEAR(relative_area(0, 4, cp, false) / kPi, 0.447, 5e-4);
}

TEST(RelativeArea, FullCouplingUsesOracleRatio) {
    const CouplingParams cp = with_eta(0.021);
    EXPECT_NEAR(relative_area(35, 70, cp, true) / kPi,
                oracle::sideband(35, 0.021) / oracle::sideband(70, 0.021), 1e-12);
}

TEST(RelativeArea, RejectsNonPositiveTargetCoupling) {
    const CouplingParams cp = with_eta(0.3);
    const int zero = first_nonpositive_coupling(cp, 1000);
    EXPECT_THROW(relative_area(0, zero, cp, true), CouplingSignError);
    // Past the zero the area is negative rather than an error.
    EXPECT_LT(relative_area(zero + 1, 0, cp, true), 0.0);
}

TEST(CouplingParams, ValidateRejectsBadValues) {
    CouplingParams cp;
    cp.eta = 0.0;
    EXPECT_THROW(cp.validate(), std::invalid_argument);
    cp.eta = std::nan("");
    EXPECT_THROW(cp.validate(), std::invalid_argument);
    cp.eta = 0.036;
    cp.omega_car = -1.0;
    EXPECT_THROW(cp.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace unprobe
