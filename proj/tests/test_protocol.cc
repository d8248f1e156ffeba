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

#include "unprobe/protocol.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracle.h"
#include "unprobe/io.h"

namespace unprobe {
namespace {

CouplingParams eta(double value) {
    CouplingParams cp;
    cp.eta = value;
    return cp;
}

// Excitation when calibrated on n_target, with couplings from the series.
double oracle_fire(const PhaseSequence &seq, int m, int n_target, double eta_value) {
    const double ratio = oracle::sideband(m, eta_value) / oracle::sideband(n_target, eta_value);
    return excitation(seq, kPi * ratio);
}

// |z| / sigma for k successes in n trials against probability p.
double z_score(long long k, long long n, double p) {
    const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
    const double dev = static_cast<double>(k) - static_cast<double>(n) * p;
    return sd > 0.0 ? std::abs(dev) / sd : (dev == 0.0 ? 0.0 : INFINITY);
}

std::vector<Probe> probes(const std::string &name, std::vector<int> targets) {
    std::vector<Probe> out;
    const PhaseSequence seq = named_sequence(name);
    for (int n : targets) {
        out.push_back({n, seq});
    }
    return out;
}

NoiseModel noisy() {
    NoiseModel n;
    n.detection_error_bright = 0.02;
    n.detection_error_dark = 0.03;
    n.heating_rate = 150.0;
    n.pulse_duration = 1e-4;
    n.detection_duration = 2e-3;
    n.phase_jitter_sigma = 0.08;
    n.preparation_error = 0.05;
    return n;
}

TEST(Noise, ValidationAndHeatingBudget) {
    NoiseModel n;
    EXPECT_DOUBLE_EQ(n.heating_rate, 13.7);
    EXPECT_NO_THROW(n.validate());
    EXPECT_NEAR(n.heating_quanta(11), 13.7 * 11 * 99.2e-6, 1e-15);
    n.detection_error_dark = 1.2;
    EXPECT_THROW(n.validate(), std::invalid_argument);
    n = NoiseModel::ideal();
    EXPECT_EQ(n.heating_quanta(100), 0.0);
    n.phase_jitter_sigma = -0.1;
    EXPECT_THROW(n.validate(), std::invalid_argument);
}

TEST(Detection, MatchesDirectEvaluation) {
    const PhaseSequence un11 = named_sequence("UN11");
    for (int m = 0; m <= 9; ++m) {
        for (int n = 0; n <= 9; ++n) {
            EXPECT_NEAR(detection_probability(m, n, un11, eta(0.036), true),
                        oracle_fire(un11, m, n, 0.036), 1e-12);
        }
    }
    EXPECT_GE(detection_probability(4, 4, un11, eta(0.036), true), 0.99);
    EXPECT_LE(detection_probability(0, 4, un11, eta(0.036), true), 0.01);
}

TEST(Detection, FewerPulsesLeakMoreToNeighbour) {
    const double un3 = detection_probability(5, 4, named_sequence("UN3"), eta(0.036), true);
    const double un11 = detection_probability(5, 4, named_sequence("UN11"), eta(0.036), true);
    EXPECT_GT(un3, un11);
}

TEST(Detection, SidebandTransferFollowsElectronicState) {
    const PhaseSequence s = named_sequence("UN5");
    const CouplingParams cp = eta(0.036);
    EXPECT_EQ(sideband_transfer(Electronic::shelved, 3, 3, s, cp, true, 0.0), 0.0);
    EXPECT_EQ(sideband_transfer(Electronic::excited, 0, 3, s, cp, true, 0.0), 0.0);
    // |D, n+1> couples back through transition n.
    EXPECT_NEAR(sideband_transfer(Electronic::excited, 4, 3, s, cp, true, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(sideband_transfer(Electronic::ground, 3, 3, s, cp, true, 0.0), 1.0, 1e-12);
}

TEST(Confusion, NoiseFreeMatrixIsDetectionProbability) {
    const PhaseSequence un11 = named_sequence("UN11");
    std::vector<int> r(10);
    std::iota(r.begin(), r.end(), 0);
    const Matrix mat = confusion_matrix(r, r, un11, eta(0.036), NoiseModel::ideal());
    ASSERT_EQ(mat.values.size(), 100u);
    for (int m = 0; m < 10; ++m) {
        for (int n = 0; n < 10; ++n) {
            EXPECT_NEAR(mat.at(m, n), oracle_fire(un11, m, n, 0.036), 1e-12);
        }
        EXPECT_GE(mat.at(m, m), 0.99);
    }
    EXPECT_THROW(confusion_matrix({}, r, un11, eta(0.036), NoiseModel::ideal()),
                 std::invalid_argument);
}

TEST(Confusion, DetectionErrorsFoldIntoCells) {
    const PhaseSequence un11 = named_sequence("UN11");
    NoiseModel n = NoiseModel::ideal();
    n.detection_error_dark = 0.01;
    n.detection_error_bright = 0.004;
    const std::vector<int> r{0, 1, 2};
    const Matrix clean = confusion_matrix(r, r, un11, eta(0.036), NoiseModel::ideal());
    const Matrix noisy_mat = confusion_matrix(r, r, un11, eta(0.036), n);
    for (size_t i = 0; i < 3; ++i) {
        for (size_t j = 0; j < 3; ++j) {
            const double p = clean.at(i, j);
            EXPECT_NEAR(noisy_mat.at(i, j), p * 0.99 + (1 - p) * 0.004, 1e-15);
        }
        EXPECT_NEAR(clean.at(i, i) - noisy_mat.at(i, i), 0.01, 1e-3);
    }
}

TEST(Confusion, SinglePulseIsBroad) {
    const std::vector<int> r{0, 1, 2, 3, 4};
    const Matrix mat =
        confusion_matrix(r, r, PhaseSequence::single_pulse(), eta(0.036), NoiseModel::ideal());
    EXPECT_GT(mat.at(1, 0), 0.5);
    EXPECT_GT(mat.at(3, 4), 0.9);
}

TEST(SingleShot, ExactChainForFockOne) {
    const auto p = probes("UN11", {0, 1, 2, 3});
    const ChainProbabilities c =
        single_shot_exact(PhononDistribution::fock(1), p, eta(0.036), NoiseModel::ideal());
    const PhaseSequence un11 = named_sequence("UN11");
    const double f0 = oracle_fire(un11, 1, 0, 0.036);
    const double f1 = oracle_fire(un11, 1, 1, 0.036);
    EXPECT_NEAR(c.positive[0], f0, 1e-12);
    EXPECT_NEAR(c.positive[1], (1 - f0) * f1, 1e-12);
    EXPECT_NEAR(c.reach[1], 1 - f0, 1e-12);
    EXPECT_GE(c.positive[1], 0.98);
    EXPECT_LE(c.positive[0], 0.01);
    const double sum = std::accumulate(c.positive.begin(), c.positive.end(), c.all_negative);
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(SingleShot, FockZeroFiresImmediately) {
    const ChainProbabilities c = single_shot_exact(PhononDistribution::fock(0),
                                                   probes("UN11", {0}), eta(0.036), NoiseModel::ideal());
    EXPECT_GE(c.positive[0], 0.99);
}

TEST(SingleShot, NegativeProbesDoNotDisturbTheIon) {
    const auto p = probes("UN11", {5, 6, 7});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto out = single_shot_run(PhononDistribution::fock(2), p, eta(0.036),
                                         NoiseModel::ideal(), seed);
        ASSERT_EQ(out.size(), 3u);
        for (const ProbeOutcome &o : out) {
            EXPECT_FALSE(o.positive);
            EXPECT_EQ(o.electronic, Electronic::ground);
            EXPECT_EQ(o.phonons, 2);
        }
    }
}

TEST(SingleShot, PositiveLeavesExcitedWithAddedPhonon) {
    const auto p = probes("UN11", {0, 1, 2, 3});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto out = single_shot_run(PhononDistribution::fock(1), p, eta(0.036),
                                         NoiseModel::ideal(), seed);
        ASSERT_TRUE(out.back().positive);
        EXPECT_EQ(out.back().electronic, Electronic::excited);
        EXPECT_EQ(out.back().phonons, 2);
        for (size_t k = 0; k + 1 < out.size(); ++k) {
            EXPECT_FALSE(out[k].positive);
        }
    }
}

TEST(SingleShot, RunIsBitReproducible) {
    const auto p = probes("UN5", {0, 1, 2, 3, 4});
    const auto dist = PhononDistribution::thermal(1.2);
    for (std::uint64_t seed : {1ull, 77ull, 123456789ull}) {
        const auto a = single_shot_run(dist, p, eta(0.036), noisy(), seed);
        const auto b = single_shot_run(dist, p, eta(0.036), noisy(), seed);
        ASSERT_EQ(a.size(), b.size());
        for (size_t k = 0; k < a.size(); ++k) {
            EXPECT_EQ(a[k].positive, b[k].positive);
            EXPECT_EQ(a[k].phonons, b[k].phonons);
            EXPECT_EQ(a[k].electronic, b[k].electronic);
        }
    }
}

TEST(SingleShot, MonteCarloAgreesWithExactChain) {
    const auto p = probes("UN11", {0, 1, 2, 3});
    const long long runs = 100000;
    const auto st = single_shot_statistics(PhononDistribution::fock(1), p, eta(0.036),
                                           NoiseModel::ideal(), runs, 2024);
    for (size_t k = 0; k < p.size(); ++k) {
        EXPECT_LT(z_score(st.positives[k], runs, st.exact.positive[k]), 4.0) << k;
    }
    EXPECT_LT(z_score(st.positives[1], st.reached[1], st.exact.conditional(1)), 3.0);
}

TEST(SingleShot, UniformPopulationMatchesChainOracle) {
    const auto p = probes("UN11", {0, 1, 2, 3});
    const long long runs = 100000;
    const auto dist = PhononDistribution::from_table({1, 1, 1, 1});
    const auto st =
        single_shot_statistics(dist, p, eta(0.036), NoiseModel::ideal(), runs, 99);
    const PhaseSequence un11 = named_sequence("UN11");
    for (size_t k = 0; k < p.size(); ++k) {
        double expected = 0.0;
        for (int m = 0; m < 4; ++m) {
            double survive = 0.25;
            for (size_t j = 0; j < k; ++j) {
                survive *= 1.0 - oracle_fire(un11, m, p[j].n_target, 0.036);
            }
            expected += survive * oracle_fire(un11, m, p[k].n_target, 0.036);
        }
        EXPECT_NEAR(st.exact.positive[k], expected, 1e-12) << k;
        EXPECT_LT(z_score(st.positives[k], runs, expected), 3.0) << k;
    }
    // The first two probes split evenly; n=3 partly fires on the n=2 probe,
    // whose area ratio sqrt(4/3) lies inside the UN11 band.
    EXPECT_NEAR(st.exact.positive[0], 0.25, 0.005);
    EXPECT_NEAR(st.exact.positive[1], 0.25, 0.005);
    EXPECT_LT(st.exact.positive[3], 0.24);
}

TEST(SingleShot, NoisyMonteCarloAgreesWithExactChain) {
    const auto p = probes("UN7", {0, 1, 2, 3, 4, 5});
    const long long runs = 100000;
    const auto st = single_shot_statistics(PhononDistribution::thermal(1.0), p, eta(0.036),
                                           noisy(), runs, 5);
    for (size_t k = 0; k < p.size(); ++k) {
        EXPECT_LT(z_score(st.positives[k], runs, st.exact.positive[k]), 4.0) << k;
        EXPECT_LT(z_score(st.reached[k], runs, st.exact.reach[k]), 4.0) << k;
    }
    EXPECT_LT(z_score(st.all_negative, runs, st.exact.all_negative), 4.0);
}

TEST(SingleShot, StatisticsIndependentOfThreadCount) {
    const auto p = probes("UN5", {0, 1, 2});
    const auto dist = PhononDistribution::thermal(0.8);
    const auto one = single_shot_statistics(dist, p, eta(0.036), noisy(), 20000, 3, 1);
    const auto four = single_shot_statistics(dist, p, eta(0.036), noisy(), 20000, 3, 4);
    EXPECT_EQ(one.positives, four.positives);
    EXPECT_EQ(one.reached, four.reached);
    EXPECT_EQ(one.all_negative, four.all_negative);
}

TEST(SingleShot, RejectsBadInput) {
    EXPECT_THROW(single_shot_exact(PhononDistribution::fock(0), {}, eta(0.036), NoiseModel::ideal()),
                 std::invalid_argument);
    EXPECT_THROW(single_shot_exact(PhononDistribution::fock(0), probes("UN3", {2, 1}), eta(0.036),
                                   NoiseModel::ideal()),
                 std::invalid_argument);
    EXPECT_THROW(single_shot_statistics(PhononDistribution::fock(0), probes("UN3", {0}),
                                        eta(0.036), NoiseModel::ideal(), 0, 1),
                 std::invalid_argument);
}

TripleConfig triple(int n_target, bool full = true) {
    return {n_target, named_sequence("UN5"), named_sequence("UN3"), full};
}

TEST(Triple, IdealPassIsSquaredSingleSet) {
    const CouplingParams cp = eta(0.036);
    const TripleConfig cfg = triple(4);
    for (int m = 0; m <= 12; ++m) {
        const TripleProbabilities t = triple_detection(m, cfg, cp, NoiseModel::ideal());
        const double p = oracle_fire(cfg.bsb_sequence, m, 4, 0.036);
        EXPECT_NEAR(t.single_set, p, 1e-12);
        EXPECT_NEAR(t.pass, p * p, 1e-12);
    }
    EXPECT_GE(triple_detection(4, cfg, cp, NoiseModel::ideal()).pass, 0.97);
}

TEST(Triple, SuppressionDominatesSingleSet) {
    // pass <= single^2 up to the floor set by detection errors.
    const CouplingParams cp = eta(0.021);
    const TripleConfig cfg = triple(70);
    NoiseModel n = NoiseModel::ideal();
    n.detection_error_bright = 0.01;
    n.detection_error_dark = 0.01;
    const double floor = 3 * 0.01;
    for (int m = 0; m <= 200; m += 7) {
        const TripleProbabilities t = triple_detection(m, cfg, cp, n);
        EXPECT_LE(t.pass, t.single_set * t.single_set + floor) << m;
    }
}

TEST(Triple, MonteCarloAgreesWithExact) {
    const CouplingParams cp = eta(0.036);
    const TripleConfig cfg = triple(3);
    for (int m : {1, 2, 3, 5}) {
        const long long runs = 100000;
        const TripleStatistics st = triple_detection_statistics(m, cfg, cp, noisy(), runs, 11);
        EXPECT_LT(z_score(st.passes, runs, st.exact.pass), 4.0) << m;
        EXPECT_LT(z_score(st.single_set, runs, st.exact.single_set), 4.0) << m;
    }
}

TEST(Triple, RunStopsAtFirstMismatch) {
    const CouplingParams cp = eta(0.036);
    const TripleConfig cfg = triple(3);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const TripleRun far = triple_detection_run(9, cfg, cp, NoiseModel::ideal(), seed);
        EXPECT_EQ(far.stages, 1);
        EXPECT_FALSE(far.pass);
        const TripleRun hit = triple_detection_run(3, cfg, cp, NoiseModel::ideal(), seed);
        EXPECT_EQ(hit.stages, 3);
        EXPECT_TRUE(hit.pass);
    }
}

TEST(Triple, CarrierOnlyMattersForResidualGroundPopulation) {
    const CouplingParams cp = eta(0.036);
    TripleConfig broken = triple(3);
    // Two pi pulses return to ground: the carrier set never shelves.
    broken.carrier_sequence = PhaseSequence({0.0, 0.5});
    ASSERT_LT(excitation(broken.carrier_sequence, kPi), 1e-15);
    const double p = excitation(broken.bsb_sequence, kPi);
    EXPECT_NEAR(triple_detection(3, broken, cp, NoiseModel::ideal()).pass, p * p, 1e-12);
    // With bright-state detection errors, a false stage-1 dark readout is
    // caught by the carrier shelving only when the carrier works.
    NoiseModel n = NoiseModel::ideal();
    n.detection_error_bright = 0.05;
    EXPECT_GT(triple_detection(9, broken, cp, n).pass, triple_detection(9, triple(3), cp, n).pass);
}

TEST(Triple, PassbandContainsTarget) {
    const auto band = triple_passband(triple(70), eta(0.021), NoiseModel::ideal());
    EXPECT_LE(band.first, 70);
    EXPECT_GE(band.second, 70);
}

TEST(CoherentScan, PoissonWeightedFockPasses) {
    const CouplingParams cp = eta(0.021);
    const ScanConfig sc{triple(70), 0.8, 2000};
    const std::vector<double> grid{0.0, 20.0, 70.0, 150.0};
    const auto curve = coherent_scan(grid, sc, cp, NoiseModel::ideal());
    ASSERT_EQ(curve.size(), grid.size());
    for (const ScanPoint &pt : curve) {
        double ref = 0.0;
        for (int m = 0; m < 400; ++m) {
            const double w = std::exp(m * std::log(std::max(pt.nbar, 1e-300)) - pt.nbar -
                                      std::lgamma(m + 1.0));
            const double p = oracle_fire(sc.triple.bsb_sequence, m, 70, 0.021);
            ref += w * p * p;
        }
        EXPECT_NEAR(pt.pass, 0.8 * ref, 1e-9) << pt.nbar;
    }
    EXPECT_LT(curve[0].pass, 1e-4);
    EXPECT_GT(curve[2].pass, curve[1].pass);
}

TEST(CoherentScan, TruncationCapIsEnforced) {
    const ScanConfig sc{triple(70), 1.0, 100};
    EXPECT_THROW(coherent_scan({90.0}, sc, eta(0.021), NoiseModel::ideal()),
                 std::invalid_argument);
    EXPECT_THROW(coherent_scan({-1.0}, ScanConfig{triple(70), 1.0, 2000}, eta(0.021),
                               NoiseModel::ideal()),
                 std::invalid_argument);
}

TEST(Calibration, RecoversBandOnNarrowEtaGrid) {
    const Calibration c =
        calibrate_band(35, 119, triple(0), eta(0.036), NoiseModel::ideal(), 0.018, 0.024, 0.001);
    EXPECT_LE(c.edge_error, 3);
    EXPECT_EQ(c.edge_error, std::max(std::abs(c.band.first - 35), std::abs(c.band.second - 119)));
    TripleConfig cfg = triple(c.n_target);
    EXPECT_EQ(triple_passband(cfg, eta(c.eta), NoiseModel::ideal()), c.band);
    EXPECT_THROW(calibrate_band(10, 5, triple(0), eta(0.036), NoiseModel::ideal()),
                 std::invalid_argument);
}

}  // namespace
}  // namespace unprobe
