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

#ifndef UNPROBE_PROTOCOL_H
#define UNPROBE_PROTOCOL_H

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "unprobe/coupling.h"
#include "unprobe/distribution.h"
#include "unprobe/pulse.h"

namespace unprobe {

/// Imperfections shared by all protocols. Detection is a binary readout:
/// detection_error_bright is P(read dark | ion bright) and
/// detection_error_dark is P(read bright | ion dark). Heating adds quanta as a
/// Poisson process during each pulse set and its detection window.
struct NoiseModel {
    double detection_error_bright = 0.0;
    double detection_error_dark = 0.0;
    double heating_rate = 13.7;       // quanta / s
    double pulse_duration = 99.2e-6;  // s per pulse of a composite set
    double detection_duration = 0.0;  // s per detection window
    double phase_jitter_sigma = 0.0;  // rad, independent per pulse
    double preparation_error = 0.0;   // P(prepared one quantum too high)

    static NoiseModel ideal();
    void validate() const;

    /// Mean number of quanta added while running a set of `pulses` pulses
    /// followed by one detection window.
    double heating_quanta(size_t pulses) const;
};

enum class Electronic { ground, excited, shelved };

std::string to_string(Electronic e);

/// Ground (S) scatters light; excited (D) and shelved levels are dark.
inline bool is_dark(Electronic e) { return e != Electronic::ground; }

struct ProbeOutcome {
    int probe_index = 0;
    int n_probed = 0;
    bool positive = false;  // dark readout
    Electronic electronic = Electronic::ground;
    int phonons = 0;  // phonon number after the readout
};

struct Probe {
    int n_target = 0;
    PhaseSequence sequence;
};

/// excitation(seq, relative_area(m, n_target, cp, use_full)).
double detection_probability(int m, int n_target, const PhaseSequence &seq,
                             const CouplingParams &cp, bool use_full);

/// Probability that a sideband set calibrated on n_target transfers the ion
/// from (e, n), including the phase-jitter average. Ground n couples through
/// transition n, excited n through transition n-1; shelved does not couple.
double sideband_transfer(Electronic e, int n, int n_target, const PhaseSequence &seq,
                         const CouplingParams &cp, bool use_full, double phase_sigma);

/// P(read dark) for an ion whose true transfer probability is p.
double positive_probability(double p, const NoiseModel &noise);

struct Matrix {
    std::vector<int> row_labels;  // prepared phonon number m
    std::vector<int> col_labels;  // probed phonon number n
    std::vector<double> values;   // row-major
    double at(size_t row, size_t col) const { return values[row * col_labels.size() + col]; }
};

/// P(positive | prepared m, probe n) with preparation and detection errors.
Matrix confusion_matrix(const std::vector<int> &m_range, const std::vector<int> &n_range,
                        const PhaseSequence &seq, const CouplingParams &cp,
                        const NoiseModel &noise, bool use_full = true);

/// Sequential probing: draw a Fock state from dist, apply probes in order and
/// stop at the first positive readout. Negative readouts leave the phonon
/// number unchanged apart from heating.
std::vector<ProbeOutcome> single_shot_run(const PhononDistribution &dist,
                                          const std::vector<Probe> &probes,
                                          const CouplingParams &cp, const NoiseModel &noise,
                                          std::uint64_t rng_seed, bool use_full = true);

/// Exact probabilities of the sequential chain by propagating the joint
/// (electronic, phonon) distribution probe by probe.
struct ChainProbabilities {
    std::vector<double> reach;     // P(probe k is applied)
    std::vector<double> positive;  // P(first positive at probe k)
    double all_negative = 0.0;
    double conditional(size_t k) const { return reach[k] > 0.0 ? positive[k] / reach[k] : 0.0; }
};

ChainProbabilities single_shot_exact(const PhononDistribution &dist,
                                     const std::vector<Probe> &probes, const CouplingParams &cp,
                                     const NoiseModel &noise, bool use_full = true);

struct SingleShotStatistics {
    std::uint64_t seed = 0;
    long long runs = 0;
    std::vector<long long> reached;
    std::vector<long long> positives;
    long long all_negative = 0;
    ChainProbabilities exact;
    double conditional(size_t k) const {
        return reached[k] > 0 ? static_cast<double>(positives[k]) / reached[k] : 0.0;
    }
};

/// Monte Carlo over n_runs runs; run i uses derive_seed(seed, i), so results
/// do not depend on `threads`.
SingleShotStatistics single_shot_statistics(const PhononDistribution &dist,
                                            const std::vector<Probe> &probes,
                                            const CouplingParams &cp, const NoiseModel &noise,
                                            long long n_runs, std::uint64_t seed,
                                            int threads = 1, bool use_full = true);

/// Triple readout: a sideband set (expected dark), a composite carrier set
/// that shelves any remaining ground population into a level the sideband
/// does not address (expected dark), and the sideband set again, returning
/// excited population to ground (expected bright).
struct TripleConfig {
    int n_target = 0;
    PhaseSequence bsb_sequence;
    PhaseSequence carrier_sequence;
    bool use_full = true;
};

struct TripleProbabilities {
    double pass = 0.0;        // dark, dark, bright
    double single_set = 0.0;  // first readout dark
};

TripleProbabilities triple_detection(int m, const TripleConfig &config,
                                     const CouplingParams &cp, const NoiseModel &noise);

struct TripleRun {
    bool readout_dark[3] = {false, false, false};
    int stages = 0;  // readouts taken; the run stops at the first mismatch
    bool pass = false;
};

TripleRun triple_detection_run(int m, const TripleConfig &config, const CouplingParams &cp,
                               const NoiseModel &noise, std::uint64_t rng_seed);

struct TripleStatistics {
    long long runs = 0;
    long long passes = 0;
    long long single_set = 0;
    TripleProbabilities exact;
};

TripleStatistics triple_detection_statistics(int m, const TripleConfig &config,
                                             const CouplingParams &cp, const NoiseModel &noise,
                                             long long n_runs, std::uint64_t seed,
                                             int threads = 1);

/// Contiguous phonon range around n_target whose triple pass probability
/// exceeds threshold.
std::pair<int, int> triple_passband(const TripleConfig &config, const CouplingParams &cp,
                                    const NoiseModel &noise, double threshold = 0.01,
                                    int n_limit = 100000);

struct ScanConfig {
    TripleConfig triple;
    double amplitude_scale = 1.0;  // peak reduction from decoherence or drive errors
    int m_cap = 2000;              // largest phonon number evaluated
};

struct ScanPoint {
    double nbar = 0.0;
    double pass = 0.0;
};

/// Poisson-averaged triple pass probability for each mean phonon number.
/// Throws std::invalid_argument if a Poisson truncation exceeds m_cap.
std::vector<ScanPoint> coherent_scan(const std::vector<double> &nbar_grid,
                                     const ScanConfig &config, const CouplingParams &cp,
                                     const NoiseModel &noise);

struct Calibration {
    double eta = 0.0;
    int n_target = 0;
    std::pair<int, int> band;
    int edge_error = 0;  // max |edge - target edge|
};

/// Grid search over eta and n_target so that the triple passband matches
/// [target_lo, target_hi]. Ties are broken by the total edge error, then by
/// the smaller eta.
Calibration calibrate_band(int target_lo, int target_hi, const TripleConfig &config,
                           const CouplingParams &base, const NoiseModel &noise,
                           double eta_min = 0.005, double eta_max = 0.3, double eta_step = 0.001,
                           double threshold = 0.01);

}  // namespace unprobe

#endif  // UNPROBE_PROTOCOL_H
