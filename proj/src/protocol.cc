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

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "unprobe/rng.h"

namespace unprobe {

namespace {

void check_probability(double p, const char *what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

// Transition addressed by a sideband pulse from (e, n), or -1 if none.
int sideband_transition(Electronic e, int n) {
    switch (e) {
        case Electronic::ground:
            return n;
        case Electronic::excited:
            return n - 1;
        case Electronic::shelved:
            return -1;
    }
    return -1;
}

std::pair<Electronic, int> after_sideband(Electronic e, int n) {
    return e == Electronic::ground ? std::pair{Electronic::excited, n + 1}
                                   : std::pair{Electronic::ground, n - 1};
}

double read_dark_probability(Electronic e, const NoiseModel &noise) {
    return is_dark(e) ? 1.0 - noise.detection_error_dark : noise.detection_error_bright;
}

std::vector<double> poisson_pmf(double lambda) {
    if (lambda <= 0.0) {
        return {1.0};
    }
    std::vector<double> pmf;
    double term = std::exp(-lambda);
    double cumulative = 0.0;
    for (int k = 0; k < 100000; ++k) {
        pmf.push_back(term);
        cumulative += term;
        if (k > lambda && 1.0 - cumulative < 1e-16) {
            break;
        }
        term *= lambda / (k + 1.0);
    }
    return pmf;
}

// Joint (electronic, phonon) weights of the runs still in progress.
struct Population {
    std::array<std::vector<double>, 3> weights;

    std::vector<double> &at(Electronic e) { return weights[static_cast<int>(e)]; }
    const std::vector<double> &at(Electronic e) const { return weights[static_cast<int>(e)]; }

    void add(Electronic e, int n, double w) {
        std::vector<double> &v = at(e);
        if (static_cast<int>(v.size()) <= n) {
            v.resize(n + 1, 0.0);
        }
        v[n] += w;
    }

    double total() const {
        double t = 0.0;
        for (const auto &v : weights) {
            t = std::accumulate(v.begin(), v.end(), t);
        }
        return t;
    }

    void heat(double lambda) {
        if (lambda <= 0.0) {
            return;
        }
        const std::vector<double> pmf = poisson_pmf(lambda);
        for (auto &v : weights) {
            if (v.empty()) {
                continue;
            }
            std::vector<double> out(v.size() + pmf.size() - 1, 0.0);
            for (size_t n = 0; n < v.size(); ++n) {
                if (v[n] == 0.0) {
                    continue;
                }
                for (size_t k = 0; k < pmf.size(); ++k) {
                    out[n + k] += v[n] * pmf[k];
                }
            }
            v = std::move(out);
        }
    }
};

Population prepared(const PhononDistribution &dist, const NoiseModel &noise) {
    Population pop;
    const auto probs = dist.probabilities();
    for (size_t n = 0; n < probs.size(); ++n) {
        if (probs[n] == 0.0) {
            continue;
        }
        pop.add(Electronic::ground, static_cast<int>(n), probs[n] * (1.0 - noise.preparation_error));
        if (noise.preparation_error > 0.0) {
            pop.add(Electronic::ground, static_cast<int>(n) + 1, probs[n] * noise.preparation_error);
        }
    }
    return pop;
}

// Applies a sideband set to every populated state.
Population apply_sideband(const Population &pop, int n_target, const PhaseSequence &seq,
                          const CouplingParams &cp, bool use_full, double sigma) {
    Population out;
    for (Electronic e : {Electronic::ground, Electronic::excited, Electronic::shelved}) {
        const std::vector<double> &v = pop.at(e);
        for (size_t n = 0; n < v.size(); ++n) {
            const double w = v[n];
            if (w == 0.0) {
                continue;
            }
            const int ni = static_cast<int>(n);
            const double p = sideband_transfer(e, ni, n_target, seq, cp, use_full, sigma);
            if (p > 0.0) {
                const auto [e2, n2] = after_sideband(e, ni);
                out.add(e2, n2, w * p);
            }
            if (p < 1.0) {
                out.add(e, ni, w * (1.0 - p));
            }
        }
    }
    return out;
}

// Keeps the weight compatible with the expected readout.
Population condition_on_readout(const Population &pop, bool expect_dark,
                                const NoiseModel &noise) {
    Population out;
    for (Electronic e : {Electronic::ground, Electronic::excited, Electronic::shelved}) {
        const double p_dark = read_dark_probability(e, noise);
        const double keep = expect_dark ? p_dark : 1.0 - p_dark;
        const std::vector<double> &v = pop.at(e);
        for (size_t n = 0; n < v.size(); ++n) {
            if (v[n] != 0.0 && keep != 0.0) {
                out.add(e, static_cast<int>(n), v[n] * keep);
            }
        }
    }
    return out;
}

double carrier_transfer(const PhaseSequence &carrier, const NoiseModel &noise) {
    return averaged_excitation(carrier, kPi, noise.phase_jitter_sigma);
}

Population apply_carrier_shelving(const Population &pop, double c) {
    Population out;
    out.at(Electronic::excited) = pop.at(Electronic::excited);
    const std::vector<double> &g = pop.at(Electronic::ground);
    const std::vector<double> &s = pop.at(Electronic::shelved);
    for (size_t n = 0; n < std::max(g.size(), s.size()); ++n) {
        const double wg = n < g.size() ? g[n] : 0.0;
        const double ws = n < s.size() ? s[n] : 0.0;
        if (wg == 0.0 && ws == 0.0) {
            continue;
        }
        const int ni = static_cast<int>(n);
        out.add(Electronic::shelved, ni, wg * c + ws * (1.0 - c));
        out.add(Electronic::ground, ni, wg * (1.0 - c) + ws * c);
    }
    return out;
}

// Monte Carlo helpers. Draw order is fixed so a seed reproduces a run.
struct Sampler {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> uniform{0.0, 1.0};

    explicit Sampler(std::uint64_t seed) : rng(seed) {}

    bool bernoulli(double p) { return uniform(rng) < p; }

    int heating(double lambda) {
        if (lambda <= 0.0) {
            return 0;
        }
        std::poisson_distribution<int> d(lambda);
        return d(rng);
    }

    // Transfer probability for one realisation of the per-pulse phase noise.
    double transfer(Electronic e, int n, int n_target, const PhaseSequence &seq,
                    const CouplingParams &cp, bool use_full, double sigma) {
        if (sigma <= 0.0) {
            return sideband_transfer(e, n, n_target, seq, cp, use_full, 0.0);
        }
        std::normal_distribution<double> gauss(0.0, sigma);
        std::vector<double> offsets(seq.size());
        for (double &o : offsets) {
            o = gauss(rng);
        }
        const int t = sideband_transition(e, n);
        if (t < 0) {
            return 0.0;
        }
        return excitation_with_offsets(seq, relative_area(t, n_target, cp, use_full), offsets);
    }

    double carrier(const PhaseSequence &seq, double sigma) {
        if (sigma <= 0.0) {
            return excitation(seq, kPi);
        }
        std::normal_distribution<double> gauss(0.0, sigma);
        std::vector<double> offsets(seq.size());
        for (double &o : offsets) {
            o = gauss(rng);
        }
        return excitation_with_offsets(seq, kPi, offsets);
    }
};

int initial_phonons(const PhononDistribution &dist, const NoiseModel &noise, Sampler &s) {
    int n = dist.sample(s.rng);
    if (noise.preparation_error > 0.0 && s.bernoulli(noise.preparation_error)) {
        ++n;
    }
    return n;
}

template <typename Fn>
void parallel_for(long long count, int threads, Fn &&fn) {
    std::atomic<long long> next{0};
    const auto worker = [&] {
        for (long long i = next++; i < count; i = next++) {
            fn(i);
        }
    };
    const int t = static_cast<int>(std::max(1LL, std::min<long long>(threads, count)));
    std::vector<std::thread> pool;
    for (int k = 1; k < t; ++k) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread &th : pool) {
        th.join();
    }
}

void check_probes(const std::vector<Probe> &probes) {
    if (probes.empty()) {
        throw std::invalid_argument("at least one probe is required");
    }
    for (size_t k = 1; k < probes.size(); ++k) {
        if (probes[k].n_target < probes[k - 1].n_target) {
            throw std::invalid_argument("probes must be ordered by target phonon number");
        }
    }
}

}  // namespace

NoiseModel NoiseModel::ideal() {
    NoiseModel n;
    n.heating_rate = 0.0;
    return n;
}

void NoiseModel::validate() const {
    check_probability(detection_error_bright, "detection_error_bright");
    check_probability(detection_error_dark, "detection_error_dark");
    check_probability(preparation_error, "preparation_error");
    if (!(heating_rate >= 0.0) || !(pulse_duration >= 0.0) || !(detection_duration >= 0.0) ||
        !(phase_jitter_sigma >= 0.0)) {
        throw std::invalid_argument("rates, durations and jitter must be non-negative");
    }
}

double NoiseModel::heating_quanta(size_t pulses) const {
    return heating_rate * (pulse_duration * static_cast<double>(pulses) + detection_duration);
}

std::string to_string(Electronic e) {
    switch (e) {
        case Electronic::ground:
            return "S";
        case Electronic::excited:
            return "D";
        case Electronic::shelved:
            return "shelf";
    }
    return "?";
}

double detection_probability(int m, int n_target, const PhaseSequence &seq,
                             const CouplingParams &cp, bool use_full) {
    return excitation(seq, relative_area(m, n_target, cp, use_full));
}

double sideband_transfer(Electronic e, int n, int n_target, const PhaseSequence &seq,
                         const CouplingParams &cp, bool use_full, double phase_sigma) {
    const int t = sideband_transition(e, n);
    if (t < 0) {
        return 0.0;
    }
    return averaged_excitation(seq, relative_area(t, n_target, cp, use_full), phase_sigma);
}

double positive_probability(double p, const NoiseModel &noise) {
    return p * (1.0 - noise.detection_error_dark) + (1.0 - p) * noise.detection_error_bright;
}

Matrix confusion_matrix(const std::vector<int> &m_range, const std::vector<int> &n_range,
                        const PhaseSequence &seq, const CouplingParams &cp,
                        const NoiseModel &noise, bool use_full) {
    if (m_range.empty() || n_range.empty()) {
        throw std::invalid_argument("confusion matrix ranges must be non-empty");
    }
    noise.validate();
    Matrix out{m_range, n_range, {}};
    out.values.reserve(m_range.size() * n_range.size());
    const double eps = noise.preparation_error;
    for (int m : m_range) {
        for (int n : n_range) {
            const auto fire = [&](int phonons) {
                return positive_probability(
                    sideband_transfer(Electronic::ground, phonons, n, seq, cp, use_full,
                                      noise.phase_jitter_sigma),
                    noise);
            };
            double value = (1.0 - eps) * fire(m);
            if (eps > 0.0) {
                value += eps * fire(m + 1);
            }
            out.values.push_back(value);
        }
    }
    return out;
}

std::vector<ProbeOutcome> single_shot_run(const PhononDistribution &dist,
                                          const std::vector<Probe> &probes,
                                          const CouplingParams &cp, const NoiseModel &noise,
                                          std::uint64_t rng_seed, bool use_full) {
    check_probes(probes);
    Sampler s(rng_seed);
    int n = initial_phonons(dist, noise, s);
    Electronic e = Electronic::ground;
    std::vector<ProbeOutcome> out;
    for (size_t k = 0; k < probes.size(); ++k) {
        const Probe &probe = probes[k];
        const double p = s.transfer(e, n, probe.n_target, probe.sequence, cp, use_full,
                                    noise.phase_jitter_sigma);
        if (s.bernoulli(p)) {
            std::tie(e, n) = after_sideband(e, n);
        }
        const bool positive = s.bernoulli(read_dark_probability(e, noise));
        out.push_back({static_cast<int>(k), probe.n_target, positive, e, n});
        if (positive) {
            break;
        }
        n += s.heating(noise.heating_quanta(probe.sequence.size()));
    }
    return out;
}

ChainProbabilities single_shot_exact(const PhononDistribution &dist,
                                     const std::vector<Probe> &probes, const CouplingParams &cp,
                                     const NoiseModel &noise, bool use_full) {
    check_probes(probes);
    noise.validate();
    ChainProbabilities out;
    Population pop = prepared(dist, noise);
    for (const Probe &probe : probes) {
        out.reach.push_back(pop.total());
        const Population after = apply_sideband(pop, probe.n_target, probe.sequence, cp,
                                                use_full, noise.phase_jitter_sigma);
        Population negative = condition_on_readout(after, false, noise);
        out.positive.push_back(condition_on_readout(after, true, noise).total());
        negative.heat(noise.heating_quanta(probe.sequence.size()));
        pop = std::move(negative);
    }
    out.all_negative = pop.total();
    return out;
}

SingleShotStatistics single_shot_statistics(const PhononDistribution &dist,
                                            const std::vector<Probe> &probes,
                                            const CouplingParams &cp, const NoiseModel &noise,
                                            long long n_runs, std::uint64_t seed, int threads,
                                            bool use_full) {
    if (n_runs < 1) {
        throw std::invalid_argument("at least one run is required");
    }
    check_probes(probes);
    noise.validate();
    // Index of the positive probe per run, or probes.size() if none fired.
    std::vector<int> stop(static_cast<size_t>(n_runs));
    parallel_for(n_runs, threads, [&](long long i) {
        const auto outcomes = single_shot_run(dist, probes, cp, noise,
                                              derive_seed(seed, static_cast<std::uint64_t>(i)),
                                              use_full);
        stop[i] = outcomes.back().positive ? outcomes.back().probe_index
                                           : static_cast<int>(probes.size());
    });
    SingleShotStatistics stats;
    stats.seed = seed;
    stats.runs = n_runs;
    stats.reached.assign(probes.size(), 0);
    stats.positives.assign(probes.size(), 0);
    for (int k : stop) {
        for (int j = 0; j < std::min<int>(k + 1, static_cast<int>(probes.size())); ++j) {
            ++stats.reached[j];
        }
        if (k < static_cast<int>(probes.size())) {
            ++stats.positives[k];
        } else {
            ++stats.all_negative;
        }
    }
    stats.exact = single_shot_exact(dist, probes, cp, noise, use_full);
    return stats;
}

TripleProbabilities triple_detection(int m, const TripleConfig &config,
                                     const CouplingParams &cp, const NoiseModel &noise) {
    if (m < 0) {
        throw std::invalid_argument("phonon number must be non-negative");
    }
    const double sigma = noise.phase_jitter_sigma;
    TripleProbabilities out;
    Population pop = prepared(PhononDistribution::fock(m), noise);

    pop = apply_sideband(pop, config.n_target, config.bsb_sequence, cp, config.use_full, sigma);
    pop = condition_on_readout(pop, true, noise);
    out.single_set = pop.total();
    pop.heat(noise.heating_quanta(config.bsb_sequence.size()));

    pop = apply_carrier_shelving(pop, carrier_transfer(config.carrier_sequence, noise));
    pop = condition_on_readout(pop, true, noise);
    pop.heat(noise.heating_quanta(config.carrier_sequence.size()));

    pop = apply_sideband(pop, config.n_target, config.bsb_sequence, cp, config.use_full, sigma);
    pop = condition_on_readout(pop, false, noise);
    out.pass = pop.total();
    return out;
}

TripleRun triple_detection_run(int m, const TripleConfig &config, const CouplingParams &cp,
                               const NoiseModel &noise, std::uint64_t rng_seed) {
    Sampler s(rng_seed);
    int n = initial_phonons(PhononDistribution::fock(m), noise, s);
    Electronic e = Electronic::ground;
    const double sigma = noise.phase_jitter_sigma;
    TripleRun run;
    const bool expected[3] = {true, true, false};
    for (int stage = 0; stage < 3; ++stage) {
        if (stage == 1) {
            if (e != Electronic::excited && s.bernoulli(s.carrier(config.carrier_sequence, sigma))) {
                e = (e == Electronic::ground) ? Electronic::shelved : Electronic::ground;
            }
        } else if (s.bernoulli(s.transfer(e, n, config.n_target, config.bsb_sequence, cp,
                                          config.use_full, sigma))) {
            std::tie(e, n) = after_sideband(e, n);
        }
        run.readout_dark[stage] = s.bernoulli(read_dark_probability(e, noise));
        run.stages = stage + 1;
        if (run.readout_dark[stage] != expected[stage]) {
            return run;
        }
        const size_t pulses =
            stage == 1 ? config.carrier_sequence.size() : config.bsb_sequence.size();
        n += s.heating(noise.heating_quanta(pulses));
    }
    run.pass = true;
    return run;
}

TripleStatistics triple_detection_statistics(int m, const TripleConfig &config,
                                             const CouplingParams &cp, const NoiseModel &noise,
                                             long long n_runs, std::uint64_t seed,
                                             int threads) {
    if (n_runs < 1) {
        throw std::invalid_argument("at least one run is required");
    }
    noise.validate();
    std::vector<TripleRun> runs(static_cast<size_t>(n_runs));
    parallel_for(n_runs, threads, [&](long long i) {
        runs[i] = triple_detection_run(m, config, cp, noise,
                                       derive_seed(seed, static_cast<std::uint64_t>(i)));
    });
    TripleStatistics stats;
    stats.runs = n_runs;
    for (const TripleRun &r : runs) {
        stats.passes += r.pass ? 1 : 0;
        stats.single_set += r.readout_dark[0] ? 1 : 0;
    }
    stats.exact = triple_detection(m, config, cp, noise);
    return stats;
}

std::pair<int, int> triple_passband(const TripleConfig &config, const CouplingParams &cp,
                                    const NoiseModel &noise, double threshold, int n_limit) {
    cp.validate();
    const auto passes = [&](int n) {
        return triple_detection(n, config, cp, noise).pass > threshold;
    };
    if (!passes(config.n_target)) {
        throw std::domain_error("empty passband: threshold above peak pass probability");
    }
    int lo = config.n_target;
    while (lo > 0 && passes(lo - 1)) {
        --lo;
    }
    const int stop = config.use_full
                         ? std::min(first_nonpositive_coupling(cp, n_limit) - 1, n_limit)
                         : n_limit;
    int hi = config.n_target;
    while (hi < stop && passes(hi + 1)) {
        ++hi;
    }
    return {lo, hi};
}

std::vector<ScanPoint> coherent_scan(const std::vector<double> &nbar_grid,
                                     const ScanConfig &config, const CouplingParams &cp,
                                     const NoiseModel &noise) {
    if (!(config.amplitude_scale >= 0.0 && config.amplitude_scale <= 1.0)) {
        throw std::invalid_argument("amplitude scale must lie in [0, 1]");
    }
    noise.validate();
    std::vector<PhononDistribution> dists;
    dists.reserve(nbar_grid.size());
    int needed = 0;
    for (double nbar : nbar_grid) {
        if (!(nbar >= 0.0)) {
            throw std::invalid_argument("mean phonon numbers must be non-negative");
        }
        dists.push_back(PhononDistribution::poisson(nbar));
        needed = std::max(needed, dists.back().n_max());
    }
    if (needed > config.m_cap) {
        throw std::invalid_argument("Poisson truncation needs n up to " + std::to_string(needed) +
                                    " but m_cap is " + std::to_string(config.m_cap));
    }
    std::vector<double> pass(static_cast<size_t>(needed) + 1);
    for (int m = 0; m <= needed; ++m) {
        pass[m] = triple_detection(m, config.triple, cp, noise).pass;
    }
    std::vector<ScanPoint> out;
    out.reserve(nbar_grid.size());
    for (size_t i = 0; i < nbar_grid.size(); ++i) {
        const auto probs = dists[i].probabilities();
        double value = 0.0;
        for (size_t m = 0; m < probs.size(); ++m) {
            value += probs[m] * pass[m];
        }
        out.push_back({nbar_grid[i], config.amplitude_scale * value});
    }
    return out;
}

Calibration calibrate_band(int target_lo, int target_hi, const TripleConfig &config,
                           const CouplingParams &base, const NoiseModel &noise, double eta_min,
                           double eta_max, double eta_step, double threshold) {
    if (!(target_lo >= 0 && target_lo <= target_hi)) {
        throw std::invalid_argument("calibration target needs 0 <= lo <= hi");
    }
    if (!(eta_min > 0.0 && eta_min <= eta_max && eta_step > 0.0)) {
        throw std::invalid_argument("invalid eta search grid");
    }
    // Candidates whose edges miss by more than the current best are abandoned
    // mid-walk; before any candidate exists the allowance is the band width.
    Calibration best;
    best.edge_error = -1;
    int best_sum = 0;
    const int steps = static_cast<int>(std::floor((eta_max - eta_min) / eta_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        CouplingParams cp = base;
        cp.eta = eta_min + i * eta_step;
        cp.validate();
        const int zero = first_nonpositive_coupling(cp, 2 * target_hi + 10);
        for (int nt = target_lo; nt <= target_hi && nt < zero; ++nt) {
            TripleConfig trial = config;
            trial.n_target = nt;
            const auto passes = [&](int n) {
                return triple_detection(n, trial, cp, noise).pass > threshold;
            };
            if (!passes(nt)) {
                continue;
            }
            const int limit = best.edge_error < 0 ? target_hi - target_lo : best.edge_error;
            int lo = nt;
            while (lo > 0 && lo >= target_lo - limit && passes(lo - 1)) {
                --lo;
            }
            const int lo_err = std::abs(lo - target_lo);
            if (lo_err > limit) {
                continue;
            }
            const int stop = std::min(config.use_full ? zero - 1 : zero, target_hi + limit + 1);
            int hi = nt;
            while (hi < stop && passes(hi + 1)) {
                ++hi;
            }
            const int hi_err = std::abs(hi - target_hi);
            const int err = std::max(lo_err, hi_err);
            const int sum = lo_err + hi_err;
            if (err > limit) {
                continue;
            }
            if (best.edge_error < 0 || err < best.edge_error ||
                (err == best.edge_error && sum < best_sum)) {
                best = {cp.eta, nt, {lo, hi}, err};
                best_sum = sum;
            }
        }
    }
    if (best.edge_error < 0) {
        throw std::domain_error("no calibration brings both band edges within the band width");
    }
    return best;
}

}  // namespace unprobe
