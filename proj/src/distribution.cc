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

#include "unprobe/distribution.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace unprobe {

std::string to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::fock:
            return "fock";
        case DistributionKind::thermal:
            return "thermal";
        case DistributionKind::poisson_coherent:
            return "poisson";
        case DistributionKind::explicit_table:
            return "table";
    }
    return "unknown";
}

namespace {

void check_mean(double nbar) {
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw std::invalid_argument("mean phonon number must be finite and non-negative");
    }
}

void check_tail(double tol) {
    if (!(tol > 0.0 && tol <= 1e-8)) {
        throw std::invalid_argument("truncation tail tolerance must lie in (0, 1e-8]");
    }
}

}  // namespace

PhononDistribution::PhononDistribution(DistributionKind kind, double parameter,
                                       std::vector<double> probs)
    : kind_(kind), parameter_(parameter), probs_(std::move(probs)) {
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    for (double &p : probs_) {
        p /= total;
    }
    cdf_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
    cdf_.back() = 1.0;
}

PhononDistribution PhononDistribution::fock(int n) {
    if (n < 0) {
        throw std::invalid_argument("Fock state index must be non-negative");
    }
    std::vector<double> p(static_cast<size_t>(n) + 1, 0.0);
    p[n] = 1.0;
    return PhononDistribution(DistributionKind::fock, n, std::move(p));
}

PhononDistribution PhononDistribution::thermal(double nbar, double tail_tolerance) {
    check_mean(nbar);
    check_tail(tail_tolerance);
    if (nbar == 0.0) {
        return PhononDistribution(DistributionKind::thermal, 0.0, {1.0});
    }
    // Tail beyond N is r^(N+1) with r = nbar / (nbar + 1).
    const double r = nbar / (nbar + 1.0);
    const int n_max = static_cast<int>(std::ceil(std::log(tail_tolerance) / std::log(r)));
    std::vector<double> p(static_cast<size_t>(n_max) + 1);
    double term = 1.0 / (nbar + 1.0);
    for (int n = 0; n <= n_max; ++n) {
        p[n] = term;
        term *= r;
    }
    return PhononDistribution(DistributionKind::thermal, nbar, std::move(p));
}

PhononDistribution PhononDistribution::poisson(double nbar, double tail_tolerance) {
    check_mean(nbar);
    check_tail(tail_tolerance);
    if (nbar == 0.0) {
        return PhononDistribution(DistributionKind::poisson_coherent, 0.0, {1.0});
    }
    std::vector<double> p;
    double cumulative = 0.0;
    for (int n = 0;; ++n) {
        const double log_p = n * std::log(nbar) - nbar - std::lgamma(n + 1.0);
        p.push_back(std::exp(log_p));
        cumulative += p.back();
        // Past the mode the terms fall off geometrically; the second test
        // ends the loop when rounding in `cumulative` hides the tail.
        if (n > nbar && (1.0 - cumulative < tail_tolerance ||
                         p.back() * (n + 1.0) / (n + 1.0 - nbar) < 0.1 * tail_tolerance)) {
            break;
        }
    }
    return PhononDistribution(DistributionKind::poisson_coherent, nbar, std::move(p));
}

PhononDistribution PhononDistribution::from_table(std::vector<double> weights) {
    if (weights.empty()) {
        throw std::invalid_argument("population table must be non-empty");
    }
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("populations must be finite and non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("population table has zero total weight");
    }
    return PhononDistribution(DistributionKind::explicit_table, 0.0, std::move(weights));
}

double PhononDistribution::probability(int n) const {
    if (n < 0 || n > n_max()) {
        return 0.0;
    }
    return probs_[n];
}

double PhononDistribution::mean() const {
    double m = 0.0;
    for (size_t n = 0; n < probs_.size(); ++n) {
        m += static_cast<double>(n) * probs_[n];
    }
    return m;
}

int PhononDistribution::sample(std::mt19937_64 &rng) const {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double u = uniform(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), n_max()));
}

}  // namespace unprobe
