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

#ifndef UNPROBE_DISTRIBUTION_H
#define UNPROBE_DISTRIBUTION_H

#include <random>
#include <span>
#include <string>
#include <vector>

namespace unprobe {

enum class DistributionKind { fock, thermal, poisson_coherent, explicit_table };

std::string to_string(DistributionKind kind);

/// Phonon-number populations truncated at n_max() and renormalised.
class PhononDistribution {
   public:
    static PhononDistribution fock(int n);
    /// Bose-Einstein populations nbar^n / (nbar+1)^(n+1).
    static PhononDistribution thermal(double nbar, double tail_tolerance = 1e-12);
    /// Poisson populations of a coherent state with mean nbar.
    static PhononDistribution poisson(double nbar, double tail_tolerance = 1e-12);
    /// Arbitrary non-negative weights, normalised to one.
    static PhononDistribution from_table(std::vector<double> weights);

    DistributionKind kind() const { return kind_; }
    double parameter() const { return parameter_; }
    int n_max() const { return static_cast<int>(probs_.size()) - 1; }
    std::span<const double> probabilities() const { return probs_; }
    double probability(int n) const;
    double mean() const;

    /// Inverse-CDF draw from one uniform variate.
    int sample(std::mt19937_64 &rng) const;

   private:
    PhononDistribution(DistributionKind kind, double parameter, std::vector<double> probs);

    DistributionKind kind_ = DistributionKind::fock;
    double parameter_ = 0.0;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

}  // namespace unprobe

#endif  // UNPROBE_DISTRIBUTION_H
