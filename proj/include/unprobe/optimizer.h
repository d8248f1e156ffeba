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

#ifndef UNPROBE_OPTIMIZER_H
#define UNPROBE_OPTIMIZER_H

#include <cstdint>
#include <string>
#include <vector>

#include "unprobe/io.h"
#include "unprobe/profile.h"
#include "unprobe/pulse.h"

namespace unprobe {

struct OptimizationSpec {
    int n_pulses = 5;
    double threshold = 0.01;
    int restarts = 200;
    // Objective evaluations per restart; 0 selects max(2000, 600 * n_pulses).
    int evaluations = 0;
    std::uint64_t seed = 1;
    double alpha_tol = 1e-4;
    // Restrict the first descent to phases with phi_k + phi_{N+1-k} = const,
    // then polish without the restriction.
    bool use_reflection_heuristic = true;
    // The alpha continuation starts at min(0.95, initial_alpha_scale / N);
    // narrowband optima shrink roughly like 1/N.
    double initial_alpha_scale = 1.9;
    int threads = 1;

    int evaluations_per_restart() const;
    void validate() const;
};

struct OptimizationResult {
    PhaseSequence sequence;
    AlphaResult alpha;  // alpha == envelope_alpha for optimizer output
    int best_restart = -1;
    long long evaluations = 0;
};

/// Multi-start search for phases minimising the certified band half-width.
/// phi_1 is fixed to 0. Deterministic for a given spec regardless of the
/// thread count.
OptimizationResult optimize(const OptimizationSpec &spec);

/// Certified strict half-width: outermost crossing on the standard scan,
/// re-scanned 10x denser if the verification pass finds leakage.
AlphaResult certified_envelope(const PhaseSequence &seq, double threshold);

struct TableCheck {
    std::string name;
    double claimed = 0.0;
    AlphaResult recomputed;
    bool pass = false;
};

std::vector<TableCheck> verify_table(const std::vector<TableEntry> &entries,
                                     double tolerance = 0.002, double threshold = 0.01);

}  // namespace unprobe

#endif  // UNPROBE_OPTIMIZER_H
