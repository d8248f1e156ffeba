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

#ifndef UNPROBE_PROFILE_H
#define UNPROBE_PROFILE_H

#include <string>
#include <utility>
#include <vector>

#include "unprobe/coupling.h"
#include "unprobe/pulse.h"

namespace unprobe {

struct ProfilePoint {
    double area_pi;  // pulse area in units of pi
    double excitation;
};

struct ExcitationProfile {
    std::string label;
    std::vector<ProfilePoint> points;
};

/// Excitation tabulated on a uniform grid of pulse areas given in units of pi.
ExcitationProfile profile(const PhaseSequence &seq, double area_min_pi, double area_max_pi,
                          int points);

struct AlphaOptions {
    int scan_points = 4096;
    int verify_points = 40960;
    double bisection_tol_pi = 1e-6;
};

/// Width of the excitation band around area pi at a leakage threshold.
///
/// `alpha` is the half-width (units of pi) of the contiguous region around
/// pi in which the excitation exceeds the threshold. `envelope_alpha` is the
/// smallest half-width outside of which the excitation never exceeds the
/// threshold on [0, 2pi]. `certified` is set when a verification pass on a
/// 10x denser grid finds no point outside [pi(1-alpha), pi(1+alpha)] above
/// threshold; `max_leakage` is the largest excitation found there.
struct AlphaResult {
    double alpha = 0.0;
    double envelope_alpha = 0.0;
    double threshold = 0.01;
    double max_leakage = 0.0;
    bool certified = false;
};

/// Throws std::invalid_argument for thresholds outside (0, 0.5) and
/// std::domain_error for degenerate sequences (excitation at pi not above
/// threshold, or band reaching the domain edge).
AlphaResult alpha_of(const PhaseSequence &seq, double threshold = 0.01,
                     const AlphaOptions &options = {});

/// Strict outermost-crossing half-width only; cheaper than alpha_of() and
/// usable for sequences without a main lobe at pi. Returns 0 if the
/// excitation never exceeds the threshold.
double envelope_alpha(const PhaseSequence &seq, double threshold, int scan_points = 4096,
                      double bisection_tol_pi = 1e-6);

/// Largest excitation on a uniform grid of `points` areas restricted to
/// [0, pi(1-alpha)] U [pi(1+alpha), 2pi].
double max_outside_band(const PhaseSequence &seq, double alpha, int points);

/// Number of lowest sideband transitions that can be resolved from their
/// neighbours at the leakage level that defined alpha, assuming
/// sqrt(n+1) coupling: transitions k-1 -> k and k -> k+1 differ in area by
/// the factor sqrt((k+1)/k), so k+1 transitions separate while
/// alpha < sqrt((k+1)/k) - 1.
int separable_transitions(double alpha);

/// Contiguous phonon range around n_target whose excitation exceeds threshold
/// when the sequence is calibrated to area pi on n_target (full coupling).
/// Upward search stops before the first sign change of the coupling.
std::pair<int, int> phonon_passband(const PhaseSequence &seq, int n_target,
                                    const CouplingParams &cp, double threshold,
                                    int n_limit = 100000);

}  // namespace unprobe

#endif  // UNPROBE_PROFILE_H
