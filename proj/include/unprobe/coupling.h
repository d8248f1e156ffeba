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

#ifndef UNPROBE_COUPLING_H
#define UNPROBE_COUPLING_H

#include <stdexcept>
#include <string>

namespace unprobe {

/// Sideband drive parameters. eta is the Lamb-Dicke parameter (the scheme is
/// meant for eta up to roughly 0.3); omega_car is the carrier coupling in
/// angular frequency units and is taken to be independent of n.
struct CouplingParams {
    double eta = 0.036;
    double omega_car = 1.0;
    std::string mode_label;

    void validate() const;
};

/// Raised when the full sideband coupling vanishes or changes sign, which
/// breaks the mapping from phonon number to pulse area.
class CouplingSignError : public std::domain_error {
   public:
    CouplingSignError(int n, double value);
    int n() const { return n_; }

   private:
    int n_;
};

/// Generalized Laguerre polynomial L^a_n(x) by upward three-term recurrence.
double laguerre_assoc(int n, int a, double x);

/// Blue-sideband coupling of |S,n> <-> |D,n+1>:
/// omega_car exp(-eta^2/2) eta L^1_n(eta^2) / sqrt(n+1).
/// Throws CouplingSignError if the value is not strictly positive.
double bsb_coupling(int n, const CouplingParams &cp);

/// Same expression without the sign check.
double bsb_coupling_signed(int n, const CouplingParams &cp);

/// Lamb-Dicke limit eta omega_car sqrt(n+1).
double ld_coupling(int n, const CouplingParams &cp);

/// Pulse area (radians) seen by transition n_actual when each pulse is
/// calibrated to area pi on transition n_target. The area is negative past a
/// sign change of the coupling at n_actual; excitation is even in the area.
/// Throws CouplingSignError if the coupling at n_target is not positive.
double relative_area(int n_actual, int n_target, const CouplingParams &cp, bool use_full);

/// Smallest n at which the full coupling is no longer positive (first sign
/// change of L^1_n(eta^2)), searched up to n_limit; returns n_limit + 1 if
/// none is found.
int first_nonpositive_coupling(const CouplingParams &cp, int n_limit);

}  // namespace unprobe

#endif  // UNPROBE_COUPLING_H
