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

#include <cmath>

#include "unprobe/pulse.h"

namespace unprobe {

void CouplingParams::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw std::invalid_argument("Lamb-Dicke parameter must be positive");
    }
    if (!(omega_car > 0.0) || !std::isfinite(omega_car)) {
        throw std::invalid_argument("carrier coupling must be positive");
    }
}

CouplingSignError::CouplingSignError(int n, double value)
    : std::domain_error("sideband coupling is not positive at n=" + std::to_string(n) +
                        " (value " + std::to_string(value) + ")"),
      n_(n) {}

double laguerre_assoc(int n, int a, double x) {
    if (n < 0) {
        throw std::invalid_argument("Laguerre degree must be non-negative");
    }
    if (a < 0) {
        throw std::invalid_argument("Laguerre order must be non-negative");
    }
    if (n == 0) {
        return 1.0;
    }
    // Extended precision keeps the relative error small close to the roots,
    // where the recurrence cancels.
    const long double xl = x;
    long double prev = 1.0L;
    long double cur = 1.0L + a - xl;
    for (int k = 1; k < n; ++k) {
        const long double next = ((2.0L * k + 1.0L + a - xl) * cur - (k + a) * prev) / (k + 1.0L);
        prev = cur;
        cur = next;
    }
    return static_cast<double>(cur);
}

double bsb_coupling_signed(int n, const CouplingParams &cp) {
    if (n < 0) {
        throw std::invalid_argument("phonon number must be non-negative");
    }
    const double eta2 = cp.eta * cp.eta;
    return cp.omega_car * std::exp(-0.5 * eta2) * cp.eta * laguerre_assoc(n, 1, eta2) /
           std::sqrt(n + 1.0);
}

double bsb_coupling(int n, const CouplingParams &cp) {
    const double value = bsb_coupling_signed(n, cp);
    if (!(value > 0.0)) {
        throw CouplingSignError(n, value);
    }
    return value;
}

double ld_coupling(int n, const CouplingParams &cp) {
    if (n < 0) {
        throw std::invalid_argument("phonon number must be non-negative");
    }
    return cp.eta * cp.omega_car * std::sqrt(n + 1.0);
}

double relative_area(int n_actual, int n_target, const CouplingParams &cp, bool use_full) {
    if (n_actual < 0 || n_target < 0) {
        throw std::invalid_argument("phonon numbers must be non-negative");
    }
    if (!use_full) {
        return kPi * std::sqrt((n_actual + 1.0) / (n_target + 1.0));
    }
    const double reference = bsb_coupling(n_target, cp);
    return kPi * bsb_coupling_signed(n_actual, cp) / reference;
}

int first_nonpositive_coupling(const CouplingParams &cp, int n_limit) {
    const double x = cp.eta * cp.eta;
    double prev = 1.0;
    double cur = 2.0 - x;
    if (n_limit < 0) {
        return 0;
    }
    if (!(prev > 0.0)) {
        return 0;
    }
    for (int n = 1; n <= n_limit; ++n) {
        if (!(cur > 0.0)) {
            return n;
        }
        const double next = ((2.0 * n + 2.0 - x) * cur - (n + 1.0) * prev) / (n + 1.0);
        prev = cur;
        cur = next;
    }
    return n_limit + 1;
}

}  // namespace unprobe
