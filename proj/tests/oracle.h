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

#ifndef UNPROBE_TESTS_ORACLE_H
#define UNPROBE_TESTS_ORACLE_H

// Reference implementations used only by the tests.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

namespace unprobe::oracle {

using Real = boost::multiprecision::cpp_bin_float_50;

/// L^a_n(x) = sum_k (-1)^k C(n+a, n-k) x^k / k!, summed in 50 digits.
inline Real laguerre_series(int n, int a, const Real &x) {
    Real binom = 1;
    for (int i = 1; i <= n; ++i) {
        binom = binom * (a + i) / i;
    }
    Real term = binom;
    Real sum = 0;
    for (int k = 0; k <= n; ++k) {
        sum += term;
        term = -term * Real(n - k) / Real(a + k + 1) * x / Real(k + 1);
    }
    return sum;
}

inline double laguerre(int n, int a, double x) {
    return static_cast<double>(laguerre_series(n, a, Real(x)));
}

/// Sideband coupling exp(-eta^2/2) eta L^1_n(eta^2)/sqrt(n+1), unit carrier.
inline double sideband(int n, double eta) {
    const Real e(eta);
    const Real v = exp(-e * e / 2) * e * laguerre_series(n, 1, e * e) / sqrt(Real(n + 1));
    return static_cast<double>(v);
}

}  // namespace unprobe::oracle

#endif  // UNPROBE_TESTS_ORACLE_H
