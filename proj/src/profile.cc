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

#include "unprobe/profile.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace unprobe {

namespace {

double excitation_at_pi_units(const PhaseSequence &seq, double area_pi) {
    return excitation(seq, area_pi * kPi);
}

// Bisect for the threshold crossing between `below` (excitation <= threshold)
// and `above` (excitation > threshold); returns the final `below` end.
double bisect_crossing(const PhaseSequence &seq, double threshold, double below, double above,
                       double tol) {
    while (std::abs(above - below) > tol) {
        const double mid = 0.5 * (below + above);
        if (excitation_at_pi_units(seq, mid) > threshold) {
            above = mid;
        } else {
            below = mid;
        }
    }
    return below;
}

void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 0.5)) {
        throw std::invalid_argument("leakage threshold must lie in (0, 0.5)");
    }
}

std::vector<double> scan(const PhaseSequence &seq, int points) {
    std::vector<double> values(static_cast<size_t>(points) + 1);
    for (int k = 0; k <= points; ++k) {
        values[k] = excitation_at_pi_units(seq, 2.0 * k / points);
    }
    return values;
}

}  // namespace

ExcitationProfile profile(const PhaseSequence &seq, double area_min_pi, double area_max_pi,
                          int points) {
    if (!std::isfinite(area_min_pi) || !std::isfinite(area_max_pi) ||
        !(area_min_pi < area_max_pi)) {
        throw std::invalid_argument("profile grid needs area_min < area_max");
    }
    if (points < 2) {
        throw std::invalid_argument("profile grid needs at least two points");
    }
    ExcitationProfile out;
    out.label = seq.name();
    out.points.reserve(points);
    const double step = (area_max_pi - area_min_pi) / (points - 1);
    for (int k = 0; k < points; ++k) {
        const double a = (k == points - 1) ? area_max_pi : area_min_pi + k * step;
        out.points.push_back({a, excitation_at_pi_units(seq, a)});
    }
    return out;
}

double envelope_alpha(const PhaseSequence &seq, double threshold, int scan_points,
                      double bisection_tol_pi) {
    check_threshold(threshold);
    if (scan_points < 2) {
        throw std::invalid_argument("scan needs at least two points");
    }
    const std::vector<double> values = scan(seq, scan_points);
    const auto area = [&](int k) { return 2.0 * k / scan_points; };
    int first = -1;
    int last = -1;
    for (int k = 0; k <= scan_points; ++k) {
        if (values[k] > threshold) {
            if (first < 0) {
                first = k;
            }
            last = k;
        }
    }
    if (first < 0) {
        return 0.0;
    }
    double left = 1.0;
    double right = 1.0;
    if (first == 0) {
        left = 0.0;
    } else {
        left = bisect_crossing(seq, threshold, area(first - 1), area(first), bisection_tol_pi);
    }
    if (last == scan_points) {
        right = 2.0;
    } else {
        right = bisect_crossing(seq, threshold, area(last + 1), area(last), bisection_tol_pi);
    }
    return std::max({1.0 - left, right - 1.0, 0.0});
}

double max_outside_band(const PhaseSequence &seq, double alpha, int points) {
    double worst = 0.0;
    for (int k = 0; k <= points; ++k) {
        const double a = 2.0 * k / points;
        if (std::abs(a - 1.0) >= alpha) {
            worst = std::max(worst, excitation_at_pi_units(seq, a));
        }
    }
    return worst;
}

AlphaResult alpha_of(const PhaseSequence &seq, double threshold, const AlphaOptions &options) {
    check_threshold(threshold);
    const int points = options.scan_points;
    if (points < 4 || points % 2 != 0) {
        throw std::invalid_argument("alpha scan needs an even number of points >= 4");
    }
    if (excitation_at_pi_units(seq, 1.0) <= threshold) {
        throw std::domain_error("sequence '" + seq.name() +
                                "' does not exceed the threshold at area pi");
    }
    const std::vector<double> values = scan(seq, points);
    const auto area = [&](int k) { return 2.0 * k / points; };
    const int centre = points / 2;

    int up = centre;
    while (up <= points && values[up] > threshold) {
        ++up;
    }
    int down = centre;
    while (down >= 0 && values[down] > threshold) {
        --down;
    }
    if (up > points || down < 0) {
        throw std::domain_error("excitation band of '" + seq.name() +
                                "' reaches the edge of [0, 2pi]");
    }
    const double tol = options.bisection_tol_pi;
    const double right = bisect_crossing(seq, threshold, area(up), area(up - 1), tol);
    const double left = bisect_crossing(seq, threshold, area(down), area(down + 1), tol);

    AlphaResult result;
    result.threshold = threshold;
    result.alpha = std::max(right - 1.0, 1.0 - left);
    result.envelope_alpha =
        std::max(result.alpha, envelope_alpha(seq, threshold, points, tol));
    result.max_leakage = max_outside_band(seq, result.alpha, options.verify_points);
    result.certified = result.max_leakage <= threshold;
    if (!(result.alpha > 0.0 && result.alpha < 1.0)) {
        throw std::domain_error("degenerate excitation band");
    }
    return result;
}

int separable_transitions(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    // alpha < sqrt(1 + 1/k) - 1  <=>  k < 1 / ((1 + alpha)^2 - 1).
    const auto separates = [alpha](long long k) {
        return alpha < std::sqrt((k + 1.0) / static_cast<double>(k)) - 1.0;
    };
    const double bound = 1.0 / (alpha * (2.0 + alpha));
    long long k = static_cast<long long>(std::min(std::ceil(bound), 2e9));
    while (k > 0 && !separates(k)) {
        --k;
    }
    while (k < 2000000000LL && separates(k + 1)) {
        ++k;
    }
    return static_cast<int>(std::min<long long>(k + 1, std::numeric_limits<int>::max()));
}

std::pair<int, int> phonon_passband(const PhaseSequence &seq, int n_target,
                                    const CouplingParams &cp, double threshold,
                                    int n_limit) {
    if (n_target < 0) {
        throw std::invalid_argument("target phonon number must be non-negative");
    }
    cp.validate();
    const auto fires = [&](int n) {
        return excitation(seq, relative_area(n, n_target, cp, true)) > threshold;
    };
    if (!fires(n_target)) {
        throw std::domain_error("empty passband: threshold above peak excitation");
    }
    int lo = n_target;
    while (lo > 0 && fires(lo - 1)) {
        --lo;
    }
    const int stop = std::min(first_nonpositive_coupling(cp, n_limit) - 1, n_limit);
    int hi = n_target;
    while (hi < stop && fires(hi + 1)) {
        ++hi;
    }
    return {lo, hi};
}

}  // namespace unprobe
