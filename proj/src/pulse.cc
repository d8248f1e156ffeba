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

#include "unprobe/pulse.h"

#include <algorithm>
#include <cmath>

namespace unprobe {

namespace {

void require_finite(double value, const char *what) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 mat3_mul(const Mat3 &a, const Mat3 &b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) {
                s += a[i][k] * b[k][j];
            }
            r[i][j] = s;
        }
    }
    return r;
}

// Noise-averaged Bloch rotation about (cos phi, sin phi, 0) by `area`.
// R = cos(A) I + (1 - cos(A)) n n^T + sin(A) [n]_x, with
// n n^T = 1/2 [[1 + cos2p, sin2p, 0], [sin2p, 1 - cos2p, 0], [0, 0, 0]].
Mat3 averaged_bloch_rotation(double area, double phase, double sigma) {
    const double c = std::cos(area);
    const double s = std::sin(area);
    const double d1 = std::exp(-0.5 * sigma * sigma);
    const double d2 = std::exp(-2.0 * sigma * sigma);
    const double cp = d1 * std::cos(phase);
    const double sp = d1 * std::sin(phase);
    const double c2p = d2 * std::cos(2.0 * phase);
    const double s2p = d2 * std::sin(2.0 * phase);
    const double k = 1.0 - c;
    Mat3 r{};
    r[0][0] = c + 0.5 * k * (1.0 + c2p);
    r[0][1] = 0.5 * k * s2p;
    r[0][2] = s * sp;
    r[1][0] = 0.5 * k * s2p;
    r[1][1] = c + 0.5 * k * (1.0 - c2p);
    r[1][2] = -s * cp;
    r[2][0] = -s * sp;
    r[2][1] = s * cp;
    r[2][2] = c;
    return r;
}

}  // namespace

RotationOperator RotationOperator::operator*(const RotationOperator &rhs) const {
    return {
        u00 * rhs.u00 + u01 * rhs.u10,
        u00 * rhs.u01 + u01 * rhs.u11,
        u10 * rhs.u00 + u11 * rhs.u10,
        u10 * rhs.u01 + u11 * rhs.u11,
    };
}

RotationOperator RotationOperator::adjoint() const {
    return {std::conj(u00), std::conj(u10), std::conj(u01), std::conj(u11)};
}

double RotationOperator::unitarity_error() const {
    const RotationOperator p = adjoint() * (*this);
    return std::max({std::abs(p.u00 - 1.0), std::abs(p.u01), std::abs(p.u10),
                     std::abs(p.u11 - 1.0)});
}

PhaseSequence::PhaseSequence(std::vector<double> phases_pi, std::string name)
    : phases_pi_(std::move(phases_pi)), name_(std::move(name)) {
    if (phases_pi_.empty()) {
        throw std::invalid_argument("phase sequence must be non-empty");
    }
    for (double p : phases_pi_) {
        require_finite(p, "phase");
    }
}

PhaseSequence PhaseSequence::canonical() const {
    std::vector<double> out(phases_pi_);
    for (double &p : out) {
        p = std::fmod(p, 2.0);
        if (p < 0.0) {
            p += 2.0;
        }
        if (p >= 2.0) {
            p = 0.0;
        }
    }
    return PhaseSequence(std::move(out), name_);
}

PhaseSequence PhaseSequence::shifted(double offset_pi) const {
    std::vector<double> out(phases_pi_);
    for (double &p : out) {
        p += offset_pi;
    }
    return PhaseSequence(std::move(out), name_);
}

RotationOperator rotation(double area, double phase) {
    require_finite(area, "pulse area");
    require_finite(phase, "pulse phase");
    const double c = std::cos(0.5 * area);
    const double s = std::sin(0.5 * area);
    const complex minus_i{0.0, -1.0};
    return {
        complex{c, 0.0},
        minus_i * std::polar(s, -phase),
        minus_i * std::polar(s, phase),
        complex{c, 0.0},
    };
}

RotationOperator compose(const PhaseSequence &seq, double area) {
    RotationOperator u = RotationOperator::identity();
    for (size_t k = 0; k < seq.size(); ++k) {
        u = rotation(area, seq.phase_rad(k)) * u;
    }
    return u;
}

double excitation(const PhaseSequence &seq, double area) {
    return clamp_probability(compose(seq, area).transfer_probability());
}

double excitation_with_offsets(const PhaseSequence &seq, double area,
                               std::span<const double> offsets) {
    if (offsets.size() != seq.size()) {
        throw std::invalid_argument("one phase offset per pulse required");
    }
    RotationOperator u = RotationOperator::identity();
    for (size_t k = 0; k < seq.size(); ++k) {
        u = rotation(area, seq.phase_rad(k) + offsets[k]) * u;
    }
    return clamp_probability(u.transfer_probability());
}

double averaged_excitation(const PhaseSequence &seq, double area, double phase_sigma) {
    require_finite(phase_sigma, "phase jitter");
    if (phase_sigma < 0.0) {
        throw std::invalid_argument("phase jitter must be non-negative");
    }
    if (phase_sigma == 0.0) {
        return excitation(seq, area);
    }
    require_finite(area, "pulse area");
    Mat3 m = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    for (size_t k = 0; k < seq.size(); ++k) {
        m = mat3_mul(averaged_bloch_rotation(area, seq.phase_rad(k), phase_sigma), m);
    }
    // Ground state is the Bloch north pole; P_excited = (1 - z) / 2.
    return clamp_probability(0.5 * (1.0 - m[2][2]));
}

}  // namespace unprobe
