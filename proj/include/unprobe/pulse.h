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

#ifndef UNPROBE_PULSE_H
#define UNPROBE_PULSE_H

#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace unprobe {

using complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// 2x2 propagator acting on (c_ground, c_excited). u10 is the ground -> excited
/// amplitude, so |u10|^2 is the excitation probability starting from ground.
struct RotationOperator {
    complex u00{1.0, 0.0};
    complex u01{0.0, 0.0};
    complex u10{0.0, 0.0};
    complex u11{1.0, 0.0};

    static RotationOperator identity() { return {}; }

    /// Matrix product (*this) * rhs, i.e. rhs acts first.
    RotationOperator operator*(const RotationOperator &rhs) const;

    RotationOperator adjoint() const;
    complex determinant() const { return u00 * u11 - u01 * u10; }

    /// Largest entrywise deviation of U^dagger U from the identity.
    double unitarity_error() const;

    double transfer_probability() const { return std::norm(u10); }
};

/// Ordered pulse phases of a composite sequence, stored in units of pi so that
/// tabulated values round-trip exactly. phases_pi()[0] is applied first.
class PhaseSequence {
   public:
    PhaseSequence() = default;
    explicit PhaseSequence(std::vector<double> phases_pi, std::string name = {});

    static PhaseSequence single_pulse() { return PhaseSequence({0.0}, "single"); }

    const std::vector<double> &phases_pi() const { return phases_pi_; }
    const std::string &name() const { return name_; }
    size_t size() const { return phases_pi_.size(); }
    double phase_rad(size_t k) const { return phases_pi_[k] * kPi; }

    /// Copy with every phase reduced into [0, 2) (units of pi).
    PhaseSequence canonical() const;
    /// Copy with a constant offset (units of pi) added to every phase.
    PhaseSequence shifted(double offset_pi) const;

    bool operator==(const PhaseSequence &other) const = default;

   private:
    std::vector<double> phases_pi_;
    std::string name_;
};

/// Resonant rectangular pulse of the given area and phase (radians):
/// U = cos(A/2) I - i sin(A/2) (cos(phi) sigma_x + sin(phi) sigma_y).
RotationOperator rotation(double area, double phase);

/// Product U_N ... U_2 U_1 of equal-area pulses with the sequence phases.
RotationOperator compose(const PhaseSequence &seq, double area);

/// |u10|^2 of compose(seq, area), clamped into [0, 1].
double excitation(const PhaseSequence &seq, double area);

/// Same as excitation() with independent Gaussian phase noise of standard
/// deviation phase_sigma (radians) on every pulse, averaged exactly. Each
/// pulse is a Bloch-sphere rotation about (cos phi, sin phi, 0); its
/// expectation over the noise is linear in the first and second harmonics of
/// phi, so the averaged channel is the product of averaged rotation matrices.
double averaged_excitation(const PhaseSequence &seq, double area, double phase_sigma);

/// Excitation for one explicit realisation of per-pulse phase offsets
/// (radians); offsets.size() must equal seq.size().
double excitation_with_offsets(const PhaseSequence &seq, double area,
                               std::span<const double> offsets);

}  // namespace unprobe

#endif  // UNPROBE_PULSE_H
