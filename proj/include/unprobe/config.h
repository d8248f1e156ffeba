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

#ifndef UNPROBE_CONFIG_H
#define UNPROBE_CONFIG_H

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "unprobe/distribution.h"
#include "unprobe/io.h"
#include "unprobe/protocol.h"

namespace unprobe {

/// Parsed JSON that remembers the source line of every value, so that
/// validation errors can point at "file:line".
class ConfigDocument {
   public:
    static ConfigDocument load(const std::filesystem::path &path);
    static ConfigDocument from_text(const std::string &text, std::string source);

    const json &root() const { return root_; }
    const std::string &source() const { return source_; }

    /// Line of the value at a JSON pointer such as "/noise/heating_rate";
    /// 0 if unknown.
    int line_of(const std::string &pointer) const;

    [[noreturn]] void fail(const std::string &pointer, const std::string &message) const;

   private:
    json root_;
    std::string source_;
    std::map<std::string, int> lines_;
};

struct ConfusionSection {
    PhaseSequence sequence;
    std::vector<int> m_range;
    std::vector<int> n_range;
};

struct SingleShotSection {
    PhononDistribution distribution = PhononDistribution::fock(0);
    std::vector<Probe> probes;
    long long runs = 100000;
    std::uint64_t seed = 1;
};

struct CalibrationTarget {
    int lo = 0;
    int hi = 0;
    double eta_min = 0.005;
    double eta_max = 0.3;
    double eta_step = 0.001;
};

struct FilterScanSection {
    TripleConfig triple;
    std::optional<CalibrationTarget> calibrate;
    double threshold = 0.01;
    std::vector<double> nbar_grid;
    double amplitude_scale = 1.0;
    int m_cap = 2000;
};

/// Protocol configuration. Missing "noise" means the ideal model; present
/// fields override the ideal values. Unknown keys are rejected.
struct ProtocolConfig {
    CouplingParams coupling;
    NoiseModel noise = NoiseModel::ideal();
    bool use_full = true;
    std::optional<ConfusionSection> confusion;
    std::optional<SingleShotSection> single_shot;
    std::optional<FilterScanSection> filter_scan;
};

ProtocolConfig protocol_config_from(const ConfigDocument &doc);
ProtocolConfig load_protocol_config(const std::filesystem::path &path);

json noise_to_json(const NoiseModel &noise);

}  // namespace unprobe

#endif  // UNPROBE_CONFIG_H
