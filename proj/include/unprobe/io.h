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

#ifndef UNPROBE_IO_H
#define UNPROBE_IO_H

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "unprobe/coupling.h"
#include "unprobe/pulse.h"

namespace unprobe {

using json = nlohmann::json;

/// Malformed input document. The message names the offending field.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// {"name": str, "phases_pi": [real, ...]} with optional "alpha".
PhaseSequence sequence_from_json(const json &doc);
json sequence_to_json(const PhaseSequence &seq, std::optional<double> alpha = std::nullopt);

PhaseSequence load_sequence_file(const std::filesystem::path &path);

struct TableEntry {
    PhaseSequence sequence;
    double alpha = 0.0;  // tabulated value
};

/// {"sequences": [{"name", "phases_pi", "alpha"}, ...]}
std::vector<TableEntry> table_from_json(const json &doc);
std::vector<TableEntry> load_table(const std::filesystem::path &path);

/// Data directory: $UNPROBE_DATA_DIR if set, else the build-time default.
std::filesystem::path data_dir();
std::filesystem::path table_path();

/// "single" or a name from the bundled table (e.g. "UN5").
PhaseSequence named_sequence(const std::string &name);

/// {"eta": real, "omega_car_hz": real, "mode": str}; only eta is required.
/// omega_car_hz is an ordinary frequency and is converted to angular units.
CouplingParams coupling_from_json(const json &doc);
json coupling_to_json(const CouplingParams &cp);

/// %.17g: round-trips every double.
std::string format_double(double value);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path &path, const std::string &contents);

json parse_json_file(const std::filesystem::path &path);

}  // namespace unprobe

#endif  // UNPROBE_IO_H
