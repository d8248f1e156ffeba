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

#include "unprobe/io.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef UNPROBE_DEFAULT_DATA_DIR
#define UNPROBE_DEFAULT_DATA_DIR "data"
#endif

namespace unprobe {

namespace {

const json &require_field(const json &doc, const char *key, const std::string &context) {
    if (!doc.is_object() || !doc.contains(key)) {
        throw ConfigError(context + ": missing field '" + key + "'");
    }
    return doc.at(key);
}

double require_number(const json &doc, const char *key, const std::string &context) {
    const json &v = require_field(doc, key, context);
    if (!v.is_number()) {
        throw ConfigError(context + ": field '" + key + "' must be a number");
    }
    return v.get<double>();
}

}  // namespace

PhaseSequence sequence_from_json(const json &doc) {
    const std::string context = "sequence";
    const json &phases = require_field(doc, "phases_pi", context);
    if (!phases.is_array() || phases.empty()) {
        throw ConfigError("sequence: 'phases_pi' must be a non-empty array");
    }
    std::vector<double> values;
    values.reserve(phases.size());
    for (const json &p : phases) {
        if (!p.is_number()) {
            throw ConfigError("sequence: 'phases_pi' entries must be numbers");
        }
        values.push_back(p.get<double>());
    }
    std::string name;
    if (doc.contains("name")) {
        if (!doc.at("name").is_string()) {
            throw ConfigError("sequence: 'name' must be a string");
        }
        name = doc.at("name").get<std::string>();
    }
    try {
        return PhaseSequence(std::move(values), std::move(name));
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("sequence: ") + e.what());
    }
}

json sequence_to_json(const PhaseSequence &seq, std::optional<double> alpha) {
    json doc;
    doc["name"] = seq.name();
    doc["phases_pi"] = seq.phases_pi();
    if (alpha) {
        doc["alpha"] = *alpha;
    }
    return doc;
}

json parse_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        // nlohmann reports the byte offset; translate it to a line number.
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)), std::istreambuf_iterator<char>());
        size_t line = 1;
        for (size_t i = 0; i < std::min(e.byte, text.size()); ++i) {
            if (text[i] == '\n') {
                ++line;
            }
        }
        throw ConfigError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
}

PhaseSequence load_sequence_file(const std::filesystem::path &path) {
    return sequence_from_json(parse_json_file(path));
}

std::vector<TableEntry> table_from_json(const json &doc) {
    const json &rows = require_field(doc, "sequences", "table");
    if (!rows.is_array()) {
        throw ConfigError("table: 'sequences' must be an array");
    }
    std::vector<TableEntry> out;
    for (const json &row : rows) {
        out.push_back({sequence_from_json(row), require_number(row, "alpha", "table row")});
    }
    return out;
}

std::vector<TableEntry> load_table(const std::filesystem::path &path) {
    return table_from_json(parse_json_file(path));
}

std::filesystem::path data_dir() {
    if (const char *env = std::getenv("UNPROBE_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return UNPROBE_DEFAULT_DATA_DIR;
}

std::filesystem::path table_path() { return data_dir() / "sequences.json"; }

PhaseSequence named_sequence(const std::string &name) {
    if (name == "single") {
        return PhaseSequence::single_pulse();
    }
    for (const TableEntry &e : load_table(table_path())) {
        if (e.sequence.name() == name) {
            return e.sequence;
        }
    }
    throw ConfigError("unknown sequence '" + name + "'");
}

CouplingParams coupling_from_json(const json &doc) {
    CouplingParams cp;
    cp.eta = require_number(doc, "eta", "coupling");
    if (doc.contains("omega_car_hz")) {
        cp.omega_car = 2.0 * kPi * require_number(doc, "omega_car_hz", "coupling");
    }
    if (doc.contains("mode")) {
        if (!doc.at("mode").is_string()) {
            throw ConfigError("coupling: field 'mode' must be a string");
        }
        cp.mode_label = doc.at("mode").get<std::string>();
    }
    try {
        cp.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(std::string("coupling: ") + e.what());
    }
    return cp;
}

json coupling_to_json(const CouplingParams &cp) {
    return {{"eta", cp.eta}, {"omega_car_hz", cp.omega_car / (2.0 * kPi)}, {"mode", cp.mode_label}};
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_file_atomic(const std::filesystem::path &path, const std::string &contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << contents;
        if (!out) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace unprobe
