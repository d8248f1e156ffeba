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

#include "unprobe/config.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <stdexcept>

namespace unprobe {

namespace {

// Records the line on which each value starts. Runs only on text that
// nlohmann has already accepted, so it does not validate anything.
class LineScanner {
   public:
    LineScanner(const std::string &text, std::map<std::string, int> &lines)
        : text_(text), lines_(lines) {}

    void run() { scan_value(""); }

   private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n') {
                ++line_;
            }
            ++pos_;
        }
    }

    std::string scan_string() {
        std::string out;
        ++pos_;  // opening quote
        while (pos_ < text_.size() && text_[pos_] != '"') {
            if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                ++pos_;
            }
            out += text_[pos_++];
        }
        ++pos_;
        return out;
    }

    static std::string escape(const std::string &key) {
        std::string out;
        for (char c : key) {
            if (c == '~') {
                out += "~0";
            } else if (c == '/') {
                out += "~1";
            } else {
                out += c;
            }
        }
        return out;
    }

    void scan_value(const std::string &pointer) {
        skip_ws();
        if (pos_ >= text_.size()) {
            return;
        }
        lines_[pointer] = line_;
        const char c = text_[pos_];
        if (c == '{') {
            ++pos_;
            for (;;) {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] == '}') {
                    ++pos_;
                    return;
                }
                if (text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                const std::string key = scan_string();
                skip_ws();
                ++pos_;  // colon
                scan_value(pointer + "/" + escape(key));
            }
        } else if (c == '[') {
            ++pos_;
            for (size_t index = 0;;) {
                skip_ws();
                if (pos_ >= text_.size() || text_[pos_] == ']') {
                    ++pos_;
                    return;
                }
                if (text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                scan_value(pointer + "/" + std::to_string(index++));
            }
        } else if (c == '"') {
            scan_string();
        } else {
            while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' &&
                   text_[pos_] != ']' && !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            }
        }
    }

    const std::string &text_;
    std::map<std::string, int> &lines_;
    size_t pos_ = 0;
    int line_ = 1;
};

class Reader {
   public:
    explicit Reader(const ConfigDocument &doc) : doc_(doc) {}

    const json &value(const std::string &ptr) const {
        return doc_.root().at(json::json_pointer(ptr));
    }

    bool has(const std::string &obj, const char *key) const {
        const json &v = value(obj);
        return v.is_object() && v.contains(key);
    }

    void object(const std::string &ptr, std::initializer_list<const char *> allowed) const {
        const json &v = value(ptr);
        if (!v.is_object()) {
            doc_.fail(ptr, "expected an object");
        }
        for (const auto &item : v.items()) {
            bool known = false;
            for (const char *k : allowed) {
                known = known || item.key() == k;
            }
            if (!known) {
                doc_.fail(ptr + "/" + item.key(), "unknown field '" + item.key() + "'");
            }
        }
    }

    void require(const std::string &obj, const char *key) const {
        if (!has(obj, key)) {
            doc_.fail(obj, std::string("missing field '") + key + "'");
        }
    }

    double number(const std::string &ptr) const {
        const json &v = value(ptr);
        if (!v.is_number()) {
            doc_.fail(ptr, "expected a number");
        }
        return v.get<double>();
    }

    double number_or(const std::string &obj, const char *key, double fallback) const {
        return has(obj, key) ? number(obj + "/" + key) : fallback;
    }

    long long integer(const std::string &ptr, long long min = 0) const {
        const json &v = value(ptr);
        if (!v.is_number_integer()) {
            doc_.fail(ptr, "expected an integer");
        }
        const long long x = v.get<long long>();
        if (x < min) {
            doc_.fail(ptr, "must be at least " + std::to_string(min));
        }
        return x;
    }

    bool boolean(const std::string &ptr) const {
        const json &v = value(ptr);
        if (!v.is_boolean()) {
            doc_.fail(ptr, "expected true or false");
        }
        return v.get<bool>();
    }

    // A bundled sequence name or an inline {"name", "phases_pi"} object.
    PhaseSequence sequence(const std::string &ptr) const {
        const json &v = value(ptr);
        try {
            if (v.is_string()) {
                return named_sequence(v.get<std::string>());
            }
            return sequence_from_json(v);
        } catch (const ConfigError &e) {
            doc_.fail(ptr, e.what());
        }
    }

    // [lo, hi], inclusive.
    std::vector<int> int_range(const std::string &ptr) const {
        const json &v = value(ptr);
        if (!v.is_array() || v.size() != 2) {
            doc_.fail(ptr, "expected [lo, hi]");
        }
        const long long lo = integer(ptr + "/0");
        const long long hi = integer(ptr + "/1");
        if (hi < lo || hi - lo > 100000) {
            doc_.fail(ptr, "range must satisfy lo <= hi with at most 100001 entries");
        }
        std::vector<int> out;
        for (long long k = lo; k <= hi; ++k) {
            out.push_back(static_cast<int>(k));
        }
        return out;
    }

    const ConfigDocument &doc() const { return doc_; }

   private:
    const ConfigDocument &doc_;
};

NoiseModel read_noise(const Reader &r, const std::string &ptr) {
    r.object(ptr, {"detection_error_bright", "detection_error_dark", "heating_rate",
                   "pulse_duration", "detection_duration", "phase_jitter_sigma",
                   "preparation_error"});
    NoiseModel n = NoiseModel::ideal();
    const auto field = [&](const char *key, double fallback, bool probability) {
        const double v = r.number_or(ptr, key, fallback);
        if (probability ? !(v >= 0.0 && v <= 1.0) : !(v >= 0.0)) {
            r.doc().fail(ptr + "/" + key, probability ? "must lie in [0, 1]" : "must be >= 0");
        }
        return v;
    };
    n.detection_error_bright = field("detection_error_bright", n.detection_error_bright, true);
    n.detection_error_dark = field("detection_error_dark", n.detection_error_dark, true);
    n.heating_rate = field("heating_rate", n.heating_rate, false);
    n.pulse_duration = field("pulse_duration", n.pulse_duration, false);
    n.detection_duration = field("detection_duration", n.detection_duration, false);
    n.phase_jitter_sigma = field("phase_jitter_sigma", n.phase_jitter_sigma, false);
    n.preparation_error = field("preparation_error", n.preparation_error, true);
    return n;
}

PhononDistribution read_distribution(const Reader &r, const std::string &ptr) {
    r.require(ptr, "kind");
    const json &kind_v = r.value(ptr + "/kind");
    if (!kind_v.is_string()) {
        r.doc().fail(ptr + "/kind", "expected a string");
    }
    const std::string kind = kind_v.get<std::string>();
    try {
        if (kind == "fock") {
            r.object(ptr, {"kind", "n"});
            r.require(ptr, "n");
            return PhononDistribution::fock(static_cast<int>(r.integer(ptr + "/n")));
        }
        if (kind == "thermal" || kind == "poisson") {
            r.object(ptr, {"kind", "nbar"});
            r.require(ptr, "nbar");
            const double nbar = r.number(ptr + "/nbar");
            return kind == "thermal" ? PhononDistribution::thermal(nbar)
                                     : PhononDistribution::poisson(nbar);
        }
        if (kind == "table") {
            r.object(ptr, {"kind", "weights"});
            r.require(ptr, "weights");
            const json &w = r.value(ptr + "/weights");
            if (!w.is_array()) {
                r.doc().fail(ptr + "/weights", "expected an array");
            }
            std::vector<double> weights;
            for (size_t i = 0; i < w.size(); ++i) {
                weights.push_back(r.number(ptr + "/weights/" + std::to_string(i)));
            }
            return PhononDistribution::from_table(std::move(weights));
        }
    } catch (const std::invalid_argument &e) {
        r.doc().fail(ptr, e.what());
    }
    r.doc().fail(ptr + "/kind", "kind must be fock, thermal, poisson or table");
}

// Either {"sequence": s, "targets": [n...]} or [{"n": n, "sequence": s}, ...].
std::vector<Probe> read_probes(const Reader &r, const std::string &ptr) {
    const json &v = r.value(ptr);
    std::vector<Probe> out;
    if (v.is_object()) {
        r.object(ptr, {"sequence", "targets"});
        r.require(ptr, "sequence");
        r.require(ptr, "targets");
        const PhaseSequence seq = r.sequence(ptr + "/sequence");
        const json &t = r.value(ptr + "/targets");
        if (!t.is_array() || t.empty()) {
            r.doc().fail(ptr + "/targets", "expected a non-empty array");
        }
        for (size_t i = 0; i < t.size(); ++i) {
            out.push_back({static_cast<int>(r.integer(ptr + "/targets/" + std::to_string(i))), seq});
        }
    } else if (v.is_array() && !v.empty()) {
        for (size_t i = 0; i < v.size(); ++i) {
            const std::string item = ptr + "/" + std::to_string(i);
            r.object(item, {"n", "sequence"});
            r.require(item, "n");
            r.require(item, "sequence");
            out.push_back({static_cast<int>(r.integer(item + "/n")), r.sequence(item + "/sequence")});
        }
    } else {
        r.doc().fail(ptr, "expected a probe object or a non-empty array of probes");
    }
    for (size_t k = 1; k < out.size(); ++k) {
        if (out[k].n_target < out[k - 1].n_target) {
            r.doc().fail(ptr, "probes must be ordered by target phonon number");
        }
    }
    return out;
}

std::vector<double> read_grid(const Reader &r, const std::string &ptr) {
    const json &v = r.value(ptr);
    std::vector<double> out;
    if (v.is_array()) {
        for (size_t i = 0; i < v.size(); ++i) {
            out.push_back(r.number(ptr + "/" + std::to_string(i)));
        }
    } else {
        r.object(ptr, {"min", "max", "step"});
        r.require(ptr, "min");
        r.require(ptr, "max");
        r.require(ptr, "step");
        const double lo = r.number(ptr + "/min");
        const double hi = r.number(ptr + "/max");
        const double step = r.number(ptr + "/step");
        if (!(step > 0.0) || !(hi >= lo) || (hi - lo) / step > 1e6) {
            r.doc().fail(ptr, "grid needs min <= max, step > 0 and at most 1e6 points");
        }
        const long long count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
        for (long long k = 0; k <= count; ++k) {
            out.push_back(lo + static_cast<double>(k) * step);
        }
    }
    if (out.empty()) {
        r.doc().fail(ptr, "grid is empty");
    }
    for (size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] >= 0.0)) {
            r.doc().fail(ptr, "mean phonon numbers must be non-negative");
        }
    }
    return out;
}

FilterScanSection read_filter_scan(const Reader &r, const std::string &ptr) {
    r.object(ptr, {"bsb_sequence", "carrier_sequence", "n_target", "calibrate", "threshold",
                   "nbar", "amplitude_scale", "m_cap"});
    r.require(ptr, "bsb_sequence");
    r.require(ptr, "nbar");
    FilterScanSection s;
    s.triple.bsb_sequence = r.sequence(ptr + "/bsb_sequence");
    s.triple.carrier_sequence = r.has(ptr, "carrier_sequence")
                                    ? r.sequence(ptr + "/carrier_sequence")
                                    : named_sequence("UN3");
    if (r.has(ptr, "calibrate")) {
        const std::string c = ptr + "/calibrate";
        r.object(c, {"band", "eta_min", "eta_max", "eta_step"});
        r.require(c, "band");
        const std::vector<int> band = r.int_range(c + "/band");
        CalibrationTarget t;
        t.lo = band.front();
        t.hi = band.back();
        t.eta_min = r.number_or(c, "eta_min", t.eta_min);
        t.eta_max = r.number_or(c, "eta_max", t.eta_max);
        t.eta_step = r.number_or(c, "eta_step", t.eta_step);
        if (!(t.eta_min > 0.0 && t.eta_min <= t.eta_max && t.eta_step > 0.0)) {
            r.doc().fail(c, "eta search needs 0 < eta_min <= eta_max and eta_step > 0");
        }
        s.calibrate = t;
    } else {
        r.require(ptr, "n_target");
    }
    if (r.has(ptr, "n_target")) {
        s.triple.n_target = static_cast<int>(r.integer(ptr + "/n_target"));
    }
    s.threshold = r.number_or(ptr, "threshold", s.threshold);
    if (!(s.threshold > 0.0 && s.threshold < 0.5)) {
        r.doc().fail(ptr + "/threshold", "threshold must lie in (0, 0.5)");
    }
    s.nbar_grid = read_grid(r, ptr + "/nbar");
    s.amplitude_scale = r.number_or(ptr, "amplitude_scale", s.amplitude_scale);
    if (!(s.amplitude_scale >= 0.0 && s.amplitude_scale <= 1.0)) {
        r.doc().fail(ptr + "/amplitude_scale", "amplitude scale must lie in [0, 1]");
    }
    if (r.has(ptr, "m_cap")) {
        s.m_cap = static_cast<int>(r.integer(ptr + "/m_cap", 1));
    }
    return s;
}

}  // namespace

ConfigDocument ConfigDocument::from_text(const std::string &text, std::string source) {
    ConfigDocument doc;
    doc.source_ = std::move(source);
    try {
        doc.root_ = json::parse(text);
    } catch (const json::parse_error &e) {
        int line = 1;
        for (size_t i = 0; i < std::min(e.byte, text.size()); ++i) {
            line += text[i] == '\n' ? 1 : 0;
        }
        throw ConfigError(doc.source_ + ":" + std::to_string(line) + ": " + e.what());
    }
    LineScanner(text, doc.lines_).run();
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_text(text, path.string());
}

int ConfigDocument::line_of(const std::string &pointer) const {
    const auto it = lines_.find(pointer);
    return it == lines_.end() ? 0 : it->second;
}

void ConfigDocument::fail(const std::string &pointer, const std::string &message) const {
    // Report the nearest enclosing value that has a recorded line.
    std::string p = pointer;
    int line = line_of(p);
    while (line == 0 && !p.empty()) {
        p.erase(p.rfind('/'));
        line = line_of(p);
    }
    const std::string where = line > 0 ? source_ + ":" + std::to_string(line) : source_;
    throw ConfigError(where + ": " + (pointer.empty() ? "/" : pointer) + ": " + message);
}

ProtocolConfig protocol_config_from(const ConfigDocument &doc) {
    const Reader r(doc);
    r.object("", {"coupling", "noise", "use_full_coupling", "confusion", "single_shot",
                  "filter_scan"});
    r.require("", "coupling");
    ProtocolConfig cfg;
    r.object("/coupling", {"eta", "omega_car_hz", "mode"});
    try {
        cfg.coupling = coupling_from_json(r.value("/coupling"));
    } catch (const ConfigError &e) {
        doc.fail("/coupling", e.what());
    } catch (const json::exception &e) {
        doc.fail("/coupling", e.what());
    }
    if (r.has("", "noise")) {
        cfg.noise = read_noise(r, "/noise");
    }
    if (r.has("", "use_full_coupling")) {
        cfg.use_full = r.boolean("/use_full_coupling");
    }
    if (r.has("", "confusion")) {
        r.object("/confusion", {"sequence", "m_range", "n_range"});
        r.require("/confusion", "sequence");
        r.require("/confusion", "m_range");
        r.require("/confusion", "n_range");
        cfg.confusion = ConfusionSection{r.sequence("/confusion/sequence"),
                                         r.int_range("/confusion/m_range"),
                                         r.int_range("/confusion/n_range")};
    }
    if (r.has("", "single_shot")) {
        const std::string p = "/single_shot";
        r.object(p, {"distribution", "probes", "runs", "seed"});
        r.require(p, "distribution");
        r.require(p, "probes");
        SingleShotSection s;
        s.distribution = read_distribution(r, p + "/distribution");
        s.probes = read_probes(r, p + "/probes");
        if (r.has(p, "runs")) {
            s.runs = r.integer(p + "/runs", 1);
        }
        if (r.has(p, "seed")) {
            const json &v = r.value(p + "/seed");
            if (!v.is_number_unsigned()) {
                doc.fail(p + "/seed", "expected a non-negative integer");
            }
            s.seed = v.get<std::uint64_t>();
        }
        cfg.single_shot = std::move(s);
    }
    if (r.has("", "filter_scan")) {
        FilterScanSection s = read_filter_scan(r, "/filter_scan");
        s.triple.use_full = cfg.use_full;
        cfg.filter_scan = std::move(s);
    }
    return cfg;
}

ProtocolConfig load_protocol_config(const std::filesystem::path &path) {
    return protocol_config_from(ConfigDocument::load(path));
}

json noise_to_json(const NoiseModel &noise) {
    return {{"detection_error_bright", noise.detection_error_bright},
            {"detection_error_dark", noise.detection_error_dark},
            {"heating_rate", noise.heating_rate},
            {"pulse_duration", noise.pulse_duration},
            {"detection_duration", noise.detection_duration},
            {"phase_jitter_sigma", noise.phase_jitter_sigma},
            {"preparation_error", noise.preparation_error}};
}

}  // namespace unprobe
