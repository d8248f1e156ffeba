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

// unprobe: command-line front end. Every command writes its outputs plus a
// <command>.manifest.json into --out-dir; `replay` re-runs a manifest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unprobe/config.h"
#include "unprobe/io.h"
#include "unprobe/optimizer.h"
#include "unprobe/profile.h"
#include "unprobe/protocol.h"
#include "unprobe/version.h"

namespace fs = std::filesystem;
using namespace unprobe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitVerification = 4;

struct Options {
    std::string seq;
    std::string phases_file;
    std::string config;
    std::string out_dir = ".";
    int points = 4096;
    double area_min = 0.0;
    double area_max = 2.0;
    double threshold = 0.01;
    bool all = false;
    bool verify = false;
    int n_pulses = 5;
    int restarts = 200;
    int evaluations = 0;
    long long runs = 0;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int threads = 1;
    std::string manifest;
};

// Accumulates output files and writes the manifest last.
class Run {
   public:
    Run(std::string command, std::vector<std::string> argv, const Options &opt)
        : command_(std::move(command)), argv_(std::move(argv)), opt_(opt),
          start_(std::chrono::steady_clock::now()) {}

    void write(const std::string &name, const std::string &contents) {
        const fs::path path = fs::path(opt_.out_dir) / name;
        write_file_atomic(path, contents);
        outputs_.push_back(path.string());
    }

    void write_json(const std::string &name, const json &doc) { write(name, doc.dump(2) + "\n"); }

    void finish(std::optional<std::uint64_t> seed) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const std::time_t now = std::time(nullptr);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        json m;
        m["command"] = command_;
        m["argv"] = argv_;
        m["config"] = opt_.config.empty() ? json(nullptr) : json(opt_.config);
        m["seed"] = seed ? json(*seed) : json(nullptr);
        m["outputs"] = outputs_;
        m["version"] = kVersion;
        m["started_utc"] = stamp;
        m["wall_clock_s"] = elapsed;
        write_file_atomic(fs::path(opt_.out_dir) / (command_ + ".manifest.json"), m.dump(2) + "\n");
    }

   private:
    std::string command_;
    std::vector<std::string> argv_;
    const Options &opt_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> outputs_;
};

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string out;
    for (const std::string &c : cells) {
        out += (out.empty() ? "" : ",") + c;
    }
    return out + "\n";
}

std::string num(double v) { return format_double(v); }

PhaseSequence chosen_sequence(const Options &opt) {
    if (!opt.phases_file.empty()) {
        return load_sequence_file(opt.phases_file);
    }
    return named_sequence(opt.seq.empty() ? "UN5" : opt.seq);
}

json alpha_json(const AlphaResult &a) {
    return {{"alpha", a.alpha},
            {"envelope_alpha", a.envelope_alpha},
            {"threshold", a.threshold},
            {"max_leakage", a.max_leakage},
            {"certified", a.certified}};
}

int cmd_profile(const Options &opt, Run &run) {
    if (opt.points < 2 || !(opt.area_max > opt.area_min) || opt.area_min < 0.0) {
        throw ConfigError("profile grid needs --points >= 2 and 0 <= --min < --max");
    }
    const PhaseSequence seq = chosen_sequence(opt);
    const ExcitationProfile prof = profile(seq, opt.area_min, opt.area_max, opt.points);
    std::string csv = "area_pi,excitation\n";
    for (const ProfilePoint &p : prof.points) {
        csv += csv_row({num(p.area_pi), num(p.excitation)});
    }
    run.write("profile.csv", csv);
    run.write_json("profile.json", {{"sequence", sequence_to_json(seq)},
                                    {"points", opt.points},
                                    {"area_min_pi", opt.area_min},
                                    {"area_max_pi", opt.area_max}});
    std::printf("%s: %d points over [%g, %g] pi\n", seq.name().c_str(), opt.points,
                opt.area_min, opt.area_max);
    return kExitOk;
}

int cmd_alpha(const Options &opt, Run &run) {
    std::vector<TableEntry> rows;
    if (opt.all || opt.verify) {
        rows = load_table(table_path());
    } else {
        const PhaseSequence seq = chosen_sequence(opt);
        rows.push_back({seq, std::nan("")});
    }
    int status = kExitOk;
    std::string csv = "name,alpha,envelope_alpha,max_leakage,certified,claimed,pass\n";
    json report = json::array();
    if (opt.verify) {
        for (const TableCheck &c : verify_table(rows, 0.002, opt.threshold)) {
            const AlphaResult &a = c.recomputed;
            std::printf("%-8s alpha %.4f  table %.3f  %s\n", c.name.c_str(), a.alpha, c.claimed,
                        c.pass ? "pass" : "FAIL");
            csv += csv_row({c.name, num(a.alpha), num(a.envelope_alpha), num(a.max_leakage),
                            a.certified ? "1" : "0", num(c.claimed), c.pass ? "1" : "0"});
            json j = alpha_json(a);
            j["name"] = c.name;
            j["claimed"] = c.claimed;
            j["pass"] = c.pass;
            report.push_back(j);
            status = c.pass ? status : kExitVerification;
        }
    } else {
        for (const TableEntry &row : rows) {
            AlphaResult a;
            try {
                a = alpha_of(row.sequence, opt.threshold);
            } catch (const std::domain_error &e) {
                std::fprintf(stderr, "%s: %s\n", row.sequence.name().c_str(), e.what());
                status = kExitVerification;
                continue;
            }
            std::printf("%-8s alpha %.4f  envelope %.4f%s\n", row.sequence.name().c_str(), a.alpha,
                        a.envelope_alpha,
                        a.certified ? "" : "  (sidelobe above threshold outside the main lobe)");
            csv += csv_row({row.sequence.name(), num(a.alpha), num(a.envelope_alpha),
                            num(a.max_leakage), a.certified ? "1" : "0", "", ""});
            json j = alpha_json(a);
            j["name"] = row.sequence.name();
            report.push_back(j);
        }
    }
    run.write("alpha.csv", csv);
    run.write_json("alpha.json", report);
    return status;
}

int cmd_optimize(const Options &opt, Run &run) {
    OptimizationSpec spec;
    spec.n_pulses = opt.n_pulses;
    spec.threshold = opt.threshold;
    spec.restarts = opt.restarts;
    spec.evaluations = opt.evaluations;
    spec.seed = opt.seed;
    spec.threads = opt.threads;
    try {
        spec.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    const OptimizationResult res = optimize(spec);
    json report = alpha_json(res.alpha);
    report["n_pulses"] = spec.n_pulses;
    report["restarts"] = spec.restarts;
    report["evaluations_per_restart"] = spec.evaluations_per_restart();
    report["evaluations"] = res.evaluations;
    report["best_restart"] = res.best_restart;
    report["seed"] = spec.seed;
    report["phases_pi"] = res.sequence.phases_pi();
    run.write_json("optimize_phases.json", sequence_to_json(res.sequence, res.alpha.alpha));
    run.write_json("optimize.json", report);
    std::printf("N=%d alpha %.4f (certified %s) after %lld evaluations\n", spec.n_pulses,
                res.alpha.alpha, res.alpha.certified ? "yes" : "no", res.evaluations);
    return kExitOk;
}

ProtocolConfig require_config(const Options &opt) {
    if (opt.config.empty()) {
        throw ConfigError("--config is required");
    }
    return load_protocol_config(opt.config);
}

int cmd_confusion(const Options &opt, Run &run) {
    const ProtocolConfig cfg = require_config(opt);
    if (!cfg.confusion) {
        throw ConfigError(opt.config + ": missing 'confusion' section");
    }
    const ConfusionSection &c = *cfg.confusion;
    const Matrix mat =
        confusion_matrix(c.m_range, c.n_range, c.sequence, cfg.coupling, cfg.noise, cfg.use_full);
    std::string csv = "m";
    for (int n : mat.col_labels) {
        csv += ",n" + std::to_string(n);
    }
    csv += "\n";
    double min_diag = 1.0;
    double max_off = 0.0;
    for (size_t i = 0; i < mat.row_labels.size(); ++i) {
        csv += std::to_string(mat.row_labels[i]);
        for (size_t j = 0; j < mat.col_labels.size(); ++j) {
            const double v = mat.at(i, j);
            csv += "," + num(v);
            if (mat.row_labels[i] == mat.col_labels[j]) {
                min_diag = std::min(min_diag, v);
            } else {
                max_off = std::max(max_off, v);
            }
        }
        csv += "\n";
    }
    run.write("confusion.csv", csv);
    run.write_json("confusion.json", {{"sequence", sequence_to_json(c.sequence)},
                                      {"coupling", coupling_to_json(cfg.coupling)},
                                      {"noise", noise_to_json(cfg.noise)},
                                      {"use_full_coupling", cfg.use_full},
                                      {"min_diagonal", min_diag},
                                      {"max_off_diagonal", max_off},
                                      {"values_row_major", mat.values}});
    std::printf("%s: min diagonal %.4f, max off-diagonal %.4f\n", c.sequence.name().c_str(),
                min_diag, max_off);
    return kExitOk;
}

int cmd_single_shot(const Options &opt, Run &run) {
    ProtocolConfig cfg = require_config(opt);
    if (!cfg.single_shot) {
        throw ConfigError(opt.config + ": missing 'single_shot' section");
    }
    SingleShotSection &s = *cfg.single_shot;
    if (opt.runs > 0) {
        s.runs = opt.runs;
    }
    if (opt.seed_given) {
        s.seed = opt.seed;
    }
    const SingleShotStatistics st = single_shot_statistics(
        s.distribution, s.probes, cfg.coupling, cfg.noise, s.runs, s.seed, opt.threads,
        cfg.use_full);
    std::string csv =
        "probe,n_target,reached,positives,conditional,exact_reach,exact_positive,"
        "exact_conditional,z\n";
    json probes = json::array();
    for (size_t k = 0; k < s.probes.size(); ++k) {
        const double p = st.exact.positive[k];
        const double sd = std::sqrt(static_cast<double>(st.runs) * p * (1.0 - p));
        const double dev = static_cast<double>(st.positives[k]) - static_cast<double>(st.runs) * p;
        const double z = sd > 0.0 ? dev / sd : (dev == 0.0 ? 0.0 : INFINITY);
        csv += csv_row({std::to_string(k), std::to_string(s.probes[k].n_target),
                        std::to_string(st.reached[k]), std::to_string(st.positives[k]),
                        num(st.conditional(k)), num(st.exact.reach[k]), num(p),
                        num(st.exact.conditional(k)), num(z)});
        probes.push_back({{"n_target", s.probes[k].n_target},
                          {"sequence", s.probes[k].sequence.name()},
                          {"reached", st.reached[k]},
                          {"positives", st.positives[k]},
                          {"conditional", st.conditional(k)},
                          {"exact_positive", p},
                          {"exact_conditional", st.exact.conditional(k)},
                          {"z", z}});
        std::printf("probe n=%d: %lld/%lld positive (conditional %.5f, exact %.5f)\n",
                    s.probes[k].n_target, st.positives[k], st.reached[k], st.conditional(k),
                    st.exact.conditional(k));
    }
    run.write("single_shot.csv", csv);
    run.write_json("single_shot.json",
                   {{"seed", st.seed},
                    {"runs", st.runs},
                    {"distribution",
                     {{"kind", to_string(s.distribution.kind())},
                      {"parameter", s.distribution.parameter()},
                      {"n_max", s.distribution.n_max()}}},
                    {"noise", noise_to_json(cfg.noise)},
                    {"coupling", coupling_to_json(cfg.coupling)},
                    {"all_negative", st.all_negative},
                    {"exact_all_negative", st.exact.all_negative},
                    {"probes", probes}});
    return kExitOk;
}

int cmd_filter_scan(const Options &opt, Run &run) {
    ProtocolConfig cfg = require_config(opt);
    if (!cfg.filter_scan) {
        throw ConfigError(opt.config + ": missing 'filter_scan' section");
    }
    FilterScanSection &f = *cfg.filter_scan;
    json summary;
    if (f.calibrate) {
        const CalibrationTarget &t = *f.calibrate;
        const Calibration cal = calibrate_band(t.lo, t.hi, f.triple, cfg.coupling, cfg.noise,
                                               t.eta_min, t.eta_max, t.eta_step, f.threshold);
        cfg.coupling.eta = cal.eta;
        f.triple.n_target = cal.n_target;
        summary["calibration"] = {{"target", {t.lo, t.hi}},
                                  {"eta", cal.eta},
                                  {"n_target", cal.n_target},
                                  {"edge_error", cal.edge_error}};
    }
    const auto band = triple_passband(f.triple, cfg.coupling, cfg.noise, f.threshold);
    const ScanConfig sc{f.triple, f.amplitude_scale, f.m_cap};
    const std::vector<ScanPoint> curve = coherent_scan(f.nbar_grid, sc, cfg.coupling, cfg.noise);

    std::string csv = "nbar,pass\n";
    ScanPoint peak{0.0, -1.0};
    for (const ScanPoint &p : curve) {
        csv += csv_row({num(p.nbar), num(p.pass)});
        if (p.pass > peak.pass) {
            peak = p;
        }
    }
    run.write("filter_scan.csv", csv);

    std::string fock = "m,pass,single_set\n";
    const int m_hi = std::max(2 * band.second, f.triple.n_target + 10);
    for (int m = 0; m <= m_hi; ++m) {
        const TripleProbabilities t = triple_detection(m, f.triple, cfg.coupling, cfg.noise);
        fock += csv_row({std::to_string(m), num(t.pass), num(t.single_set)});
    }
    run.write("filter_scan_fock.csv", fock);

    summary["coupling"] = coupling_to_json(cfg.coupling);
    summary["noise"] = noise_to_json(cfg.noise);
    summary["bsb_sequence"] = sequence_to_json(f.triple.bsb_sequence);
    summary["carrier_sequence"] = sequence_to_json(f.triple.carrier_sequence);
    summary["n_target"] = f.triple.n_target;
    summary["threshold"] = f.threshold;
    summary["band"] = {band.first, band.second};
    summary["amplitude_scale"] = f.amplitude_scale;
    summary["peak"] = {{"nbar", peak.nbar}, {"pass", peak.pass}};
    run.write_json("filter_scan.json", summary);
    std::printf("eta %.4f, target n=%d: passband [%d, %d], scan peak %.4f at nbar %g\n",
                cfg.coupling.eta, f.triple.n_target, band.first, band.second, peak.pass,
                peak.nbar);
    return kExitOk;
}

int run_cli(std::vector<std::string> args);

int cmd_replay(const Options &opt) {
    const json m = parse_json_file(opt.manifest);
    if (!m.contains("argv") || !m.at("argv").is_array()) {
        throw ConfigError(opt.manifest + ": manifest has no argv array");
    }
    std::vector<std::string> args = m.at("argv").get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "replay") {
        throw ConfigError(opt.manifest + ": refusing to replay a replay");
    }
    return run_cli(std::move(args));
}

int run_cli(std::vector<std::string> args) {
    CLI::App app{"Composite-pulse phonon-number probing simulator", "unprobe"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options opt;

    const auto add_out = [&](CLI::App *sub) {
        sub->add_option("--out-dir", opt.out_dir, "Directory for outputs and manifest");
    };
    const auto add_seq = [&](CLI::App *sub) {
        auto *s = sub->add_option("--seq", opt.seq, "Bundled sequence name (single, UN3..UN15)");
        sub->add_option("--phases-file", opt.phases_file, "JSON file with phases_pi")
            ->check(CLI::ExistingFile)
            ->excludes(s);
    };

    CLI::App *prof = app.add_subcommand("profile", "Excitation versus pulse area");
    add_seq(prof);
    prof->add_option("--points", opt.points, "Grid points");
    prof->add_option("--min", opt.area_min, "First area, units of pi");
    prof->add_option("--max", opt.area_max, "Last area, units of pi");
    add_out(prof);

    CLI::App *alpha = app.add_subcommand("alpha", "Band half-width alpha");
    add_seq(alpha);
    alpha->add_flag("--all", opt.all, "Every bundled sequence");
    alpha->add_flag("--verify", opt.verify, "Compare against the bundled table");
    alpha->add_option("--threshold", opt.threshold, "Leakage threshold");
    add_out(alpha);

    CLI::App *opt_cmd = app.add_subcommand("optimize", "Search phases for a narrow band");
    opt_cmd->add_option("-N,--pulses", opt.n_pulses, "Number of pulses")->check(CLI::Range(1, 99));
    opt_cmd->add_option("--restarts", opt.restarts, "Random restarts");
    opt_cmd->add_option("--evaluations", opt.evaluations, "Evaluations per restart (0: default)");
    opt_cmd->add_option("--threshold", opt.threshold, "Leakage threshold");
    add_out(opt_cmd);

    CLI::App *conf = app.add_subcommand("confusion", "Probe/prepared-state matrix");
    CLI::App *shot = app.add_subcommand("single-shot", "Sequential probing protocol");
    shot->add_option("--runs", opt.runs, "Monte Carlo runs (overrides config)");
    CLI::App *scan = app.add_subcommand("filter-scan", "Triple detection versus mean phonons");
    for (CLI::App *sub : {conf, shot, scan}) {
        sub->add_option("--config", opt.config, "Protocol JSON config")->required();
        add_out(sub);
    }
    for (CLI::App *sub : {opt_cmd, shot}) {
        sub->add_option("--seed", opt.seed, "Master seed")->each([&](const std::string &) {
            opt.seed_given = true;
        });
        sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    }

    CLI::App *replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", opt.manifest, "Manifest JSON")
        ->required()
        ->check(CLI::ExistingFile);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (replay->parsed()) {
            return cmd_replay(opt);
        }
        CLI::App *sub = app.get_subcommands().front();
        Run run(sub->get_name(), args, opt);
        int status = kExitOk;
        std::optional<std::uint64_t> seed;
        if (sub == prof) {
            status = cmd_profile(opt, run);
        } else if (sub == alpha) {
            status = cmd_alpha(opt, run);
        } else if (sub == opt_cmd) {
            status = cmd_optimize(opt, run);
            seed = opt.seed;
        } else if (sub == conf) {
            status = cmd_confusion(opt, run);
        } else if (sub == shot) {
            status = cmd_single_shot(opt, run);
            seed = opt.seed_given ? opt.seed
                                  : load_protocol_config(opt.config).single_shot->seed;
        } else {
            status = cmd_filter_scan(opt, run);
        }
        run.finish(seed);
        return status;
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
}

}  // namespace

int main(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(std::move(args));
}
