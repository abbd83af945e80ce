// Copyright 2026 The swssb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "swssb/config.hpp"
#include "swssb/runner.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDiscrepancy = 3;

struct Options {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
    std::string format;
    bool print_config = false;
};

json cell_to_json(const std::string &s) {
    if (s.empty()) return nullptr;
    if (s == "inf") return "inf";
    if (s == "true") return true;
    if (s == "false") return false;
    size_t used = 0;
    try {
        double v = std::stod(s, &used);
        if (used == s.size()) {
            if (s.find_first_of(".eE") == std::string::npos) return std::stoll(s);
            return v;
        }
    } catch (const std::exception &) {
    }
    return s;
}

std::string to_json(const swssb::Table &t) {
    json rows = json::array();
    for (const auto &row : t.rows) {
        json r = json::object();
        for (size_t c = 0; c < t.columns.size(); c++) r[t.columns[c]] = cell_to_json(row[c]);
        rows.push_back(std::move(r));
    }
    json j = {{"schema", t.schema}, {"columns", t.columns}, {"rows", std::move(rows)}};
    return j.dump(2) + "\n";
}

std::string metadata_json(const swssb::RunMetadata &m, const std::string &format) {
    json j = {{"backend", m.backend},
              {"schema", m.schema},
              {"config_hash", m.config_hash},
              {"code_version", m.code_version},
              {"seed", m.seed ? json(*m.seed) : json(nullptr)},
              {"threads", m.threads},
              {"rows", m.rows},
              {"format", format},
              {"wall_seconds", m.wall_seconds}};
    return j.dump(2) + "\n";
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw swssb::ValidationError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// Default thermal sweep: L = 128, T in [0.15, 2.95] step 0.1, g in [0, 6] step 0.1.
std::string thermal_sweep_preset() {
    return "[run]\nbackend = tfim\n\n[model]\nL = 128\nJ = 1\n\n[sweep]\nT = 0.15:2.95:0.1\ng = 0:6:0.1\n";
}

swssb::ExperimentConfig build_config(const std::string &backend, const Options &o, const std::string &preset) {
    std::string text;
    std::string source = "config";
    if (!o.config_path.empty()) {
        text = read_file(o.config_path);
        source = o.config_path;
    } else if (!preset.empty()) {
        text = preset;
        source = "preset";
    } else {
        text = "[run]\nbackend = " + backend + "\n";
    }
    // Flags may still supply the seed, so cross-field checks wait until overrides are applied.
    swssb::ExperimentConfig c = swssb::parse_config_fields(text, source);
    if (c.backend.empty()) c.backend = backend;
    if (c.backend != backend) {
        throw swssb::ValidationError("config selects backend '" + c.backend + "' but the subcommand is '" + backend + "'");
    }
    for (const auto &s : o.sets) swssb::apply_override(c, s);
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (!o.out.empty()) c.out = o.out;
    if (!o.format.empty()) c.format = o.format;
    swssb::validate_config(c);
    return c;
}

int execute(const std::string &backend, const Options &o, const std::string &preset) {
    swssb::ExperimentConfig c = build_config(backend, o, preset);
    if (o.print_config) {
        std::cout << swssb::to_text(c);
        return kExitOk;
    }
    swssb::RunResult res = swssb::run(c);
    std::string body = c.format == "json" ? to_json(res.table) : swssb::to_csv(res.table);
    std::string meta = metadata_json(res.meta, c.format);
    if (c.out.empty()) {
        std::cout << body;
        std::cerr << meta;
    } else {
        write_file(c.out, body);
        write_file(c.out + ".meta.json", meta);
    }
    if (res.discrepancy) {
        std::cerr << "swssb: backend discrepancy above tolerance\n";
        return kExitDiscrepancy;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"swssb: diagnostics for strong-to-weak symmetry breaking in mixed states"};
    app.set_version_flag("--version", std::string(swssb::kCodeVersion));
    app.require_subcommand(1);

    Options o;
    app.add_option("--seed", o.seed, "Master seed for sampling");
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    app.add_option("--out", o.out, "Output path; metadata goes to <out>.meta.json");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    auto common = [&](CLI::App *sub) {
        sub->fallthrough();
        sub->add_option("-c,--config", o.config_path, "Experiment config file")->check(CLI::ExistingFile);
        sub->add_option("--set", o.sets, "Override a key, e.g. --set model.p=0.2")->allow_extra_args(false);
        sub->add_flag("--print-config", o.print_config, "Print the canonical config and exit");
    };

    std::string chosen;
    std::string preset;
    const std::vector<std::pair<const char *, const char *>> subcommands{
        {"exact", "Dense density-matrix diagnostics"},
        {"stab", "Stabilizer syndrome-class diagnostics"},
        {"ising", "Statistical-mechanics R1 and R2 for dephased lattices"},
        {"perc", "Bond percolation estimate of R1"},
        {"tfim", "Free-fermion R1 for the thermal transverse-field Ising chain"},
        {"compare", "Cross-check backends against the dense oracle"},
    };
    for (const auto &[name, desc] : subcommands) {
        CLI::App *sub = app.add_subcommand(name, desc);
        common(sub);
        sub->callback([&, name]() { chosen = name; });
        if (std::string(name) == "tfim") {
            CLI::App *sweep = sub->add_subcommand("sweep", "Temperature and field sweep on the default L = 128 grid");
            common(sweep);
            sweep->callback([&]() {
                chosen = "tfim";
                preset = thermal_sweep_preset();
            });
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        return execute(chosen, o, preset);
    } catch (const swssb::ValidationError &e) {
        std::cerr << "swssb: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const swssb::BackendError &e) {
        std::cerr << "swssb: backend error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception &e) {
        std::cerr << "swssb: error: " << e.what() << "\n";
        return kExitError;
    }
}
