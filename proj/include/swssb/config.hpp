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

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swssb/common.hpp"

namespace swssb {

/// A sweep axis: explicit list or inclusive start:stop:step range.
struct Axis {
    std::vector<double> values;
    std::string text;  // canonical form

    bool operator==(const Axis &) const = default;
};

struct ExperimentConfig {
    // [run]
    std::string backend;
    std::optional<uint64_t> seed;
    unsigned threads = 1;
    std::string mode = "exact";
    uint64_t samples = 0;
    std::string out;
    std::string format = "csv";
    // [model]
    std::string state = "parity";
    int d = 1;
    int L = 4;
    double p = 0.25;
    double beta = 1.0;
    double J = 1.0;
    double g = 1.0;
    std::optional<int> x;
    std::optional<int> y;
    char pauli = 'Z';
    std::string strategy = "ladder";
    // [sweep]
    std::map<std::string, Axis> sweep;

    bool operator==(const ExperimentConfig &) const = default;
};

namespace detail {

inline std::string trim(const std::string &s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct ConfigLocation {
    std::string where;
    ValidationError error(const std::string &why) const {
        return ValidationError(where + ": " + why);
    }
};

inline double parse_real(const std::string &v, const ConfigLocation &loc) {
    if (v == "inf" || v == "nan") {
        throw loc.error("value must be finite, got '" + v + "'");
    }
    size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception &) {
        throw loc.error("expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(d)) {
        throw loc.error("expected a number, got '" + v + "'");
    }
    return d;
}

inline long long parse_integer(const std::string &v, const ConfigLocation &loc) {
    size_t used = 0;
    long long n = 0;
    try {
        n = std::stoll(v, &used);
    } catch (const std::exception &) {
        throw loc.error("expected an integer, got '" + v + "'");
    }
    if (used != v.size()) {
        throw loc.error("expected an integer, got '" + v + "'");
    }
    return n;
}

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s(buf);
    // Shortest representation that round-trips.
    for (int prec = 1; prec <= 17; prec++) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) {
            s = buf;
            break;
        }
    }
    return s;
}

inline Axis parse_axis(const std::string &v, const ConfigLocation &loc) {
    Axis a;
    if (v.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(v);
        for (std::string t; std::getline(ss, t, ':');) parts.push_back(trim(t));
        if (parts.size() != 3) {
            throw loc.error("range must be start:stop:step, got '" + v + "'");
        }
        double start = parse_real(parts[0], loc), stop = parse_real(parts[1], loc), step = parse_real(parts[2], loc);
        if (!(step > 0)) {
            throw loc.error("range step must be positive");
        }
        if (stop < start) {
            throw loc.error("range is empty (stop < start)");
        }
        size_t count = static_cast<size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (count > 1000000) {
            throw loc.error("range has too many points");
        }
        for (size_t i = 0; i < count; i++) {
            a.values.push_back(start + static_cast<double>(i) * step);
        }
        a.text = format_real(start) + ":" + format_real(stop) + ":" + format_real(step);
    } else {
        std::stringstream ss(v);
        std::string joined;
        for (std::string t; std::getline(ss, t, ',');) {
            t = trim(t);
            if (t.empty()) {
                throw loc.error("empty entry in list '" + v + "'");
            }
            double d = parse_real(t, loc);
            a.values.push_back(d);
            joined += (joined.empty() ? "" : ", ") + format_real(d);
        }
        if (a.values.empty()) {
            throw loc.error("axis is empty");
        }
        a.text = joined;
    }
    return a;
}

inline const std::set<std::string> &known_backends() {
    static const std::set<std::string> b{"exact", "stab", "ising", "perc", "tfim", "compare"};
    return b;
}

}  // namespace detail

inline const std::set<std::string> &sweep_axis_names() {
    static const std::set<std::string> s{"p", "L", "r", "T", "g", "beta"};
    return s;
}

/// Assigns one key. `where` is used in error messages.
inline void set_config_value(ExperimentConfig &c, const std::string &section, const std::string &key,
                             const std::string &value, const std::string &where) {
    detail::ConfigLocation loc{where};
    auto integer = [&](long long lo, long long hi) {
        long long n = detail::parse_integer(value, loc);
        if (n < lo || n > hi) {
            throw loc.error(key + " = " + value + " is out of range [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
        }
        return n;
    };
    auto real = [&]() { return detail::parse_real(value, loc); };
    auto one_of = [&](std::initializer_list<const char *> allowed) {
        for (const char *a : allowed) {
            if (value == a) return value;
        }
        std::string list;
        for (const char *a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
        throw loc.error(key + " must be one of {" + list + "}, got '" + value + "'");
    };
    if (section == "run") {
        if (key == "backend") {
            if (!detail::known_backends().count(value)) throw loc.error("unknown backend '" + value + "'");
            c.backend = value;
        } else if (key == "seed") {
            c.seed = static_cast<uint64_t>(integer(0, std::numeric_limits<long long>::max()));
        } else if (key == "threads") {
            c.threads = static_cast<unsigned>(integer(0, 1024));
        } else if (key == "mode") {
            c.mode = one_of({"exact", "mc", "annealed", "closed_form"});
        } else if (key == "samples") {
            c.samples = static_cast<uint64_t>(integer(0, 1000000000));
        } else if (key == "out") {
            c.out = value;
        } else if (key == "format") {
            c.format = one_of({"csv", "json"});
        } else {
            throw loc.error("unknown key '" + key + "' in [run]");
        }
    } else if (section == "model") {
        if (key == "state") {
            c.state = one_of({"plus", "parity", "decohered", "gibbs", "signfree", "mixed"});
        } else if (key == "d") {
            c.d = static_cast<int>(integer(1, 3));
        } else if (key == "L") {
            c.L = static_cast<int>(integer(2, 4096));
        } else if (key == "p") {
            c.p = real();
            if (!(c.p >= 0 && c.p <= 1)) throw loc.error("p must lie in [0, 1], got " + value);
        } else if (key == "beta") {
            c.beta = real();
            if (!(c.beta > 0)) throw loc.error("beta must be positive, got " + value);
        } else if (key == "J") {
            c.J = real();
        } else if (key == "g") {
            c.g = real();
        } else if (key == "x") {
            c.x = static_cast<int>(integer(0, 1 << 20));
        } else if (key == "y") {
            c.y = static_cast<int>(integer(0, 1 << 20));
        } else if (key == "pauli") {
            c.pauli = one_of({"X", "Y", "Z"})[0];
        } else if (key == "strategy") {
            c.strategy = one_of({"ladder", "measure-feedback"});
        } else {
            throw loc.error("unknown key '" + key + "' in [model]");
        }
    } else if (section == "sweep") {
        if (!sweep_axis_names().count(key)) {
            throw loc.error("unknown sweep axis '" + key + "' (allowed: p, L, r, T, g, beta)");
        }
        Axis a = detail::parse_axis(value, loc);
        for (double v : a.values) {
            if (key == "p" && !(v >= 0 && v <= 1)) throw loc.error("sweep p value " + detail::format_real(v) + " outside [0, 1]");
            if ((key == "T" || key == "beta") && !(v > 0)) throw loc.error("sweep " + key + " values must be positive");
            if ((key == "L" || key == "r") && (v != std::floor(v) || v < (key == "L" ? 2 : 0))) {
                throw loc.error("sweep " + key + " values must be integers");
            }
        }
        c.sweep[key] = std::move(a);
    } else {
        throw loc.error("unknown section [" + section + "]");
    }
}

/// Cross-field checks run after all keys are assigned.
inline void validate_config(const ExperimentConfig &c) {
    if (c.backend.empty()) {
        throw ValidationError("config: [run] backend is required");
    }
    bool sampling = c.mode == "mc" || c.backend == "perc";
    if (sampling && !c.seed) {
        throw ValidationError("config: a seed is required when sampling (backend " + c.backend + ", mode " + c.mode + ")");
    }
    if (c.backend == "compare" && !c.seed) {
        throw ValidationError("config: a seed is required for compare, which draws random instances");
    }
    if (sampling && c.samples == 0) {
        throw ValidationError("config: samples must be positive when sampling");
    }
    if (c.x && c.y && *c.x == *c.y && c.backend != "perc") {
        throw ValidationError("config: x and y must differ");
    }
    if (c.sweep.count("T") && c.sweep.count("beta")) {
        throw ValidationError("config: sweep over T and beta at the same time is ambiguous");
    }
}

/// Parses the sectioned key = value format without cross-field checks. '#' and ';' start comments.
inline ExperimentConfig parse_config_fields(const std::string &text, const std::string &source = "config") {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string raw, section;
    std::set<std::string> seen;
    size_t line = 0;
    while (std::getline(in, raw)) {
        line++;
        std::string where = source + ":" + std::to_string(line);
        size_t cut = raw.find_first_of("#;");
        std::string s = detail::trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ValidationError(where + ": malformed section header '" + s + "'");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (section != "run" && section != "model" && section != "sweep") {
                throw ValidationError(where + ": unknown section [" + section + "]");
            }
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(where + ": expected key = value, got '" + s + "'");
        }
        if (section.empty()) {
            throw ValidationError(where + ": key outside of any section");
        }
        std::string key = detail::trim(s.substr(0, eq));
        std::string value = detail::trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ValidationError(where + ": empty key or value");
        }
        if (!seen.insert(section + "." + key).second) {
            throw ValidationError(where + ": duplicate key '" + key + "' in [" + section + "]");
        }
        set_config_value(c, section, key, value, where);
    }
    return c;
}

inline ExperimentConfig parse_config(const std::string &text, const std::string &source = "config") {
    ExperimentConfig c = parse_config_fields(text, source);
    validate_config(c);
    return c;
}

/// Applies an override of the form section.key=value.
inline void apply_override(ExperimentConfig &c, const std::string &assignment) {
    size_t eq = assignment.find('=');
    size_t dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ValidationError("--set " + assignment + ": expected section.key=value");
    }
    set_config_value(c, detail::trim(assignment.substr(0, dot)), detail::trim(assignment.substr(dot + 1, eq - dot - 1)),
                     detail::trim(assignment.substr(eq + 1)), "--set " + assignment);
}

/// Canonical text form; parse_config(to_text(c)) == c.
inline std::string to_text(const ExperimentConfig &c) {
    using detail::format_real;
    std::ostringstream o;
    o << "[run]\n";
    o << "backend = " << c.backend << "\n";
    if (c.seed) o << "seed = " << *c.seed << "\n";
    o << "threads = " << c.threads << "\n";
    o << "mode = " << c.mode << "\n";
    o << "samples = " << c.samples << "\n";
    if (!c.out.empty()) o << "out = " << c.out << "\n";
    o << "format = " << c.format << "\n";
    o << "\n[model]\n";
    o << "state = " << c.state << "\n";
    o << "d = " << c.d << "\n";
    o << "L = " << c.L << "\n";
    o << "p = " << format_real(c.p) << "\n";
    o << "beta = " << format_real(c.beta) << "\n";
    o << "J = " << format_real(c.J) << "\n";
    o << "g = " << format_real(c.g) << "\n";
    if (c.x) o << "x = " << *c.x << "\n";
    if (c.y) o << "y = " << *c.y << "\n";
    o << "pauli = " << c.pauli << "\n";
    o << "strategy = " << c.strategy << "\n";
    if (!c.sweep.empty()) {
        o << "\n[sweep]\n";
        for (const auto &[k, a] : c.sweep) o << k << " = " << a.text << "\n";
    }
    return o.str();
}

/// FNV-1a over the canonical text, excluding output location and thread count.
inline uint64_t config_hash(const ExperimentConfig &c) {
    ExperimentConfig k = c;
    k.out.clear();
    k.threads = 1;
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : to_text(k)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace swssb
