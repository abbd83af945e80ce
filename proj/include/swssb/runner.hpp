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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "swssb/common.hpp"
#include "swssb/config.hpp"
#include "swssb/exact.hpp"
#include "swssb/fermion.hpp"
#include "swssb/ising.hpp"
#include "swssb/lattice.hpp"
#include "swssb/parallel.hpp"
#include "swssb/stabilizer.hpp"

#ifndef SWSSB_VERSION
#define SWSSB_VERSION "0.1.0"
#endif

namespace swssb {

inline constexpr const char *kCodeVersion = SWSSB_VERSION;

struct Table {
    std::string schema;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

/// CSV with a leading "# schema:" line. Cells are never quoted; none contain commas.
inline std::string to_csv(const Table &t) {
    std::ostringstream o;
    o << "# schema: " << t.schema << "\n";
    for (size_t c = 0; c < t.columns.size(); c++) {
        o << (c ? "," : "") << t.columns[c];
    }
    o << "\n";
    for (const auto &row : t.rows) {
        for (size_t c = 0; c < row.size(); c++) {
            o << (c ? "," : "") << row[c];
        }
        o << "\n";
    }
    return o.str();
}

struct RunMetadata {
    std::string backend;
    std::string schema;
    std::string config_hash;
    std::string code_version = kCodeVersion;
    std::optional<uint64_t> seed;
    unsigned threads = 1;
    size_t rows = 0;
    double wall_seconds = 0;
};

struct RunResult {
    Table table;
    RunMetadata meta;
    bool discrepancy = false;
};

struct SweepPoint {
    int L = 0;
    double p = 0;
    double beta = 1;
    double g = 0;
    std::optional<int> r;
};

namespace detail {

inline std::string cell(double v) {
    if (!std::isfinite(v)) {
        throw BackendError("non-finite value " + format_double(v) + " reached the output table");
    }
    return format_real(v);
}

inline std::string cell(const ExtendedReal &v) {
    return v.infinite ? std::string("inf") : cell(v.value);
}

inline std::vector<double> axis_or(const ExperimentConfig &c, const char *name, double fallback) {
    auto it = c.sweep.find(name);
    return it == c.sweep.end() ? std::vector<double>{fallback} : it->second.values;
}

}  // namespace detail

/// Cartesian product of the sweep axes; L outermost, then p, temperature, g, r.
inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig &c) {
    std::vector<double> Ls = detail::axis_or(c, "L", c.L);
    std::vector<double> ps = detail::axis_or(c, "p", c.p);
    std::vector<double> betas;
    if (auto it = c.sweep.find("T"); it != c.sweep.end()) {
        for (double T : it->second.values) betas.push_back(1.0 / T);
    } else {
        betas = detail::axis_or(c, "beta", c.beta);
    }
    std::vector<double> gs = detail::axis_or(c, "g", c.g);
    std::vector<std::optional<int>> rs;
    if (auto it = c.sweep.find("r"); it != c.sweep.end()) {
        for (double r : it->second.values) rs.push_back(static_cast<int>(r));
    } else {
        rs.push_back(std::nullopt);
    }
    std::vector<SweepPoint> pts;
    for (double L : Ls) {
        for (double p : ps) {
            for (double b : betas) {
                for (double g : gs) {
                    for (auto r : rs) {
                        pts.push_back({static_cast<int>(L), p, b, g, r});
                    }
                }
            }
        }
    }
    return pts;
}

/// (x, y) for a point; default y sits half a system away along the first axis.
inline std::pair<size_t, size_t> place_sites(const ExperimentConfig &c, const SweepPoint &pt, const Lattice &lat) {
    size_t n = lat.num_sites();
    size_t x = static_cast<size_t>(c.x.value_or(0));
    if (x >= n) {
        throw ValidationError("x = " + std::to_string(x) + " is outside a lattice of " + std::to_string(n) + " sites");
    }
    size_t y;
    if (pt.r) {
        if (*pt.r < 0 || *pt.r >= lat.L) {
            throw ValidationError("separation r = " + std::to_string(*pt.r) + " must lie in [0, L)");
        }
        y = lat.shifted(x, 0, *pt.r);
    } else if (c.y) {
        y = static_cast<size_t>(*c.y);
        if (y >= n) {
            throw ValidationError("y = " + std::to_string(y) + " is outside a lattice of " + std::to_string(n) + " sites");
        }
    } else {
        y = lat.shifted(x, 0, lat.L / 2);
    }
    return {x, y};
}

inline int separation_along_first_axis(const Lattice &lat, size_t x, size_t y) {
    int dx = lat.coords(y)[0] - lat.coords(x)[0];
    return ((dx % lat.L) + lat.L) % lat.L;
}

namespace detail {

inline Table diagnostics_table(const ExperimentConfig &c, const std::string &backend, const std::string &hash,
                               const std::vector<SweepPoint> &pts, const std::vector<std::pair<size_t, size_t>> &sites,
                               const std::vector<Diagnostics> &diags) {
    Table t;
    t.schema = "swssb." + backend + ".v1";
    t.columns = {"state", "d", "L", "p", "beta", "J", "g", "x", "y", "pauli", "diagnostic", "value", "stderr",
                 "backend", "config_hash", "seed"};
    std::string seed = c.seed ? std::to_string(*c.seed) : "";
    for (size_t i = 0; i < pts.size(); i++) {
        const Diagnostics &d = diags[i];
        std::pair<const char *, std::string> kinds[] = {
            {"R1", cell(d.r1)}, {"R2", cell(d.r2)}, {"F", cell(d.f)}, {"D1", cell(d.d1)}, {"Drel", cell(d.drel)}};
        for (auto &[kind, value] : kinds) {
            t.rows.push_back({c.state, std::to_string(c.d), std::to_string(pts[i].L), cell(pts[i].p),
                              cell(pts[i].beta), cell(c.J), cell(pts[i].g), std::to_string(sites[i].first),
                              std::to_string(sites[i].second), std::string(1, c.pauli), kind, value, "", backend,
                              hash, seed});
        }
    }
    return t;
}

inline PauliString pair_operator(size_t n, size_t x, size_t y, char letter) {
    PauliString o(n);
    o.set_letter(x, letter);
    if (y != x) {
        o.set_letter(y, letter);
    }
    return o;
}

inline Table run_exact(const ExperimentConfig &c, const std::string &hash) {
    auto pts = expand_sweep(c);
    ReferenceKind kind = parse_reference_kind(c.state);
    std::vector<std::pair<size_t, size_t>> sites(pts.size());
    for (size_t i = 0; i < pts.size(); i++) {
        Lattice lat(c.d, pts[i].L);
        require_dense_size(lat.num_sites(), "exact backend");
        sites[i] = place_sites(c, pts[i], lat);
    }
    auto diags = parallel_map<Diagnostics>(pts.size(), c.threads, [&](size_t i) {
        ReferenceParams par{c.d, pts[i].L, pts[i].p, pts[i].beta, c.J, pts[i].g};
        DensityMatrix rho = build_reference_state(kind, par);
        return all_diagnostics(rho, pair_operator(rho.n_qubits(), sites[i].first, sites[i].second, c.pauli));
    });
    return diagnostics_table(c, "exact", hash, pts, sites, diags);
}

inline Table run_stab(const ExperimentConfig &c, const std::string &hash) {
    auto pts = expand_sweep(c);
    std::vector<std::pair<size_t, size_t>> sites(pts.size());
    for (size_t i = 0; i < pts.size(); i++) {
        sites[i] = place_sites(c, pts[i], Lattice(c.d, pts[i].L));
    }
    if (c.state != "plus" && c.state != "parity" && c.state != "decohered" && c.state != "mixed") {
        throw ValidationError("stab backend supports states plus, parity, decohered and mixed, not " + c.state);
    }
    auto diags = parallel_map<Diagnostics>(pts.size(), c.threads, [&](size_t i) {
        Lattice lat(c.d, pts[i].L);
        size_t n = lat.num_sites();
        StabilizerMixedState s;
        std::vector<PauliChannel> chs;
        if (c.state == "plus") {
            s = plus_stabilizer_state(n);
        } else if (c.state == "parity") {
            s = parity_stabilizer_state(n);
        } else if (c.state == "decohered") {
            s = plus_stabilizer_state(n);
            chs = link_dephasing_channels(lat, pts[i].p);
        } else {
            s = StabilizerMixedState(n, {});
        }
        if (chs.empty()) {
            chs.push_back(PauliChannel::identity(n));
        }
        SyndromeDistribution dist = unravel_pauli_channel(s, chs);
        return diagnostics_from_syndromes(s, dist, pair_operator(n, sites[i].first, sites[i].second, c.pauli));
    });
    return diagnostics_table(c, "stab", hash, pts, sites, diags);
}

inline Table run_ising(const ExperimentConfig &c) {
    auto pts = expand_sweep(c);
    Table t;
    t.schema = "swssb.ising.v1";
    t.columns = {"p", "r", "L", "d", "mode", "value", "stderr", "n_samples", "seed"};
    bool mc = c.mode == "mc";
    if (c.mode == "closed_form" && c.d != 1) {
        throw ValidationError("ising closed_form mode is one-dimensional");
    }
    auto eval = [&](size_t i, unsigned threads) {
        Lattice lat(c.d, pts[i].L);
        auto [x, y] = place_sites(c, pts[i], lat);
        int r = separation_along_first_axis(lat, x, y);
        Estimate e;
        if (c.mode == "exact") {
            e.value = r1_quenched_exact(lat, pts[i].p, x, y);
        } else if (mc) {
            e = r1_quenched_mc(lat, pts[i].p, x, y, c.samples, *c.seed, threads);
        } else if (c.mode == "annealed") {
            e.value = r2_annealed(lat, pts[i].p, x, y);
        } else {
            e.value = r1_closed_form_1d(pts[i].p, r);
        }
        return std::pair<int, Estimate>(r, e);
    };
    std::vector<std::pair<int, Estimate>> out;
    if (mc) {
        for (size_t i = 0; i < pts.size(); i++) out.push_back(eval(i, c.threads));
    } else {
        out = parallel_map<std::pair<int, Estimate>>(pts.size(), c.threads, [&](size_t i) { return eval(i, 1); });
    }
    for (size_t i = 0; i < pts.size(); i++) {
        const auto &[r, e] = out[i];
        t.rows.push_back({cell(pts[i].p), std::to_string(r), std::to_string(pts[i].L), std::to_string(c.d), c.mode,
                          cell(e.value), mc ? cell(e.stderr_) : "", mc ? std::to_string(e.n_samples) : "",
                          mc ? std::to_string(*c.seed) : ""});
    }
    return t;
}

inline Table run_perc(const ExperimentConfig &c) {
    auto pts = expand_sweep(c);
    Table t;
    t.schema = "swssb.perc.v1";
    t.columns = {"d", "L", "p", "r", "samples", "seed", "value", "stderr"};
    for (const auto &pt : pts) {
        int r = pt.r.value_or(pt.L / 2);
        if (r < 0 || r >= pt.L) {
            throw ValidationError("separation r = " + std::to_string(r) + " must lie in [0, L)");
        }
        PercolationConfig pc{c.d, pt.L, pt.p, c.samples, *c.seed};
        MeanStderr ms = percolation_mean_r1(pc, r, c.threads);
        t.rows.push_back({std::to_string(c.d), std::to_string(pt.L), cell(pt.p), std::to_string(r),
                          std::to_string(c.samples), std::to_string(*c.seed), cell(ms.mean), cell(ms.stderr_)});
    }
    return t;
}

inline Table run_tfim(const ExperimentConfig &c) {
    if (c.d != 1) {
        throw ValidationError("tfim backend is one-dimensional");
    }
    auto pts = expand_sweep(c);
    // One solver per (L, g); every temperature and separation reuses it.
    std::vector<std::pair<int, double>> keys;
    std::vector<size_t> key_of(pts.size());
    std::vector<std::pair<size_t, size_t>> sites(pts.size());
    for (size_t i = 0; i < pts.size(); i++) {
        std::pair<int, double> k{pts[i].L, pts[i].g};
        auto it = std::find(keys.begin(), keys.end(), k);
        key_of[i] = static_cast<size_t>(it - keys.begin());
        if (it == keys.end()) keys.push_back(k);
        Lattice lat(1, pts[i].L);
        sites[i] = place_sites(c, pts[i], lat);
        if (sites[i].first >= sites[i].second) {
            throw ValidationError("tfim backend needs x < y, got x = " + std::to_string(sites[i].first) +
                                  ", y = " + std::to_string(sites[i].second));
        }
    }
    std::vector<double> r1(pts.size());
    parallel_for(keys.size(), c.threads, [&](size_t k) {
        TfimSolver solver(keys[k].first, c.J, keys[k].second);
        for (size_t i = 0; i < pts.size(); i++) {
            if (key_of[i] == k) {
                r1[i] = solver.r1(pts[i].beta, static_cast<int>(sites[i].first), static_cast<int>(sites[i].second));
            }
        }
    });
    Table t;
    t.schema = "swssb.tfim.v1";
    t.columns = {"L", "J", "g", "T", "beta", "x", "y", "r1"};
    for (size_t i = 0; i < pts.size(); i++) {
        t.rows.push_back({std::to_string(pts[i].L), cell(c.J), cell(pts[i].g), cell(1.0 / pts[i].beta),
                          cell(pts[i].beta), std::to_string(sites[i].first), std::to_string(sites[i].second),
                          cell(r1[i])});
    }
    return t;
}

}  // namespace detail

struct CompareCheck {
    std::string name;
    size_t instances = 0;
    double max_abs_diff = 0;
    double tolerance = 0;

    bool pass() const {
        return max_abs_diff <= tolerance;
    }
};

struct CompareReport {
    std::vector<CompareCheck> checks;

    bool ok() const {
        for (const auto &c : checks) {
            if (!c.pass()) return false;
        }
        return true;
    }
};

namespace detail {

inline double diagnostics_gap(const Diagnostics &a, const Diagnostics &b) {
    double gap = std::max({std::abs(a.r1 - b.r1), std::abs(a.r2 - b.r2), std::abs(a.f - b.f), std::abs(a.d1 - b.d1)});
    if (a.drel.infinite != b.drel.infinite) {
        return std::numeric_limits<double>::infinity();
    }
    if (!a.drel.infinite) {
        gap = std::max(gap, std::abs(a.drel.value - b.drel.value));
    }
    return gap;
}

}  // namespace detail

/// Runs every backend pair that applies to the configured lattice against the dense oracle.
inline CompareReport compare_backends(const ExperimentConfig &c) {
    Lattice lat(c.d, c.L);
    size_t n = lat.num_sites();
    if (n > 8) {
        throw ValidationError("compare needs L^d <= 8 sites for the dense oracle, got " + std::to_string(n));
    }
    if (!c.seed) {
        throw ValidationError("compare draws random instances and needs a seed");
    }
    uint64_t seed = *c.seed;
    size_t instances = c.samples ? c.samples : 20;
    std::vector<double> ps = detail::axis_or(c, "p", c.p);
    std::vector<double> gs = detail::axis_or(c, "g", c.g);
    std::vector<double> betas;
    if (auto it = c.sweep.find("T"); it != c.sweep.end()) {
        for (double T : it->second.values) betas.push_back(1.0 / T);
    } else {
        betas = detail::axis_or(c, "beta", c.beta);
    }
    CompareReport rep;

    {
        CompareCheck chk{"stab_vs_dense", instances, 0, 1e-9};
        auto gaps = parallel_map<double>(instances, c.threads, [&](size_t i) {
            CounterRng rng(seed, i);
            size_t m = 1 + rng() % n;
            StabilizerMixedState s = random_stabilizer_state(n, m, rng);
            std::vector<PauliChannel> chs{random_two_local_channel(n, rng), random_two_local_channel(n, rng)};
            size_t x = rng() % n, y = (x + 1 + rng() % (n - 1)) % n;
            static const char letters[] = {'X', 'Y', 'Z'};
            PauliString o(n);
            o.set_letter(x, letters[rng() % 3]);
            o.set_letter(y, letters[rng() % 3]);
            DensityMatrix rho = densify_mixed(s);
            for (const auto &ch : chs) rho = apply_channel(rho, ch);
            Diagnostics dense = all_diagnostics(rho, o);
            Diagnostics stab = diagnostics_from_syndromes(s, unravel_pauli_channel(s, chs), o);
            return std::max(detail::diagnostics_gap(dense, stab), std::abs(stab.r1 - dense.f));
        });
        for (double g : gaps) chk.max_abs_diff = std::max(chk.max_abs_diff, g);
        rep.checks.push_back(chk);
    }

    if (c.d <= 2) {
        CompareCheck chk{"ising_vs_dense", 0, 0, 1e-10};
        for (double p : ps) {
            DensityMatrix rho = rho_decohered(lat, p);
            for (size_t y = 1; y < n; y++) {
                PauliString o = detail::pair_operator(n, 0, y, 'Z');
                chk.max_abs_diff = std::max(chk.max_abs_diff, std::abs(r1_quenched_exact(lat, p, 0, y) - renyi1(rho, o)));
                chk.max_abs_diff = std::max(chk.max_abs_diff, std::abs(r2_annealed(lat, p, 0, y) - renyi2(rho, o)));
                chk.instances++;
            }
        }
        rep.checks.push_back(chk);
    }

    if (c.d == 1) {
        CompareCheck chk{"tfim_vs_dense", 0, 0, 1e-8};
        for (double g : gs) {
            TfimSolver solver(c.L, c.J, g);
            for (double b : betas) {
                DensityMatrix rho = rho_gibbs_even(n, c.J, g, b);
                for (size_t y = 1; y < n; y++) {
                    double dense = renyi1(rho, detail::pair_operator(n, 0, y, 'Z'));
                    chk.max_abs_diff = std::max(chk.max_abs_diff, std::abs(solver.r1(b, 0, static_cast<int>(y)) - dense));
                    chk.instances++;
                }
            }
        }
        rep.checks.push_back(chk);
    }
    return rep;
}

inline Table compare_table(const CompareReport &rep) {
    Table t;
    t.schema = "swssb.compare.v1";
    t.columns = {"check", "instances", "max_abs_diff", "tolerance", "pass"};
    for (const auto &c : rep.checks) {
        std::string gap = std::isfinite(c.max_abs_diff) ? detail::format_real(c.max_abs_diff) : "inf";
        t.rows.push_back({c.name, std::to_string(c.instances), gap, detail::format_real(c.tolerance),
                          c.pass() ? "true" : "false"});
    }
    return t;
}

/// Runs the configured backend. Output bytes depend only on the config, never on thread count.
inline RunResult run(const ExperimentConfig &cfg) {
    validate_config(cfg);
    auto start = std::chrono::steady_clock::now();
    ExperimentConfig c = cfg;
    c.threads = resolve_threads(cfg.threads);
    std::string hash = hex64(config_hash(cfg));
    RunResult res;
    if (c.backend == "exact") {
        res.table = detail::run_exact(c, hash);
    } else if (c.backend == "stab") {
        res.table = detail::run_stab(c, hash);
    } else if (c.backend == "ising") {
        res.table = detail::run_ising(c);
    } else if (c.backend == "perc") {
        res.table = detail::run_perc(c);
    } else if (c.backend == "tfim") {
        res.table = detail::run_tfim(c);
    } else if (c.backend == "compare") {
        CompareReport rep = compare_backends(c);
        res.table = compare_table(rep);
        res.discrepancy = !rep.ok();
    } else {
        throw ValidationError("unknown backend '" + c.backend + "'");
    }
    res.meta.backend = c.backend;
    res.meta.schema = res.table.schema;
    res.meta.config_hash = hash;
    res.meta.seed = c.seed;
    res.meta.threads = c.threads;
    res.meta.rows = res.table.rows.size();
    res.meta.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

}  // namespace swssb
