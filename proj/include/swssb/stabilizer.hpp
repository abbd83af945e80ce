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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "swssb/common.hpp"
#include "swssb/exact.hpp"
#include "swssb/lattice.hpp"
#include "swssb/parallel.hpp"
#include "swssb/pauli.hpp"

namespace swssb {

// ---------------------------------------------------------------------------
// Symplectic row reduction with phase tracking.

inline bool symplectic_bit(const PauliString &p, size_t k) {
    size_t n = p.num_qubits();
    return k < n ? p.xs.get(k) : p.zs.get(k - n);
}

/// Incrementally row-reduced set of Pauli strings. Each row remembers which inputs it is a product of.
class PauliSpan {
   public:
    explicit PauliSpan(size_t n_qubits, size_t max_inputs = 0) : n_(n_qubits), max_inputs_(max_inputs) {
    }

    struct Decomposition {
        bool in_span = false;
        BitVec combo;
        uint8_t residual_phase = 0;  // P * (product of used rows) = i^residual_phase * I when in_span
    };

    Decomposition decompose(const PauliString &p) const {
        Decomposition d;
        d.combo = BitVec(max_inputs_);
        PauliString res = p;
        for (const Row &r : rows_) {
            if (symplectic_bit(res, r.pivot)) {
                res *= r.p;
                d.combo ^= r.combo;
            }
        }
        d.in_span = res.is_identity_up_to_phase();
        d.residual_phase = res.phase;
        return d;
    }

    /// Adds p as input number `index`. Returns false when p is already in the span (up to phase).
    bool add(const PauliString &p, size_t index) {
        PauliString res = p;
        BitVec combo(max_inputs_);
        if (index < max_inputs_) {
            combo.set(index, true);
        }
        for (const Row &r : rows_) {
            if (symplectic_bit(res, r.pivot)) {
                res *= r.p;
                combo ^= r.combo;
            }
        }
        for (size_t k = 0; k < 2 * n_; k++) {
            if (symplectic_bit(res, k)) {
                rows_.push_back({std::move(res), std::move(combo), k});
                return true;
            }
        }
        return false;
    }

    size_t rank() const {
        return rows_.size();
    }

   private:
    struct Row {
        PauliString p;
        BitVec combo;
        size_t pivot;
    };
    size_t n_;
    size_t max_inputs_;
    std::vector<Row> rows_;
};

// ---------------------------------------------------------------------------
// Stabilizer states.

class StabilizerMixedState {
   public:
    StabilizerMixedState() = default;

    /// Validates: Hermitian, pairwise commuting, independent, -I not generated.
    StabilizerMixedState(size_t n, std::vector<PauliString> generators) : n_(n), gens_(std::move(generators)) {
        PauliSpan span(n_);
        for (size_t a = 0; a < gens_.size(); a++) {
            const PauliString &g = gens_[a];
            if (g.num_qubits() != n_) {
                throw ValidationError("StabilizerMixedState: generator " + g.str() + " has wrong size");
            }
            if (!g.is_hermitian()) {
                throw ValidationError("StabilizerMixedState: generator " + g.str() + " is not Hermitian");
            }
            for (size_t b = 0; b < a; b++) {
                if (!g.commutes(gens_[b])) {
                    throw ValidationError("StabilizerMixedState: generators " + gens_[b].str() + " and " + g.str() +
                                          " anticommute");
                }
            }
            if (!span.add(g, a)) {
                throw ValidationError("StabilizerMixedState: generator " + g.str() + " is dependent");
            }
        }
        if (gens_.size() > n_) {
            throw ValidationError("StabilizerMixedState: more generators than qubits");
        }
    }

    size_t num_qubits() const {
        return n_;
    }
    size_t num_generators() const {
        return gens_.size();
    }
    size_t logical_count() const {
        return n_ - gens_.size();
    }
    const std::vector<PauliString> &generators() const {
        return gens_;
    }

    BitVec syndrome(const PauliString &e) const {
        BitVec s(gens_.size());
        for (size_t a = 0; a < gens_.size(); a++) {
            if (!e.commutes(gens_[a])) {
                s.set(a, true);
            }
        }
        return s;
    }

   private:
    size_t n_ = 0;
    std::vector<PauliString> gens_;
};

/// Same group, compared by row reduction rather than generator lists.
inline bool stabilizer_groups_equal(const StabilizerMixedState &a, const StabilizerMixedState &b) {
    if (a.num_qubits() != b.num_qubits() || a.num_generators() != b.num_generators()) {
        return false;
    }
    PauliSpan span(b.num_qubits());
    for (size_t i = 0; i < b.num_generators(); i++) {
        span.add(b.generators()[i], i);
    }
    for (const PauliString &g : a.generators()) {
        auto d = span.decompose(g);
        if (!d.in_span || d.residual_phase != 0) {
            return false;
        }
    }
    return true;
}

inline PauliString hermitian_form(PauliString p) {
    p.phase = 0;
    return p;
}

struct DestabilizerFrame {
    std::vector<PauliString> destabilizers;
    std::vector<std::pair<PauliString, PauliString>> logicals;  // (Z-like, X-like)
};

inline bool anticommute(const PauliString &a, const PauliString &b) {
    return !a.commutes(b);
}

/// Throws when the frame is not a symplectic completion of the generators.
inline void validate_frame(const StabilizerMixedState &s, const DestabilizerFrame &f) {
    const auto &g = s.generators();
    size_t m = g.size();
    if (f.destabilizers.size() != m || f.logicals.size() != s.logical_count()) {
        throw ValidationError("DestabilizerFrame: wrong number of elements");
    }
    std::vector<PauliString> all;
    for (size_t a = 0; a < m; a++) {
        for (size_t b = 0; b < m; b++) {
            if (anticommute(g[a], f.destabilizers[b]) != (a == b)) {
                throw ValidationError("DestabilizerFrame: generator/destabilizer pairing fails at (" +
                                      std::to_string(a) + "," + std::to_string(b) + ")");
            }
            if (anticommute(f.destabilizers[a], f.destabilizers[b])) {
                throw ValidationError("DestabilizerFrame: destabilizers anticommute");
            }
        }
    }
    std::vector<PauliString> others = g;
    others.insert(others.end(), f.destabilizers.begin(), f.destabilizers.end());
    for (size_t n = 0; n < f.logicals.size(); n++) {
        const auto &[zl, xl] = f.logicals[n];
        if (!anticommute(zl, xl)) {
            throw ValidationError("DestabilizerFrame: logical pair commutes");
        }
        for (const auto &o : others) {
            if (anticommute(zl, o) || anticommute(xl, o)) {
                throw ValidationError("DestabilizerFrame: logical does not commute with the frame");
            }
        }
        for (size_t k = 0; k < n; k++) {
            const auto &[zk, xk] = f.logicals[k];
            if (anticommute(zl, zk) || anticommute(zl, xk) || anticommute(xl, zk) || anticommute(xl, xk)) {
                throw ValidationError("DestabilizerFrame: logical pairs not mutually commuting");
            }
        }
    }
}

/// Destabilizers by solving the symplectic pairing, logicals by symplectic Gram-Schmidt.
inline DestabilizerFrame compute_destabilizer_frame(const StabilizerMixedState &s) {
    size_t n = s.num_qubits();
    const auto &g = s.generators();
    size_t m = g.size();

    // Rows of M: symplectic duals of g, so that M h = (<g_a, h>)_a.
    std::vector<BitVec> rows(m, BitVec(2 * n));
    std::vector<BitVec> track(m, BitVec(m));
    for (size_t a = 0; a < m; a++) {
        for (size_t q = 0; q < n; q++) {
            rows[a].set(q, g[a].zs.get(q));
            rows[a].set(n + q, g[a].xs.get(q));
        }
        track[a].set(a, true);
    }
    std::vector<size_t> pivots;
    size_t r = 0;
    for (size_t col = 0; col < 2 * n && r < m; col++) {
        size_t sel = r;
        while (sel < m && !rows[sel].get(col)) {
            sel++;
        }
        if (sel == m) {
            continue;
        }
        std::swap(rows[sel], rows[r]);
        std::swap(track[sel], track[r]);
        for (size_t i = 0; i < m; i++) {
            if (i != r && rows[i].get(col)) {
                rows[i] ^= rows[r];
                track[i] ^= track[r];
            }
        }
        pivots.push_back(col);
        r++;
    }
    if (r != m) {
        throw BackendError("compute_destabilizer_frame: generators are dependent");
    }
    DestabilizerFrame f;
    for (size_t a = 0; a < m; a++) {
        PauliString h(n);
        for (size_t i = 0; i < m; i++) {
            if (track[i].get(a)) {
                size_t col = pivots[i];
                if (col < n) {
                    h.xs.flip(col);
                } else {
                    h.zs.flip(col - n);
                }
            }
        }
        f.destabilizers.push_back(h);
    }
    for (size_t a = 0; a < m; a++) {
        for (size_t b = a + 1; b < m; b++) {
            if (anticommute(f.destabilizers[a], f.destabilizers[b])) {
                f.destabilizers[a] = hermitian_form(f.destabilizers[a] * g[b]);
            }
        }
    }

    std::vector<PauliString> cands;
    for (size_t q = 0; q < 2 * n; q++) {
        PauliString e(n);
        if (q < n) {
            e.xs.set(q, true);
        } else {
            e.zs.set(q - n, true);
        }
        PauliString p = e;
        for (size_t a = 0; a < m; a++) {
            if (anticommute(e, f.destabilizers[a])) {
                p *= g[a];
            }
            if (anticommute(e, g[a])) {
                p *= f.destabilizers[a];
            }
        }
        cands.push_back(hermitian_form(p));
    }
    while (f.logicals.size() < s.logical_count()) {
        size_t iu = 0;
        while (iu < cands.size() && cands[iu].is_identity_up_to_phase()) {
            iu++;
        }
        if (iu == cands.size()) {
            throw BackendError("compute_destabilizer_frame: ran out of logical candidates");
        }
        PauliString u = cands[iu];
        size_t iv = iu + 1;
        while (iv < cands.size() && !anticommute(u, cands[iv])) {
            iv++;
        }
        if (iv == cands.size()) {
            throw BackendError("compute_destabilizer_frame: logical candidate without partner");
        }
        PauliString v = cands[iv];
        f.logicals.emplace_back(u, v);
        for (auto &w : cands) {
            bool wu = anticommute(w, u), wv = anticommute(w, v);
            if (wv) {
                w *= u;
            }
            if (wu) {
                w *= v;
            }
            w = hermitian_form(w);
        }
    }
    validate_frame(s, f);
    return f;
}

/// Generators of |sqrt(rho)>> on 2n qubits: R_j is qubit j, L_j is qubit n + j.
inline StabilizerMixedState canonical_purification_generators(const StabilizerMixedState &s,
                                                              const DestabilizerFrame &f) {
    validate_frame(s, f);
    size_t n = s.num_qubits();
    std::vector<PauliString> out;
    for (const auto &g : s.generators()) {
        out.push_back(g.embedded(2 * n, n));
        out.push_back(g.conj().embedded(2 * n, 0));
    }
    for (const auto &[zl, xl] : f.logicals) {
        out.push_back(doubled(zl, zl.conj()));
        out.push_back(doubled(xl, xl.conj()));
    }
    return StabilizerMixedState(2 * n, std::move(out));
}

inline StabilizerMixedState canonical_purification_generators(const StabilizerMixedState &s) {
    return canonical_purification_generators(s, compute_destabilizer_frame(s));
}

inline void apply_pauli_to_vector(const PauliString &p, const ComplexVector &in, ComplexVector &out) {
    for (Eigen::Index b = 0; b < in.size(); b++) {
        auto [c, t] = p.act_on_basis(static_cast<uint64_t>(b));
        out[static_cast<Eigen::Index>(t)] = c * in[b];
    }
}

/// 2^{-k} prod (1 + g_a)/2 as a dense matrix.
inline DensityMatrix densify_mixed(const StabilizerMixedState &s) {
    size_t n = s.num_qubits();
    require_dense_size(n, "densify_mixed");
    Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix m = ComplexMatrix::Identity(dim, dim);
    for (const auto &g : s.generators()) {
        m = (m + left_multiply(g, m)).eval() * 0.5;
    }
    m /= static_cast<double>(Eigen::Index{1} << s.logical_count());
    return DensityMatrix::from_matrix((m + m.adjoint()) * 0.5);
}

/// State vector of a pure stabilizer state, phase fixed by its largest basis amplitude being real positive.
inline ComplexVector densify_pure(const StabilizerMixedState &s) {
    if (s.logical_count() != 0) {
        throw ValidationError("densify_pure: state is not pure");
    }
    size_t n = s.num_qubits();
    require_dense_size(n, "densify_pure");
    Eigen::Index dim = Eigen::Index{1} << n;
    ComplexVector tmp(dim);
    for (Eigen::Index b = 0; b < dim; b++) {
        ComplexVector v = ComplexVector::Zero(dim);
        v[b] = 1;
        for (const auto &g : s.generators()) {
            apply_pauli_to_vector(g, v, tmp);
            v = (v + tmp) * 0.5;
        }
        double nrm = v.norm();
        if (nrm * nrm > 0.5 / static_cast<double>(dim)) {
            v /= nrm;
            Eigen::Index imax;
            v.cwiseAbs().maxCoeff(&imax);
            v *= std::conj(v[imax]) / std::abs(v[imax]);
            return v;
        }
    }
    throw BackendError("densify_pure: no basis state overlaps the stabilizer state");
}

// ---------------------------------------------------------------------------
// Syndrome-class diagnostics.

struct SyndromeDistribution {
    size_t num_generators = 0;
    std::map<BitVec, double> probs;

    double prob(const BitVec &s) const {
        auto it = probs.find(s);
        return it == probs.end() ? 0.0 : it->second;
    }
    double total() const {
        double t = 0;
        for (const auto &kv : probs) {
            t += kv.second;
        }
        return t;
    }
};

constexpr size_t kDefaultClassBudget = size_t{1} << 22;

/// Convolves the syndrome distribution through each channel in turn.
inline SyndromeDistribution unravel_pauli_channel(const StabilizerMixedState &s,
                                                  const std::vector<PauliChannel> &channels,
                                                  size_t class_budget = kDefaultClassBudget) {
    SyndromeDistribution d;
    d.num_generators = s.num_generators();
    BitVec zero(s.num_generators());
    d.probs[zero] = 1.0;
    for (const auto &ch : channels) {
        ch.validate(s.num_qubits());
        std::vector<std::pair<double, BitVec>> moves;
        for (const auto &[p, e] : ch.terms) {
            if (p > 0) {
                moves.emplace_back(p, s.syndrome(e));
            }
        }
        std::map<BitVec, double> next;
        for (const auto &[cls, pc] : d.probs) {
            if (pc == 0) {
                continue;
            }
            for (const auto &[p, syn] : moves) {
                next[cls ^ syn] += pc * p;
            }
            if (next.size() > class_budget) {
                throw BackendError("unravel_pauli_channel: reachable classes exceed budget of " +
                                   std::to_string(class_budget) + " (" + std::to_string(next.size()) + " so far)");
            }
        }
        d.probs = std::move(next);
    }
    if (!d.probs.count(zero)) {
        d.probs[zero] = 0.0;
    }
    return d;
}

inline SyndromeDistribution unravel_pauli_channel(const StabilizerMixedState &s, const PauliChannel &ch) {
    return unravel_pauli_channel(s, std::vector<PauliChannel>{ch});
}

inline Diagnostics diagnostics_from_syndromes(const SyndromeDistribution &dist, const BitVec &o) {
    Diagnostics d;
    double r1 = 0, num2 = 0, den2 = 0, rel = 0, d1 = 0;
    bool infinite = false;
    for (const auto &[s, ps] : dist.probs) {
        double po = dist.prob(s ^ o);
        r1 += std::sqrt(ps * po);
        num2 += ps * po;
        den2 += ps * ps;
        d1 += std::abs(ps - po);
        if (ps > 0) {
            if (po > 0) {
                rel += ps * std::log(ps / po);
            } else {
                infinite = true;
            }
        }
    }
    for (const auto &[s, ps] : dist.probs) {
        BitVec so = s ^ o;
        if (!dist.probs.count(so)) {
            d1 += ps;  // class only reached through O
        }
    }
    d.r1 = r1;
    d.f = r1;
    d.r2 = num2 / den2;
    d.d1 = 0.5 * d1;
    d.drel = infinite ? ExtendedReal::inf() : ExtendedReal::finite(rel);
    return d;
}

inline Diagnostics diagnostics_from_syndromes(const StabilizerMixedState &s, const SyndromeDistribution &dist,
                                              const PauliString &o) {
    if (o.num_qubits() != s.num_qubits()) {
        throw ValidationError("diagnostics_from_syndromes: operator size mismatch");
    }
    return diagnostics_from_syndromes(dist, s.syndrome(o));
}

// ---------------------------------------------------------------------------
// Commuting Gibbs states.

/// R1 for rho proportional to exp(beta sum_a c_a g_a) with commuting Hermitian g_a.
inline double commuting_gibbs_r1(const std::vector<PauliString> &terms, const std::vector<double> &coefficients,
                                 double beta, const PauliString &o) {
    if (terms.empty()) {
        return 1.0;
    }
    if (!coefficients.empty() && coefficients.size() != terms.size()) {
        throw ValidationError("commuting_gibbs_r1: coefficient count mismatch");
    }
    size_t n = terms[0].num_qubits();
    for (size_t a = 0; a < terms.size(); a++) {
        if (terms[a].num_qubits() != n || !terms[a].is_hermitian()) {
            throw ValidationError("commuting_gibbs_r1: term " + terms[a].str() + " is not a Hermitian n-qubit Pauli");
        }
        for (size_t b = 0; b < a; b++) {
            if (!terms[a].commutes(terms[b])) {
                throw ValidationError("commuting_gibbs_r1: terms " + terms[b].str() + " and " + terms[a].str() +
                                      " do not commute");
            }
        }
    }
    PauliSpan span(n, terms.size());
    std::vector<size_t> basis;
    for (size_t a = 0; a < terms.size(); a++) {
        if (span.add(terms[a], basis.size())) {
            basis.push_back(a);
        }
    }
    // Re-run with the right combo width now that the basis size is known.
    PauliSpan bspan(n, basis.size());
    for (size_t i = 0; i < basis.size(); i++) {
        bspan.add(terms[basis[i]], i);
    }
    size_t r = basis.size();
    if (r > 26) {
        throw ValidationError("commuting_gibbs_r1: " + std::to_string(r) + " independent terms exceeds limit 26");
    }
    struct Term {
        uint64_t mask;
        double sign;
        double coef;
        bool kept;
    };
    std::vector<Term> ts;
    for (size_t a = 0; a < terms.size(); a++) {
        auto d = bspan.decompose(terms[a]);
        if (!d.in_span || (d.residual_phase & 1)) {
            throw BackendError("commuting_gibbs_r1: decomposition failed");
        }
        uint64_t mask = 0;
        for (size_t i = 0; i < r; i++) {
            if (d.combo.get(i)) {
                mask |= uint64_t{1} << i;
            }
        }
        double c = coefficients.empty() ? 1.0 : coefficients[a];
        ts.push_back({mask, d.residual_phase == 0 ? 1.0 : -1.0, c, terms[a].commutes(o)});
    }
    auto log_trace = [&](bool only_kept) {
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> e(size_t{1} << r);
        for (uint64_t eps = 0; eps < (uint64_t{1} << r); eps++) {
            double x = 0;
            for (const Term &t : ts) {
                if (only_kept && !t.kept) {
                    continue;
                }
                double v = (std::popcount(t.mask & eps) & 1) ? -1.0 : 1.0;
                x += beta * t.coef * t.sign * v;
            }
            e[eps] = x;
            mx = std::max(mx, x);
        }
        double s = 0;
        for (double x : e) {
            s += std::exp(x - mx);
        }
        return mx + std::log(s);
    };
    return std::exp(log_trace(true) - log_trace(false));
}

// ---------------------------------------------------------------------------
// Standard instances.

inline StabilizerMixedState parity_stabilizer_state(size_t n) {
    return StabilizerMixedState(n, {parity_operator(n)});
}

inline StabilizerMixedState plus_stabilizer_state(size_t n) {
    std::vector<PauliString> gens;
    for (size_t q = 0; q < n; q++) {
        gens.push_back(PauliString::from_sites(n, {{q, 'X'}}));
    }
    return StabilizerMixedState(n, std::move(gens));
}

/// One Z_iZ_j flip channel per link.
inline std::vector<PauliChannel> link_dephasing_channels(const Lattice &lat, double p) {
    std::vector<PauliChannel> chs;
    for (size_t e = 0; e < lat.num_links(); e++) {
        chs.push_back(PauliChannel::flip(p, link_zz(lat, e)));
    }
    return chs;
}

/// Random Cliffords applied to Z generators; keeps the first m.
template <typename Rng>
StabilizerMixedState random_stabilizer_state(size_t n, size_t m, Rng &rng);

/// Identity plus three random two-site Paulis on neighbouring qubits.
template <typename Rng>
PauliChannel random_two_local_channel(size_t n, Rng &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PauliChannel ch;
    std::vector<double> w(4);
    double tot = 0;
    for (double &x : w) {
        x = u(rng);
        tot += x;
    }
    ch.terms.emplace_back(w[0] / tot, PauliString(n));
    static const char letters[] = {'X', 'Y', 'Z'};
    for (size_t k = 1; k < 4; k++) {
        PauliString e(n);
        size_t a = rng() % n, b = (a + 1) % n;
        e.set_letter(a, letters[rng() % 3]);
        e.set_letter(b, letters[rng() % 3]);
        ch.terms.emplace_back(w[k] / tot, e);
    }
    return ch;
}

// ---------------------------------------------------------------------------
// Bond percolation.

struct PercolationConfig {
    int d = 2;
    int L = 8;
    double p = 0.5;
    size_t samples = 1000;
    uint64_t seed = 0;
};

class UnionFind {
   public:
    explicit UnionFind(size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), size_t{0});
    }
    size_t find(size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(size_t a, size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return;
        }
        if (rank_[a] < rank_[b]) {
            std::swap(a, b);
        }
        parent_[b] = a;
        if (rank_[a] == rank_[b]) {
            rank_[a]++;
        }
    }

   private:
    std::vector<size_t> parent_;
    std::vector<uint8_t> rank_;
};

/// Cluster label per site, canonicalized to the minimum site index in the cluster.
inline std::vector<size_t> cluster_labels(const Lattice &lat, const std::vector<uint8_t> &dephased) {
    size_t n = lat.num_sites();
    UnionFind uf(n);
    for (size_t e = 0; e < lat.num_links(); e++) {
        if (dephased[e]) {
            auto [a, b] = lat.link_ends(e);
            uf.unite(a, b);
        }
    }
    std::vector<size_t> minsite(n, std::numeric_limits<size_t>::max());
    for (size_t s = 0; s < n; s++) {
        size_t r = uf.find(s);
        minsite[r] = std::min(minsite[r], s);
    }
    std::vector<size_t> labels(n);
    for (size_t s = 0; s < n; s++) {
        labels[s] = minsite[uf.find(s)];
    }
    return labels;
}

inline void validate(const PercolationConfig &cfg) {
    if (cfg.d < 1 || cfg.d > 3) {
        throw ValidationError("PercolationConfig: d must be 1, 2 or 3");
    }
    if (!(cfg.p >= 0 && cfg.p <= 1)) {
        throw ValidationError("PercolationConfig: p must lie in [0, 1], got " + format_double(cfg.p));
    }
}

inline std::vector<uint8_t> sample_dephased_links(const Lattice &lat, double p, uint64_t seed, uint64_t index) {
    CounterRng rng(seed, index);
    std::vector<uint8_t> bonds(lat.num_links());
    for (auto &b : bonds) {
        b = rng.bernoulli(p) ? 1 : 0;
    }
    return bonds;
}

inline std::vector<size_t> percolation_sample(const PercolationConfig &cfg, uint64_t index) {
    validate(cfg);
    Lattice lat(cfg.d, cfg.L);
    return cluster_labels(lat, sample_dephased_links(lat, cfg.p, cfg.seed, index));
}

inline int percolation_r1(const std::vector<size_t> &labels, size_t x, size_t y) {
    if (x >= labels.size() || y >= labels.size()) {
        throw ValidationError("percolation_r1: site out of range");
    }
    return labels[x] == labels[y] ? 1 : 0;
}

/// Ensemble mean of R1 between each site and its partner shifted by `separation` along the first axis.
inline MeanStderr percolation_mean_r1(const PercolationConfig &cfg, int separation, unsigned threads) {
    validate(cfg);
    Lattice lat(cfg.d, cfg.L);
    size_t n = lat.num_sites();
    auto vals = parallel_map<double>(cfg.samples, threads, [&](size_t i) {
        auto labels = percolation_sample(cfg, i);
        size_t hits = 0;
        for (size_t s = 0; s < n; s++) {
            hits += percolation_r1(labels, s, lat.shifted(s, 0, separation));
        }
        return static_cast<double>(hits) / static_cast<double>(n);
    });
    return mean_and_stderr(vals);
}

/// 2^{-N} prod_R (1 + Pi_R) over clusters R.
inline StabilizerMixedState cluster_parity_state(const std::vector<size_t> &labels) {
    size_t n = labels.size();
    std::map<size_t, PauliString> regions;
    for (size_t s = 0; s < n; s++) {
        auto it = regions.try_emplace(labels[s], n).first;
        it->second.xs.set(s, true);
    }
    std::vector<PauliString> gens;
    for (auto &kv : regions) {
        gens.push_back(kv.second);
    }
    return StabilizerMixedState(n, std::move(gens));
}

// ---------------------------------------------------------------------------
// Circuits.

enum class GateKind { H, S, X, Z, CX, MZZ, CondX, CondZ };

struct Qubit {
    bool left = true;
    size_t index = 0;

    size_t flat(size_t n) const {
        return left ? n + index : index;
    }
    std::string str() const {
        return (left ? "L" : "R") + std::to_string(index);
    }
    bool operator==(const Qubit &o) const {
        return left == o.left && index == o.index;
    }
};

struct Gate {
    GateKind kind;
    Qubit a;
    Qubit b;
    size_t bit = 0;
};

struct CircuitIR {
    size_t n = 0;  // qubits per side
    std::vector<Gate> gates;
    size_t num_bits = 0;

    size_t count(GateKind k) const {
        return static_cast<size_t>(std::count_if(gates.begin(), gates.end(), [&](const Gate &g) { return g.kind == k; }));
    }

    void h(Qubit q) {
        gates.push_back({GateKind::H, q, q, 0});
    }
    void s(Qubit q) {
        gates.push_back({GateKind::S, q, q, 0});
    }
    void x(Qubit q) {
        gates.push_back({GateKind::X, q, q, 0});
    }
    void cx(Qubit c, Qubit t) {
        gates.push_back({GateKind::CX, c, t, 0});
    }
    size_t mzz(Qubit a, Qubit b) {
        gates.push_back({GateKind::MZZ, a, b, num_bits});
        return num_bits++;
    }
    void cond_x(Qubit q, size_t bit) {
        gates.push_back({GateKind::CondX, q, q, bit});
    }

    /// Text form, one gate per line, as read by parse_circuit.
    std::string str() const {
        std::ostringstream out;
        out << "# qubits per side: " << n << "\n";
        for (const Gate &g : gates) {
            switch (g.kind) {
                case GateKind::H:
                    out << "H " << g.a.str() << "\n";
                    break;
                case GateKind::S:
                    out << "S " << g.a.str() << "\n";
                    break;
                case GateKind::X:
                    out << "X " << g.a.str() << "\n";
                    break;
                case GateKind::Z:
                    out << "Z " << g.a.str() << "\n";
                    break;
                case GateKind::CX:
                    out << "CX " << g.a.str() << " " << g.b.str() << "\n";
                    break;
                case GateKind::MZZ:
                    out << "MZZ " << g.a.str() << " " << g.b.str() << " -> m" << g.bit << "\n";
                    break;
                case GateKind::CondX:
                    out << "X " << g.a.str() << " ? m" << g.bit << "\n";
                    break;
                case GateKind::CondZ:
                    out << "Z " << g.a.str() << " ? m" << g.bit << "\n";
                    break;
            }
        }
        return out.str();
    }
};

namespace detail {

inline Qubit parse_qubit(const std::string &tok, size_t n, size_t line) {
    auto fail = [&](const std::string &why) {
        return ValidationError("circuit line " + std::to_string(line) + ": " + why);
    };
    if (tok.size() < 2 || (tok[0] != 'L' && tok[0] != 'R')) {
        throw fail("bad qubit label '" + tok + "'");
    }
    size_t idx = 0;
    for (size_t i = 1; i < tok.size(); i++) {
        if (tok[i] < '0' || tok[i] > '9') {
            throw fail("bad qubit label '" + tok + "'");
        }
        idx = idx * 10 + static_cast<size_t>(tok[i] - '0');
    }
    if (idx >= n) {
        throw fail("qubit " + tok + " out of range for " + std::to_string(n) + " qubits per side");
    }
    return {tok[0] == 'L', idx};
}

}  // namespace detail

/// Parses the text format. Bit names are arbitrary identifiers; they are numbered in order of definition.
inline CircuitIR parse_circuit(const std::string &text, size_t n) {
    CircuitIR c;
    c.n = n;
    std::map<std::string, size_t> bits;
    std::istringstream in(text);
    std::string raw;
    size_t line = 0;
    while (std::getline(in, raw)) {
        line++;
        auto hash = raw.find('#');
        if (hash != std::string::npos) {
            raw = raw.substr(0, hash);
        }
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) {
            tok.push_back(t);
        }
        if (tok.empty()) {
            continue;
        }
        auto fail = [&](const std::string &why) {
            return ValidationError("circuit line " + std::to_string(line) + ": " + why);
        };
        const std::string &op = tok[0];
        if ((op == "H" || op == "S" || op == "X" || op == "Z") && tok.size() == 2) {
            Qubit q = detail::parse_qubit(tok[1], n, line);
            GateKind k = op == "H" ? GateKind::H : op == "S" ? GateKind::S : op == "X" ? GateKind::X : GateKind::Z;
            c.gates.push_back({k, q, q, 0});
        } else if ((op == "X" || op == "Z") && tok.size() == 4 && tok[2] == "?") {
            Qubit q = detail::parse_qubit(tok[1], n, line);
            auto it = bits.find(tok[3]);
            if (it == bits.end()) {
                throw fail("condition on undefined bit '" + tok[3] + "'");
            }
            c.gates.push_back({op == "X" ? GateKind::CondX : GateKind::CondZ, q, q, it->second});
        } else if (op == "CX" && tok.size() == 3) {
            Qubit a = detail::parse_qubit(tok[1], n, line);
            Qubit b = detail::parse_qubit(tok[2], n, line);
            if (a == b) {
                throw fail("CX control equals target");
            }
            c.gates.push_back({GateKind::CX, a, b, 0});
        } else if (op == "MZZ" && tok.size() == 5 && tok[3] == "->") {
            Qubit a = detail::parse_qubit(tok[1], n, line);
            Qubit b = detail::parse_qubit(tok[2], n, line);
            if (a == b) {
                throw fail("MZZ on a repeated qubit");
            }
            if (bits.count(tok[4])) {
                throw fail("bit '" + tok[4] + "' assigned twice");
            }
            bits[tok[4]] = c.num_bits;
            c.gates.push_back({GateKind::MZZ, a, b, c.num_bits});
            c.num_bits++;
        } else {
            throw fail("cannot parse '" + raw + "'");
        }
    }
    return c;
}

/// Gate conjugation P -> U P U^dag on a single Pauli string.
inline void conj_h(PauliString &p, size_t q) {
    bool x = p.xs.get(q), z = p.zs.get(q);
    if (x && z) {
        p.phase = (p.phase + 2) & 3;
    }
    p.xs.set(q, z);
    p.zs.set(q, x);
}

inline void conj_s(PauliString &p, size_t q) {
    bool x = p.xs.get(q), z = p.zs.get(q);
    if (x && z) {
        p.phase = (p.phase + 2) & 3;
    }
    p.zs.set(q, z ^ x);
}

inline void conj_cx(PauliString &p, size_t c, size_t t) {
    bool xc = p.xs.get(c), zc = p.zs.get(c), xt = p.xs.get(t), zt = p.zs.get(t);
    if (xc && zt && !(xt ^ zc)) {
        p.phase = (p.phase + 2) & 3;
    }
    p.xs.set(t, xt ^ xc);
    p.zs.set(c, zc ^ zt);
}

inline void conj_x(PauliString &p, size_t q) {
    if (p.zs.get(q)) {
        p.phase = (p.phase + 2) & 3;
    }
}

inline void conj_z(PauliString &p, size_t q) {
    if (p.xs.get(q)) {
        p.phase = (p.phase + 2) & 3;
    }
}

/// Stabilizer-generator simulator with random measurement outcomes.
class TableauSimulator {
   public:
    TableauSimulator(size_t num_qubits, uint64_t seed) : n_(num_qubits), rng_(seed, 0) {
        for (size_t q = 0; q < n_; q++) {
            PauliString z(n_);
            z.zs.set(q, true);
            gens_.push_back(z);
        }
    }

    void h(size_t q) {
        for (auto &g : gens_) conj_h(g, q);
    }
    void s(size_t q) {
        for (auto &g : gens_) conj_s(g, q);
    }
    void cx(size_t c, size_t t) {
        for (auto &g : gens_) conj_cx(g, c, t);
    }
    void x(size_t q) {
        for (auto &g : gens_) conj_x(g, q);
    }
    void z(size_t q) {
        for (auto &g : gens_) conj_z(g, q);
    }

    /// Measures a Hermitian Pauli; returns the outcome bit (1 means eigenvalue -1).
    bool measure(const PauliString &obs) {
        size_t k = gens_.size();
        for (size_t i = 0; i < gens_.size(); i++) {
            if (!gens_[i].commutes(obs)) {
                k = i;
                break;
            }
        }
        if (k == gens_.size()) {
            PauliSpan span(n_);
            for (size_t i = 0; i < gens_.size(); i++) {
                span.add(gens_[i], i);
            }
            auto d = span.decompose(obs);
            if (!d.in_span) {
                throw BackendError("TableauSimulator: deterministic measurement outside the group");
            }
            return d.residual_phase == 2;
        }
        for (size_t i = 0; i < gens_.size(); i++) {
            if (i != k && !gens_[i].commutes(obs)) {
                gens_[i] *= gens_[k];
            }
        }
        bool outcome = rng_() & 1;
        gens_[k] = outcome ? obs.negated() : obs;
        return outcome;
    }

    const std::vector<PauliString> &generators() const {
        return gens_;
    }
    StabilizerMixedState state() const {
        return StabilizerMixedState(n_, gens_);
    }

   private:
    size_t n_;
    CounterRng rng_;
    std::vector<PauliString> gens_;
};

template <typename Rng>
StabilizerMixedState random_stabilizer_state(size_t n, size_t m, Rng &rng) {
    if (m > n) {
        throw ValidationError("random_stabilizer_state: more generators than qubits");
    }
    TableauSimulator sim(n, rng());
    for (size_t layer = 0; layer < 6 * n; layer++) {
        size_t q = rng() % n;
        switch (rng() % 3) {
            case 0:
                sim.h(q);
                break;
            case 1:
                sim.s(q);
                break;
            default: {
                size_t t = rng() % n;
                if (t != q) sim.cx(q, t);
            }
        }
        if (rng() % 4 == 0) sim.x(rng() % n);
    }
    std::vector<PauliString> gens(sim.generators().begin(), sim.generators().begin() + static_cast<long>(m));
    return StabilizerMixedState(n, gens);
}

inline StabilizerMixedState simulate_circuit(const CircuitIR &c, uint64_t seed = 0) {
    size_t n = c.n;
    TableauSimulator sim(2 * n, seed);
    std::vector<int> bits(c.num_bits, -1);
    for (const Gate &g : c.gates) {
        size_t a = g.a.flat(n), b = g.b.flat(n);
        if (a >= 2 * n || b >= 2 * n) {
            throw ValidationError("simulate_circuit: qubit out of range");
        }
        switch (g.kind) {
            case GateKind::H:
                sim.h(a);
                break;
            case GateKind::S:
                sim.s(a);
                break;
            case GateKind::X:
                sim.x(a);
                break;
            case GateKind::Z:
                sim.z(a);
                break;
            case GateKind::CX:
                if (a == b) throw ValidationError("simulate_circuit: CX control equals target");
                sim.cx(a, b);
                break;
            case GateKind::MZZ: {
                if (a == b || g.bit >= bits.size() || bits[g.bit] != -1) {
                    throw ValidationError("simulate_circuit: malformed MZZ");
                }
                PauliString zz(2 * n);
                zz.zs.set(a, true);
                zz.zs.set(b, true);
                bits[g.bit] = sim.measure(zz) ? 1 : 0;
                break;
            }
            case GateKind::CondX:
            case GateKind::CondZ:
                if (g.bit >= bits.size() || bits[g.bit] == -1) {
                    throw ValidationError("simulate_circuit: condition on a bit not yet measured");
                }
                if (bits[g.bit] == 1) {
                    if (g.kind == GateKind::CondX) {
                        sim.x(a);
                    } else {
                        sim.z(a);
                    }
                }
                break;
        }
    }
    return sim.state();
}

enum class CpStrategy { Ladder, MeasureFeedback };

inline CpStrategy parse_cp_strategy(const std::string &s) {
    if (s == "ladder") return CpStrategy::Ladder;
    if (s == "measure-feedback" || s == "feedback") return CpStrategy::MeasureFeedback;
    throw ValidationError("unknown circuit strategy '" + s + "'");
}

/// Disjoint X-parity regions, or nullopt if the generators are not of that form.
inline std::optional<std::vector<std::vector<size_t>>> parity_regions(const StabilizerMixedState &s) {
    std::vector<std::vector<size_t>> regions;
    std::vector<bool> used(s.num_qubits(), false);
    for (const auto &g : s.generators()) {
        if (g.phase != 0 || g.zs.any()) {
            return std::nullopt;
        }
        std::vector<size_t> r = g.xs.ones();
        for (size_t q : r) {
            if (used[q]) {
                return std::nullopt;
            }
            used[q] = true;
        }
        regions.push_back(std::move(r));
    }
    return regions;
}

/// Clifford circuit taking |0...0> to the given pure stabilizer state on the doubled register.
inline CircuitIR synthesize_stabilizer_state(const StabilizerMixedState &target, size_t n_per_side) {
    size_t nq = target.num_qubits();
    if (target.logical_count() != 0 || nq != 2 * n_per_side) {
        throw ValidationError("synthesize_stabilizer_state: target must be pure on 2n qubits");
    }
    auto label = [&](size_t q) { return q < n_per_side ? Qubit{false, q} : Qubit{true, q - n_per_side}; };
    std::vector<PauliString> rows = target.generators();
    CircuitIR fwd;
    fwd.n = n_per_side;
    auto apply_h = [&](size_t q) {
        for (auto &r : rows) conj_h(r, q);
        fwd.h(label(q));
    };
    auto apply_s = [&](size_t q) {
        for (auto &r : rows) conj_s(r, q);
        fwd.s(label(q));
    };
    auto apply_cx = [&](size_t c, size_t t) {
        for (auto &r : rows) conj_cx(r, c, t);
        fwd.cx(label(c), label(t));
    };
    std::vector<bool> done(nq, false);
    std::vector<size_t> done_row(nq, 0);
    for (size_t i = 0; i < rows.size(); i++) {
        for (size_t q = 0; q < nq; q++) {
            if (done[q] && rows[i].zs.get(q)) {
                rows[i] *= rows[done_row[q]];
            }
        }
        for (size_t q = 0; q < nq; q++) {
            if (!done[q] && rows[i].xs.get(q) && rows[i].zs.get(q)) {
                apply_s(q);
            }
        }
        std::vector<size_t> xq, zq;
        for (size_t q = 0; q < nq; q++) {
            if (done[q]) continue;
            if (rows[i].xs.get(q)) xq.push_back(q);
            else if (rows[i].zs.get(q)) zq.push_back(q);
        }
        size_t t;
        if (!xq.empty()) {
            t = xq[0];
            for (size_t q : zq) {
                apply_h(q);
                xq.push_back(q);
            }
            for (size_t q : xq) {
                if (q != t) apply_cx(t, q);
            }
            apply_h(t);
        } else {
            if (zq.empty()) {
                throw BackendError("synthesize_stabilizer_state: dependent generators");
            }
            t = zq[0];
            for (size_t q : zq) {
                if (q != t) apply_cx(q, t);
            }
        }
        done[t] = true;
        done_row[t] = i;
    }
    CircuitIR out;
    out.n = n_per_side;
    for (size_t q = 0; q < nq; q++) {
        if (rows[done_row[q]].phase == 2) {
            out.x(label(q));
        }
    }
    for (auto it = fwd.gates.rbegin(); it != fwd.gates.rend(); ++it) {
        if (it->kind == GateKind::S) {
            out.s(it->a);
            out.s(it->a);
            out.s(it->a);
        } else {
            out.gates.push_back(*it);
        }
    }
    return out;
}

/// Circuit preparing the canonical purification of `state` from |0...0> on 2N qubits.
inline CircuitIR emit_cp_circuit(const StabilizerMixedState &state, CpStrategy strategy) {
    size_t n = state.num_qubits();
    auto regions = parity_regions(state);
    if (!regions) {
        if (strategy == CpStrategy::Ladder && n <= 512) {
            return synthesize_stabilizer_state(canonical_purification_generators(state), n);
        }
        throw ValidationError("emit_cp_circuit: unsupported family (measure-feedback needs disjoint X-parity regions)");
    }
    CircuitIR c;
    c.n = n;
    for (const auto &r : *regions) {
        size_t root = r.front();
        if (strategy == CpStrategy::Ladder) {
            c.h({true, root});
            for (size_t i = 1; i < r.size(); i++) {
                c.cx({true, r[i - 1]}, {true, r[i]});
            }
        } else {
            for (size_t q : r) {
                c.h({true, q});
            }
            std::vector<std::pair<size_t, size_t>> fix;
            for (size_t i = 1; i < r.size(); i++) {
                fix.emplace_back(r[i], c.mzz({true, root}, {true, r[i]}));
            }
            for (auto [q, bit] : fix) {
                c.cond_x({true, q}, bit);
            }
        }
    }
    for (size_t q = 0; q < n; q++) {
        c.h({false, q});
    }
    for (size_t q = 0; q < n; q++) {
        c.cx({false, q}, {true, q});
    }
    return c;
}

}  // namespace swssb
