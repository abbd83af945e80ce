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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "swssb/common.hpp"
#include "swssb/lattice.hpp"
#include "swssb/parallel.hpp"

namespace swssb {

using ErrorChain = std::vector<uint8_t>;  // one entry per link
using Syndrome = std::vector<uint8_t>;    // one entry per site

inline void require_ising_lattice(const Lattice &lat) {
    if (lat.d != 1 && lat.d != 2) {
        throw ValidationError("ising: dimension must be 1 or 2");
    }
}

inline void require_probability(double p, const char *who) {
    if (!(p >= 0 && p <= 1)) {
        throw ValidationError(std::string(who) + ": p must lie in [0, 1], got " + format_double(p));
    }
}

inline Syndrome boundary(const Lattice &lat, const ErrorChain &chain) {
    if (chain.size() != lat.num_links()) {
        throw ValidationError("boundary: chain has " + std::to_string(chain.size()) + " links, lattice has " +
                              std::to_string(lat.num_links()));
    }
    Syndrome v(lat.num_sites(), 0);
    for (size_t e = 0; e < chain.size(); e++) {
        if (chain[e]) {
            auto [a, b] = lat.link_ends(e);
            v[a] ^= 1;
            v[b] ^= 1;
        }
    }
    return v;
}

inline uint64_t syndrome_mask(const Syndrome &v) {
    if (v.size() > 64) {
        throw ValidationError("syndrome_mask: more than 64 sites");
    }
    uint64_t m = 0;
    for (size_t i = 0; i < v.size(); i++) {
        if (v[i]) {
            m |= uint64_t{1} << i;
        }
    }
    return m;
}

inline Syndrome syndrome_from_sites(const Lattice &lat, const std::vector<size_t> &sites) {
    Syndrome v(lat.num_sites(), 0);
    for (size_t s : sites) {
        if (s >= v.size()) {
            throw ValidationError("syndrome_from_sites: site out of range");
        }
        v[s] ^= 1;
    }
    return v;
}

/// Pairs syndrome sites in increasing order and joins each pair by a +x-then-+y path.
inline ErrorChain representative_chain(const Lattice &lat, const Syndrome &v) {
    require_ising_lattice(lat);
    std::vector<size_t> sites;
    for (size_t s = 0; s < v.size(); s++) {
        if (v[s]) {
            sites.push_back(s);
        }
    }
    if (sites.size() % 2 != 0) {
        throw ValidationError("representative_chain: syndrome has odd weight");
    }
    ErrorChain chain(lat.num_links(), 0);
    for (size_t k = 0; k < sites.size(); k += 2) {
        auto a = lat.coords(sites[k]);
        auto b = lat.coords(sites[k + 1]);
        size_t cur = sites[k];
        for (int dir = 0; dir < lat.d; dir++) {
            int steps = ((b[dir] - a[dir]) % lat.L + lat.L) % lat.L;
            for (int t = 0; t < steps; t++) {
                chain[lat.link(cur, dir)] ^= 1;
                cur = lat.shifted(cur, dir, 1);
            }
        }
    }
    return chain;
}

/// P_v for every syndrome v, by summing p_l over all 2^{dN} chains.
class SyndromeTable {
   public:
    SyndromeTable(const Lattice &lat, double p) : n_(lat.num_sites()) {
        require_ising_lattice(lat);
        require_probability(p, "p_v_enumerate");
        size_t m = lat.num_links();
        if (m > 24) {
            throw ValidationError("p_v_enumerate: " + std::to_string(m) + " links exceeds the enumeration limit of 24");
        }
        std::vector<uint64_t> link_mask(m);
        for (size_t e = 0; e < m; e++) {
            auto [a, b] = lat.link_ends(e);
            link_mask[e] = (uint64_t{1} << a) ^ (uint64_t{1} << b);
        }
        std::vector<double> by_weight(m + 1);
        for (size_t w = 0; w <= m; w++) {
            by_weight[w] = std::pow(p, static_cast<double>(w)) * std::pow(1 - p, static_cast<double>(m - w));
        }
        dense_ = n_ <= 22;
        if (dense_) {
            table_.assign(size_t{1} << n_, 0.0);
        }
        uint64_t v = 0;
        uint64_t chain = 0;
        for (uint64_t i = 0; i < (uint64_t{1} << m); i++) {
            if (i > 0) {
                int bit = std::countr_zero(i);
                chain ^= uint64_t{1} << bit;
                v ^= link_mask[bit];
            }
            double w = by_weight[std::popcount(chain)];
            if (dense_) {
                table_[v] += w;
            } else {
                sparse_[v] += w;
            }
        }
    }

    double operator()(uint64_t v) const {
        if (dense_) {
            return v < table_.size() ? table_[v] : 0.0;
        }
        auto it = sparse_.find(v);
        return it == sparse_.end() ? 0.0 : it->second;
    }

    template <typename F>
    void for_each(F &&f) const {
        if (dense_) {
            for (uint64_t v = 0; v < table_.size(); v++) {
                if (table_[v] != 0) {
                    f(v, table_[v]);
                }
            }
        } else {
            for (const auto &kv : sparse_) {
                f(kv.first, kv.second);
            }
        }
    }

    double total() const {
        double t = 0;
        for_each([&](uint64_t, double pv) { t += pv; });
        return t;
    }

   private:
    size_t n_;
    bool dense_ = true;
    std::vector<double> table_;
    std::unordered_map<uint64_t, double> sparse_;
};

inline double p_v_enumerate(const Lattice &lat, double p, const Syndrome &v) {
    return SyndromeTable(lat, p)(syndrome_mask(v));
}

// ---------------------------------------------------------------------------
// Exact spin sums of prod_e (a_e + b_e s_i s_j) prod_{k in ins} s_k.

struct BondWeights {
    std::vector<double> a;
    std::vector<double> b;
};

/// Weights (1-p) + p ss off the chain and p + (1-p) ss on it, i.e. (1-p)(1 + t ss) with t = p/(1-p) or its inverse.
inline BondWeights chain_weights(const Lattice &lat, double p, const ErrorChain &chain) {
    if (chain.size() != lat.num_links()) {
        throw ValidationError("chain_weights: chain length mismatch");
    }
    BondWeights w;
    w.a.resize(chain.size());
    w.b.resize(chain.size());
    for (size_t e = 0; e < chain.size(); e++) {
        w.a[e] = chain[e] ? p : 1 - p;
        w.b[e] = chain[e] ? 1 - p : p;
    }
    return w;
}

inline BondWeights uniform_weights(const Lattice &lat, double a, double b) {
    return {std::vector<double>(lat.num_links(), a), std::vector<double>(lat.num_links(), b)};
}

inline double spin_sum_brute(const Lattice &lat, const BondWeights &w, const std::vector<size_t> &ins) {
    size_t n = lat.num_sites();
    if (n > 24) {
        throw ValidationError("spin_sum_brute: too many sites");
    }
    uint64_t ins_mask = 0;
    for (size_t k : ins) {
        ins_mask ^= uint64_t{1} << k;
    }
    std::vector<std::pair<size_t, size_t>> ends(lat.num_links());
    for (size_t e = 0; e < ends.size(); e++) {
        ends[e] = lat.link_ends(e);
    }
    double total = 0;
    for (uint64_t s = 0; s < (uint64_t{1} << n); s++) {
        double prod = (std::popcount(s & ins_mask) & 1) ? -1.0 : 1.0;
        for (size_t e = 0; e < ends.size(); e++) {
            bool anti = ((s >> ends[e].first) ^ (s >> ends[e].second)) & 1;
            prod *= anti ? w.a[e] - w.b[e] : w.a[e] + w.b[e];
        }
        total += prod;
    }
    return total;
}

/// Sign and log-magnitude of a ring spin sum, dropping the 2^N prefactor.
struct LogValue {
    double sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();
};

inline LogValue log_add(LogValue x, LogValue y) {
    if (x.sign == 0) return y;
    if (y.sign == 0) return x;
    double m = std::max(x.log_abs, y.log_abs);
    double v = x.sign * std::exp(x.log_abs - m) + y.sign * std::exp(y.log_abs - m);
    if (v == 0) return {};
    return {v > 0 ? 1.0 : -1.0, m + std::log(std::abs(v))};
}

inline LogValue log_product(const std::vector<uint8_t> &pick_b, const BondWeights &w) {
    LogValue r{1.0, 0.0};
    for (size_t e = 0; e < pick_b.size(); e++) {
        double f = pick_b[e] ? w.b[e] : w.a[e];
        if (f == 0) return {};
        if (f < 0) r.sign = -r.sign;
        r.log_abs += std::log(std::abs(f));
    }
    return r;
}

/// Ring: the two link sets with boundary equal to the insertions are complementary.
inline LogValue spin_sum_ring_log(const Lattice &lat, const BondWeights &w, const std::vector<size_t> &ins) {
    size_t n = lat.num_sites();
    std::vector<uint8_t> at(n, 0);
    for (size_t k : ins) {
        at[k] ^= 1;
    }
    std::vector<uint8_t> in_c(n, 0), out_c(n, 0);
    uint8_t parity = 0;
    for (size_t e = 0; e < n; e++) {
        parity ^= at[e];
        in_c[e] = parity;
        out_c[e] = parity ^ 1;
    }
    if (parity) {
        return {};
    }
    return log_add(log_product(in_c, w), log_product(out_c, w));
}

/// Row-to-row transfer matrix on an L x L torus; cost O(L^2 4^L).
inline double spin_sum_transfer_2d(const Lattice &lat, const BondWeights &w, const std::vector<size_t> &ins) {
    int L = lat.L;
    if (L > 12) {
        throw ValidationError("spin_sum_transfer_2d: width " + std::to_string(L) + " exceeds 12");
    }
    size_t states = size_t{1} << L;
    std::vector<uint8_t> at(lat.num_sites(), 0);
    for (size_t k : ins) {
        at[k] ^= 1;
    }
    std::vector<double> diag(states);
    double total = 0;
    std::vector<double> vec(states), tmp(states);
    for (size_t s0 = 0; s0 < states; s0++) {
        std::fill(vec.begin(), vec.end(), 0.0);
        vec[s0] = 1;
        for (int y = 0; y < L; y++) {
            for (size_t s = 0; s < states; s++) {
                if (vec[s] == 0) continue;
                double f = 1;
                for (int x = 0; x < L; x++) {
                    size_t site = lat.site({x, y, 0});
                    bool sx = (s >> x) & 1;
                    bool sn = (s >> ((x + 1) % L)) & 1;
                    size_t e = lat.link(site, 0);
                    f *= (sx != sn) ? w.a[e] - w.b[e] : w.a[e] + w.b[e];
                    if (at[site] && sx) f = -f;
                }
                vec[s] *= f;
            }
            for (int x = 0; x < L; x++) {
                size_t e = lat.link(lat.site({x, y, 0}), 1);
                double same = w.a[e] + w.b[e], diff = w.a[e] - w.b[e];
                size_t bit = size_t{1} << x;
                for (size_t s = 0; s < states; s++) {
                    if (s & bit) continue;
                    double v0 = vec[s], v1 = vec[s | bit];
                    tmp[s] = same * v0 + diff * v1;
                    tmp[s | bit] = diff * v0 + same * v1;
                }
                std::swap(vec, tmp);
            }
        }
        total += vec[s0];
    }
    return total;
}

inline double spin_sum(const Lattice &lat, const BondWeights &w, const std::vector<size_t> &ins) {
    require_ising_lattice(lat);
    if (lat.d == 1) {
        LogValue v = spin_sum_ring_log(lat, w, ins);
        return v.sign * std::exp(v.log_abs + static_cast<double>(lat.num_sites()) * std::log(2.0));
    }
    if (lat.num_sites() <= 16) {
        return spin_sum_brute(lat, w, ins);
    }
    return spin_sum_transfer_2d(lat, w, ins);
}

/// <s_x s_y> under the weights.
inline double spin_correlation(const Lattice &lat, const BondWeights &w, size_t x, size_t y) {
    require_ising_lattice(lat);
    if (x == y) {
        return 1.0;
    }
    if (lat.d == 1) {
        LogValue num = spin_sum_ring_log(lat, w, {x, y});
        LogValue den = spin_sum_ring_log(lat, w, {});
        if (den.sign == 0) {
            throw BackendError("spin_correlation: vanishing partition function");
        }
        return num.sign * den.sign * std::exp(num.log_abs - den.log_abs);
    }
    double den = spin_sum(lat, w, {});
    if (den == 0) {
        throw BackendError("spin_correlation: vanishing partition function");
    }
    return spin_sum(lat, w, {x, y}) / den;
}

/// P_v from the loop representation with representative chain l_v.
inline double p_v_loop_rep(const Lattice &lat, double p, const ErrorChain &chain) {
    require_ising_lattice(lat);
    require_probability(p, "p_v_loop_rep");
    BondWeights w = chain_weights(lat, p, chain);
    if (lat.d == 1) {
        LogValue v = spin_sum_ring_log(lat, w, {});
        return v.sign * std::exp(v.log_abs);
    }
    return spin_sum(lat, w, {}) / std::pow(2.0, static_cast<double>(lat.num_sites()));
}

/// <s_x s_y>_l = P_{v + xy} / P_v for v = boundary(l).
inline double corr_ratio(const Lattice &lat, double p, const ErrorChain &chain, size_t x, size_t y) {
    require_probability(p, "corr_ratio");
    if (x >= lat.num_sites() || y >= lat.num_sites()) {
        throw ValidationError("corr_ratio: site out of range");
    }
    return spin_correlation(lat, chain_weights(lat, p, chain), x, y);
}

struct Estimate {
    double value = 0;
    double stderr_ = 0;
    size_t n_samples = 0;
};

inline double r1_quenched_exact(const Lattice &lat, double p, size_t x, size_t y) {
    SyndromeTable table(lat, p);
    uint64_t o = (uint64_t{1} << x) ^ (uint64_t{1} << y);
    std::vector<double> terms;
    table.for_each([&](uint64_t v, double pv) { terms.push_back(std::sqrt(pv * table(v ^ o))); });
    return pairwise_sum(terms);
}

/// Mean of sqrt(<s_x s_y>_l) over sampled chains; deterministic in (seed, sample index).
inline Estimate r1_quenched_mc(const Lattice &lat, double p, size_t x, size_t y, size_t samples, uint64_t seed,
                               unsigned threads = 1) {
    require_ising_lattice(lat);
    require_probability(p, "r1_quenched");
    if (samples == 0) {
        throw ValidationError("r1_quenched: monte carlo needs at least one sample");
    }
    auto vals = parallel_map<double>(samples, threads, [&](size_t i) {
        CounterRng rng(seed, i);
        ErrorChain chain(lat.num_links());
        for (auto &c : chain) {
            c = rng.bernoulli(p) ? 1 : 0;
        }
        double c = corr_ratio(lat, p, chain, x, y);
        return std::sqrt(std::max(c, 0.0));
    });
    MeanStderr ms = mean_and_stderr(vals);
    return {ms.mean, ms.stderr_, samples};
}

inline double r1_closed_form_1d(double p, int r) {
    require_probability(p, "r1_closed_form_1d");
    return std::pow(2 * std::sqrt(p * (1 - p)), r);
}

/// tanh(beta) of the clean Ising model with tanh(beta/2) = p/(1-p).
inline double annealed_coupling(double p) {
    return 2 * p * (1 - p) / ((1 - p) * (1 - p) + p * p);
}

inline double r2_annealed(const Lattice &lat, double p, size_t x, size_t y) {
    require_ising_lattice(lat);
    require_probability(p, "r2_annealed");
    return spin_correlation(lat, uniform_weights(lat, 1.0, annealed_coupling(p)), x, y);
}

// ---------------------------------------------------------------------------
// Random-bond Ising model on the dual lattice.

/// Dual sites (plaquettes) on either side of each link.
inline std::pair<size_t, size_t> dual_ends(const Lattice &lat, size_t e) {
    size_t s = e / 2;
    int dir = static_cast<int>(e % 2);
    auto c = lat.coords(s);
    if (dir == 0) {
        return {lat.site({c[0], c[1] - 1, 0}), lat.site({c[0], c[1], 0})};
    }
    return {lat.site({c[0] - 1, c[1], 0}), lat.site({c[0], c[1], 0})};
}

/// sum_mu exp(J sum_e eta_e mu_a mu_b).
inline double rbim_partition(const Lattice &lat, double J, const std::vector<int> &eta) {
    size_t n = lat.num_sites();
    if (n > 20) {
        throw ValidationError("rbim_partition: " + std::to_string(n) + " dual spins exceeds 20");
    }
    std::vector<std::pair<size_t, size_t>> ends(lat.num_links());
    for (size_t e = 0; e < ends.size(); e++) {
        ends[e] = dual_ends(lat, e);
    }
    double total = 0;
    for (uint64_t mu = 0; mu < (uint64_t{1} << n); mu++) {
        double energy = 0;
        for (size_t e = 0; e < ends.size(); e++) {
            bool anti = ((mu >> ends[e].first) ^ (mu >> ends[e].second)) & 1;
            energy += anti ? -eta[e] : eta[e];
        }
        total += std::exp(J * energy);
    }
    return total;
}

/// Non-contractible loops: +x links of row 0 and +y links of column 0.
inline ErrorChain homology_loop(const Lattice &lat, int dir) {
    ErrorChain c(lat.num_links(), 0);
    for (int t = 0; t < lat.L; t++) {
        std::array<int, 3> xy{0, 0, 0};
        xy[dir] = t;
        c[lat.link(lat.site(xy), dir)] = 1;
    }
    return c;
}

inline double p_v_rbim_2d(const Lattice &lat, double p, const ErrorChain &chain) {
    if (lat.d != 2) {
        throw ValidationError("p_v_rbim_2d: lattice must be two-dimensional");
    }
    if (!(p > 0 && p < 1)) {
        throw ValidationError("p_v_rbim_2d: p must lie strictly inside (0, 1)");
    }
    if (chain.size() != lat.num_links()) {
        throw ValidationError("p_v_rbim_2d: chain length mismatch");
    }
    double J = -0.5 * std::log(p / (1 - p));
    ErrorChain hx = homology_loop(lat, 0), hy = homology_loop(lat, 1);
    double total = 0;
    for (int sector = 0; sector < 4; sector++) {
        std::vector<int> eta(lat.num_links());
        for (size_t e = 0; e < eta.size(); e++) {
            int bit = chain[e] ^ ((sector & 1) ? hx[e] : 0) ^ ((sector & 2) ? hy[e] : 0);
            eta[e] = bit ? -1 : 1;
        }
        total += rbim_partition(lat, J, eta);
    }
    double n = static_cast<double>(lat.num_sites());
    return 0.5 * std::pow(p * (1 - p), n) * total;
}

}  // namespace swssb
