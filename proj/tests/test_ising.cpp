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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "swssb/exact.hpp"
#include "swssb/ising.hpp"

using namespace swssb;

namespace {

PauliString zz(size_t n, size_t x, size_t y) {
    return PauliString::from_sites(n, {{x, 'Z'}, {y, 'Z'}});
}

ErrorChain random_chain(const Lattice &lat, double p, std::mt19937_64 &rng) {
    std::bernoulli_distribution b(p);
    ErrorChain c(lat.num_links());
    for (auto &x : c) x = b(rng) ? 1 : 0;
    return c;
}

}  // namespace

TEST(Boundary, Basics) {
    Lattice ring(1, 5);
    ErrorChain empty(5, 0);
    for (uint8_t v : boundary(ring, empty)) EXPECT_EQ(v, 0);
    ErrorChain one(5, 0);
    one[2] = 1;
    Syndrome v = boundary(ring, one);
    EXPECT_EQ(v, (Syndrome{0, 0, 1, 1, 0}));
    ErrorChain loop(5, 1);
    for (uint8_t s : boundary(ring, loop)) EXPECT_EQ(s, 0);
    Lattice torus(2, 3);
    std::mt19937_64 rng(1);
    ErrorChain a = random_chain(torus, 0.5, rng), b = random_chain(torus, 0.5, rng), ab(a.size());
    for (size_t e = 0; e < a.size(); e++) ab[e] = a[e] ^ b[e];
    Syndrome va = boundary(torus, a), vb = boundary(torus, b), vab = boundary(torus, ab);
    for (size_t s = 0; s < va.size(); s++) EXPECT_EQ(vab[s], va[s] ^ vb[s]);
    for (uint8_t s : boundary(torus, homology_loop(torus, 0))) EXPECT_EQ(s, 0);
    for (uint8_t s : boundary(torus, homology_loop(torus, 1))) EXPECT_EQ(s, 0);
}

TEST(Boundary, RepresentativeChain) {
    Lattice torus(2, 3);
    Syndrome v = syndrome_from_sites(torus, {1, 5, 6, 8});
    EXPECT_EQ(boundary(torus, representative_chain(torus, v)), v);
    EXPECT_THROW(representative_chain(torus, syndrome_from_sites(torus, {1})), ValidationError);
}

TEST(Enumeration, NormalizationAndSmallCases) {
    Lattice ring(1, 3);
    SyndromeTable t0(ring, 0.0);
    EXPECT_EQ(t0(0), 1.0);
    for (double p : {0.1, 0.25, 0.5}) {
        EXPECT_NEAR(SyndromeTable(ring, p).total(), 1, 1e-12);
        EXPECT_NEAR(SyndromeTable(Lattice(2, 3), p).total(), 1, 1e-12);
    }
    // Three-link ring: v = empty from the empty chain and the full loop.
    double p = 0.25;
    EXPECT_NEAR(p_v_enumerate(ring, p, Syndrome(3, 0)), std::pow(1 - p, 3) + std::pow(p, 3), 1e-15);
    EXPECT_THROW(SyndromeTable(Lattice(2, 4), 0.1), ValidationError);
    EXPECT_THROW(SyndromeTable(ring, -0.1), ValidationError);
}

TEST(LoopRepresentation, MatchesEnumeration) {
    std::mt19937_64 rng(3);
    for (auto [d, L] : std::vector<std::pair<int, int>>{{1, 4}, {1, 7}, {2, 2}, {2, 3}}) {
        Lattice lat(d, L);
        for (double p : {0.1, 0.25, 0.4}) {
            SyndromeTable table(lat, p);
            for (int rep = 0; rep < 5; rep++) {
                ErrorChain c1 = random_chain(lat, 0.5, rng);
                Syndrome v = boundary(lat, c1);
                ErrorChain c2 = representative_chain(lat, v);
                double expect = table(syndrome_mask(v));
                EXPECT_NEAR(p_v_loop_rep(lat, p, c1), expect, 1e-12) << d << " " << L;
                EXPECT_NEAR(p_v_loop_rep(lat, p, c2), expect, 1e-12);
            }
        }
    }
}

TEST(CorrRatio, ClosedFormRing) {
    Lattice ring(1, 6);
    double t = 1.0 / 3.0;
    double expect = (t * t + std::pow(t, 4)) / (1 + std::pow(t, 6));
    EXPECT_NEAR(corr_ratio(ring, 0.25, ErrorChain(6, 0), 0, 2), expect, 1e-14);
    EXPECT_NEAR(corr_ratio(ring, 0.5, ErrorChain(6, 1), 1, 4), 1.0, 1e-14);
    EXPECT_NEAR(corr_ratio(Lattice(2, 3), 0.5, ErrorChain(18, 1), 0, 4), 1.0, 1e-12);
}

TEST(CorrRatio, MatchesEnumerationRatio) {
    std::mt19937_64 rng(5);
    Lattice lat(2, 3);
    double p = 0.2;
    SyndromeTable table(lat, p);
    for (int rep = 0; rep < 10; rep++) {
        ErrorChain c = random_chain(lat, p, rng);
        uint64_t v = syndrome_mask(boundary(lat, c));
        size_t x = rng() % 9, y = rng() % 9;
        if (x == y) continue;
        double expect = table(v ^ (uint64_t{1} << x) ^ (uint64_t{1} << y)) / table(v);
        EXPECT_NEAR(corr_ratio(lat, p, c, x, y), expect, 1e-12);
    }
}

TEST(SpinSums, TransferMatchesBrute) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int L : {2, 3, 4}) {
        Lattice lat(2, L);
        BondWeights w{std::vector<double>(lat.num_links()), std::vector<double>(lat.num_links())};
        for (size_t e = 0; e < lat.num_links(); e++) {
            w.a[e] = u(rng);
            w.b[e] = u(rng);
        }
        std::vector<size_t> ins{0, static_cast<size_t>(L * L - 1)};
        double brute = spin_sum_brute(lat, w, ins);
        EXPECT_NEAR(spin_sum_transfer_2d(lat, w, ins), brute, 1e-10 * std::max(1.0, std::abs(brute)));
        EXPECT_NEAR(spin_sum_transfer_2d(lat, w, {}), spin_sum_brute(lat, w, {}), 1e-9);
    }
}

TEST(Quenched, ExactMatchesDense) {
    for (auto [d, L] : std::vector<std::pair<int, int>>{{1, 4}, {1, 6}, {1, 8}, {2, 2}}) {
        Lattice lat(d, L);
        size_t n = lat.num_sites();
        for (double p : {0.1, 0.25}) {
            DensityMatrix rho = rho_decohered(lat, p);
            for (size_t y = 1; y < n; y++) {
                EXPECT_NEAR(r1_quenched_exact(lat, p, 0, y), renyi1(rho, zz(n, 0, y)), 1e-10) << d << L << y;
            }
        }
    }
    EXPECT_EQ(r1_quenched_exact(Lattice(1, 6), 0.0, 0, 3), 0.0);
}

TEST(Quenched, HalfIsPerfectlyOrdered) {
    for (int n : {4, 9, 16}) {
        for (int r = 1; r <= n / 2; r++) {
            EXPECT_NEAR(r1_quenched_exact(Lattice(1, n), 0.5, 0, static_cast<size_t>(r)), 1.0, 1e-12);
        }
    }
}

TEST(Quenched, MonteCarloAgreesWithEnumeration) {
    Lattice lat(2, 3);
    for (double p : {0.05, 0.109, 0.2}) {
        double exact = r1_quenched_exact(lat, p, 0, 4);
        Estimate e = r1_quenched_mc(lat, p, 0, 4, 10000, 12345, 2);
        EXPECT_EQ(e.n_samples, 10000u);
        EXPECT_LT(std::abs(e.value - exact), 3 * e.stderr_ + 1e-12) << p;
    }
    Estimate a = r1_quenched_mc(lat, 0.2, 0, 4, 300, 9, 1);
    Estimate b = r1_quenched_mc(lat, 0.2, 0, 4, 300, 9, 3);
    EXPECT_EQ(a.value, b.value);
    EXPECT_THROW(r1_quenched_mc(lat, 0.2, 0, 4, 0, 9, 1), ValidationError);
}

TEST(Quenched, SeedAveragedMonteCarlo) {
    Lattice lat(2, 3);
    for (double p : {0.05, 0.109, 0.2}) {
        double exact = r1_quenched_exact(lat, p, 0, 4);
        std::vector<double> means;
        double var = 0;
        for (uint64_t seed = 0; seed < 20; seed++) {
            Estimate e = r1_quenched_mc(lat, p, 0, 4, 1000, seed + 100);
            means.push_back(e.value);
            var += e.stderr_ * e.stderr_;
        }
        double grand = pairwise_sum(means) / 20.0;
        EXPECT_LT(std::abs(grand - exact), 3 * std::sqrt(var) / 20.0 + 1e-12);
    }
}

TEST(ClosedForm, Values) {
    EXPECT_DOUBLE_EQ(r1_closed_form_1d(0.5, 10), 1.0);
    EXPECT_EQ(r1_closed_form_1d(0.0, 1), 0.0);
    EXPECT_NEAR(r1_closed_form_1d(0.25, 2), 0.75, 1e-15);
}

TEST(Annealed, MatchesDenseRenyi2) {
    for (auto [d, L] : std::vector<std::pair<int, int>>{{1, 5}, {1, 6}, {1, 8}, {2, 3}}) {
        Lattice lat(d, L);
        size_t n = lat.num_sites();
        double p = d == 1 ? 0.25 : 0.2;
        DensityMatrix rho = rho_decohered(lat, p);
        for (size_t y = 1; y < n; y++) {
            EXPECT_NEAR(r2_annealed(lat, p, 0, y), renyi2(rho, zz(n, 0, y)), 1e-10);
        }
    }
    EXPECT_NEAR(r2_annealed(Lattice(1, 6), 0.25, 0, 3), 0.41274, 1e-5);
    EXPECT_NEAR(r2_annealed(Lattice(1, 7), 0.5, 0, 3), 1.0, 1e-12);
    EXPECT_NEAR(annealed_coupling(0.25), 0.6, 1e-15);
}

TEST(Rbim, MatchesEnumeration) {
    std::mt19937_64 rng(11);
    for (int L : {2, 3}) {
        Lattice lat(2, L);
        for (double p : {0.1, 0.25}) {
            SyndromeTable table(lat, p);
            for (int rep = 0; rep < 4; rep++) {
                ErrorChain c = rep == 0 ? ErrorChain(lat.num_links(), 0) : random_chain(lat, 0.3, rng);
                EXPECT_NEAR(p_v_rbim_2d(lat, p, c), table(syndrome_mask(boundary(lat, c))), 1e-10);
            }
        }
        Syndrome adj = syndrome_from_sites(lat, {0, 1});
        EXPECT_NEAR(p_v_rbim_2d(lat, 0.25, representative_chain(lat, adj)), SyndromeTable(lat, 0.25)(syndrome_mask(adj)), 1e-10);
    }
}

TEST(Rbim, GaugeInvariance) {
    Lattice lat(2, 3);
    std::mt19937_64 rng(13);
    double J = 0.7;
    std::vector<int> eta(lat.num_links());
    for (auto &x : eta) x = (rng() & 1) ? 1 : -1;
    std::vector<int> tau(lat.num_sites());
    for (auto &x : tau) x = (rng() & 1) ? 1 : -1;
    std::vector<int> gauged(eta.size());
    for (size_t e = 0; e < eta.size(); e++) {
        auto [a, b] = dual_ends(lat, e);
        gauged[e] = tau[a] * eta[e] * tau[b];
    }
    EXPECT_NEAR(rbim_partition(lat, J, gauged), rbim_partition(lat, J, eta), 1e-9 * rbim_partition(lat, J, eta));
    EXPECT_THROW(p_v_rbim_2d(Lattice(1, 4), 0.1, ErrorChain(4, 0)), ValidationError);
}
