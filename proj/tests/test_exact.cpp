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
#include <sstream>

#include "swssb/exact.hpp"

using namespace swssb;

namespace {

PauliString zz(size_t n, size_t x, size_t y) {
    return PauliString::from_sites(n, {{x, 'Z'}, {y, 'Z'}});
}

DensityMatrix diag2(double a) {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = 1 - a;
    return DensityMatrix::from_matrix(m);
}

}  // namespace

TEST(DensityMatrix, Validation) {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2) * 0.5;
    EXPECT_NO_THROW(DensityMatrix::from_matrix(m));
    ComplexMatrix bad = m;
    bad(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix::from_matrix(bad), ValidationError);
    EXPECT_THROW(DensityMatrix::from_matrix(m * 2.0), ValidationError);
    ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    EXPECT_THROW(DensityMatrix::from_matrix(neg), ValidationError);
    EXPECT_THROW(maximally_mixed(13), ValidationError);
    EXPECT_THROW(DensityMatrix::from_matrix(ComplexMatrix::Identity(3, 3) / 3.0), ValidationError);
}

TEST(Diagnostics, SingleQubitClosedForm) {
    for (double a : {0.1, 0.3, 0.45}) {
        DensityMatrix rho = diag2(a);
        PauliString x = PauliString::parse("X");
        Diagnostics d = all_diagnostics(rho, x);
        double b = 1 - a;
        EXPECT_NEAR(d.r1, 2 * std::sqrt(a * b), 1e-12);
        EXPECT_NEAR(d.r2, 2 * a * b / (a * a + b * b), 1e-12);
        EXPECT_NEAR(d.f, 2 * std::sqrt(a * b), 1e-12);
        EXPECT_NEAR(d.d1, std::abs(a - b), 1e-12);
        ASSERT_FALSE(d.drel.infinite);
        EXPECT_NEAR(d.drel.value, (a - b) * std::log(a / b), 1e-12);
        EXPECT_NEAR(renyi1(rho, x), d.r1, 1e-12);
        EXPECT_NEAR(renyi2(rho, x), d.r2, 1e-12);
        EXPECT_NEAR(fidelity_corr(rho, x), d.f, 1e-12);
        EXPECT_NEAR(trace_distance_corr(rho, x), d.d1, 1e-12);
    }
}

TEST(Diagnostics, RhoParityIsUnity) {
    for (size_t n = 2; n <= 6; n++) {
        DensityMatrix rho = rho_parity(n);
        for (size_t y = 1; y < n; y++) {
            Diagnostics d = all_diagnostics(rho, zz(n, 0, y));
            EXPECT_NEAR(d.r1, 1, 1e-12);
            EXPECT_NEAR(d.r2, 1, 1e-12);
            EXPECT_NEAR(d.f, 1, 1e-12);
            EXPECT_NEAR(d.d1, 0, 1e-12);
            EXPECT_FALSE(d.drel.infinite);
            EXPECT_NEAR(d.drel.value, 0, 1e-12);
            EXPECT_NEAR((pauli_matrix(zz(n, 0, y)) * rho.matrix()).trace().real(), 0, 1e-12);
        }
    }
}

TEST(Diagnostics, RhoPlusIsOrthogonal) {
    DensityMatrix rho = rho_plus(3);
    PauliString ox = PauliString::from_sites(3, {{0, 'Z'}});
    PauliString oy = PauliString::from_sites(3, {{2, 'Z'}});
    EXPECT_NEAR(renyi1(rho, ox, oy), 0, 1e-12);
    EXPECT_NEAR(fidelity_corr(rho, ox, oy), 0, 1e-7);
    EXPECT_NEAR(trace_distance_corr(rho, ox, oy), 1, 1e-12);
    EXPECT_TRUE(relative_entropy_corr(rho, ox, oy).infinite);
    EXPECT_EQ(relative_entropy_corr(rho, ox, oy).str(), "inf");
}

TEST(Diagnostics, DecoheredChainRenyi2) {
    // Annealed loop model with tanh = 0.6 on a six-site ring.
    DensityMatrix rho = rho_decohered(Lattice(1, 6), 0.25);
    double t = 0.6;
    double expect = 2 * std::pow(t, 3) / (1 + std::pow(t, 6));
    EXPECT_NEAR(renyi2(rho, zz(6, 0, 3)), expect, 1e-12);
    EXPECT_NEAR(expect, 0.41274, 1e-5);
}

TEST(Diagnostics, FidelityAgreesWithSqrtFormula) {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; rep++) {
        DensityMatrix rho = random_density_matrix(2, rng, 1 + rep % 4);
        DensityMatrix sigma = random_density_matrix(2, rng);
        ComplexMatrix s = psd_sqrt(rho.matrix());
        ComplexMatrix inner = s * sigma.matrix() * s;
        inner = (inner + inner.adjoint()).eval() * 0.5;
        double oracle = psd_sqrt(inner).trace().real();
        EXPECT_NEAR(uhlmann_fidelity(rho.matrix(), sigma.matrix()), oracle, 1e-9);
        EXPECT_NEAR(uhlmann_fidelity(sigma.matrix(), rho.matrix()), oracle, 1e-9);
    }
}

TEST(Diagnostics, RelativeEntropyMatchesLogOracle) {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 10; rep++) {
        DensityMatrix rho = random_density_matrix(2, rng);
        PauliString o = random_pauli(2, rng);
        ComplexMatrix sigma = conjugate_by(o, rho.matrix());
        auto logm = [](const ComplexMatrix &m) {
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m);
            RealVector lv = es.eigenvalues().array().log();
            return ComplexMatrix(es.eigenvectors() * lv.asDiagonal() * es.eigenvectors().adjoint());
        };
        double oracle = (rho.matrix() * (logm(rho.matrix()) - logm(sigma))).trace().real();
        ExtendedReal got = relative_entropy_corr(rho, o);
        ASSERT_FALSE(got.infinite);
        EXPECT_NEAR(got.value, oracle, 1e-8);
        EXPECT_GE(got.value, -1e-9);
    }
}

TEST(Diagnostics, FidelitySymmetricUnderSwap) {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 20; rep++) {
        DensityMatrix rho = random_density_matrix(3, rng, 2);
        PauliString o = random_pauli(3, rng);
        DensityMatrix swapped = DensityMatrix::from_matrix(conjugate_by(o, rho.matrix()));
        EXPECT_NEAR(fidelity_corr(rho, o), fidelity_corr(swapped, o), 1e-9);
    }
}

TEST(Purification, Identities) {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 10; rep++) {
        DensityMatrix rho = random_density_matrix(2, rng);
        PurifiedVector v = canonical_purification(rho);
        EXPECT_NEAR(v.amplitudes.norm(), 1, 1e-10);
        EXPECT_LT((partial_trace_right(v) - rho.matrix()).cwiseAbs().maxCoeff(), 1e-9);
        PauliString o1 = random_pauli(2, rng);
        PauliString o2 = random_pauli(2, rng);
        cplx left = left_expectation(v, o1);
        EXPECT_LT(std::abs(left - (pauli_matrix(o1) * rho.matrix()).trace()), 1e-9);
        ComplexMatrix s = psd_sqrt(rho.matrix());
        cplx oracle = (pauli_matrix(o1) * s * pauli_matrix(o2).adjoint() * s).trace();
        EXPECT_LT(std::abs(two_sided_expectation(v, o1, o2) - oracle), 1e-9);
        EXPECT_NEAR(two_sided_expectation(v, o1, o1).real(), renyi1(rho, o1), 1e-10);
    }
}

TEST(Purification, PlusStateIsProduct) {
    PurifiedVector v = canonical_purification(rho_plus(2));
    for (Eigen::Index i = 0; i < v.amplitudes.size(); i++) {
        EXPECT_NEAR(std::abs(v.amplitudes[i] - 0.25), 0, 1e-12);
    }
}

TEST(Purification, RhoParityStabilizers) {
    size_t n = 3;
    PurifiedVector v = canonical_purification(rho_parity(n));
    for (size_t j = 0; j < n; j++) {
        PauliString x = PauliString::from_sites(n, {{j, 'X'}});
        EXPECT_NEAR(pauli_expectation(v.amplitudes, doubled(x, x)).real(), 1, 1e-10);
        if (j > 0) {
            PauliString z = zz(n, 0, j);
            EXPECT_NEAR(pauli_expectation(v.amplitudes, doubled(z, z)).real(), 1, 1e-10);
        }
    }
    EXPECT_NEAR(left_expectation(v, parity_operator(n)).real(), 1, 1e-10);
}

TEST(Purification, BasisIndependentForRealOrthogonalChange) {
    std::mt19937_64 rng(37);
    DensityMatrix rho = random_density_matrix(2, rng);
    Eigen::Index dim = rho.dim();
    ComplexMatrix w(dim, dim);
    for (Eigen::Index j = 0; j < dim; j++) {
        ComplexVector e = ComplexVector::Zero(dim);
        e[j] = 1;
        w.col(j) = hadamard_transform(e);
    }
    ComplexMatrix s_x = w.adjoint() * psd_sqrt(rho.matrix()) * w;
    // Map the X-basis amplitudes back to the computational basis with W (x) W.
    ComplexMatrix back = w * s_x * w.transpose();
    PurifiedVector v = canonical_purification(rho);
    cplx overlap = 0;
    for (Eigen::Index l = 0; l < dim; l++) {
        for (Eigen::Index r = 0; r < dim; r++) {
            overlap += std::conj(v.amplitudes[l * dim + r]) * back(l, r);
        }
    }
    EXPECT_NEAR(std::abs(overlap), 1, 1e-9);
}

TEST(Channels, IdentityAndDephasing) {
    std::mt19937_64 rng(41);
    DensityMatrix rho = random_density_matrix(2, rng);
    EXPECT_LT((apply_channel(rho, PauliChannel::identity(2)).matrix() - rho.matrix()).norm(), 1e-14);
    PauliString e = zz(2, 0, 1);
    DensityMatrix out = apply_channel(rho, PauliChannel::flip(0.3, e));
    ComplexMatrix expect = 0.7 * rho.matrix() + 0.3 * pauli_matrix(e) * rho.matrix() * pauli_matrix(e);
    EXPECT_LT((out.matrix() - expect).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(out.matrix().trace().real(), 1, 1e-12);
    EXPECT_THROW(apply_channel(rho, PauliChannel{{{0.5, e}}}), ValidationError);
    EXPECT_THROW(apply_channel(rho, PauliChannel{{{1.2, e}, {-0.2, PauliString(2)}}}), ValidationError);
}

TEST(Channels, FullDephasingGivesRhoParity) {
    for (size_t n : {2u, 3u, 4u}) {
        DensityMatrix rho = rho_decohered(Lattice(1, static_cast<int>(n)), 0.5);
        EXPECT_LT((rho.matrix() - rho_parity(n).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Channels, KrausCommutingStability) {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 20; rep++) {
        DensityMatrix rho = random_density_matrix(3, rng);
        PauliString o = zz(3, 0, 2);
        PauliChannel ch{{{0.6, PauliString(3)}, {0.3, zz(3, 0, 1)}, {0.1, PauliString::from_sites(3, {{1, 'Z'}})}}};
        EXPECT_GE(renyi1(apply_channel(rho, ch), o), renyi1(rho, o) - 1e-9);
    }
}

TEST(Symmetry, StrongAndWeak) {
    size_t n = 3;
    SymmetrySpec pi = SymmetrySpec::from_pauli(parity_operator(n));
    SymmetryCheck a = check_strong_symmetry(rho_parity(n), pi);
    EXPECT_TRUE(a.is_strong);
    EXPECT_TRUE(a.is_weak);
    EXPECT_LT(std::abs(a.phase - cplx(1, 0)), 1e-12);
    SymmetryCheck b = check_strong_symmetry(maximally_mixed(n), pi);
    EXPECT_FALSE(b.is_strong);
    EXPECT_TRUE(b.is_weak);
    for (double p : {0.0, 0.2, 0.5}) {
        EXPECT_TRUE(check_strong_symmetry(rho_decohered(Lattice(1, 3), p), pi).is_strong);
    }
    EXPECT_TRUE(check_strong_symmetry(rho_gibbs_even(4, 1, 1, 1), SymmetrySpec::from_pauli(parity_operator(4))).is_strong);
    ComplexMatrix notu = ComplexMatrix::Identity(2, 2) * 2.0;
    EXPECT_THROW(SymmetrySpec::from_unitary(notu), ValidationError);
}

TEST(ReferenceStates, Builders) {
    ReferenceParams par;
    par.d = 1;
    par.L = 2;
    DensityMatrix rp = build_reference_state(ReferenceKind::Parity, par);
    ComplexMatrix expect = (ComplexMatrix::Identity(4, 4) + pauli_matrix(PauliString::parse("XX"))) / 4.0;
    EXPECT_LT((rp.matrix() - expect).norm(), 1e-14);
    EXPECT_EQ(parse_reference_kind("rho_pi"), ReferenceKind::Parity);
    EXPECT_THROW(parse_reference_kind("nope"), ValidationError);
    par.L = 13;
    EXPECT_THROW(build_reference_state(ReferenceKind::Plus, par), ValidationError);
}

TEST(ReferenceStates, SignFreeAtZeroFieldIsGhzDiagonal) {
    DensityMatrix rho = rho_sign_free(3, 0.0);
    // |GHZ> has X-basis weight 1/4 on each even-parity string.
    ComplexMatrix w(8, 8);
    for (Eigen::Index j = 0; j < 8; j++) {
        ComplexVector e = ComplexVector::Zero(8);
        e[j] = 1;
        w.col(j) = hadamard_transform(e);
    }
    ComplexMatrix in_x = w.adjoint() * rho.matrix() * w;
    for (Eigen::Index i = 0; i < 8; i++) {
        double expect = (std::popcount(static_cast<unsigned>(i)) % 2 == 0) ? 0.25 : 0.0;
        EXPECT_NEAR(in_x(i, i).real(), expect, 1e-10);
        for (Eigen::Index j = 0; j < 8; j++) {
            if (i != j) {
                EXPECT_NEAR(std::abs(in_x(i, j)), 0, 1e-10);
            }
        }
    }
}

TEST(SignFreeCp, Checks) {
    SignFreeChecks a = sign_free_cp_checks(0.0, 4, 0, 2);
    EXPECT_NEAR(a.two_sided, 1, 1e-10);
    EXPECT_NEAR(a.left_corr, 0, 1e-10);
    for (auto [g, n] : std::vector<std::pair<double, size_t>>{{8.0, 4}, {1.0, 6}, {0.5, 5}}) {
        SignFreeChecks c = sign_free_cp_checks(g, n, 0, n / 2);
        EXPECT_NEAR(c.left_corr, 0, 1e-10);
        EXPECT_NEAR(c.two_sided, c.gs_corr, 1e-10);
    }
    SignFreeChecks big = sign_free_cp_checks(8.0, 4, 0, 2);
    EXPECT_LT(big.two_sided, 0.05);
}

TEST(Serialization, RoundTrip) {
    std::mt19937_64 rng(47);
    DensityMatrix rho = random_density_matrix(2, rng);
    std::stringstream ss;
    write_density_matrix(ss, rho);
    DensityMatrix back = read_density_matrix(ss);
    EXPECT_EQ((back.matrix() - rho.matrix()).norm(), 0.0);
    PurifiedVector v = canonical_purification(rho);
    std::stringstream sv;
    write_purified_vector(sv, v);
    PurifiedVector vb = read_purified_vector(sv);
    EXPECT_EQ(vb.n_qubits, 2u);
    EXPECT_EQ((vb.amplitudes - v.amplitudes).norm(), 0.0);
    std::stringstream bad("NOTMAGIC");
    EXPECT_THROW(read_density_matrix(bad), ValidationError);
}
