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

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "swssb/common.hpp"
#include "swssb/lattice.hpp"
#include "swssb/linalg.hpp"
#include "swssb/pauli.hpp"

namespace swssb {

constexpr size_t kMaxDenseQubits = 12;
constexpr size_t kMaxPurifiedQubits = 6;

inline size_t qubits_for_dim(Eigen::Index dim) {
    size_t n = 0;
    while ((Eigen::Index{1} << n) < dim) {
        n++;
    }
    if ((Eigen::Index{1} << n) != dim) {
        throw ValidationError("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return n;
}

inline void require_dense_size(size_t n, const char *who) {
    if (n > kMaxDenseQubits) {
        throw ValidationError(std::string(who) + ": " + std::to_string(n) + " qubits exceeds the dense limit of " +
                              std::to_string(kMaxDenseQubits));
    }
}

class DensityMatrix {
   public:
    DensityMatrix() = default;

    /// Validates hermiticity, unit trace and positivity.
    static DensityMatrix from_matrix(ComplexMatrix m) {
        if (m.rows() != m.cols()) {
            throw ValidationError("DensityMatrix: matrix is not square");
        }
        size_t n = qubits_for_dim(m.rows());
        require_dense_size(n, "DensityMatrix");
        double scale = std::max(row_sum_norm(m), 1e-300);
        double herm = hermiticity_defect(m);
        if (herm > 1e-10 * scale) {
            throw ValidationError("DensityMatrix: not Hermitian, defect " + format_double(herm));
        }
        cplx tr = m.trace();
        if (std::abs(tr - cplx(1, 0)) > 1e-10) {
            throw ValidationError("DensityMatrix: trace " + format_double(tr.real()) + " != 1");
        }
        m = (m + m.adjoint()).eval() * 0.5;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
        double lo = solver.eigenvalues().minCoeff();
        if (lo < -1e-10 * static_cast<double>(m.rows())) {
            throw ValidationError("DensityMatrix: eigenvalue " + format_double(lo) + " is negative");
        }
        DensityMatrix r;
        r.n_ = n;
        r.m_ = std::move(m);
        return r;
    }

    /// Rescales a PSD matrix to unit trace before validating.
    static DensityMatrix normalized(const ComplexMatrix &m) {
        cplx tr = m.trace();
        if (!(std::abs(tr) > 0)) {
            throw ValidationError("DensityMatrix: zero trace");
        }
        return from_matrix(m / tr.real());
    }

    size_t n_qubits() const {
        return n_;
    }
    Eigen::Index dim() const {
        return m_.rows();
    }
    const ComplexMatrix &matrix() const {
        return m_;
    }

   private:
    size_t n_ = 0;
    ComplexMatrix m_;
};

struct PauliChannel {
    std::vector<std::pair<double, PauliString>> terms;

    void validate(size_t n) const {
        double total = 0;
        for (const auto &[p, e] : terms) {
            if (!(p >= 0)) {
                throw ValidationError("PauliChannel: negative probability " + format_double(p));
            }
            if (e.num_qubits() != n) {
                throw ValidationError("PauliChannel: term acts on " + std::to_string(e.num_qubits()) +
                                      " qubits, state has " + std::to_string(n));
            }
            total += p;
        }
        if (std::abs(total - 1) > 1e-12) {
            throw ValidationError("PauliChannel: probabilities sum to " + format_double(total));
        }
    }

    static PauliChannel identity(size_t n) {
        return {{{1.0, PauliString(n)}}};
    }

    /// rho -> (1-p) rho + p E rho E.
    static PauliChannel flip(double p, const PauliString &e) {
        return {{{1 - p, PauliString(e.num_qubits())}, {p, e}}};
    }
};

struct KrausChannel {
    std::vector<ComplexMatrix> ops;

    double completeness_defect() const {
        if (ops.empty()) {
            return 1;
        }
        ComplexMatrix s = ComplexMatrix::Zero(ops[0].cols(), ops[0].cols());
        for (const auto &k : ops) {
            s += k.adjoint() * k;
        }
        return row_sum_norm(s - ComplexMatrix::Identity(s.rows(), s.cols()));
    }
};

struct PurifiedVector {
    size_t n_qubits = 0;  // per side
    ComplexVector amplitudes;  // index l * 2^n + r
};

struct SymmetrySpec {
    ComplexMatrix unitary;
    cplx expected_phase{1, 0};

    static SymmetrySpec from_pauli(const PauliString &p);
    static SymmetrySpec from_unitary(ComplexMatrix u) {
        double defect = row_sum_norm(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
        if (defect > 1e-10) {
            throw ValidationError("SymmetrySpec: not unitary, defect " + format_double(defect));
        }
        return {std::move(u), {1, 0}};
    }
};

// ---------------------------------------------------------------------------
// Pauli action on dense matrices.

inline void require_same_size(const DensityMatrix &rho, const PauliString &p) {
    if (p.num_qubits() != rho.n_qubits()) {
        throw ValidationError("Pauli string has " + std::to_string(p.num_qubits()) + " qubits, state has " +
                              std::to_string(rho.n_qubits()));
    }
}

inline ComplexMatrix pauli_matrix(const PauliString &p) {
    require_dense_size(p.num_qubits(), "pauli_matrix");
    Eigen::Index dim = Eigen::Index{1} << p.num_qubits();
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index b = 0; b < dim; b++) {
        auto [c, t] = p.act_on_basis(static_cast<uint64_t>(b));
        m(static_cast<Eigen::Index>(t), b) = c;
    }
    return m;
}

/// P m P^dag.
inline ComplexMatrix conjugate_by(const PauliString &p, const ComplexMatrix &m) {
    Eigen::Index dim = m.rows();
    std::vector<cplx> coef(dim);
    std::vector<Eigen::Index> target(dim);
    for (Eigen::Index b = 0; b < dim; b++) {
        auto [c, t] = p.act_on_basis(static_cast<uint64_t>(b));
        coef[b] = c;
        target[b] = static_cast<Eigen::Index>(t);
    }
    ComplexMatrix out(dim, dim);
    for (Eigen::Index j = 0; j < dim; j++) {
        cplx cj = std::conj(coef[j]);
        for (Eigen::Index i = 0; i < dim; i++) {
            out(target[i], target[j]) = coef[i] * cj * m(i, j);
        }
    }
    return out;
}

/// P m.
inline ComplexMatrix left_multiply(const PauliString &p, const ComplexMatrix &m) {
    Eigen::Index dim = m.rows();
    ComplexMatrix out(dim, m.cols());
    for (Eigen::Index i = 0; i < dim; i++) {
        auto [c, t] = p.act_on_basis(static_cast<uint64_t>(i));
        out.row(static_cast<Eigen::Index>(t)) = c * m.row(i);
    }
    return out;
}

inline SymmetrySpec SymmetrySpec::from_pauli(const PauliString &p) {
    return {pauli_matrix(p), {1, 0}};
}

inline PauliString charged_pair(const PauliString &ox, const PauliString &oy) {
    return ox * oy.adjoint();
}

// ---------------------------------------------------------------------------
// Diagnostics.

struct SpectralData {
    EigenDecomposition eig;  // clipped spectrum
    ComplexMatrix sqrt_rho;
};

inline SpectralData spectral_data(const ComplexMatrix &rho) {
    SpectralData s;
    s.eig = hermitian_eig(rho);
    s.eig.values = clipped_psd_spectrum(s.eig.values, clip_tolerance(rho), "spectral_data");
    s.sqrt_rho = spectral_apply(s.eig, [](double v) { return std::sqrt(v); });
    return s;
}

/// tr[sqrt(sigma) sqrt(rho)].
inline double holevo_fidelity(const ComplexMatrix &rho, const ComplexMatrix &sigma) {
    return (psd_sqrt(sigma) * psd_sqrt(rho)).trace().real();
}

/// tr sqrt(sqrt(rho) sigma sqrt(rho)), as the trace norm of sqrt(rho) sqrt(sigma).
inline double uhlmann_fidelity_from_roots(const ComplexMatrix &sqrt_rho, const ComplexMatrix &sqrt_sigma) {
    Eigen::JacobiSVD<ComplexMatrix> svd(sqrt_rho * sqrt_sigma);
    return svd.singularValues().sum();
}

inline double uhlmann_fidelity(const ComplexMatrix &rho, const ComplexMatrix &sigma) {
    return uhlmann_fidelity_from_roots(psd_sqrt(rho), psd_sqrt(sigma));
}

inline double trace_distance(const ComplexMatrix &rho, const ComplexMatrix &sigma) {
    ComplexMatrix diff = rho - sigma;
    diff = (diff + diff.adjoint()).eval() * 0.5;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(diff, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

/// tr rho (log rho - log sigma); +inf when supp(rho) is not inside supp(sigma). 0 log 0 = 0.
inline ExtendedReal relative_entropy(const ComplexMatrix &rho, const ComplexMatrix &sigma) {
    EigenDecomposition er = hermitian_eig(rho);
    EigenDecomposition es = hermitian_eig(sigma);
    er.values = clipped_psd_spectrum(er.values, support_tolerance(rho), "relative_entropy");
    es.values = clipped_psd_spectrum(es.values, support_tolerance(sigma), "relative_entropy");
    ComplexMatrix overlap = er.vectors.adjoint() * es.vectors;
    double total = 0;
    for (Eigen::Index i = 0; i < er.values.size(); i++) {
        double li = er.values[i];
        if (li == 0) {
            continue;
        }
        double leak = 0;
        double cross = 0;
        for (Eigen::Index j = 0; j < es.values.size(); j++) {
            double w = std::norm(overlap(i, j));
            if (es.values[j] == 0) {
                leak += w;
            } else {
                cross += w * std::log(es.values[j]);
            }
        }
        if (leak > 1e-8) {
            return ExtendedReal::inf();
        }
        total += li * (std::log(li) - cross);
    }
    return ExtendedReal::finite(total);
}

/// tr[O sqrt(rho) O^dag sqrt(rho)].
inline double renyi1(const DensityMatrix &rho, const PauliString &o) {
    require_same_size(rho, o);
    ComplexMatrix s = psd_sqrt(rho.matrix());
    return (conjugate_by(o, s) * s).trace().real();
}

inline double renyi1(const DensityMatrix &rho, const PauliString &ox, const PauliString &oy) {
    return renyi1(rho, charged_pair(ox, oy));
}

inline double renyi2(const DensityMatrix &rho, const PauliString &o) {
    require_same_size(rho, o);
    const ComplexMatrix &m = rho.matrix();
    double num = (conjugate_by(o, m) * m).trace().real();
    double den = (m * m).trace().real();
    return num / den;
}

inline double renyi2(const DensityMatrix &rho, const PauliString &ox, const PauliString &oy) {
    return renyi2(rho, charged_pair(ox, oy));
}

inline double fidelity_corr(const DensityMatrix &rho, const PauliString &o) {
    require_same_size(rho, o);
    ComplexMatrix s = psd_sqrt(rho.matrix());
    return uhlmann_fidelity_from_roots(s, conjugate_by(o, s));
}

inline double fidelity_corr(const DensityMatrix &rho, const PauliString &ox, const PauliString &oy) {
    return fidelity_corr(rho, charged_pair(ox, oy));
}

inline double trace_distance_corr(const DensityMatrix &rho, const PauliString &o) {
    require_same_size(rho, o);
    return trace_distance(rho.matrix(), conjugate_by(o, rho.matrix()));
}

inline double trace_distance_corr(const DensityMatrix &rho, const PauliString &ox, const PauliString &oy) {
    return trace_distance_corr(rho, charged_pair(ox, oy));
}

inline ExtendedReal relative_entropy_corr(const DensityMatrix &rho, const PauliString &o) {
    require_same_size(rho, o);
    return relative_entropy(rho.matrix(), conjugate_by(o, rho.matrix()));
}

inline ExtendedReal relative_entropy_corr(const DensityMatrix &rho, const PauliString &ox, const PauliString &oy) {
    return relative_entropy_corr(rho, charged_pair(ox, oy));
}

struct Diagnostics {
    double r1 = 0;
    double r2 = 0;
    double f = 0;
    double d1 = 0;
    ExtendedReal drel;
};

inline Diagnostics all_diagnostics(const DensityMatrix &rho, const PauliString &o) {
    require_same_size(rho, o);
    const ComplexMatrix &m = rho.matrix();
    ComplexMatrix sigma = conjugate_by(o, m);
    SpectralData sd = spectral_data(m);
    ComplexMatrix sqrt_sigma = conjugate_by(o, sd.sqrt_rho);
    Diagnostics d;
    d.r1 = (sqrt_sigma * sd.sqrt_rho).trace().real();
    d.r2 = (sigma * m).trace().real() / (m * m).trace().real();
    d.f = uhlmann_fidelity_from_roots(sd.sqrt_rho, sqrt_sigma);
    d.d1 = trace_distance(m, sigma);
    d.drel = relative_entropy(m, sigma);
    return d;
}

// ---------------------------------------------------------------------------
// Canonical purification.

inline PurifiedVector canonical_purification(const DensityMatrix &rho) {
    if (rho.n_qubits() > kMaxPurifiedQubits) {
        throw ValidationError("canonical_purification: " + std::to_string(rho.n_qubits()) +
                              " qubits exceeds the purified-vector limit of " + std::to_string(kMaxPurifiedQubits));
    }
    ComplexMatrix s = psd_sqrt(rho.matrix());
    Eigen::Index dim = s.rows();
    PurifiedVector v;
    v.n_qubits = rho.n_qubits();
    v.amplitudes.resize(dim * dim);
    for (Eigen::Index l = 0; l < dim; l++) {
        for (Eigen::Index r = 0; r < dim; r++) {
            v.amplitudes[l * dim + r] = s(l, r);
        }
    }
    double norm = v.amplitudes.norm();
    if (std::abs(norm - 1) > 1e-10) {
        throw BackendError("canonical_purification: norm " + format_double(norm));
    }
    return v;
}

inline ComplexMatrix partial_trace_right(const PurifiedVector &v) {
    Eigen::Index dim = Eigen::Index{1} << v.n_qubits;
    Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(v.amplitudes.data(), dim,
                                                                                          dim);
    return a * a.adjoint();
}

/// <v| P |v> for a Pauli on the 2n doubled qubits (R = low bits, L = high bits).
inline cplx pauli_expectation(const ComplexVector &v, const PauliString &p) {
    cplx acc = 0;
    for (Eigen::Index b = 0; b < v.size(); b++) {
        auto [c, t] = p.act_on_basis(static_cast<uint64_t>(b));
        acc += std::conj(v[static_cast<Eigen::Index>(t)]) * c * v[b];
    }
    return acc;
}

inline PauliString doubled(const PauliString &left, const PauliString &right) {
    size_t n = left.num_qubits();
    return left.embedded(2 * n, n) * right.embedded(2 * n, 0);
}

/// <O1^L conj(O2)^R> on the purified vector.
inline cplx two_sided_expectation(const PurifiedVector &v, const PauliString &o1, const PauliString &o2) {
    return pauli_expectation(v.amplitudes, doubled(o1, o2.conj()));
}

inline cplx left_expectation(const PurifiedVector &v, const PauliString &o) {
    return pauli_expectation(v.amplitudes, doubled(o, PauliString(o.num_qubits())));
}

// ---------------------------------------------------------------------------
// Channels and symmetry.

inline DensityMatrix apply_channel(const DensityMatrix &rho, const PauliChannel &ch) {
    ch.validate(rho.n_qubits());
    ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (const auto &[p, e] : ch.terms) {
        if (p != 0) {
            out += p * conjugate_by(e, rho.matrix());
        }
    }
    return DensityMatrix::from_matrix(std::move(out));
}

inline DensityMatrix apply_channel(const DensityMatrix &rho, const KrausChannel &ch) {
    double defect = ch.completeness_defect();
    if (defect > 1e-10) {
        throw ValidationError("KrausChannel: not trace preserving, defect " + format_double(defect));
    }
    ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (const auto &k : ch.ops) {
        out += k * rho.matrix() * k.adjoint();
    }
    return DensityMatrix::from_matrix(std::move(out));
}

struct SymmetryCheck {
    bool is_strong = false;
    bool is_weak = false;
    cplx phase{0, 0};
};

inline SymmetryCheck check_strong_symmetry(const DensityMatrix &rho, const SymmetrySpec &sym) {
    const ComplexMatrix &u = sym.unitary;
    if (u.rows() != rho.dim()) {
        throw ValidationError("check_strong_symmetry: dimension mismatch");
    }
    SymmetryCheck r;
    ComplexMatrix ur = u * rho.matrix();
    cplx t = ur.trace();
    if (std::abs(t) > 1e-12) {
        r.phase = t / std::abs(t);
        r.is_strong = row_sum_norm(ur - r.phase * rho.matrix()) < 1e-9;
    }
    r.is_weak = row_sum_norm(ur * u.adjoint() - rho.matrix()) < 1e-9;
    if (!r.is_strong) {
        r.phase = {0, 0};
    }
    return r;
}

// ---------------------------------------------------------------------------
// Reference states.

inline PauliString parity_operator(size_t n) {
    PauliString p(n);
    for (size_t q = 0; q < n; q++) {
        p.set_letter(q, 'X');
    }
    return p;
}

/// |+><+|^n.
inline DensityMatrix rho_plus(size_t n) {
    require_dense_size(n, "rho_plus");
    Eigen::Index dim = Eigen::Index{1} << n;
    return DensityMatrix::from_matrix(ComplexMatrix::Constant(dim, dim, cplx(1.0 / static_cast<double>(dim), 0)));
}

/// (1 + prod X) / 2^n.
inline DensityMatrix rho_parity(size_t n) {
    require_dense_size(n, "rho_parity");
    Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix m = ComplexMatrix::Identity(dim, dim) + pauli_matrix(parity_operator(n));
    return DensityMatrix::from_matrix(m / static_cast<double>(dim));
}

inline DensityMatrix maximally_mixed(size_t n) {
    require_dense_size(n, "maximally_mixed");
    Eigen::Index dim = Eigen::Index{1} << n;
    return DensityMatrix::from_matrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

inline PauliString link_zz(const Lattice &lat, size_t e) {
    auto [a, b] = lat.link_ends(e);
    PauliString p(lat.num_sites());
    p.zs.flip(a);
    p.zs.flip(b);
    return p;
}

/// Each link independently dephased by Z_i Z_j with probability p, starting from |+>^N.
inline DensityMatrix rho_decohered(const Lattice &lat, double p) {
    if (!(p >= 0 && p <= 1)) {
        throw ValidationError("rho_decohered: p must lie in [0, 1], got " + format_double(p));
    }
    DensityMatrix rho = rho_plus(lat.num_sites());
    for (size_t e = 0; e < lat.num_links(); e++) {
        rho = apply_channel(rho, PauliChannel::flip(p, link_zz(lat, e)));
    }
    return rho;
}

/// Dense transverse-field Ising Hamiltonian -J sum (Z_j Z_{j+1} + g X_j), periodic.
inline ComplexMatrix tfim_hamiltonian(size_t n, double j_coupling, double g) {
    require_dense_size(n, "tfim_hamiltonian");
    Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (size_t q = 0; q < n; q++) {
        PauliString zz(n);
        zz.zs.flip(q);
        zz.zs.flip((q + 1) % n);
        h -= j_coupling * pauli_matrix(zz);
        h -= j_coupling * g * pauli_matrix(PauliString::from_sites(n, {{q, 'X'}}));
    }
    return h;
}

/// P_even e^{-beta H} / Z.
inline DensityMatrix rho_gibbs_even(size_t n, double j_coupling, double g, double beta) {
    ComplexMatrix h = tfim_hamiltonian(n, j_coupling, g);
    EigenDecomposition eig = hermitian_eig(h);
    double e0 = eig.values.minCoeff();
    ComplexMatrix w = spectral_apply(eig, [&](double e) { return std::exp(-beta * (e - e0)); });
    Eigen::Index dim = h.rows();
    ComplexMatrix proj = (ComplexMatrix::Identity(dim, dim) + pauli_matrix(parity_operator(n))) * 0.5;
    ComplexMatrix m = proj * w * proj;
    m = (m + m.adjoint()).eval() * 0.5;
    return DensityMatrix::normalized(m);
}

/// Parity-even TFIM ground state (J = 1), sign fixed so X-basis amplitudes are nonnegative.
inline ComplexVector tfim_even_ground_state(size_t n, double g) {
    ComplexMatrix h = tfim_hamiltonian(n, 1.0, g);
    Eigen::Index dim = h.rows();
    double penalty = 4.0 * static_cast<double>(n) * (1 + std::abs(g)) + 1;
    h += penalty * 0.5 * (ComplexMatrix::Identity(dim, dim) - pauli_matrix(parity_operator(n)));
    EigenDecomposition eig = hermitian_eig(h);
    if (eig.values.size() > 1 && eig.values[1] - eig.values[0] < 1e-9) {
        throw BackendError("tfim_even_ground_state: degenerate even-sector ground state");
    }
    ComplexVector psi = eig.vectors.col(0);
    cplx s = psi.sum();
    if (std::abs(s) > 1e-12) {
        psi *= std::conj(s) / std::abs(s);
    }
    return psi;
}

/// H^{(x)n} applied to a vector (maps Z-basis amplitudes to X-basis amplitudes).
inline ComplexVector hadamard_transform(ComplexVector v) {
    Eigen::Index dim = v.size();
    for (Eigen::Index h = 1; h < dim; h <<= 1) {
        for (Eigen::Index i = 0; i < dim; i += 2 * h) {
            for (Eigen::Index j = i; j < i + h; j++) {
                cplx a = v[j], b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
    return v / std::sqrt(static_cast<double>(dim));
}

/// sum_x <x|psi_g>^2 |x><x| in the X basis.
inline DensityMatrix rho_sign_free(size_t n, double g) {
    ComplexVector psi_x = hadamard_transform(tfim_even_ground_state(n, g));
    Eigen::Index dim = psi_x.size();
    ComplexMatrix diag = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; i++) {
        diag(i, i) = std::norm(psi_x[i]);
    }
    ComplexMatrix w(dim, dim);
    for (Eigen::Index j = 0; j < dim; j++) {
        ComplexVector e = ComplexVector::Zero(dim);
        e[j] = 1;
        w.col(j) = hadamard_transform(e);
    }
    return DensityMatrix::normalized(w * diag * w.adjoint());
}

enum class ReferenceKind { Plus, Parity, Decohered, GibbsEven, SignFree, MaximallyMixed };

struct ReferenceParams {
    int d = 1;
    int L = 2;  // N = L^d
    double p = 0;
    double beta = 1;
    double J = 1;
    double g = 1;
};

inline ReferenceKind parse_reference_kind(const std::string &s) {
    if (s == "plus" || s == "rho0") return ReferenceKind::Plus;
    if (s == "parity" || s == "rho_pi") return ReferenceKind::Parity;
    if (s == "decohered" || s == "rho_p") return ReferenceKind::Decohered;
    if (s == "gibbs" || s == "rho_beta") return ReferenceKind::GibbsEven;
    if (s == "signfree" || s == "rho_g") return ReferenceKind::SignFree;
    if (s == "mixed") return ReferenceKind::MaximallyMixed;
    throw ValidationError("unknown reference state kind '" + s + "'");
}

inline DensityMatrix build_reference_state(ReferenceKind kind, const ReferenceParams &par) {
    Lattice lat(par.d, par.L);
    size_t n = lat.num_sites();
    require_dense_size(n, "build_reference_state");
    switch (kind) {
        case ReferenceKind::Plus:
            return rho_plus(n);
        case ReferenceKind::Parity:
            return rho_parity(n);
        case ReferenceKind::Decohered:
            return rho_decohered(lat, par.p);
        case ReferenceKind::GibbsEven:
            if (par.d != 1) throw ValidationError("gibbs reference state is one-dimensional");
            return rho_gibbs_even(n, par.J, par.g, par.beta);
        case ReferenceKind::SignFree:
            if (par.d != 1) throw ValidationError("signfree reference state is one-dimensional");
            return rho_sign_free(n, par.g);
        case ReferenceKind::MaximallyMixed:
            return maximally_mixed(n);
    }
    throw ValidationError("build_reference_state: unknown kind");
}

struct SignFreeChecks {
    double left_corr = 0;
    double two_sided = 0;
    double gs_corr = 0;
};

/// Amplitudes of prod_j CX_j^{R->L} |psi_g>^L |+>^R, index l * 2^n + r.
inline PurifiedVector sign_free_cp(size_t n, double g) {
    if (n > kMaxPurifiedQubits) {
        throw ValidationError("sign_free_cp: n exceeds the purified-vector limit");
    }
    ComplexVector psi = tfim_even_ground_state(n, g);
    Eigen::Index dim = psi.size();
    PurifiedVector v;
    v.n_qubits = n;
    v.amplitudes.resize(dim * dim);
    double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (Eigen::Index l = 0; l < dim; l++) {
        for (Eigen::Index r = 0; r < dim; r++) {
            v.amplitudes[l * dim + r] = psi[l ^ r] * scale;
        }
    }
    return v;
}

inline SignFreeChecks sign_free_cp_checks(double g, size_t n, size_t x, size_t y) {
    if (x >= n || y >= n) {
        throw ValidationError("sign_free_cp_checks: site out of range");
    }
    PurifiedVector v = sign_free_cp(n, g);
    PauliString zz = PauliString::from_sites(n, {{x, 'Z'}});
    zz *= PauliString::from_sites(n, {{y, 'Z'}});
    SignFreeChecks c;
    c.left_corr = left_expectation(v, zz).real();
    c.two_sided = pauli_expectation(v.amplitudes, doubled(zz, zz)).real();
    ComplexVector psi = tfim_even_ground_state(n, g);
    ComplexVector zpsi(psi.size());
    for (Eigen::Index b = 0; b < psi.size(); b++) {
        auto [coef, t] = zz.act_on_basis(static_cast<uint64_t>(b));
        zpsi[static_cast<Eigen::Index>(t)] = coef * psi[b];
    }
    c.gs_corr = psi.dot(zpsi).real();
    return c;
}

// ---------------------------------------------------------------------------
// Random instances.

template <typename Rng>
ComplexMatrix random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng &rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    ComplexMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; j++) {
        for (Eigen::Index i = 0; i < rows; i++) {
            double re = nd(rng);
            double im = nd(rng);
            g(i, j) = cplx(re, im);
        }
    }
    return g;
}

/// Hilbert-Schmidt random state G G^dag / tr, with G of shape dim x rank.
template <typename Rng>
DensityMatrix random_density_matrix(size_t n, Rng &rng, Eigen::Index rank = 0) {
    require_dense_size(n, "random_density_matrix");
    Eigen::Index dim = Eigen::Index{1} << n;
    if (rank <= 0) {
        rank = dim;
    }
    ComplexMatrix g = random_ginibre(dim, rank, rng);
    ComplexMatrix m = g * g.adjoint();
    return DensityMatrix::normalized((m + m.adjoint()) * 0.5);
}

template <typename Rng>
ComplexMatrix random_unitary(Eigen::Index dim, Rng &rng) {
    ComplexMatrix g = random_ginibre(dim, dim, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR();
    for (Eigen::Index i = 0; i < dim; i++) {
        cplx d = r(i, i);
        q.col(i) *= d / std::abs(d);
    }
    return q;
}

/// Kraus operators cut from a random isometry of dimension dim*k x dim.
template <typename Rng>
KrausChannel random_kraus_channel(size_t n, size_t k, Rng &rng) {
    Eigen::Index dim = Eigen::Index{1} << n;
    ComplexMatrix u = random_unitary(dim * static_cast<Eigen::Index>(k), rng);
    KrausChannel ch;
    for (size_t a = 0; a < k; a++) {
        ch.ops.push_back(u.block(static_cast<Eigen::Index>(a) * dim, 0, dim, dim));
    }
    return ch;
}

template <typename Rng>
PauliString random_pauli(size_t n, Rng &rng) {
    PauliString p(n);
    static const char letters[] = {'I', 'X', 'Y', 'Z'};
    for (size_t q = 0; q < n; q++) {
        p.set_letter(q, letters[rng() % 4]);
    }
    return p;
}

// ---------------------------------------------------------------------------
// Binary container: 8-byte magic, u64 LE count, then (re, im) LE float64 pairs.

inline constexpr char kDensityMagic[9] = "SWSSBDM1";
inline constexpr char kPurifiedMagic[9] = "SWSSBPV1";

namespace detail {

inline void put_u64(std::ostream &out, uint64_t v) {
    char b[8];
    for (int k = 0; k < 8; k++) {
        b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
    }
    out.write(b, 8);
}

inline uint64_t get_u64(std::istream &in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char *>(b), 8);
    if (!in) {
        throw ValidationError("binary container: truncated input");
    }
    uint64_t v = 0;
    for (int k = 7; k >= 0; k--) {
        v = (v << 8) | b[k];
    }
    return v;
}

inline void put_f64(std::ostream &out, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    put_u64(out, v);
}

inline double get_f64(std::istream &in) {
    uint64_t v = get_u64(in);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

inline void expect_magic(std::istream &in, const char *magic) {
    char b[8];
    in.read(b, 8);
    if (!in || std::memcmp(b, magic, 8) != 0) {
        throw ValidationError(std::string("binary container: bad magic, expected ") + magic);
    }
}

}  // namespace detail

inline void write_density_matrix(std::ostream &out, const DensityMatrix &rho) {
    out.write(kDensityMagic, 8);
    detail::put_u64(out, static_cast<uint64_t>(rho.dim()));
    for (Eigen::Index i = 0; i < rho.dim(); i++) {
        for (Eigen::Index j = 0; j < rho.dim(); j++) {
            detail::put_f64(out, rho.matrix()(i, j).real());
            detail::put_f64(out, rho.matrix()(i, j).imag());
        }
    }
}

inline DensityMatrix read_density_matrix(std::istream &in) {
    detail::expect_magic(in, kDensityMagic);
    uint64_t dim = detail::get_u64(in);
    if (dim == 0 || dim > (uint64_t{1} << kMaxDenseQubits)) {
        throw ValidationError("binary container: bad dimension " + std::to_string(dim));
    }
    ComplexMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < m.rows(); i++) {
        for (Eigen::Index j = 0; j < m.cols(); j++) {
            double re = detail::get_f64(in);
            double im = detail::get_f64(in);
            m(i, j) = cplx(re, im);
        }
    }
    return DensityMatrix::from_matrix(std::move(m));
}

inline void write_purified_vector(std::ostream &out, const PurifiedVector &v) {
    out.write(kPurifiedMagic, 8);
    detail::put_u64(out, static_cast<uint64_t>(v.amplitudes.size()));
    for (Eigen::Index i = 0; i < v.amplitudes.size(); i++) {
        detail::put_f64(out, v.amplitudes[i].real());
        detail::put_f64(out, v.amplitudes[i].imag());
    }
}

inline PurifiedVector read_purified_vector(std::istream &in) {
    detail::expect_magic(in, kPurifiedMagic);
    uint64_t len = detail::get_u64(in);
    size_t n = 0;
    while ((uint64_t{1} << (2 * n)) < len) {
        n++;
    }
    if ((uint64_t{1} << (2 * n)) != len || n > kMaxPurifiedQubits) {
        throw ValidationError("binary container: bad purified length " + std::to_string(len));
    }
    PurifiedVector v;
    v.n_qubits = n;
    v.amplitudes.resize(static_cast<Eigen::Index>(len));
    for (Eigen::Index i = 0; i < v.amplitudes.size(); i++) {
        double re = detail::get_f64(in);
        double im = detail::get_f64(in);
        v.amplitudes[i] = cplx(re, im);
    }
    double norm = v.amplitudes.norm();
    if (std::abs(norm - 1) > 1e-10) {
        throw ValidationError("binary container: purified vector norm " + format_double(norm));
    }
    return v;
}

}  // namespace swssb
