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
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

#include "swssb/common.hpp"

namespace swssb {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Max-row-sum (infinity) norm.
template <typename Derived>
double row_sum_norm(const Eigen::MatrixBase<Derived> &m) {
    if (m.size() == 0) {
        return 0;
    }
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

struct EigenDecomposition {
    RealVector values;  // ascending
    ComplexMatrix vectors;
};

inline double hermiticity_defect(const ComplexMatrix &m) {
    return row_sum_norm(m - m.adjoint());
}

inline EigenDecomposition hermitian_eig(const ComplexMatrix &m) {
    if (m.rows() != m.cols()) {
        throw ValidationError("hermitian_eig: matrix is not square");
    }
    double scale = row_sum_norm(m);
    double defect = hermiticity_defect(m);
    if (defect > 1e-10 * std::max(scale, 1e-300)) {
        throw ValidationError(
            "hermitian_eig: matrix not Hermitian, ||m - m^dag||_inf = " + format_double(defect));
    }
    ComplexMatrix h = (m + m.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    if (solver.info() != Eigen::Success) {
        throw BackendError("hermitian_eig: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Spectral tolerances: eigenvalues below -negative are rejected, those within zero of 0 are set to 0.
struct ClipTolerance {
    double negative;
    double zero;
};

/// For square roots: eigenvalues at the eigensolver's rounding level are zeroed.
inline ClipTolerance clip_tolerance(const ComplexMatrix &m) {
    double norm = std::max(row_sum_norm(m), 1e-300);
    return {1e-10 * static_cast<double>(m.rows()) * norm, 4 * std::numeric_limits<double>::epsilon() * norm};
}

/// For logarithms: eigenvalues at rounding level count as outside the support.
inline ClipTolerance support_tolerance(const ComplexMatrix &m) {
    double scale = static_cast<double>(m.rows()) * std::max(row_sum_norm(m), 1e-300);
    return {1e-10 * scale, 64 * std::numeric_limits<double>::epsilon() * scale};
}

/// V f(Λ) V† for a Hermitian m whose spectrum has been clipped at `clip_tolerance`.
template <typename F>
ComplexMatrix spectral_apply(const EigenDecomposition &eig, F &&f) {
    RealVector fv(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); i++) {
        fv[i] = f(eig.values[i]);
    }
    return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

inline RealVector clipped_psd_spectrum(const RealVector &values, ClipTolerance tol, const char *who) {
    RealVector out = values;
    for (Eigen::Index i = 0; i < out.size(); i++) {
        if (out[i] < -tol.negative) {
            throw ValidationError(std::string(who) + ": eigenvalue " + format_double(out[i]) +
                                  " below -" + format_double(tol.negative) + "; not a valid density matrix");
        }
        if (out[i] <= tol.zero) {
            out[i] = 0;
        }
    }
    return out;
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix &m) {
    EigenDecomposition eig = hermitian_eig(m);
    eig.values = clipped_psd_spectrum(eig.values, clip_tolerance(m), "psd_sqrt");
    ComplexMatrix r = spectral_apply(eig, [](double v) { return std::sqrt(v); });
    return (r + r.adjoint()) * 0.5;
}

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
double antisymmetry_defect(const DenseMatrix<Scalar> &m) {
    return row_sum_norm(m + m.transpose());
}

/// Pfaffian by Parlett-Reid tridiagonalization with partial pivoting. Takes a working copy.
template <typename Scalar>
Scalar pfaffian_in_place(DenseMatrix<Scalar> &a) {
    const Eigen::Index n = a.rows();
    if (n == 0) {
        return Scalar(1);
    }
    Scalar result(1);
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        Eigen::Index kp;
        a.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
        kp += k + 1;
        if (kp != k + 1) {
            a.row(k + 1).swap(a.row(kp));
            a.col(k + 1).swap(a.col(kp));
            result = -result;
        }
        if (a(k + 1, k) == Scalar(0)) {
            return Scalar(0);
        }
        result *= a(k, k + 1);
        const Eigen::Index rest = n - k - 2;
        if (rest > 0) {
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau = a.row(k).tail(rest).transpose() / a(k, k + 1);
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col = a.col(k + 1).tail(rest);
            a.bottomRightCorner(rest, rest).noalias() += tau * col.transpose();
            a.bottomRightCorner(rest, rest).noalias() -= col * tau.transpose();
        }
    }
    return result;
}

template <typename Scalar>
Scalar pfaffian(const DenseMatrix<Scalar> &m) {
    if (m.rows() != m.cols()) {
        throw ValidationError("pfaffian: matrix is not square");
    }
    if (m.rows() % 2 != 0) {
        throw ValidationError("pfaffian: odd dimension " + std::to_string(m.rows()));
    }
    double defect = antisymmetry_defect(m);
    if (defect > 1e-12 * std::max(row_sum_norm(m), 1e-300)) {
        throw ValidationError("pfaffian: matrix not antisymmetric, ||m + m^T||_inf = " + format_double(defect));
    }
    DenseMatrix<Scalar> work = m;
    return pfaffian_in_place(work);
}

}  // namespace swssb
