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
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "swssb/common.hpp"
#include "swssb/linalg.hpp"
#include "swssb/parallel.hpp"

namespace swssb {

enum class BoundarySector { Antiperiodic, Periodic };

/// H = (i/4) gamma^T A gamma for the Jordan-Wigner transformed TFIM. Majorana 2j is
/// (prod_{i<j} X_i) Z_j and 2j+1 is (prod_{i<j} X_i) Y_j.
struct MajoranaModel {
    int L = 0;
    double J = 1;
    double g = 1;
    BoundarySector sector = BoundarySector::Antiperiodic;
    RealMatrix A;
};

inline MajoranaModel build_majorana_model(int L, double J, double g,
                                          BoundarySector sector = BoundarySector::Antiperiodic) {
    if (L < 2) {
        throw ValidationError("build_majorana_model: L must be >= 2");
    }
    MajoranaModel m{L, J, g, sector, RealMatrix::Zero(2 * L, 2 * L)};
    for (int j = 0; j < L; j++) {
        m.A(2 * j, 2 * j + 1) += -2 * J * g;
        if (j + 1 < L) {
            m.A(2 * j + 1, 2 * j + 2) += -2 * J;
        }
    }
    m.A(0, 2 * L - 1) += sector == BoundarySector::Antiperiodic ? -2 * J : 2 * J;
    m.A = (m.A - m.A.transpose()).eval();
    return m;
}

/// Thermal two-point functions <gamma_i(tau_a) gamma_j(tau_b)> of a quadratic Majorana Hamiltonian.
class ThermalPropagator {
   public:
    explicit ThermalPropagator(const MajoranaModel &model) : model_(model) {
        ComplexMatrix h = cplx(0, 1) * model.A.cast<cplx>();
        EigenDecomposition eig = hermitian_eig(h);
        lambda_ = eig.values;
        u_ = eig.vectors;
    }

    const MajoranaModel &model() const {
        return model_;
    }

    /// Matrix G(dt) with G_ij = <gamma_i(tau + dt) gamma_j(tau)>, for dt in [-beta, beta].
    ComplexMatrix matrix(double beta, double dt) const {
        if (!(beta >= 0) || std::abs(dt) > beta * (1 + 1e-12) + 1e-300) {
            throw ValidationError("ThermalPropagator: imaginary-time difference outside [-beta, beta]");
        }
        RealVector f(lambda_.size());
        for (Eigen::Index k = 0; k < lambda_.size(); k++) {
            double l = lambda_[k];
            double lg = l >= 0 ? std::log(2.0) - l * dt - std::log1p(std::exp(-beta * l))
                               : std::log(2.0) + l * (beta - dt) - std::log1p(std::exp(beta * l));
            f[k] = std::exp(lg);
        }
        return u_ * f.asDiagonal() * u_.adjoint();
    }

    cplx value(double beta, int i, double tau_a, int j, double tau_b) const {
        if (tau_a < 0 || tau_a > beta || tau_b < 0 || tau_b > beta) {
            throw ValidationError("thermal_propagator: tau outside [0, beta]");
        }
        return matrix(beta, tau_a - tau_b)(i, j);
    }

   private:
    MajoranaModel model_;
    RealVector lambda_;
    ComplexMatrix u_;
};

inline cplx thermal_propagator(const MajoranaModel &model, double beta, int i, double tau_a, int j, double tau_b) {
    return ThermalPropagator(model).value(beta, i, tau_a, j, tau_b);
}

/// Ordered operator list at times in {0, beta/2} and its contraction matrix.
struct WickMatrix {
    std::vector<std::pair<int, double>> ops;
    ComplexMatrix G;
};

/// Entries for a < b are <gamma(tau_a) gamma(tau_b)>; requires tau non-increasing along the list.
inline WickMatrix build_wick_matrix(const std::vector<std::pair<int, double>> &ops, const ComplexMatrix &g_equal,
                                    const ComplexMatrix &g_shift, double shift) {
    WickMatrix w{ops, ComplexMatrix::Zero(static_cast<Eigen::Index>(ops.size()), static_cast<Eigen::Index>(ops.size()))};
    for (size_t a = 0; a < ops.size(); a++) {
        for (size_t b = a + 1; b < ops.size(); b++) {
            double dt = ops[a].second - ops[b].second;
            cplx v;
            if (dt == 0) {
                v = g_equal(ops[a].first, ops[b].first);
            } else if (dt == shift) {
                v = g_shift(ops[a].first, ops[b].first);
            } else {
                throw ValidationError("build_wick_matrix: operator times must be non-increasing in {beta/2, 0}");
            }
            w.G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            w.G(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = -v;
        }
    }
    return w;
}

inline cplx wick_pfaffian(const WickMatrix &w) {
    if (w.ops.empty()) {
        return 1.0;
    }
    return pfaffian<cplx>(w.G);
}

/// Sorts a Majorana word by adjacent swaps and cancels squares. Returns the sign and the reduced word.
inline std::pair<int, std::vector<int>> reduce_majorana_word(std::vector<int> word) {
    int sign = 1;
    for (size_t i = 0; i < word.size(); i++) {
        for (size_t j = 0; j + 1 < word.size() - i; j++) {
            if (word[j] > word[j + 1]) {
                std::swap(word[j], word[j + 1]);
                sign = -sign;
            }
        }
    }
    std::vector<int> out;
    for (int x : word) {
        if (!out.empty() && out.back() == x) {
            out.pop_back();
        } else {
            out.push_back(x);
        }
    }
    return {sign, out};
}

struct TfimR1Terms {
    cplx string_term;   // <S(beta/2) S(0)>
    cplx parity_term;   // <Pi S(beta/2) S(0)>
    cplx parity;        // <Pi>
    cplx r1;
};

/// R1 of Z_x Z_y in the parity-even TFIM Gibbs state; one diagonalization per (L, J, g).
class TfimSolver {
   public:
    TfimSolver(int L, double J, double g) : L_(L), prop_(build_majorana_model(L, J, g, BoundarySector::Antiperiodic)) {
    }

    int L() const {
        return L_;
    }
    const ThermalPropagator &propagator() const {
        return prop_;
    }

    TfimR1Terms r1_terms(double beta, int x, int y) const {
        if (!(0 <= x && x < y && y < L_)) {
            throw ValidationError("r1_tfim: need 0 <= x < y < L");
        }
        if (!(beta > 0)) {
            throw ValidationError("r1_tfim: beta must be positive");
        }
        double half = beta / 2;
        ComplexMatrix g0 = prop_.matrix(beta, 0.0);
        ComplexMatrix gh = prop_.matrix(beta, half);
        int r = y - x;
        std::vector<int> string;
        for (int k = 2 * x + 1; k <= 2 * y; k++) {
            string.push_back(k);
        }
        std::vector<std::pair<int, double>> ops;
        for (int k : string) ops.emplace_back(k, half);
        for (int k : string) ops.emplace_back(k, 0.0);
        cplx pf_string = wick_pfaffian(build_wick_matrix(ops, g0, gh, half));

        std::vector<int> word;
        for (int k = 0; k < 2 * L_; k++) word.push_back(k);
        word.insert(word.end(), string.begin(), string.end());
        auto [sign, reduced] = reduce_majorana_word(word);
        ops.clear();
        for (int k : reduced) ops.emplace_back(k, half);
        for (int k : string) ops.emplace_back(k, 0.0);
        cplx pf_parity_string = wick_pfaffian(build_wick_matrix(ops, g0, gh, half));

        ops.clear();
        for (int k = 0; k < 2 * L_; k++) ops.emplace_back(k, 0.0);
        cplx pf_parity = wick_pfaffian(build_wick_matrix(ops, g0, gh, half));

        cplx il = std::pow(cplx(0, 1), L_ % 4);
        double rsign = (r % 2) ? -1.0 : 1.0;
        TfimR1Terms t;
        t.string_term = rsign * pf_string;
        t.parity_term = rsign * il * static_cast<double>(sign) * pf_parity_string;
        t.parity = il * pf_parity;
        cplx den = 1.0 + t.parity;
        if (std::abs(den) < 1e-12) {
            throw BackendError("r1_tfim: parity-even sector weight vanishes (1 + <Pi> = " + format_double(den.real()) +
                               " + " + format_double(den.imag()) + "i, <Pi> computed in the antiperiodic sector)");
        }
        t.r1 = (t.string_term + t.parity_term) / den;
        return t;
    }

    double r1(double beta, int x, int y) const {
        return r1_terms(beta, x, y).r1.real();
    }

   private:
    int L_;
    ThermalPropagator prop_;
};

inline double r1_tfim(int L, double J, double g, double beta, int x, int y) {
    return TfimSolver(L, J, g).r1(beta, x, y);
}

struct TfimRow {
    int L;
    double J;
    double g;
    double T;
    double beta;
    int x;
    int y;
    double r1;
};

/// R1(L/2) over a temperature x field grid, rows ordered by temperature then field.
inline std::vector<TfimRow> tfim_thermal_sweep(int L, const std::vector<double> &temps, const std::vector<double> &g_grid,
                                         unsigned threads = 1, double J = 1.0) {
    for (double T : temps) {
        if (!(T > 0)) {
            throw ValidationError("tfim_thermal_sweep: temperatures must be positive");
        }
    }
    int x = 0, y = L / 2;
    auto cols = parallel_map<std::vector<double>>(g_grid.size(), threads, [&](size_t ig) {
        TfimSolver solver(L, J, g_grid[ig]);
        std::vector<double> col;
        for (double T : temps) {
            col.push_back(solver.r1(1.0 / T, x, y));
        }
        return col;
    });
    std::vector<TfimRow> rows;
    for (size_t it = 0; it < temps.size(); it++) {
        for (size_t ig = 0; ig < g_grid.size(); ig++) {
            rows.push_back({L, J, g_grid[ig], temps[it], 1.0 / temps[it], x, y, cols[ig][it]});
        }
    }
    return rows;
}

inline std::vector<double> linear_grid(double start, double stop, double step) {
    if (!(step > 0) || stop < start) {
        throw ValidationError("grid: need step > 0 and stop >= start");
    }
    std::vector<double> out;
    size_t count = static_cast<size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (size_t i = 0; i < count; i++) {
        out.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

}  // namespace swssb
