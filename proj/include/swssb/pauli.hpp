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

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "swssb/bitvec.hpp"
#include "swssb/common.hpp"

namespace swssb {

/// i^phase times a tensor product of single-qubit Paulis, with (x,z) = (1,1) read as Y.
class PauliString {
   public:
    PauliString() = default;
    explicit PauliString(size_t n) : xs(n), zs(n), phase(0) {
    }

    BitVec xs;
    BitVec zs;
    uint8_t phase = 0;

    size_t num_qubits() const {
        return xs.size();
    }

    static PauliString identity(size_t n) {
        return PauliString(n);
    }

    /// Parses forms like "XIZ" or "-iY_Z". '_' and 'I' are identity.
    static PauliString parse(const std::string &text) {
        size_t pos = 0;
        uint8_t ph = 0;
        if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
            if (text[pos] == '-') {
                ph = 2;
            }
            pos++;
        }
        if (pos < text.size() && text[pos] == 'i') {
            ph = (ph + 1) & 3;
            pos++;
        }
        PauliString p(text.size() - pos);
        for (size_t q = 0; pos < text.size(); pos++, q++) {
            char c = text[pos];
            if (c == 'X') {
                p.xs.set(q, true);
            } else if (c == 'Z') {
                p.zs.set(q, true);
            } else if (c == 'Y') {
                p.xs.set(q, true);
                p.zs.set(q, true);
            } else if (c != 'I' && c != '_') {
                throw ValidationError("PauliString::parse: bad character '" + std::string(1, c) + "' in " + text);
            }
        }
        p.phase = ph;
        return p;
    }

    /// n-qubit string with the given letters placed on the given sites.
    static PauliString from_sites(size_t n, const std::vector<std::pair<size_t, char>> &sites) {
        PauliString p(n);
        for (auto [q, c] : sites) {
            if (q >= n) {
                throw ValidationError("PauliString::from_sites: site " + std::to_string(q) + " out of range");
            }
            p.set_letter(q, c);
        }
        return p;
    }

    char letter(size_t q) const {
        bool x = xs.get(q), z = zs.get(q);
        return x ? (z ? 'Y' : 'X') : (z ? 'Z' : 'I');
    }

    void set_letter(size_t q, char c) {
        switch (c) {
            case 'I':
            case '_':
                xs.set(q, false);
                zs.set(q, false);
                break;
            case 'X':
                xs.set(q, true);
                zs.set(q, false);
                break;
            case 'Y':
                xs.set(q, true);
                zs.set(q, true);
                break;
            case 'Z':
                xs.set(q, false);
                zs.set(q, true);
                break;
            default:
                throw ValidationError("PauliString: bad letter '" + std::string(1, c) + "'");
        }
    }

    std::string str() const {
        static const char *prefix[] = {"+", "+i", "-", "-i"};
        std::string s = prefix[phase & 3];
        for (size_t q = 0; q < num_qubits(); q++) {
            s += letter(q);
        }
        return s;
    }

    size_t weight() const {
        size_t w = 0;
        for (size_t k = 0; k < xs.num_words(); k++) {
            w += std::popcount(xs.word(k) | zs.word(k));
        }
        return w;
    }

    bool is_identity_up_to_phase() const {
        return !xs.any() && !zs.any();
    }

    bool is_hermitian() const {
        return (phase & 1) == 0;
    }

    bool commutes(const PauliString &o) const {
        return !(BitVec::dot(xs, o.zs) ^ BitVec::dot(zs, o.xs));
    }

    /// Exponent a with P = i^a X^x Z^z.
    uint8_t xz_phase() const {
        return static_cast<uint8_t>((phase + BitVec::and_count(xs, zs)) & 3);
    }

    static PauliString from_xz_phase(BitVec x, BitVec z, unsigned a) {
        PauliString p;
        p.xs = std::move(x);
        p.zs = std::move(z);
        p.phase = static_cast<uint8_t>((a + 4 * p.xs.size() - BitVec::and_count(p.xs, p.zs)) & 3);
        return p;
    }

    PauliString operator*(const PauliString &o) const {
        unsigned a = xz_phase() + o.xz_phase() + 2 * (BitVec::and_count(zs, o.xs) & 1);
        return from_xz_phase(xs ^ o.xs, zs ^ o.zs, a);
    }
    PauliString &operator*=(const PauliString &o) {
        *this = *this * o;
        return *this;
    }

    /// Entrywise complex conjugate in the computational basis.
    PauliString conj() const {
        PauliString p = *this;
        p.phase = static_cast<uint8_t>((8 - phase - 2 * BitVec::and_count(xs, zs)) & 3);
        return p;
    }

    PauliString adjoint() const {
        return from_xz_phase(xs, zs, 8 - xz_phase() + 2 * BitVec::and_count(xs, zs));
    }

    PauliString negated() const {
        PauliString p = *this;
        p.phase = (p.phase + 2) & 3;
        return p;
    }

    /// Places this string on qubits [offset, offset + n) of a larger register.
    PauliString embedded(size_t total, size_t offset) const {
        PauliString p(total);
        for (size_t q = 0; q < num_qubits(); q++) {
            p.xs.set(q + offset, xs.get(q));
            p.zs.set(q + offset, zs.get(q));
        }
        p.phase = phase;
        return p;
    }

    /// Coefficient c and target with P|b> = c|target>, for n <= 64.
    std::pair<cplx, uint64_t> act_on_basis(uint64_t b) const {
        uint64_t x = xs.low_word(), z = zs.low_word();
        unsigned a = xz_phase() + 2 * (std::popcount(z & b) & 1);
        static const cplx powers[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return {powers[a & 3], b ^ x};
    }

    bool operator==(const PauliString &o) const {
        return phase == o.phase && xs == o.xs && zs == o.zs;
    }
    bool operator!=(const PauliString &o) const {
        return !(*this == o);
    }
};

}  // namespace swssb
