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

#include <array>
#include <cstddef>
#include <string>
#include <utility>

#include "swssb/common.hpp"

namespace swssb {

/// Periodic hypercubic lattice. Sites are row-major (x fastest); link d*site + k points in +k from site.
struct Lattice {
    int d = 1;
    int L = 1;

    Lattice() = default;
    Lattice(int dim, int size) : d(dim), L(size) {
        if (dim < 1 || dim > 3) {
            throw ValidationError("Lattice: dimension must be 1, 2 or 3, got " + std::to_string(dim));
        }
        if (size < 2) {
            throw ValidationError("Lattice: linear size must be >= 2, got " + std::to_string(size));
        }
    }

    size_t num_sites() const {
        size_t n = 1;
        for (int k = 0; k < d; k++) {
            n *= static_cast<size_t>(L);
        }
        return n;
    }
    size_t num_links() const {
        return static_cast<size_t>(d) * num_sites();
    }

    std::array<int, 3> coords(size_t site) const {
        std::array<int, 3> c{0, 0, 0};
        for (int k = 0; k < d; k++) {
            c[k] = static_cast<int>(site % static_cast<size_t>(L));
            site /= static_cast<size_t>(L);
        }
        return c;
    }
    size_t site(std::array<int, 3> c) const {
        size_t s = 0;
        for (int k = d - 1; k >= 0; k--) {
            int v = ((c[k] % L) + L) % L;
            s = s * static_cast<size_t>(L) + static_cast<size_t>(v);
        }
        return s;
    }
    size_t shifted(size_t s, int dir, int amount) const {
        auto c = coords(s);
        c[dir] += amount;
        return site(c);
    }
    size_t link(size_t s, int dir) const {
        return static_cast<size_t>(d) * s + static_cast<size_t>(dir);
    }
    std::pair<size_t, size_t> link_ends(size_t e) const {
        size_t s = e / static_cast<size_t>(d);
        int dir = static_cast<int>(e % static_cast<size_t>(d));
        return {s, shifted(s, dir, 1)};
    }
};

}  // namespace swssb
