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

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace swssb {

/// Fixed-length packed bit vector.
class BitVec {
   public:
    BitVec() = default;
    explicit BitVec(size_t n) : n_(n), words_((n + 63) / 64, 0) {
    }

    size_t size() const {
        return n_;
    }
    size_t num_words() const {
        return words_.size();
    }
    uint64_t word(size_t k) const {
        return words_[k];
    }
    uint64_t &word(size_t k) {
        return words_[k];
    }

    bool get(size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1;
    }
    void set(size_t i, bool v) {
        uint64_t m = uint64_t{1} << (i & 63);
        if (v) {
            words_[i >> 6] |= m;
        } else {
            words_[i >> 6] &= ~m;
        }
    }
    void flip(size_t i) {
        words_[i >> 6] ^= uint64_t{1} << (i & 63);
    }

    BitVec &operator^=(const BitVec &o) {
        for (size_t k = 0; k < words_.size(); k++) {
            words_[k] ^= o.words_[k];
        }
        return *this;
    }
    BitVec operator^(const BitVec &o) const {
        BitVec r = *this;
        r ^= o;
        return r;
    }
    BitVec operator&(const BitVec &o) const {
        BitVec r = *this;
        for (size_t k = 0; k < words_.size(); k++) {
            r.words_[k] &= o.words_[k];
        }
        return r;
    }

    size_t popcount() const {
        size_t c = 0;
        for (uint64_t w : words_) {
            c += std::popcount(w);
        }
        return c;
    }
    /// Parity of popcount(a & b).
    static bool dot(const BitVec &a, const BitVec &b) {
        uint64_t acc = 0;
        for (size_t k = 0; k < a.words_.size(); k++) {
            acc ^= a.words_[k] & b.words_[k];
        }
        return std::popcount(acc) & 1;
    }
    static size_t and_count(const BitVec &a, const BitVec &b) {
        size_t c = 0;
        for (size_t k = 0; k < a.words_.size(); k++) {
            c += std::popcount(a.words_[k] & b.words_[k]);
        }
        return c;
    }
    bool any() const {
        for (uint64_t w : words_) {
            if (w) {
                return true;
            }
        }
        return false;
    }
    uint64_t low_word() const {
        return words_.empty() ? 0 : words_[0];
    }

    std::vector<size_t> ones() const {
        std::vector<size_t> r;
        for (size_t i = 0; i < n_; i++) {
            if (get(i)) {
                r.push_back(i);
            }
        }
        return r;
    }

    std::string str() const {
        std::string s(n_, '0');
        for (size_t i = 0; i < n_; i++) {
            if (get(i)) {
                s[i] = '1';
            }
        }
        return s;
    }

    bool operator==(const BitVec &o) const {
        return n_ == o.n_ && words_ == o.words_;
    }
    bool operator!=(const BitVec &o) const {
        return !(*this == o);
    }
    bool operator<(const BitVec &o) const {
        if (n_ != o.n_) {
            return n_ < o.n_;
        }
        return words_ < o.words_;
    }

    size_t hash() const {
        size_t h = n_ * 0x9E3779B97F4A7C15ull;
        for (uint64_t w : words_) {
            h ^= std::hash<uint64_t>()(w) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        }
        return h;
    }

   private:
    size_t n_ = 0;
    std::vector<uint64_t> words_;
};

struct BitVecHash {
    size_t operator()(const BitVec &b) const {
        return b.hash();
    }
};

}  // namespace swssb
