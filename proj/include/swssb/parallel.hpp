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
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace swssb {

inline uint64_t splitmix64_mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Counter-based stream: output k is a hash of (key, k). Satisfies UniformRandomBitGenerator.
class CounterRng {
   public:
    using result_type = uint64_t;

    CounterRng() : CounterRng(0, 0) {
    }
    CounterRng(uint64_t seed, uint64_t stream)
        : key_(splitmix64_mix(splitmix64_mix(seed ^ 0x5157A8E3C1D2F00Dull) + stream * 0x9E3779B97F4A7C15ull)) {
    }

    static constexpr result_type min() {
        return 0;
    }
    static constexpr result_type max() {
        return ~uint64_t{0};
    }
    result_type operator()() {
        return splitmix64_mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ull);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }
    bool bernoulli(double p) {
        return uniform() < p;
    }
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

   private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls f(i) for i in [0, n) on up to `threads` workers. f must only write to slot i.
template <typename F>
void parallel_for(size_t n, unsigned threads, F &&f) {
    threads = static_cast<unsigned>(std::min<size_t>(resolve_threads(threads), std::max<size_t>(n, 1)));
    if (threads <= 1) {
        for (size_t i = 0; i < n; i++) {
            f(i);
        }
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; t++) {
        pool.emplace_back(worker);
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

template <typename T, typename F>
std::vector<T> parallel_map(size_t n, unsigned threads, F &&f) {
    std::vector<T> out(n);
    parallel_for(n, threads, [&](size_t i) { out[i] = f(i); });
    return out;
}

/// Sum with a fixed binary tree shape, independent of how the terms were produced.
inline double pairwise_sum(const double *v, size_t n) {
    if (n == 0) {
        return 0;
    }
    if (n <= 8) {
        double s = 0;
        for (size_t i = 0; i < n; i++) {
            s += v[i];
        }
        return s;
    }
    size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double> &v) {
    return pairwise_sum(v.data(), v.size());
}

struct MeanStderr {
    double mean = 0;
    double stderr_ = 0;
};

inline MeanStderr mean_and_stderr(const std::vector<double> &v) {
    MeanStderr r;
    size_t n = v.size();
    if (n == 0) {
        return r;
    }
    r.mean = pairwise_sum(v) / static_cast<double>(n);
    if (n > 1) {
        std::vector<double> sq(n);
        for (size_t i = 0; i < n; i++) {
            sq[i] = (v[i] - r.mean) * (v[i] - r.mean);
        }
        double var = pairwise_sum(sq) / static_cast<double>(n - 1);
        r.stderr_ = std::sqrt(var / static_cast<double>(n));
    }
    return r;
}

}  // namespace swssb
