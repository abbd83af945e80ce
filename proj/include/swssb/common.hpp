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

#include <cmath>
#include <cstdio>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace swssb {

using cplx = std::complex<double>;

/// Input rejected before any computation ran (maps to CLI exit code 2).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A computation could not be completed for a valid input.
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite value or +infinity, kept as a tag so it never leaks into output as a float.
struct ExtendedReal {
    double value = 0;
    bool infinite = false;

    static ExtendedReal inf() {
        return {0, true};
    }
    static ExtendedReal finite(double v) {
        return {v, false};
    }
    double as_double() const {
        return infinite ? std::numeric_limits<double>::infinity() : value;
    }
    std::string str() const;
};

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string ExtendedReal::str() const {
    return infinite ? std::string("inf") : format_double(value);
}

}  // namespace swssb
