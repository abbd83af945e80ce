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

// Prints the five diagnostics of the parity-projected state and its CP circuit.

#include <iostream>

#include "swssb/exact.hpp"
#include "swssb/stabilizer.hpp"

int main() {
    using namespace swssb;
    for (size_t n = 2; n <= 6; n++) {
        DensityMatrix rho = rho_parity(n);
        PauliString o = PauliString::from_sites(n, {{0, 'Z'}, {n / 2, 'Z'}});
        Diagnostics d = all_diagnostics(rho, o);
        std::cout << "N=" << n << " R1=" << d.r1 << " R2=" << d.r2 << " F=" << d.f << " D1=" << d.d1
                  << " Drel=" << d.drel.str() << "\n";
    }
    CircuitIR c = emit_cp_circuit(parity_stabilizer_state(4), CpStrategy::Ladder);
    std::cout << c.str();
    return 0;
}
