// Copyright 2026 The dynem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <vector>

#include "branch.hpp"
#include "circuit.hpp"
#include "hamiltonians.hpp"
#include "statevector.hpp"

namespace dynem {

/// Final noiseless state of a gate-only circuit started from |0...0>.
inline StateVector simulate_unitary(const DynamicCircuit &circuit, StateVector psi) {
    if (!circuit.is_gate_only()) throw std::invalid_argument("simulate_unitary: circuit has dynamic instructions");
    if (psi.num_qubits() != circuit.num_qubits()) throw std::invalid_argument("simulate_unitary: size mismatch");
    for (const auto &inst : circuit.instructions()) {
        if (auto g = std::get_if<Gate>(&inst.op)) psi.apply(*g);
    }
    return psi;
}

inline StateVector simulate_unitary(const DynamicCircuit &circuit) {
    return simulate_unitary(circuit, StateVector(circuit.num_qubits()));
}

/// Exact <psi|O|psi> on the data qubits. Dynamic circuits are evaluated by
/// summing over measurement branches, merging those that coincide.
inline double statevector_expectation(const DynamicCircuit &circuit, const PauliSum &observable) {
    constexpr std::size_t kMaxQubits = 24;
    if (circuit.num_qubits() > kMaxQubits) throw std::invalid_argument("statevector_expectation: at most 24 qubits");
    if (observable.num_qubits() != circuit.data_qubits().size()) {
        throw std::invalid_argument("statevector_expectation: observable size must equal data qubit count");
    }
    if (circuit.is_gate_only()) return observable.expectation(simulate_unitary(circuit), circuit.data_qubits());
    std::vector<double> coeffs;
    std::vector<kernels::PauliMask> masks;
    for (const auto &t : observable.terms()) {
        coeffs.push_back(t.coeff);
        masks.push_back(t.pauli.mask(circuit.data_qubits()));
    }
    std::vector<cplx> init(std::size_t{1} << circuit.num_qubits(), 0.0);
    init[0] = 1.0;
    return ensemble_expectation(circuit, init, coeffs, masks);
}

} // namespace dynem
