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

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "circuit.hpp"
#include "hamiltonians.hpp"

namespace dynem {

enum class EntanglerKind { StaticLadder, Dynamic };
enum class GadgetKind { Static, Dynamic };
enum class PauliBasis { ZZ, XX, YY };

/// Hardware-efficient ansatz: (layers + 1) rotation layers of RY then RZ on
/// every spin, separated by entangling layers.
struct AnsatzSpec {
    std::size_t n = 2;
    std::size_t layers = 2;
    std::vector<double> theta;
    EntanglerKind entangler = EntanglerKind::Dynamic;

    std::size_t parameter_count() const { return 2 * (layers + 1) * n; }

    void validate() const {
        if (n < 2) throw std::invalid_argument("AnsatzSpec: need at least 2 spins");
        if (theta.size() != parameter_count()) {
            throw std::invalid_argument("AnsatzSpec: expected " + std::to_string(parameter_count()) +
                                        " parameters, got " + std::to_string(theta.size()));
        }
    }
};

/// First-order Trotter evolution for time t in `steps` steps.
struct TrotterSpec {
    Model model = Model::Tfim;
    std::size_t n = 2;
    double h = 0.0;
    double t = 0.25;
    std::size_t steps = 5;
    GadgetKind gadget = GadgetKind::Dynamic;

    double dt() const { return t / static_cast<double>(steps); }

    void validate() const {
        if (n < 2) throw std::invalid_argument("TrotterSpec: need at least 2 spins");
        if (steps < 1) throw std::invalid_argument("TrotterSpec: need at least one step");
        if (!std::isfinite(t) || !std::isfinite(h)) throw std::invalid_argument("TrotterSpec: non-finite parameter");
    }
};

/// Global folding count; the noise scale is 1 + 2k.
struct FoldSpec {
    std::size_t k = 0;
    double lambda() const { return 1.0 + 2.0 * static_cast<double>(k); }
};

/// Register placement of data spins and ancillas.
struct Layout {
    std::size_t num_qubits = 0;
    std::vector<Qubit> data;
    std::vector<Qubit> ancillas;

    DynamicCircuit empty_circuit() const { return DynamicCircuit(num_qubits, data); }
};

/// d0 a0 d1 a1 ... d_{n-1}: one ancilla on every bond.
inline Layout bond_interleaved_layout(std::size_t n) {
    Layout l;
    l.num_qubits = 2 * n - 1;
    for (std::size_t i = 0; i < n; ++i) l.data.push_back(2 * i);
    for (std::size_t i = 0; i + 1 < n; ++i) l.ancillas.push_back(2 * i + 1);
    return l;
}

/// d0 a0 d1 d2 a1 d3 ...: one ancilla per odd-layer brick, ceil((n-1)/2) total.
inline Layout brick_layout(std::size_t n) {
    Layout l;
    Qubit q = 0;
    for (std::size_t i = 0; i < n; ++i) {
        l.data.push_back(q++);
        if (i % 2 == 0 && i + 1 < n) l.ancillas.push_back(q++);
    }
    l.num_qubits = q;
    return l;
}

inline Layout data_only_layout(std::size_t n) {
    Layout l;
    l.num_qubits = n;
    for (std::size_t i = 0; i < n; ++i) l.data.push_back(i);
    return l;
}

// Entanglers ------------------------------------------------------------------

/// CNOT ladder executed from the bottom of the chain upward, so every target
/// receives the parity of itself and its original upper neighbour:
/// x_{k+1} -> x_k xor x_{k+1}. Two-qubit depth n - 1.
inline void append_static_ladder(DynamicCircuit &c, const std::vector<Qubit> &data) {
    for (std::size_t k = data.size() - 1; k-- > 0;) c.gate(GateKind::CNOT, {data[k], data[k + 1]});
}

inline void append_static_ladder_inverse(DynamicCircuit &c, const std::vector<Qubit> &data) {
    for (std::size_t k = 0; k + 1 < data.size(); ++k) c.gate(GateKind::CNOT, {data[k], data[k + 1]});
}

/// Constant-depth ladder: ancilla k copies data k, then writes it into data
/// k+1; the ancillas are read out in the X basis and the resulting phase
/// (-1)^{m_k x_k}, with x_k the prefix parity of the new data register, is
/// undone by Z on data j conditioned on the parity of m_k for k >= j.
inline void append_dynamic_entangler(DynamicCircuit &c, const std::vector<Qubit> &data,
                                     const std::vector<Qubit> &anc) {
    const std::size_t bonds = data.size() - 1;
    if (anc.size() < bonds) throw std::invalid_argument("dynamic entangler: need one ancilla per bond");
    for (std::size_t k = 0; k < bonds; ++k) c.gate(GateKind::CNOT, {data[k], anc[k]});
    for (std::size_t k = 0; k < bonds; ++k) c.gate(GateKind::CNOT, {anc[k], data[k + 1]});
    for (std::size_t k = 0; k < bonds; ++k) c.gate(GateKind::H, {anc[k]});
    c.barrier_all();
    std::vector<Clbit> m(bonds);
    for (std::size_t k = 0; k < bonds; ++k) {
        m[k] = c.add_clbit();
        c.measure(anc[k], m[k]);
    }
    for (std::size_t j = 0; j < bonds; ++j) {
        std::vector<Clbit> cond(m.begin() + static_cast<std::ptrdiff_t>(j), m.end());
        c.conditional(make_gate(GateKind::Z, {data[j]}), std::move(cond));
    }
    for (std::size_t k = 0; k < bonds; ++k) c.reset(anc[k]);
    c.barrier_all();
}

/// Adjoint of the ladder: the mirrored dynamic ladder (ancilla k copies data
/// k+1 and writes it into data k) conjugated by Hadamards on every data qubit.
inline void append_inverse_entangler(DynamicCircuit &c, const std::vector<Qubit> &data,
                                     const std::vector<Qubit> &anc) {
    const std::size_t bonds = data.size() - 1;
    if (anc.size() < bonds) throw std::invalid_argument("inverse entangler: need one ancilla per bond");
    for (Qubit q : data) c.gate(GateKind::H, {q});
    for (std::size_t k = 0; k < bonds; ++k) c.gate(GateKind::CNOT, {data[k + 1], anc[k]});
    for (std::size_t k = 0; k < bonds; ++k) c.gate(GateKind::CNOT, {anc[k], data[k]});
    for (std::size_t k = 0; k < bonds; ++k) c.gate(GateKind::H, {anc[k]});
    c.barrier_all();
    std::vector<Clbit> m(bonds);
    for (std::size_t k = 0; k < bonds; ++k) {
        m[k] = c.add_clbit();
        c.measure(anc[k], m[k]);
    }
    for (std::size_t j = 1; j <= bonds; ++j) {
        std::vector<Clbit> cond(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(j));
        c.conditional(make_gate(GateKind::Z, {data[j]}), std::move(cond));
    }
    for (std::size_t k = 0; k < bonds; ++k) c.reset(anc[k]);
    c.barrier_all();
    for (Qubit q : data) c.gate(GateKind::H, {q});
}

inline DynamicCircuit dynamic_entangler(std::size_t n) {
    if (n < 2) throw std::invalid_argument("dynamic_entangler: n must be >= 2");
    const auto l = bond_interleaved_layout(n);
    auto c = l.empty_circuit();
    append_dynamic_entangler(c, l.data, l.ancillas);
    return c;
}

inline DynamicCircuit inverse_entangler(std::size_t n) {
    if (n < 2) throw std::invalid_argument("inverse_entangler: n must be >= 2");
    const auto l = bond_interleaved_layout(n);
    auto c = l.empty_circuit();
    append_inverse_entangler(c, l.data, l.ancillas);
    return c;
}

inline DynamicCircuit static_ladder(std::size_t n) {
    if (n < 2) throw std::invalid_argument("static_ladder: n must be >= 2");
    const auto l = data_only_layout(n);
    auto c = l.empty_circuit();
    append_static_ladder(c, l.data);
    return c;
}

// Two-body rotation gadgets -------------------------------------------------

struct Bond {
    Qubit first;
    Qubit second;
    Qubit ancilla; ///< ignored by the static variant
};

namespace detail {

inline void basis_in(DynamicCircuit &c, Qubit q, PauliBasis b) {
    if (b == PauliBasis::XX) {
        c.gate(GateKind::H, {q});
    } else if (b == PauliBasis::YY) {
        c.gate(GateKind::SDG, {q});
        c.gate(GateKind::H, {q});
    }
}

inline void basis_out(DynamicCircuit &c, Qubit q, PauliBasis b) {
    if (b == PauliBasis::XX) {
        c.gate(GateKind::H, {q});
    } else if (b == PauliBasis::YY) {
        c.gate(GateKind::H, {q});
        c.gate(GateKind::S, {q});
    }
}

inline void check_bonds(const std::vector<Bond> &bonds, bool with_ancilla) {
    std::vector<Qubit> used;
    for (const auto &b : bonds) {
        used.push_back(b.first);
        used.push_back(b.second);
        if (with_ancilla) used.push_back(b.ancilla);
    }
    auto sorted = used;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("rotation gadget: data qubits and ancilla must be distinct");
    }
}

} // namespace detail

/// exp(-i theta/2 P x P) on every bond of one brick layer. The dynamic variant
/// computes the bond parity on the ancilla, rotates it, reads it out in the X
/// basis after a global barrier (all measurements of the layer start
/// together) and undoes the measurement phase with Z on both data qubits.
inline void append_rotation_layer(DynamicCircuit &c, const std::vector<Bond> &bonds, double theta, PauliBasis basis,
                                  GadgetKind kind) {
    detail::check_bonds(bonds, kind == GadgetKind::Dynamic);
    for (const auto &b : bonds) {
        detail::basis_in(c, b.first, basis);
        detail::basis_in(c, b.second, basis);
    }
    if (kind == GadgetKind::Static) {
        for (const auto &b : bonds) {
            c.gate(GateKind::CNOT, {b.first, b.second});
            c.gate(GateKind::RZ, {b.second}, {theta});
            c.gate(GateKind::CNOT, {b.first, b.second});
        }
    } else {
        for (const auto &b : bonds) c.gate(GateKind::CNOT, {b.first, b.ancilla});
        for (const auto &b : bonds) c.gate(GateKind::CNOT, {b.second, b.ancilla});
        for (const auto &b : bonds) c.gate(GateKind::RZ, {b.ancilla}, {theta});
        for (const auto &b : bonds) c.gate(GateKind::H, {b.ancilla});
        c.barrier_all();
        std::vector<Clbit> m;
        for (const auto &b : bonds) {
            m.push_back(c.add_clbit());
            c.measure(b.ancilla, m.back());
        }
        for (std::size_t i = 0; i < bonds.size(); ++i) {
            c.conditional(make_gate(GateKind::Z, {bonds[i].first}), {m[i]});
            c.conditional(make_gate(GateKind::Z, {bonds[i].second}), {m[i]});
        }
        for (const auto &b : bonds) c.reset(b.ancilla);
        c.barrier_all();
    }
    for (const auto &b : bonds) {
        detail::basis_out(c, b.first, basis);
        detail::basis_out(c, b.second, basis);
    }
}

/// Standalone gadget on a register of max(d1, d2, ancilla) + 1 qubits whose
/// data qubits are {d1, d2}.
inline DynamicCircuit rzz_gadget(double theta, Qubit d1, Qubit d2, Qubit ancilla, PauliBasis basis = PauliBasis::ZZ) {
    if (d1 == d2 || ancilla == d1 || ancilla == d2) {
        throw std::invalid_argument("rzz_gadget: data qubits and ancilla must be distinct");
    }
    DynamicCircuit c(std::max({d1, d2, ancilla}) + 1, {d1, d2});
    append_rotation_layer(c, {{d1, d2, ancilla}}, theta, basis, GadgetKind::Dynamic);
    return c;
}

// Hardware-efficient ansatz -------------------------------------------------

inline Layout hea_layout(const AnsatzSpec &spec) {
    return spec.entangler == EntanglerKind::Dynamic ? bond_interleaved_layout(spec.n) : data_only_layout(spec.n);
}

namespace detail {

inline void rotation_layer(DynamicCircuit &c, const std::vector<Qubit> &data, const std::vector<double> &theta,
                           std::size_t layer, double sign) {
    const std::size_t n = data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t base = 2 * (layer * n + i);
        if (sign > 0) {
            c.gate(GateKind::RY, {data[i]}, {theta[base]});
            c.gate(GateKind::RZ, {data[i]}, {theta[base + 1]});
        } else {
            c.gate(GateKind::RZ, {data[i]}, {-theta[base + 1]});
            c.gate(GateKind::RY, {data[i]}, {-theta[base]});
        }
    }
}

} // namespace detail

inline void append_hea(DynamicCircuit &c, const Layout &l, const AnsatzSpec &spec) {
    for (std::size_t layer = 0; layer < spec.layers; ++layer) {
        detail::rotation_layer(c, l.data, spec.theta, layer, +1);
        if (spec.entangler == EntanglerKind::Dynamic) append_dynamic_entangler(c, l.data, l.ancillas);
        else append_static_ladder(c, l.data);
    }
    detail::rotation_layer(c, l.data, spec.theta, spec.layers, +1);
}

/// Hand-built adjoint: rotation layers reversed with negated angles, and each
/// entangler replaced by the inverse entangler.
inline void append_hea_inverse(DynamicCircuit &c, const Layout &l, const AnsatzSpec &spec) {
    detail::rotation_layer(c, l.data, spec.theta, spec.layers, -1);
    for (std::size_t layer = spec.layers; layer-- > 0;) {
        if (spec.entangler == EntanglerKind::Dynamic) append_inverse_entangler(c, l.data, l.ancillas);
        else append_static_ladder_inverse(c, l.data);
        detail::rotation_layer(c, l.data, spec.theta, layer, -1);
    }
}

inline DynamicCircuit hea_circuit(const AnsatzSpec &spec) {
    spec.validate();
    const auto l = hea_layout(spec);
    auto c = l.empty_circuit();
    append_hea(c, l, spec);
    return c;
}

// Trotter evolution -----------------------------------------------------------

inline Layout trotter_layout(const TrotterSpec &spec) {
    return spec.gadget == GadgetKind::Dynamic ? brick_layout(spec.n) : data_only_layout(spec.n);
}

namespace detail {

/// Bonds (2j, 2j+1) when `odd` (the first brick layer), else (2j+1, 2j+2);
/// bond j of either layer uses ancilla j.
inline std::vector<Bond> brick_bonds(const Layout &l, std::size_t n, bool odd) {
    std::vector<Bond> out;
    for (std::size_t j = 0;; ++j) {
        const std::size_t a = odd ? 2 * j : 2 * j + 1;
        if (a + 1 >= n) break;
        const Qubit anc = l.ancillas.empty() ? 0 : l.ancillas.at(j);
        out.push_back({l.data[a], l.data[a + 1], anc});
    }
    return out;
}

inline void trotter_step(DynamicCircuit &c, const Layout &l, const TrotterSpec &spec, double sign) {
    const double dt = spec.dt();
    const double field = sign * 2.0 * spec.h * dt;
    const double coupling = sign * 2.0 * dt;
    const GateKind field_gate = spec.model == Model::Tfim ? GateKind::RX : GateKind::RZ;
    const std::vector<PauliBasis> bases = spec.model == Model::Tfim
                                              ? std::vector<PauliBasis>{PauliBasis::ZZ}
                                              : std::vector<PauliBasis>{PauliBasis::XX, PauliBasis::YY, PauliBasis::ZZ};
    auto field_layer = [&] {
        for (Qubit q : l.data) c.gate(field_gate, {q}, {field});
    };
    auto brick = [&](bool odd, bool reversed) {
        const auto bonds = brick_bonds(l, spec.n, odd);
        if (bonds.empty()) return;
        if (!reversed) {
            for (auto b : bases) append_rotation_layer(c, bonds, coupling, b, spec.gadget);
        } else {
            for (auto it = bases.rbegin(); it != bases.rend(); ++it) {
                append_rotation_layer(c, bonds, coupling, *it, spec.gadget);
            }
        }
    };
    if (sign > 0) {
        field_layer();
        brick(true, false);
        brick(false, false);
    } else {
        brick(false, true);
        brick(true, true);
        field_layer();
    }
}

} // namespace detail

inline void append_trotter(DynamicCircuit &c, const Layout &l, const TrotterSpec &spec) {
    for (std::size_t s = 0; s < spec.steps; ++s) detail::trotter_step(c, l, spec, +1);
}

/// Steps in reverse with every rotation angle negated; dynamic gadgets keep
/// their structure and only the ancilla rotation flips sign.
inline void append_trotter_inverse(DynamicCircuit &c, const Layout &l, const TrotterSpec &spec) {
    for (std::size_t s = 0; s < spec.steps; ++s) detail::trotter_step(c, l, spec, -1);
}

inline DynamicCircuit trotter_circuit(const TrotterSpec &spec) {
    spec.validate();
    const auto l = trotter_layout(spec);
    auto c = l.empty_circuit();
    append_trotter(c, l, spec);
    return c;
}

// Folding -------------------------------------------------------------------

using BuilderTarget = std::variant<AnsatzSpec, TrotterSpec>;

/// C (C_inv C)^k with hand-built inverses; every segment allocates fresh
/// classical bits.
inline DynamicCircuit fold_circuit(const BuilderTarget &target, FoldSpec fold) {
    if (fold.k > 2) throw std::invalid_argument("fold_circuit: k must be 0, 1 or 2");
    if (auto a = std::get_if<AnsatzSpec>(&target)) {
        a->validate();
        const auto l = hea_layout(*a);
        auto c = l.empty_circuit();
        append_hea(c, l, *a);
        for (std::size_t i = 0; i < fold.k; ++i) {
            append_hea_inverse(c, l, *a);
            append_hea(c, l, *a);
        }
        return c;
    }
    const auto &t = std::get<TrotterSpec>(target);
    t.validate();
    const auto l = trotter_layout(t);
    auto c = l.empty_circuit();
    append_trotter(c, l, t);
    for (std::size_t i = 0; i < fold.k; ++i) {
        append_trotter_inverse(c, l, t);
        append_trotter(c, l, t);
    }
    return c;
}

/// Builder names addressable from the command line.
inline const std::vector<std::string> &builder_names() {
    static const std::vector<std::string> names{"hea-static", "hea-dynamic", "trotter-static", "trotter-dynamic"};
    return names;
}

/// Depth counted in two-qubit gates only.
inline std::size_t two_qubit_depth(const DynamicCircuit &c) {
    std::vector<std::size_t> depth(c.num_qubits(), 0);
    std::size_t best = 0;
    for (const auto &inst : c.instructions()) {
        if (!is_two_qubit_gate(inst)) continue;
        const auto qs = touched_qubits(inst);
        const std::size_t d = std::max(depth[qs[0]], depth[qs[1]]) + 1;
        depth[qs[0]] = depth[qs[1]] = d;
        best = std::max(best, d);
    }
    return best;
}

} // namespace dynem
