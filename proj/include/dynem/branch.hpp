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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "circuit.hpp"
#include "statevector.hpp"

namespace dynem {

namespace detail {

inline constexpr double kBranchCutoff = 1e-26;

/// Depth-first walk over every measurement (and reset) outcome of a noiseless
/// circuit. `amps` may hold several columns: only the low `num_qubits` index
/// bits are acted on, so higher bits label independent input columns.
/// `leaf(amps, bits)` receives the unnormalized branch state.
template <class Leaf>
void walk_branches(const DynamicCircuit &circuit, std::size_t pos, std::vector<cplx> amps,
                   std::vector<std::uint8_t> bits, Leaf &leaf) {
    const auto &insts = circuit.instructions();
    for (std::size_t i = pos; i < insts.size(); ++i) {
        const auto &op = insts[i].op;
        if (auto g = std::get_if<Gate>(&op)) {
            kernels::apply_gate(amps, *g);
        } else if (auto c = std::get_if<ConditionalGate>(&op)) {
            int parity = 0;
            for (Clbit b : c->condition) parity ^= bits[b];
            if (parity) kernels::apply_gate(amps, c->gate);
        } else if (auto m = std::get_if<Measure>(&op)) {
            std::vector<cplx> one = amps;
            kernels::project(one, m->qubit, 1);
            kernels::project(amps, m->qubit, 0);
            if (kernels::norm2(one) > kBranchCutoff) {
                auto b1 = bits;
                b1[m->clbit] = 1;
                walk_branches(circuit, i + 1, std::move(one), std::move(b1), leaf);
            }
            if (kernels::norm2(amps) <= kBranchCutoff) return;
            bits[m->clbit] = 0;
        } else if (auto r = std::get_if<Reset>(&op)) {
            std::vector<cplx> one = amps;
            kernels::project(one, r->qubit, 1);
            kernels::project(amps, r->qubit, 0);
            const bool has_one = kernels::norm2(one) > kBranchCutoff;
            const bool has_zero = kernels::norm2(amps) > kBranchCutoff;
            if (has_one) {
                kernels::apply_x(one, r->qubit);
                if (!has_zero) {
                    amps = std::move(one);
                    continue;
                }
                walk_branches(circuit, i + 1, std::move(one), bits, leaf);
            }
            if (!has_zero) return;
        }
    }
    leaf(std::span<const cplx>(amps), bits);
}

} // namespace detail

/// Calls leaf(amps, bits) for every outcome branch of a noiseless circuit
/// started from `initial` (2^num_qubits amplitudes, unnormalized allowed).
template <class Leaf>
void enumerate_branches(const DynamicCircuit &circuit, std::vector<cplx> initial, Leaf &&leaf) {
    circuit.validate();
    detail::walk_branches(circuit, 0, std::move(initial), std::vector<std::uint8_t>(circuit.num_clbits(), 0), leaf);
}

/// Branch-weighted sum of <v_b| P |v_b> over all outcome branches, where each
/// observable term is a weighted Pauli mask on the full register.
inline double branch_expectation(const DynamicCircuit &circuit, const std::vector<cplx> &initial,
                                 std::span<const double> coeffs, std::span<const kernels::PauliMask> masks) {
    double total = 0.0;
    enumerate_branches(circuit, initial, [&](std::span<const cplx> amps, const std::vector<std::uint8_t> &) {
        for (std::size_t t = 0; t < masks.size(); ++t) total += coeffs[t] * kernels::pauli_expectation(amps, masks[t]);
    });
    return total;
}

/// Same quantity as branch_expectation, evaluated breadth-first over an
/// ensemble of unnormalized pure states keyed by the classical bits that are
/// still read later. Members sharing a key whose states are parallel are
/// merged, which keeps corrected measurement gadgets from multiplying the
/// branch count. The result is exact; merging only happens when it is lossless.
inline double ensemble_expectation(const DynamicCircuit &circuit, const std::vector<cplx> &initial,
                                   std::span<const double> coeffs, std::span<const kernels::PauliMask> masks) {
    circuit.validate();
    const auto &insts = circuit.instructions();
    std::vector<std::optional<std::size_t>> last_read(circuit.num_clbits());
    for (std::size_t i = 0; i < insts.size(); ++i) {
        if (auto c = std::get_if<ConditionalGate>(&insts[i].op)) {
            for (Clbit b : c->condition) last_read[b] = i;
        }
    }
    struct Member {
        std::vector<std::int8_t> key;
        std::vector<cplx> amps;
    };
    std::vector<Member> members{{std::vector<std::int8_t>(circuit.num_clbits(), -1), initial}};

    auto merge = [&] {
        std::vector<Member> out;
        for (auto &m : members) {
            const double nm = kernels::norm2(m.amps);
            if (nm <= detail::kBranchCutoff) continue;
            bool merged = false;
            for (auto &o : out) {
                if (o.key != m.key) continue;
                const double no = kernels::norm2(o.amps);
                cplx ov = 0.0;
                for (std::size_t i = 0; i < o.amps.size(); ++i) ov += std::conj(o.amps[i]) * m.amps[i];
                if (std::abs(std::norm(ov) - no * nm) > 1e-13 * no * nm) continue;
                kernels::scale(o.amps, std::sqrt((no + nm) / no));
                merged = true;
                break;
            }
            if (!merged) out.push_back(std::move(m));
        }
        members = std::move(out);
    };

    for (std::size_t i = 0; i < insts.size(); ++i) {
        const auto &op = insts[i].op;
        if (auto g = std::get_if<Gate>(&op)) {
            for (auto &m : members) kernels::apply_gate(m.amps, *g);
        } else if (auto c = std::get_if<ConditionalGate>(&op)) {
            bool retire = false;
            for (auto &m : members) {
                int parity = 0;
                for (Clbit b : c->condition) parity ^= (m.key[b] == 1);
                if (parity) kernels::apply_gate(m.amps, c->gate);
            }
            for (Clbit b : c->condition) {
                if (*last_read[b] == i) {
                    retire = true;
                    for (auto &m : members) m.key[b] = -1;
                }
            }
            if (retire) merge();
        } else if (auto ms = std::get_if<Measure>(&op)) {
            const bool live = last_read[ms->clbit].has_value() && *last_read[ms->clbit] > i;
            std::vector<Member> next;
            for (auto &m : members) {
                Member one = m;
                kernels::project(one.amps, ms->qubit, 1);
                kernels::project(m.amps, ms->qubit, 0);
                if (live) {
                    one.key[ms->clbit] = 1;
                    m.key[ms->clbit] = 0;
                }
                next.push_back(std::move(m));
                next.push_back(std::move(one));
            }
            members = std::move(next);
            merge();
        } else if (auto r = std::get_if<Reset>(&op)) {
            std::vector<Member> next;
            for (auto &m : members) {
                Member one = m;
                kernels::project(one.amps, r->qubit, 1);
                kernels::apply_x(one.amps, r->qubit);
                kernels::project(m.amps, r->qubit, 0);
                next.push_back(std::move(m));
                next.push_back(std::move(one));
            }
            members = std::move(next);
            merge();
        }
    }
    double total = 0.0;
    for (const auto &m : members) {
        for (std::size_t t = 0; t < masks.size(); ++t) total += coeffs[t] * kernels::pauli_expectation(m.amps, masks[t]);
    }
    return total;
}

/// Embeds data basis index `j` (bit i -> data qubit i) into a full-register index.
inline std::size_t embed_data_index(std::size_t j, const std::vector<Qubit> &data) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if ((j >> i) & 1U) idx |= std::size_t{1} << data[i];
    }
    return idx;
}

/// Completely positive map on the data-qubit subsystem, with ancillas starting
/// in |0> and traced out at the end.
struct ChannelOnData {
    std::size_t num_data_qubits = 0;
    Eigen::MatrixXcd superoperator; ///< acts on column-stacked vec(rho)
    Eigen::MatrixXcd choi;          ///< sum_k vec(K_k) vec(K_k)^dagger
    double branch_weight = 0.0;     ///< Tr(choi) / d: total branch probability on the maximally mixed input

    std::size_t dim() const { return std::size_t{1} << num_data_qubits; }

    /// Normalised trace-norm distance between Choi matrices, ||J - J_U||_1 / d.
    double distance_to_unitary(const Eigen::MatrixXcd &u) const {
        const auto d = static_cast<Eigen::Index>(dim());
        if (u.rows() != d || u.cols() != d) throw std::invalid_argument("distance_to_unitary: size mismatch");
        Eigen::Map<const Eigen::VectorXcd> vu(u.data(), d * d);
        Eigen::MatrixXcd diff = choi - vu * vu.adjoint();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum() / static_cast<double>(d);
    }

    bool is_cptp(double tol = 1e-8) const {
        const auto d = static_cast<Eigen::Index>(dim());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(choi, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -tol) return false;
        // Partial trace over the output index must be the identity.
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index jp = 0; jp < d; ++jp) {
                cplx s = 0.0;
                for (Eigen::Index r = 0; r < d; ++r) s += choi(j * d + r, jp * d + r);
                const cplx want = j == jp ? 1.0 : 0.0;
                if (std::abs(s - want) > tol) return false;
            }
        }
        return true;
    }

    Eigen::MatrixXcd apply(const Eigen::MatrixXcd &rho) const {
        const auto d = static_cast<Eigen::Index>(dim());
        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), d * d);
        Eigen::VectorXcd out = superoperator * v;
        return Eigen::Map<Eigen::MatrixXcd>(out.data(), d, d);
    }
};

/// Enumerates every outcome branch, applies the branch's corrections, traces
/// out the ancillas and sums the branch maps.
inline ChannelOnData channel_on_data(const DynamicCircuit &circuit) {
    constexpr std::size_t kMaxQubits = 12;
    if (circuit.num_qubits() > kMaxQubits) throw std::invalid_argument("channel_on_data: at most 12 qubits");
    const auto &data = circuit.data_qubits();
    const auto &anc = circuit.ancilla_qubits();
    const std::size_t nd = data.size();
    const std::size_t d = std::size_t{1} << nd;
    const std::size_t full = std::size_t{1} << circuit.num_qubits();

    // Column j of the multi-column state is the data basis input |j>.
    std::vector<cplx> init(full * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) init[j * full + embed_data_index(j, data)] = 1.0;

    ChannelOnData ch;
    ch.num_data_qubits = nd;
    const auto dd = static_cast<Eigen::Index>(d * d);
    ch.superoperator = Eigen::MatrixXcd::Zero(dd, dd);
    ch.choi = Eigen::MatrixXcd::Zero(dd, dd);

    enumerate_branches(circuit, std::move(init), [&](std::span<const cplx> amps, const std::vector<std::uint8_t> &) {
        for (std::size_t alpha = 0; alpha < (std::size_t{1} << anc.size()); ++alpha) {
            std::size_t anc_idx = 0;
            for (std::size_t k = 0; k < anc.size(); ++k) {
                if ((alpha >> k) & 1U) anc_idx |= std::size_t{1} << anc[k];
            }
            Eigen::MatrixXcd kraus(d, d);
            double weight = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                for (std::size_t r = 0; r < d; ++r) {
                    const cplx v = amps[j * full + (embed_data_index(r, data) | anc_idx)];
                    kraus(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
                    weight += std::norm(v);
                }
            }
            if (weight <= detail::kBranchCutoff) continue;
            Eigen::Map<const Eigen::VectorXcd> vk(kraus.data(), dd);
            ch.choi.noalias() += vk * vk.adjoint();
            // vec(K rho K^dagger) = (conj(K) kron K) vec(rho)
            const auto di = static_cast<Eigen::Index>(d);
            for (Eigen::Index a = 0; a < di; ++a) {
                for (Eigen::Index c = 0; c < di; ++c) {
                    const cplx kac = std::conj(kraus(a, c));
                    if (kac == cplx{0.0}) continue;
                    ch.superoperator.block(a * di, c * di, di, di) += kac * kraus;
                }
            }
        }
    });
    ch.branch_weight = ch.choi.trace().real() / static_cast<double>(d);
    return ch;
}

} // namespace dynem
