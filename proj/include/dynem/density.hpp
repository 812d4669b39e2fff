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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"
#include "noise.hpp"
#include "schedule.hpp"
#include "statevector.hpp"

namespace dynem {

/// Density matrix stored as a 2N-qubit vector: entry (row, col) lives at
/// row * dim + col, so column bits are qubits [0, N) and row bits [N, 2N).
class DensityMatrix {
  public:
    DensityMatrix() = default;
    explicit DensityMatrix(std::size_t num_qubits) : n_(num_qubits), dim_(std::size_t{1} << num_qubits) {
        data_.assign(dim_ * dim_, 0.0);
        data_[0] = 1.0;
    }

    static DensityMatrix zeros(std::size_t num_qubits) {
        DensityMatrix d(num_qubits);
        d.data_[0] = 0.0;
        return d;
    }

    static DensityMatrix from_pure(const StateVector &psi) {
        DensityMatrix d = zeros(psi.num_qubits());
        for (std::size_t r = 0; r < d.dim_; ++r) {
            for (std::size_t c = 0; c < d.dim_; ++c) d.data_[r * d.dim_ + c] = psi[r] * std::conj(psi[c]);
        }
        return d;
    }

    std::size_t num_qubits() const { return n_; }
    std::size_t dim() const { return dim_; }
    cplx operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }
    std::span<cplx> raw() { return data_; }
    std::span<const cplx> raw() const { return data_; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i].real();
        return t;
    }

    /// rho -> M rho M^dagger for a one-qubit matrix (not necessarily unitary).
    void apply_1q(Qubit q, const Mat2 &m) {
        kernels::apply_1q(data_, q + n_, m);
        kernels::apply_1q(data_, q, conj(m));
    }

    void apply_gate(const Gate &g) {
        kernels::apply_gate(data_, g, n_);
        kernels::apply_gate_conj(data_, g, 0);
    }

    /// P_b rho P_b on qubit q.
    void project(Qubit q, int outcome) {
        kernels::project(data_, q + n_, outcome);
        kernels::project(data_, q, outcome);
    }

    DensityMatrix &operator+=(const DensityMatrix &o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    DensityMatrix &operator*=(double s) {
        kernels::scale(data_, s);
        return *this;
    }

    /// Tr(rho P)
    double expectation(const kernels::PauliMask &p) const {
        cplx acc = 0.0;
        for (std::uint64_t i = 0; i < dim_; ++i) acc += p.phase(i) * data_[(i ^ p.x_mask) * dim_ + i];
        return acc.real();
    }

    /// Expected product of recorded +-1 outcomes when every qubit in `qubits`
    /// is read out with flip probabilities P(1|0) = p10 and P(0|1) = p01.
    double readout_parity(const std::vector<Qubit> &qubits, double p10, double p01) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            double f = data_[i * dim_ + i].real();
            for (Qubit q : qubits) f *= ((i >> q) & 1U) ? -(1.0 - 2.0 * p01) : (1.0 - 2.0 * p10);
            acc += f;
        }
        return acc;
    }

    double max_abs_diff(const DensityMatrix &o) const {
        double m = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::abs(data_[i] - o.data_[i]));
        return m;
    }

  private:
    std::size_t n_ = 0;
    std::size_t dim_ = 1;
    std::vector<cplx> data_;
};

namespace detail {

inline void apply_pauli_dm(DensityMatrix &rho, const std::vector<Qubit> &qubits, int code) {
    for (Qubit q : qubits) {
        const int d = code & 3;
        code >>= 2;
        if (d == 1) rho.apply_gate(make_gate(GateKind::X, {q}));
        else if (d == 2) rho.apply_gate(make_gate(GateKind::Y, {q}));
        else if (d == 3) rho.apply_gate(make_gate(GateKind::Z, {q}));
    }
}

inline void apply_channel(DensityMatrix &rho, const NoiseEvent &e) {
    switch (e.kind) {
    case NoiseKind::PauliSample: {
        const int count = (1 << (2 * e.qubits.size())) - 1;
        DensityMatrix acc = rho;
        acc *= (1.0 - e.value);
        for (int code = 1; code <= count; ++code) {
            DensityMatrix t = rho;
            apply_pauli_dm(t, e.qubits, code);
            t *= e.value / count;
            acc += t;
        }
        rho = std::move(acc);
        return;
    }
    case NoiseKind::AmplitudeDamp: {
        DensityMatrix jump = rho;
        jump.apply_1q(e.qubits[0], {0.0, std::sqrt(e.value), 0.0, 0.0});
        rho.apply_1q(e.qubits[0], {1.0, 0.0, 0.0, std::sqrt(1.0 - e.value)});
        rho += jump;
        return;
    }
    case NoiseKind::Dephase: {
        DensityMatrix flipped = rho;
        flipped.apply_gate(make_gate(GateKind::Z, {e.qubits[0]}));
        rho *= (1.0 - e.value);
        flipped *= e.value;
        rho += flipped;
        return;
    }
    case NoiseKind::CoherentZ: rho.apply_1q(e.qubits[0], rz_matrix(e.value)); return;
    case NoiseKind::ReadoutFlip: return;
    }
}

} // namespace detail

/// Exact evolution of the full density matrix. Every noise event is applied as
/// its channel; measurements split the state into classical branches keyed by
/// the bits that are still read later, and branches whose live bits agree are
/// merged. Returns the branch sum.
inline DensityMatrix dm_evolve(const DynamicCircuit &circuit, const Schedule &schedule,
                               const std::optional<NoiseModel> &noise) {
    constexpr std::size_t kMaxQubits = 9;
    circuit.validate();
    if (circuit.num_qubits() > kMaxQubits) throw std::invalid_argument("dm_evolve: at most 9 qubits");
    if (schedule.timed.size() != circuit.size()) throw std::invalid_argument("schedule does not match circuit");
    const auto program = bucket_events(noise ? events_for(circuit, schedule, *noise) : std::vector<NoiseEvent>{},
                                       circuit.size());

    const auto &insts = circuit.instructions();
    // Index of the last conditional read of each classical bit.
    std::vector<std::optional<std::size_t>> last_read(circuit.num_clbits());
    for (std::size_t i = 0; i < insts.size(); ++i) {
        if (auto c = std::get_if<ConditionalGate>(&insts[i].op)) {
            for (Clbit b : c->condition) last_read[b] = i;
        }
    }

    using Key = std::vector<std::int8_t>;
    std::map<Key, DensityMatrix> branches;
    branches.emplace(Key(circuit.num_clbits(), -1), DensityMatrix(circuit.num_qubits()));

    auto for_each_branch = [&](auto &&f) {
        for (auto &[key, rho] : branches) f(key, rho);
    };

    for (std::size_t i = 0; i < insts.size(); ++i) {
        for (const auto &e : program.before[i]) {
            for_each_branch([&](const Key &, DensityMatrix &rho) { detail::apply_channel(rho, e); });
        }
        const auto &op = insts[i].op;
        if (auto g = std::get_if<Gate>(&op)) {
            for_each_branch([&](const Key &, DensityMatrix &rho) { rho.apply_gate(*g); });
            for (const auto &e : program.after[i]) {
                for_each_branch([&](const Key &, DensityMatrix &rho) { detail::apply_channel(rho, e); });
            }
        } else if (auto m = std::get_if<Measure>(&op)) {
            const bool live = last_read[m->clbit].has_value() && *last_read[m->clbit] > i;
            const auto &ro = program.readout[i];
            std::map<Key, DensityMatrix> next;
            auto add = [&](Key key, DensityMatrix rho) {
                auto it = next.find(key);
                if (it == next.end()) next.emplace(std::move(key), std::move(rho));
                else it->second += rho;
            };
            for (auto &[key, rho] : branches) {
                for (int outcome = 0; outcome < 2; ++outcome) {
                    DensityMatrix part = rho;
                    part.project(m->qubit, outcome);
                    if (part.trace() <= 0.0) continue;
                    if (!live) {
                        Key k = key;
                        k[m->clbit] = -1;
                        add(std::move(k), std::move(part));
                        continue;
                    }
                    const double flip = ro ? (outcome ? ro->value2 : ro->value) : 0.0;
                    for (int recorded = 0; recorded < 2; ++recorded) {
                        const double w = recorded == outcome ? 1.0 - flip : flip;
                        if (w <= 0.0) continue;
                        Key k = key;
                        k[m->clbit] = static_cast<std::int8_t>(recorded);
                        DensityMatrix weighted = part;
                        weighted *= w;
                        add(std::move(k), std::move(weighted));
                    }
                }
            }
            branches = std::move(next);
            for (const auto &e : program.after[i]) {
                for_each_branch([&](const Key &, DensityMatrix &rho) { detail::apply_channel(rho, e); });
            }
        } else if (auto r = std::get_if<Reset>(&op)) {
            for_each_branch([&](const Key &, DensityMatrix &rho) {
                DensityMatrix one = rho;
                one.project(r->qubit, 1);
                one.apply_gate(make_gate(GateKind::X, {r->qubit}));
                rho.project(r->qubit, 0);
                rho += one;
            });
            for (const auto &e : program.after[i]) {
                for_each_branch([&](const Key &, DensityMatrix &rho) { detail::apply_channel(rho, e); });
            }
        } else if (auto c = std::get_if<ConditionalGate>(&op)) {
            for_each_branch([&](const Key &key, DensityMatrix &rho) {
                int parity = 0;
                for (Clbit b : c->condition) parity ^= (key[b] == 1);
                if (!parity) {
                    for (const auto &e : program.after[i]) {
                        if (!e.only_if_fired) detail::apply_channel(rho, e);
                    }
                    return;
                }
                rho.apply_gate(c->gate);
                for (const auto &e : program.after[i]) detail::apply_channel(rho, e);
            });
            // Retire bits whose last reader was this instruction.
            bool retire = false;
            for (Clbit b : c->condition) retire |= (*last_read[b] == i);
            if (retire) {
                std::map<Key, DensityMatrix> next;
                for (auto &[key, rho] : branches) {
                    Key k = key;
                    for (Clbit b : c->condition) {
                        if (*last_read[b] == i) k[b] = -1;
                    }
                    auto it = next.find(k);
                    if (it == next.end()) next.emplace(std::move(k), std::move(rho));
                    else it->second += rho;
                }
                branches = std::move(next);
            }
        } else {
            for (const auto &e : program.after[i]) {
                for_each_branch([&](const Key &, DensityMatrix &rho) { detail::apply_channel(rho, e); });
            }
        }
    }
    DensityMatrix total = DensityMatrix::zeros(circuit.num_qubits());
    for (auto &[key, rho] : branches) {
        for (const auto &e : program.at_end) detail::apply_channel(rho, e);
        total += rho;
    }
    return total;
}

} // namespace dynem
