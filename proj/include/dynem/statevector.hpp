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
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "circuit.hpp"

namespace dynem {

using cplx = std::complex<double>;

/// Row-major 2x2 matrix {m00, m01, m10, m11}.
using Mat2 = std::array<cplx, 4>;

inline Mat2 gate_matrix(GateKind k, const std::vector<double> &params) {
    constexpr double r = 0.70710678118654752440;
    const cplx I{0.0, 1.0};
    switch (k) {
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Y: return {0.0, -I, I, 0.0};
    case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::H: return {r, r, r, -r};
    case GateKind::S: return {1.0, 0.0, 0.0, I};
    case GateKind::SDG: return {1.0, 0.0, 0.0, -I};
    case GateKind::RX: {
        const double c = std::cos(params.at(0) / 2), s = std::sin(params.at(0) / 2);
        return {c, -I * s, -I * s, c};
    }
    case GateKind::RY: {
        const double c = std::cos(params.at(0) / 2), s = std::sin(params.at(0) / 2);
        return {c, -s, s, c};
    }
    case GateKind::RZ: {
        const double h = params.at(0) / 2;
        return {std::polar(1.0, -h), 0.0, 0.0, std::polar(1.0, h)};
    }
    default: throw std::invalid_argument("gate_matrix: not a one-qubit gate");
    }
}

inline Mat2 rz_matrix(double angle) { return gate_matrix(GateKind::RZ, {angle}); }

inline Mat2 matmul(const Mat2 &a, const Mat2 &b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

inline Mat2 conj(const Mat2 &m) { return {std::conj(m[0]), std::conj(m[1]), std::conj(m[2]), std::conj(m[3])}; }

/// Kernels over a raw amplitude array of 2^k entries; qubit q is bit q of the index.
namespace kernels {

inline void apply_1q(std::span<cplx> a, std::size_t q, const Mat2 &m) {
    const std::size_t stride = std::size_t{1} << q;
    const std::size_t n = a.size();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
        for (std::size_t j = base; j < base + stride; ++j) {
            const cplx a0 = a[j], a1 = a[j + stride];
            a[j] = m[0] * a0 + m[1] * a1;
            a[j + stride] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// Diagonal one-qubit operator diag(d0, d1).
inline void apply_diag(std::span<cplx> a, std::size_t q, cplx d0, cplx d1) {
    const std::size_t stride = std::size_t{1} << q;
    const bool skip0 = d0 == cplx{1.0};
    for (std::size_t base = 0; base < a.size(); base += 2 * stride) {
        if (!skip0) {
            for (std::size_t j = base; j < base + stride; ++j) a[j] *= d0;
        }
        for (std::size_t j = base + stride; j < base + 2 * stride; ++j) a[j] *= d1;
    }
}

inline void apply_x(std::span<cplx> a, std::size_t q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < a.size(); base += 2 * stride) {
        for (std::size_t j = base; j < base + stride; ++j) std::swap(a[j], a[j + stride]);
    }
}

inline void apply_cnot(std::span<cplx> a, std::size_t control, std::size_t target) {
    const std::size_t cb = std::size_t{1} << control, tb = std::size_t{1} << target;
    const std::size_t lo = std::min(cb, tb), hi = std::max(cb, tb);
    // Enumerate indices with both bits clear, then offset by the control bit.
    for (std::size_t i = 0; i < a.size(); i += 2 * hi) {
        for (std::size_t j = i; j < i + hi; j += 2 * lo) {
            for (std::size_t k = j; k < j + lo; ++k) std::swap(a[k | cb], a[k | cb | tb]);
        }
    }
}

inline void apply_cz(std::span<cplx> a, std::size_t q0, std::size_t q1) {
    const std::size_t m = (std::size_t{1} << q0) | (std::size_t{1} << q1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if ((i & m) == m) a[i] = -a[i];
    }
}

/// Squared norm of the component with qubit q in state |1>.
inline double prob_one(std::span<const cplx> a, std::size_t q) {
    const std::size_t stride = std::size_t{1} << q;
    double p = 0.0;
    for (std::size_t base = stride; base < a.size(); base += 2 * stride) {
        for (std::size_t j = base; j < base + stride; ++j) p += std::norm(a[j]);
    }
    return p;
}

/// Zeroes every amplitude whose bit q differs from `outcome`.
inline void project(std::span<cplx> a, std::size_t q, int outcome) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = outcome ? 0 : stride; base < a.size(); base += 2 * stride) {
        std::fill(a.begin() + static_cast<std::ptrdiff_t>(base), a.begin() + static_cast<std::ptrdiff_t>(base + stride), cplx{0.0});
    }
}

inline void scale(std::span<cplx> a, double s) {
    for (auto &x : a) x *= s;
}

inline double norm2(std::span<const cplx> a) {
    double n = 0.0;
    for (const auto &x : a) n += std::norm(x);
    return n;
}

/// Applies a gate acting on qubits `offset + g.qubits[i]`.
inline void apply_gate(std::span<cplx> a, const Gate &g, std::size_t offset = 0) {
    switch (g.kind) {
    case GateKind::CNOT: apply_cnot(a, g.qubits[0] + offset, g.qubits[1] + offset); return;
    case GateKind::CZ: apply_cz(a, g.qubits[0] + offset, g.qubits[1] + offset); return;
    case GateKind::X: apply_x(a, g.qubits[0] + offset); return;
    case GateKind::Z: apply_diag(a, g.qubits[0] + offset, 1.0, -1.0); return;
    case GateKind::S: apply_diag(a, g.qubits[0] + offset, 1.0, cplx{0, 1}); return;
    case GateKind::SDG: apply_diag(a, g.qubits[0] + offset, 1.0, cplx{0, -1}); return;
    case GateKind::RZ: {
        const double h = g.params[0] / 2;
        apply_diag(a, g.qubits[0] + offset, std::polar(1.0, -h), std::polar(1.0, h));
        return;
    }
    default: apply_1q(a, g.qubits[0] + offset, gate_matrix(g.kind, g.params));
    }
}

/// Applies conj(g) (the complex conjugate, not the adjoint) on shifted qubits.
inline void apply_gate_conj(std::span<cplx> a, const Gate &g, std::size_t offset) {
    switch (g.kind) {
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::X:
    case GateKind::Z:
    case GateKind::H:
    case GateKind::RY: apply_gate(a, g, offset); return;
    default: apply_1q(a, g.qubits[0] + offset, conj(gate_matrix(g.kind, g.params)));
    }
}

/// Pauli operator in mask form: flips on `x_mask`, sign (-1)^popcount(i & z_mask),
/// global factor i^num_y.
struct PauliMask {
    std::uint64_t x_mask = 0;
    std::uint64_t z_mask = 0;
    unsigned num_y = 0;

    cplx phase(std::uint64_t i) const {
        static const cplx ipow[4] = {1.0, cplx{0, 1}, -1.0, cplx{0, -1}};
        cplx ph = ipow[num_y % 4];
        return (std::popcount(i & z_mask) & 1) ? -ph : ph;
    }
};

/// <a|P|a> for an unnormalized amplitude array.
inline double pauli_expectation(std::span<const cplx> a, const PauliMask &p) {
    cplx acc = 0.0;
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        acc += std::conj(a[i ^ p.x_mask]) * p.phase(i) * a[i];
    }
    return acc.real();
}

} // namespace kernels

/// Pure state over `num_qubits` qubits, initialised to |0...0>.
class StateVector {
  public:
    StateVector() = default;
    explicit StateVector(std::size_t num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits > 30) throw std::invalid_argument("StateVector: too many qubits");
        amps_.assign(std::size_t{1} << num_qubits, 0.0);
        amps_[0] = 1.0;
    }
    StateVector(std::size_t num_qubits, std::vector<cplx> amps) : num_qubits_(num_qubits), amps_(std::move(amps)) {
        if (amps_.size() != (std::size_t{1} << num_qubits)) throw std::invalid_argument("StateVector: bad size");
    }

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<cplx> amplitudes() { return amps_; }
    std::span<const cplx> amplitudes() const { return amps_; }
    cplx operator[](std::size_t i) const { return amps_[i]; }
    cplx &operator[](std::size_t i) { return amps_[i]; }

    double norm() const { return std::sqrt(kernels::norm2(amps_)); }
    void normalize() { kernels::scale(amps_, 1.0 / norm()); }

    void apply(const Gate &g) { kernels::apply_gate(amps_, g); }

    /// |<this|other>|^2
    double fidelity(const StateVector &other) const {
        if (other.dim() != dim()) throw std::invalid_argument("fidelity: dimension mismatch");
        cplx ov = 0.0;
        for (std::size_t i = 0; i < amps_.size(); ++i) ov += std::conj(amps_[i]) * other.amps_[i];
        return std::norm(ov);
    }

    double expectation(const kernels::PauliMask &p) const { return kernels::pauli_expectation(amps_, p); }

  private:
    std::size_t num_qubits_ = 0;
    std::vector<cplx> amps_;
};

} // namespace dynem
