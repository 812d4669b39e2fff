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
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "branch.hpp"
#include "builders.hpp"
#include "density.hpp"
#include "expectation.hpp"
#include "hamiltonians.hpp"
#include "mitigation.hpp"
#include "trajectory.hpp"

namespace dynem {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

/// Dense unitary of a gate-only circuit on its data qubits, column j = U|j>.
inline Eigen::MatrixXcd circuit_unitary(const DynamicCircuit &c) {
    const std::size_t d = std::size_t{1} << c.num_qubits();
    Eigen::MatrixXcd u(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<cplx> e(d, 0.0);
        e[j] = 1.0;
        const auto psi = simulate_unitary(c, StateVector(c.num_qubits(), std::move(e)));
        for (std::size_t r = 0; r < d; ++r) u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = psi[r];
    }
    return u;
}

/// exp(-i theta/2 P) for a Pauli word via its dense matrix (P^2 = I).
inline Eigen::MatrixXcd pauli_rotation(const std::string &word, double theta) {
    PauliSum p(word.size());
    p.add(1.0, word);
    const Eigen::MatrixXcd m = p.dense();
    return std::cos(theta / 2) * Eigen::MatrixXcd::Identity(m.rows(), m.cols()) - cplx{0, 1} * std::sin(theta / 2) * m;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

/// Four qubits (three data, one ancilla) with one mid-circuit measurement
/// and one conditional gate.
inline DynamicCircuit noisy_feed_forward_circuit() {
    DynamicCircuit c(4, {0, 1, 2});
    c.gate(GateKind::RY, {0}, {1.1});
    c.gate(GateKind::RY, {1}, {0.7});
    c.gate(GateKind::CNOT, {0, 3});
    const Clbit m = c.add_clbit();
    c.measure(3, m);
    c.conditional(make_gate(GateKind::X, {2}), {m});
    c.gate(GateKind::CNOT, {1, 2});
    return c;
}

/// |sampled - exact| / standard error of the recorded parity of the data
/// qubits marked 'Z' in `zword`, from `shots` trajectories with final readout
/// against the density-matrix value with readout flips folded in.
inline double trajectory_density_deviation(const DynamicCircuit &circuit, const NoiseModel &noise,
                                           const std::string &zword, std::size_t shots, std::uint64_t seed) {
    const MeasurementSetting setting{std::string(zword.size(), 'Z'), {0}};
    const auto read = with_readout(circuit, setting);
    const auto s = schedule(read, DurationTable{});
    std::vector<Qubit> support;
    for (std::size_t i = 0; i < zword.size(); ++i) {
        if (zword[i] == 'Z') support.push_back(read.data_qubits()[i]);
    }
    const double exact = dm_evolve(read, s, noise).readout_parity(support, noise.readout_p10, noise.readout_p01);
    const auto hist = run_shots(TrajectoryRunner(read, s, noise), shots, seed);
    PauliSum obs(zword.size());
    obs.add(1.0, zword);
    const auto est = estimate_energy({hist}, obs, {setting});
    return std::abs(est.energy - exact) / est.standard_error;
}

} // namespace detail

/// Fast self-checks of the simulator against dense linear algebra.
inline std::vector<CheckResult> run_verification(std::uint64_t seed = 1) {
    std::vector<CheckResult> out;
    auto check = [&](const std::string &name, const std::function<std::pair<bool, std::string>()> &f) {
        try {
            auto [ok, detail] = f();
            out.push_back({name, ok, detail});
        } catch (const std::exception &e) {
            out.push_back({name, false, e.what()});
        }
    };

    check("entangler channels", [] {
        double worst = 0.0;
        for (std::size_t n = 2; n <= 4; ++n) {
            const auto u = detail::circuit_unitary(static_ladder(n));
            worst = std::max(worst, channel_on_data(dynamic_entangler(n)).distance_to_unitary(u));
            worst = std::max(worst, channel_on_data(inverse_entangler(n)).distance_to_unitary(u.adjoint()));
        }
        return std::pair{worst <= 1e-9, "max distance " + detail::fmt(worst)};
    });

    check("rotation gadgets", [seed] {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-M_PI, M_PI);
        double worst = 0.0;
        for (auto [basis, word] : {std::pair{PauliBasis::ZZ, "ZZ"}, {PauliBasis::XX, "XX"}, {PauliBasis::YY, "YY"}}) {
            for (int i = 0; i < 10; ++i) {
                const double th = u(rng);
                const auto ch = channel_on_data(rzz_gadget(th, 0, 1, 2, basis));
                worst = std::max(worst, ch.distance_to_unitary(detail::pauli_rotation(word, th)));
            }
        }
        return std::pair{worst <= 1e-9, "max distance " + detail::fmt(worst)};
    });

    check("fold identity", [seed] {
        AnsatzSpec a;
        a.n = 3;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-M_PI, M_PI);
        for (std::size_t i = 0; i < a.parameter_count(); ++i) a.theta.push_back(u(rng));
        const auto H = tfim(3, 0.5);
        const double e0 = statevector_expectation(fold_circuit(a, {0}), H);
        double worst = 0.0;
        for (std::size_t k : {1, 2}) worst = std::max(worst, std::abs(statevector_expectation(fold_circuit(a, {k}), H) - e0));
        return std::pair{worst <= 1e-9, "max deviation " + detail::fmt(worst)};
    });

    check("trotter fidelity", [] {
        TrotterSpec t;
        t.n = 3;
        t.h = 0.5;
        t.gadget = GadgetKind::Static;
        auto infidelity = [&](std::size_t steps) {
            t.steps = steps;
            const auto exact = exact_evolve(tfim(3, 0.5), t.t, StateVector(3));
            return 1.0 - simulate_unitary(trotter_circuit(t)).fidelity(exact);
        };
        const double f5 = infidelity(5), f10 = infidelity(10);
        return std::pair{f5 <= 1e-3 && f10 < f5, "infidelity N=5 " + detail::fmt(f5) + ", N=10 " + detail::fmt(f10)};
    });

    check("exact ground energies", [] {
        const double a = std::abs(exact_ground_energy(tfim(2, 1.0)) + std::sqrt(5.0));
        const double b = std::abs(exact_ground_energy(heisenberg(2, 0.0)) + 3.0);
        double c = 0.0;
        for (std::size_t n : {3, 5, 8}) c = std::max(c, std::abs(exact_ground_energy(tfim(n, 0.0)) + double(n - 1)));
        const double worst = std::max({a, b, c});
        return std::pair{worst <= 1e-10, "max error " + detail::fmt(worst)};
    });

    check("zne synthetic fits", [] {
        const auto lin = zne_extrapolate({{1, 10, 0}, {3, 8, 0}, {5, 6, 0}}, FitKind::Linear);
        std::vector<ZNEPoint> pts;
        for (double l : {1.0, 3.0, 5.0}) pts.push_back({l, -2.0 + 0.5 * std::exp(-0.3 * l), 0.0});
        const auto ex = zne_extrapolate(pts, FitKind::Exponential);
        const double worst = std::max(std::abs(lin.e0 - 11.0), std::abs(ex.e0 + 1.5));
        return std::pair{worst <= 1e-6 && !ex.fell_back, "max error " + detail::fmt(worst)};
    });

    check("trajectory vs density matrix", [seed] {
        const auto c = detail::noisy_feed_forward_circuit();
        const NoiseModel noise;
        const std::size_t shots = 20000;
        const auto z = detail::trajectory_density_deviation(c, noise, "ZIZ", shots, seed);
        return std::pair{z <= 4.0, "deviation " + detail::fmt(z) + " standard errors over " + std::to_string(shots) + " shots"};
    });
    return out;
}

} // namespace dynem
