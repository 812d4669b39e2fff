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

#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "dynem/branch.hpp"
#include "dynem/builders.hpp"
#include "dynem/density.hpp"
#include "dynem/expectation.hpp"
#include "dynem/trajectory.hpp"
#include "dynem/verify.hpp"
#include "oracle.hpp"

using namespace dynem;

namespace {

DynamicCircuit bell() {
    DynamicCircuit c(2);
    c.gate(GateKind::H, {0});
    c.gate(GateKind::CNOT, {0, 1});
    c.measure(0, c.add_clbit());
    c.measure(1, c.add_clbit());
    return c;
}

Histogram shots(const DynamicCircuit &c, const std::optional<NoiseModel> &noise, std::size_t n, std::uint64_t seed) {
    return run_shots(c, schedule(c, DurationTable{}), noise, n, seed);
}

/// Prepends `prep` (gates on data qubits) to `body`.
DynamicCircuit with_prefix(const DynamicCircuit &body, const std::vector<Gate> &prep) {
    DynamicCircuit c(body.num_qubits(), body.data_qubits());
    for (const auto &g : prep) c.append({g, std::nullopt});
    return c.extend(body);
}

} // namespace

TEST(Trajectory, BellSupport) {
    const auto h = shots(bell(), std::nullopt, 500, 1);
    for (const auto &[k, v] : h) EXPECT_TRUE(k == "00" || k == "11") << k;
}

TEST(Trajectory, ReadoutFlipFrequency) {
    DynamicCircuit c(1);
    c.measure(0, c.add_clbit());
    auto noise = NoiseModel::zero();
    noise.readout_p10 = 0.1;
    const std::size_t n = 10000;
    const auto h = shots(c, noise, n, 2);
    const double f = h.count("1") ? double(h.at("1")) / n : 0.0;
    EXPECT_NEAR(f, 0.1, 3 * std::sqrt(0.1 * 0.9 / n));
}

TEST(Trajectory, ReadoutFlipKeepsTrueState) {
    DynamicCircuit c(1);
    c.measure(0, c.add_clbit());
    auto noise = NoiseModel::zero();
    noise.readout_p10 = 1.0;
    const auto r = run_trajectory(c, schedule(c, DurationTable{}), noise, 3);
    EXPECT_EQ(r.record.clbits[0], 1);
    EXPECT_NEAR(std::abs(r.state[0]), 1.0, 1e-12);
}

TEST(Trajectory, EntanglerOnPlusZeroGivesBellInEveryBranch) {
    const auto body = dynamic_entangler(2);
    const auto c = with_prefix(body, {make_gate(GateKind::H, {0})});
    const auto s = schedule(c, DurationTable{});
    // Data on qubits 0 and 2, ancilla 1 reset to |0>.
    StateVector want(3, std::vector<cplx>(8, 0.0));
    want[0] = want[5] = 1 / std::sqrt(2.0);
    std::set<int> branches;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto r = run_trajectory(c, s, std::nullopt, seed);
        branches.insert(r.record.clbits[0]);
        EXPECT_NEAR(r.state.fidelity(want), 1.0, 1e-12) << seed;
    }
    EXPECT_EQ(branches.size(), 2u);
}

TEST(Trajectory, EntanglerSupportMatchesLadder) {
    // The constant-depth entangler realises the ladder in which every target
    // receives its original upper neighbour, so |+00> maps onto {000, 110}.
    auto c = with_prefix(dynamic_entangler(3), {make_gate(GateKind::H, {0})});
    for (Qubit q : c.data_qubits()) c.measure(q, c.add_clbit());
    c.set_readout_clbits({2, 3, 4});
    const auto h = shots(c, std::nullopt, 400, 4);
    std::set<std::string> keys;
    for (const auto &[k, v] : h) keys.insert(k);
    EXPECT_EQ(keys, (std::set<std::string>{"000", "110"}));

    const Eigen::VectorXcd plus = oracle::on_qubit(oracle::hadamard(), 0, 3).col(0);
    const Eigen::VectorXcd out = oracle::ladder(3) * plus;
    EXPECT_NEAR(std::norm(out(0)), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(out(0b011)), 0.5, 1e-12);
}

TEST(RunShots, SingleShot) {
    const auto h = shots(bell(), std::nullopt, 1, 9);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h.begin()->second, 1u);
    EXPECT_THROW(shots(bell(), std::nullopt, 0, 9), std::invalid_argument);
}

TEST(RunShots, BellBinomialBound) {
    const std::size_t n = 4096;
    const auto h = shots(bell(), std::nullopt, n, 10);
    EXPECT_NEAR(double(h.at("00")) / n, 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(RunShots, SeedDeterminism) {
    const auto c = with_readout(hea_circuit([] {
                                    AnsatzSpec a;
                                    a.n = 3;
                                    a.theta.assign(a.parameter_count(), 0.4);
                                    return a;
                                }()),
                                {"ZZZ", {}});
    const auto s = schedule(c, DurationTable{});
    const NoiseModel noise;
    EXPECT_EQ(run_shots(c, s, noise, 300, 77), run_shots(c, s, noise, 300, 77));
    EXPECT_EQ(run_trajectory(c, s, noise, 5).record, run_trajectory(c, s, noise, 5).record);
    EXPECT_EQ(run_shots(TrajectoryRunner(c, s, noise), 300, 77, 1), run_shots(TrajectoryRunner(c, s, noise), 300, 77, 4));
}

TEST(Trajectory, NormPreservedUnderNoise) {
    NoiseModel noise;
    noise.t1_ns = 5e3;
    noise.t2_ns = 4e3;
    noise.p2q = 0.05;
    TrotterSpec t;
    t.n = 3;
    t.h = 0.7;
    t.model = Model::Heisenberg;
    const auto c = trotter_circuit(t);
    const auto s = schedule(c, DurationTable{});
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        EXPECT_NEAR(run_trajectory(c, s, noise, seed).state.norm(), 1.0, 1e-10);
    }
}

TEST(Trajectory, NormPreservedAfterEveryGate) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-3, 3);
    AnsatzSpec a;
    a.n = 4;
    a.entangler = EntanglerKind::StaticLadder;
    for (std::size_t i = 0; i < a.parameter_count(); ++i) a.theta.push_back(u(rng));
    const auto c = hea_circuit(a);
    StateVector psi(c.num_qubits());
    for (const auto &inst : c.instructions()) {
        if (auto g = std::get_if<Gate>(&inst.op)) psi.apply(*g);
        EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
    }
}

TEST(Channel, GateOnlyIsUnitaryConjugation) {
    DynamicCircuit c(2);
    c.gate(GateKind::RY, {0}, {0.3});
    c.gate(GateKind::CZ, {0, 1});
    c.gate(GateKind::RX, {1}, {-1.2});
    const oracle::Mat u = oracle::on_qubit(oracle::rot('X', -1.2), 1, 2) *
                          (oracle::Mat::Identity(4, 4) - 2.0 * oracle::on_qubit((oracle::pauli('I') - oracle::pauli('Z')) / 2.0, 0, 2) *
                                                             oracle::on_qubit((oracle::pauli('I') - oracle::pauli('Z')) / 2.0, 1, 2)) *
                          oracle::on_qubit(oracle::rot('Y', 0.3), 0, 2);
    const auto ch = channel_on_data(c);
    EXPECT_LT(ch.distance_to_unitary(u), 1e-12);
    EXPECT_NEAR(ch.branch_weight, 1.0, 1e-10);
}

TEST(Channel, EntanglerEqualsCnot) {
    const auto ch = channel_on_data(dynamic_entangler(2));
    EXPECT_LT(ch.distance_to_unitary(oracle::cnot(0, 1, 2)), 1e-9);
}

TEST(Channel, RzzGadgetAtQuarterTurn) {
    const auto ch = channel_on_data(rzz_gadget(M_PI / 2, 0, 1, 2));
    oracle::Mat u = oracle::Mat::Zero(4, 4);
    const cplx a = std::exp(cplx{0, -M_PI / 4}), b = std::exp(cplx{0, M_PI / 4});
    u(0, 0) = a, u(1, 1) = b, u(2, 2) = b, u(3, 3) = a;
    EXPECT_LT(ch.distance_to_unitary(u), 1e-9);
}

TEST(Channel, BuilderGadgetsAreCptp) {
    for (const auto &c : {dynamic_entangler(3), inverse_entangler(4), rzz_gadget(0.4, 0, 1, 2, PauliBasis::YY)}) {
        const auto ch = channel_on_data(c);
        EXPECT_TRUE(ch.is_cptp());
        EXPECT_NEAR(ch.branch_weight, 1.0, 1e-10);
    }
}

TEST(Channel, ApplyMatchesConjugation) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(4);
    for (auto &x : v) x = {nd(rng), nd(rng)};
    v.normalize();
    const oracle::Mat rho = v * v.adjoint();
    const auto u = oracle::rpp('X', 0.9, 0, 1, 2);
    const auto out = channel_on_data(rzz_gadget(0.9, 0, 1, 2, PauliBasis::XX)).apply(rho);
    EXPECT_LT((out - u * rho * u.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Channel, RejectsLargeCircuits) { EXPECT_THROW(channel_on_data(DynamicCircuit(13)), std::invalid_argument); }

TEST(Density, NoiselessMatchesPureState) {
    AnsatzSpec a;
    a.n = 3;
    a.entangler = EntanglerKind::StaticLadder;
    a.theta.assign(a.parameter_count(), 0.0);
    for (std::size_t i = 0; i < a.theta.size(); ++i) a.theta[i] = 0.1 * double(i) - 0.7;
    const auto c = hea_circuit(a);
    const auto rho = dm_evolve(c, schedule(c, DurationTable{}), std::nullopt);
    EXPECT_LT(rho.max_abs_diff(DensityMatrix::from_pure(simulate_unitary(c))), 1e-12);
    EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
}

TEST(Density, DynamicEntanglerMatchesLadderOnMixedBranches) {
    const auto c = with_prefix(dynamic_entangler(3), {make_gate(GateKind::H, {0}), make_gate(GateKind::RY, {2}, {0.8})});
    const auto rho = dm_evolve(c, schedule(c, DurationTable{}), std::nullopt);
    // Data qubits are 0, 2, 4; ancillas are back in |0>.
    Eigen::VectorXcd in = Eigen::VectorXcd::Zero(8);
    in(0) = 1;
    in = oracle::on_qubit(oracle::rot('Y', 0.8), 1, 3) * oracle::on_qubit(oracle::hadamard(), 0, 3) * in;
    const Eigen::VectorXcd out = oracle::ladder(3) * in;
    for (std::size_t r = 0; r < 8; ++r) {
        for (std::size_t col = 0; col < 8; ++col) {
            const auto R = embed_data_index(r, c.data_qubits()), C = embed_data_index(col, c.data_qubits());
            const cplx want = out(static_cast<Eigen::Index>(r)) * std::conj(out(static_cast<Eigen::Index>(col)));
            EXPECT_NEAR(std::abs(rho(R, C) - want), 0.0, 1e-12);
        }
    }
}

TEST(Density, IdleDephasingClosedForm) {
    DynamicCircuit c(2);
    c.gate(GateKind::H, {0});
    c.measure(1, c.add_clbit());
    c.barrier({0, 1});
    auto noise = NoiseModel::zero();
    noise.t2_ns = 3000;
    const auto s = schedule(c, DurationTable{});
    const double t = s.idle[0].at(0).length();
    ASSERT_DOUBLE_EQ(t, 1200.0 - 32.0);
    const auto rho = dm_evolve(c, s, noise);
    EXPECT_NEAR(rho(1, 0).real(), 0.5 * std::exp(-t / 3000.0), 1e-12);
    EXPECT_NEAR(rho(1, 0).imag(), 0.0, 1e-12);
}

TEST(Density, RejectsLargeCircuits) {
    const DynamicCircuit c(10);
    EXPECT_THROW(dm_evolve(c, schedule(c, DurationTable{}), std::nullopt), std::invalid_argument);
}

TEST(Density, TrajectoryAverageAgrees) {
    NoiseModel noise;
    noise.t1_ns = 20e3;
    noise.t2_ns = 15e3;
    noise.readout_p10 = 0.03;
    noise.readout_p01 = 0.05;
    noise.idle_detuning = 3e-4;
    const auto z = detail::trajectory_density_deviation(detail::noisy_feed_forward_circuit(), noise, "ZZI", 20000, 12);
    EXPECT_LE(z, 4.0);
}

TEST(Expectation, Examples) {
    PauliSum z(1), x(1);
    z.add(1.0, "Z");
    x.add(1.0, "X");
    EXPECT_DOUBLE_EQ(statevector_expectation(DynamicCircuit(1), z), 1.0);
    DynamicCircuit h(1);
    h.gate(GateKind::H, {0});
    EXPECT_NEAR(statevector_expectation(h, x), 1.0, 1e-15);
}

TEST(Expectation, BranchWeightedForDynamicCircuits) {
    // Dynamic and static entangler HEAs give the same exact energy.
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    const auto H = heisenberg(3, 0.3);
    for (int trial = 0; trial < 5; ++trial) {
        AnsatzSpec a;
        a.n = 3;
        for (std::size_t i = 0; i < a.parameter_count(); ++i) a.theta.push_back(u(rng));
        a.entangler = EntanglerKind::Dynamic;
        const double ed = statevector_expectation(hea_circuit(a), H);
        a.entangler = EntanglerKind::StaticLadder;
        const auto psi = oracle::hea_state(3, a.layers, a.theta);
        const double want = (psi.adjoint() * oracle::heisenberg(3, 0.3) * psi)(0).real();
        EXPECT_NEAR(ed, want, 1e-9);
    }
}

TEST(Expectation, DynamicAndStaticAgreeWithinShotNoise) {
    AnsatzSpec a;
    a.n = 3;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (std::size_t i = 0; i < a.parameter_count(); ++i) a.theta.push_back(u(rng));
    const auto H = tfim(3, 1.0);
    const auto settings = measurement_settings(H);
    auto estimate = [&](EntanglerKind k, std::uint64_t seed) {
        a.entangler = k;
        const auto c = hea_circuit(a);
        std::vector<Histogram> hs;
        for (std::size_t g = 0; g < settings.size(); ++g) {
            const auto r = with_readout(c, settings[g]);
            hs.push_back(run_shots(r, schedule(r, DurationTable{}), std::nullopt, 4000, shot_seed(seed, g)));
        }
        return estimate_energy(hs, H, settings);
    };
    const auto s = estimate(EntanglerKind::StaticLadder, 1), d = estimate(EntanglerKind::Dynamic, 2);
    EXPECT_LE(std::abs(s.energy - d.energy), 3 * std::hypot(s.standard_error, d.standard_error));
}
