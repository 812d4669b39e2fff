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

#include <gtest/gtest.h>

#include "dynem/builders.hpp"
#include "dynem/circuit.hpp"
#include "dynem/expectation.hpp"
#include "dynem/schedule.hpp"

using namespace dynem;

namespace {

Instruction g(GateKind k, std::vector<Qubit> q, std::vector<double> p = {}) {
    return {make_gate(k, std::move(q), std::move(p)), std::nullopt};
}

StateVector random_state(std::size_t n, std::mt19937_64 &rng) {
    std::normal_distribution<double> nd;
    std::vector<cplx> a(std::size_t{1} << n);
    for (auto &x : a) x = {nd(rng), nd(rng)};
    StateVector s(n, std::move(a));
    s.normalize();
    return s;
}

std::vector<Instruction> random_segment(std::size_t n, std::size_t len, std::mt19937_64 &rng) {
    const GateKind kinds[] = {GateKind::X, GateKind::Y, GateKind::Z, GateKind::H, GateKind::S, GateKind::SDG,
                              GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CNOT, GateKind::CZ};
    std::uniform_int_distribution<std::size_t> pick(0, std::size(kinds) - 1), q(0, n - 1);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    std::vector<Instruction> seg;
    while (seg.size() < len) {
        const auto k = kinds[pick(rng)];
        std::vector<Qubit> qs{q(rng)};
        if (gate_arity(k) == 2) {
            const Qubit b = q(rng);
            if (b == qs[0]) continue;
            qs.push_back(b);
        }
        std::vector<double> p;
        if (gate_param_count(k) == 1) p.push_back(ang(rng));
        seg.push_back(g(k, qs, p));
    }
    return seg;
}

} // namespace

TEST(CircuitValidate, RejectsMalformedInstructions) {
    {
        DynamicCircuit c(2);
        c.gate(GateKind::RX, {0});
        EXPECT_THROW(c.validate(), std::invalid_argument);
    }
    {
        DynamicCircuit c(2);
        c.gate(GateKind::H, {0}, {0.3});
        EXPECT_THROW(c.validate(), std::invalid_argument);
    }
    {
        DynamicCircuit c(2);
        c.gate(GateKind::CNOT, {0});
        EXPECT_THROW(c.validate(), std::invalid_argument);
    }
    {
        DynamicCircuit c(2);
        c.gate(GateKind::CZ, {1, 1});
        EXPECT_THROW(c.validate(), std::invalid_argument);
    }
    {
        DynamicCircuit c(2);
        c.gate(GateKind::X, {2});
        EXPECT_THROW(c.validate(), std::invalid_argument);
    }
    {
        DynamicCircuit c(2);
        c.barrier({0, 0});
        EXPECT_THROW(c.validate(), std::invalid_argument);
    }
}

TEST(CircuitValidate, RejectsDanglingClassicalRead) {
    DynamicCircuit c(2);
    const Clbit b = c.add_clbit();
    c.conditional(make_gate(GateKind::X, {1}), {b});
    c.measure(0, b);
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(schedule(c, DurationTable{}), std::invalid_argument);
}

TEST(CircuitValidate, RejectsEmptyCondition) {
    DynamicCircuit c(2);
    c.measure(0, c.add_clbit());
    c.conditional(make_gate(GateKind::X, {1}), {});
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(CircuitValidate, DataAndAncillaPartition) {
    DynamicCircuit c(5, {0, 2, 4});
    EXPECT_EQ(c.ancilla_qubits(), (std::vector<Qubit>{1, 3}));
    EXPECT_THROW(DynamicCircuit(3, {0, 0}).validate(), std::invalid_argument);
    EXPECT_THROW(DynamicCircuit(3, {3}).validate(), std::invalid_argument);
}

TEST(CircuitJson, RoundTrip) {
    const auto c = dynamic_entangler(3);
    const auto j = to_json(c);
    EXPECT_EQ(j.at("num_qubits"), 5);
    EXPECT_EQ(circuit_from_json(j), c);
    EXPECT_EQ(circuit_from_json(nlohmann::json::parse(j.dump())), c);
}

TEST(InvertSegment, Examples) {
    EXPECT_TRUE(invert_gate_segment({}).empty());

    const std::vector<Instruction> h{g(GateKind::H, {0})};
    EXPECT_EQ(invert_gate_segment(h), h);

    const auto inv = invert_gate_segment({g(GateKind::RZ, {0}, {0.7}), g(GateKind::CNOT, {0, 1})});
    const std::vector<Instruction> want{g(GateKind::CNOT, {0, 1}), g(GateKind::RZ, {0}, {-0.7})};
    EXPECT_EQ(inv, want);

    EXPECT_EQ(invert_gate_segment({g(GateKind::S, {1})}), std::vector<Instruction>{g(GateKind::SDG, {1})});
}

TEST(InvertSegment, RejectsDynamicInstructions) {
    EXPECT_THROW(invert_gate_segment({{Measure{0, 0}, std::nullopt}}), std::invalid_argument);
    EXPECT_THROW(invert_gate_segment({{Reset{0}, std::nullopt}}), std::invalid_argument);
    EXPECT_THROW(invert_gate_segment({{ConditionalGate{make_gate(GateKind::X, {0}), {0}}, std::nullopt}}),
                 std::invalid_argument);
}

TEST(InvertSegment, ComposesToIdentity) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> nq(1, 4), len(0, 12);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = nq(rng);
        const auto seg = random_segment(n, len(rng), rng);
        DynamicCircuit c(n);
        for (const auto &i : seg) c.append(i);
        for (const auto &i : invert_gate_segment(seg)) c.append(i);
        const auto psi = random_state(n, rng);
        EXPECT_GE(simulate_unitary(c, psi).fidelity(psi), 1 - 1e-10) << trial;
    }
}

TEST(Schedule, EmptyCircuit) {
    const auto s = schedule(DynamicCircuit(3), DurationTable{});
    EXPECT_TRUE(s.timed.empty());
    for (const auto &w : s.idle) EXPECT_TRUE(w.empty());
    EXPECT_EQ(s.makespan_ns, 0.0);
}

TEST(Schedule, IdleWindowAcrossMeasurement) {
    DynamicCircuit c(2);
    c.gate(GateKind::X, {0});
    c.gate(GateKind::X, {1});
    c.measure(0, c.add_clbit());
    c.barrier({0, 1});
    const auto s = schedule(c, DurationTable{});
    EXPECT_DOUBLE_EQ(s.timed[2].start_ns, 32.0);
    EXPECT_DOUBLE_EQ(s.timed[3].start_ns, 1232.0);
    ASSERT_EQ(s.idle[1].size(), 1u);
    EXPECT_DOUBLE_EQ(s.idle[1][0].start_ns, 32.0);
    EXPECT_DOUBLE_EQ(s.idle[1][0].end_ns, 1232.0);
    EXPECT_DOUBLE_EQ(s.idle[1][0].length(), 1200.0);
    EXPECT_EQ(s.idle[1][0].cause, IdleCause::McmFf);
    EXPECT_FALSE(s.idle[1][0].too_short_for_dd);
    EXPECT_TRUE(s.idle[0].empty());
}

TEST(Schedule, ConditionalWaitsForFeedForward) {
    DynamicCircuit c(2);
    const Clbit b = c.add_clbit();
    c.measure(0, b);
    c.conditional(make_gate(GateKind::X, {1}), {b});
    const auto s = schedule(c, DurationTable{});
    EXPECT_DOUBLE_EQ(s.timed[0].end_ns, 1200.0);
    EXPECT_DOUBLE_EQ(s.timed[1].start_ns, 1800.0);
    EXPECT_NO_THROW(check_schedule(c, s, DurationTable{}));
}

TEST(Schedule, ShortWindowsAreFlagged) {
    DynamicCircuit c(2);
    c.gate(GateKind::X, {0});
    c.gate(GateKind::CNOT, {0, 1});
    c.gate(GateKind::X, {1});
    c.gate(GateKind::CNOT, {1, 0});
    const auto s = schedule(c, DurationTable{});
    ASSERT_EQ(s.idle[0].size(), 1u);
    EXPECT_DOUBLE_EQ(s.idle[0][0].length(), 32.0);
    EXPECT_TRUE(s.idle[0][0].too_short_for_dd);
    EXPECT_EQ(s.idle[0][0].cause, IdleCause::GateWait);
}

TEST(Schedule, MeasurementRunsStartTogether) {
    // Ancilla measurements of a dynamic entangler share one start time.
    const auto c = dynamic_entangler(4);
    const auto s = schedule(c, DurationTable{});
    std::vector<double> starts;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.instructions()[i].is<Measure>()) starts.push_back(s.timed[i].start_ns);
    }
    ASSERT_EQ(starts.size(), 3u);
    for (double t : starts) EXPECT_EQ(t, starts.front());
}

TEST(Schedule, InvariantsHoldOnBuilderCircuits) {
    const DurationTable d;
    AnsatzSpec a;
    a.n = 4;
    a.theta.assign(a.parameter_count(), 0.2);
    TrotterSpec t;
    t.n = 5;
    t.h = 0.5;
    t.model = Model::Heisenberg;
    for (const auto &c : {hea_circuit(a), fold_circuit(a, {2}), trotter_circuit(t), fold_circuit(t, {1}),
                          inverse_entangler(5)}) {
        const auto s = schedule(c, d);
        EXPECT_NO_THROW(check_schedule(c, s, d));
        EXPECT_EQ(s, schedule(c, d));
    }
}

TEST(Schedule, RandomCircuitsSatisfyInvariants) {
    std::mt19937_64 rng(5);
    DurationTable d;
    d.feed_forward_ns = 250;
    for (int trial = 0; trial < 30; ++trial) {
        DynamicCircuit c(4);
        std::uniform_int_distribution<int> op(0, 5);
        std::uniform_int_distribution<Qubit> q(0, 3);
        std::vector<Clbit> written;
        for (int i = 0; i < 25; ++i) {
            switch (op(rng)) {
            case 0: c.measure(q(rng), c.add_clbit()), written.push_back(c.num_clbits() - 1); break;
            case 1: c.reset(q(rng)); break;
            case 2:
                if (!written.empty()) c.conditional(make_gate(GateKind::X, {q(rng)}), {written.back()});
                break;
            case 3: c.barrier_all(); break;
            default: {
                const Qubit a = q(rng), b = q(rng);
                if (a != b) c.gate(GateKind::CNOT, {a, b});
                else c.gate(GateKind::H, {a});
            }
            }
        }
        const auto s = schedule(c, d);
        EXPECT_NO_THROW(check_schedule(c, s, d)) << trial;
        EXPECT_EQ(s, schedule(c, d));
    }
}

TEST(Schedule, DurationTableValidation) {
    DurationTable d;
    d.measure_ns = 0;
    EXPECT_THROW(d.validate(), std::invalid_argument);
    d = {};
    d.one_qubit_ns = -1;
    EXPECT_THROW(d.validate(), std::invalid_argument);
}
