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

#include "dynem/branch.hpp"
#include "dynem/builders.hpp"
#include "dynem/density.hpp"
#include "dynem/expectation.hpp"
#include "dynem/mitigation.hpp"

using namespace dynem;

namespace {

AnsatzSpec random_ansatz(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    AnsatzSpec a;
    a.n = n;
    for (std::size_t i = 0; i < a.parameter_count(); ++i) a.theta.push_back(u(rng));
    return a;
}

DDResult dd(const DynamicCircuit &c, const DDPolicy &p = {}) {
    const DurationTable d;
    return insert_dd(c, schedule(c, d), p, d);
}

/// Exact energy of the data register under `noise` via the density backend.
double dm_energy(const DynamicCircuit &c, const PauliSum &H, const std::optional<NoiseModel> &noise) {
    const auto rho = dm_evolve(c, schedule(c, DurationTable{}), noise);
    double e = 0;
    for (const auto &t : H.terms()) e += t.coeff * rho.expectation(t.pauli.mask(c.data_qubits()));
    return e;
}

} // namespace

TEST(InsertDD, NoWindowsIsNoOp) {
    DynamicCircuit c(2);
    c.gate(GateKind::H, {0});
    c.gate(GateKind::CNOT, {0, 1});
    const auto r = dd(c);
    EXPECT_EQ(r.circuit, c);
    EXPECT_EQ(r.pulse_pairs, 0u);
}

TEST(InsertDD, PulsesAtQuarterPoints) {
    DynamicCircuit c(2);
    c.gate(GateKind::RY, {0}, {0.9});
    c.measure(1, c.add_clbit());
    c.barrier({0, 1});
    c.gate(GateKind::RZ, {0}, {0.4});
    const DurationTable d;
    const auto s = schedule(c, d);
    ASSERT_EQ(s.idle[0].size(), 1u);
    const double w0 = s.idle[0][0].start_ns, len = s.idle[0][0].length();
    const auto r = insert_dd(c, s, DDPolicy{}, d);
    EXPECT_EQ(r.pulse_pairs, 1u);
    const auto s2 = schedule(r.circuit, d);
    std::vector<double> starts;
    for (std::size_t i = 0; i < r.circuit.size(); ++i) {
        const auto &inst = r.circuit.instructions()[i];
        if (inst.is<Gate>() && inst.as<Gate>().kind == GateKind::X) starts.push_back(s2.timed[i].start_ns - w0);
    }
    ASSERT_EQ(starts.size(), 2u);
    EXPECT_DOUBLE_EQ(starts[0], 0.25 * len);
    EXPECT_DOUBLE_EQ(starts[1], 0.75 * len);
    EXPECT_DOUBLE_EQ(s2.makespan_ns, s.makespan_ns);
    EXPECT_EQ(s2.idle[0].size(), 3u);
    // The echo: first and last sub-windows sum to the middle one.
    EXPECT_NEAR(s2.idle[0][0].length() + s2.idle[0][2].length(), s2.idle[0][1].length(), 1e-9);

    const auto before = simulate_unitary([&] {
        DynamicCircuit u(2);
        u.gate(GateKind::RY, {0}, {0.9});
        u.gate(GateKind::RZ, {0}, {0.4});
        return u;
    }());
    DynamicCircuit gates(2);
    for (const auto &i : r.circuit.instructions()) {
        if (i.is<Gate>()) gates.append(i);
    }
    EXPECT_GE(simulate_unitary(gates).fidelity(before), 1 - 1e-10);
}

TEST(InsertDD, OnlyDataQubitsInMcmWindows) {
    TrotterSpec t;
    t.n = 4;
    t.h = 0.5;
    const auto c = trotter_circuit(t);
    const auto r = dd(c);
    EXPECT_GT(r.pulse_pairs, 0u);
    const auto &data = c.data_qubits();
    for (const auto &i : r.circuit.instructions()) {
        if (i.pinned_start_ns) {
            ASSERT_TRUE(i.is<Gate>());
            EXPECT_EQ(i.as<Gate>().kind, GateKind::X);
            EXPECT_NE(std::find(data.begin(), data.end(), i.as<Gate>().qubits[0]), data.end());
        }
    }
    EXPECT_EQ(r.circuit.size(), c.size() + 2 * r.pulse_pairs);
}

TEST(InsertDD, SkipsShortWindows) {
    DDPolicy p;
    p.min_window_ns = 1e6;
    const auto c = dynamic_entangler(3);
    const auto r = dd(c, p);
    EXPECT_EQ(r.pulse_pairs, 0u);
    EXPECT_GT(r.skipped_windows, 0u);
    EXPECT_EQ(r.circuit, c);
}

TEST(InsertDD, PreservesGadgetChannels) {
    for (const auto &c : {dynamic_entangler(3), inverse_entangler(3), rzz_gadget(0.7, 0, 2, 1, PauliBasis::XX)}) {
        const auto r = dd(c);
        const auto a = channel_on_data(c), b = channel_on_data(r.circuit);
        EXPECT_LT((a.choi - b.choi).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(InsertDD, PreservesAnsatzEnergy) {
    const auto a = random_ansatz(3, 5);
    const auto c = hea_circuit(a);
    const auto H = tfim(3, 0.5);
    const auto r = dd(c);
    EXPECT_GT(r.pulse_pairs, 0u);
    EXPECT_NEAR(statevector_expectation(r.circuit, H), statevector_expectation(c, H), 1e-10);
}

TEST(InsertDD, RefocusesStaticDetuning) {
    // Exact density evolution: DD removes the mcm-ff share of the detuning
    // error, leaving only the short gate-wait windows.
    const auto a = random_ansatz(3, 8);
    const auto c = hea_circuit(a);
    const auto H = tfim(3, 0.5);
    const auto noise = NoiseModel::detuning_only(0.3 / 1800);
    const double ideal = dm_energy(c, H, std::nullopt);
    const double base = dm_energy(c, H, noise);
    const double with_dd = dm_energy(dd(c).circuit, H, noise);
    EXPECT_GT(std::abs(base - ideal), 1e-2);
    EXPECT_LT(std::abs(with_dd - ideal), 0.05 * std::abs(base - ideal));
}

TEST(InsertDD, PolicyValidation) {
    EXPECT_THROW((DDPolicy{0.75, 0.25, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((DDPolicy{0.0, 0.5, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((DDPolicy{0.2, 0.8, -1}.validate()), std::invalid_argument);
    EXPECT_EQ(nlohmann::json(DDPolicy{0.2, 0.8, 100}).get<DDPolicy>(), (DDPolicy{0.2, 0.8, 100}));
}

TEST(Zne, LinearExample) {
    const auto r = zne_extrapolate({{1, 10, 0}, {3, 8, 0}, {5, 6, 0}}, FitKind::Linear);
    EXPECT_NEAR(r.e0, 11.0, 1e-12);
    EXPECT_NEAR(r.residual_norm, 0.0, 1e-12);
    EXPECT_EQ(r.used, FitKind::Linear);
}

TEST(Zne, ConstantDataAnyForm) {
    const double c = -3.25;
    for (auto k : {FitKind::Linear, FitKind::Quadratic, FitKind::Exponential}) {
        const auto r = zne_extrapolate({{1, c, 0}, {3, c, 0}, {5, c, 0}}, k);
        EXPECT_NEAR(r.e0, c, 1e-12) << fit_kind_name(k);
        EXPECT_FALSE(r.fell_back);
    }
}

TEST(Zne, ExponentialSynthetic) {
    std::vector<ZNEPoint> pts;
    for (double l : {1.0, 3.0, 5.0}) pts.push_back({l, -2.0 + 0.5 * std::exp(-0.3 * l), 0.0});
    const auto r = zne_extrapolate(pts, FitKind::Exponential);
    EXPECT_FALSE(r.fell_back);
    EXPECT_EQ(r.used, FitKind::Exponential);
    EXPECT_NEAR(r.e0, -1.5, 1e-6);
}

TEST(Zne, ExponentialRecoversRandomModels) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ua(-5, 5), ub(-2, 2), uc(0.05, 0.8);
    for (int i = 0; i < 20; ++i) {
        const double a = ua(rng), b = ub(rng), c = uc(rng);
        std::vector<ZNEPoint> pts;
        for (double l : {1.0, 3.0, 5.0, 7.0}) pts.push_back({l, a + b * std::exp(-c * l), 0.0});
        const auto r = zne_extrapolate(pts, FitKind::Exponential);
        EXPECT_NEAR(r.e0, a + b, 1e-6) << a << " " << b << " " << c;
    }
}

TEST(Zne, QuadraticExact) {
    std::vector<ZNEPoint> pts;
    for (double l : {1.0, 3.0, 5.0}) pts.push_back({l, 0.4 - 0.3 * l + 0.05 * l * l, 0.0});
    EXPECT_NEAR(zne_extrapolate(pts, FitKind::Quadratic).e0, 0.4, 1e-12);
}

TEST(Zne, LinearExactOnRandomLines) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-10, 10), se(0.01, 0.2);
    for (int i = 0; i < 50; ++i) {
        const double a = u(rng), b = u(rng);
        std::vector<ZNEPoint> pts;
        for (double l : {1.0, 3.0, 5.0}) pts.push_back({l, a + b * l, i % 2 ? se(rng) : 0.0});
        EXPECT_NEAR(zne_extrapolate(pts, FitKind::Linear).e0, a, 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)));
    }
}

TEST(Zne, WeightsFavourPrecisePoints) {
    // A noisy outlier with a large error bar barely moves the weighted line.
    const std::vector<ZNEPoint> pts{{1, 1.0, 0.001}, {3, 3.0, 0.001}, {5, 9.0, 10.0}};
    EXPECT_NEAR(zne_extrapolate(pts, FitKind::Linear).e0, 0.0, 1e-3);
}

TEST(Zne, RejectsDegenerateInputs) {
    EXPECT_THROW(zne_extrapolate({{1, 1, 0}}, FitKind::Linear), std::invalid_argument);
    EXPECT_THROW(zne_extrapolate({{1, 1, 0}, {1, 2, 0}}, FitKind::Linear), std::invalid_argument);
    EXPECT_THROW(zne_extrapolate({{1, 1, 0}, {3, 2, 0}}, FitKind::Quadratic), std::invalid_argument);
    EXPECT_THROW(zne_extrapolate({{1, 1, 0}, {3, 2, 0}}, FitKind::Exponential), std::invalid_argument);
    EXPECT_THROW(zne_extrapolate({{1, NAN, 0}, {3, 2, 0}}, FitKind::Linear), std::invalid_argument);
}

TEST(Zne, NonMonotoneExponentialFallsBack) {
    const auto r = zne_extrapolate({{1, 0, 0}, {3, 1, 0}, {5, 0, 0}}, FitKind::Exponential);
    EXPECT_TRUE(r.fell_back);
    EXPECT_EQ(r.requested, FitKind::Exponential);
    EXPECT_EQ(r.used, FitKind::Linear);
    EXPECT_NEAR(r.e0, 1.0 / 3.0, 1e-12);
}

TEST(Zne, ConfigValidationAndJson) {
    ZNEConfig z;
    EXPECT_EQ(z.lambdas(), (std::vector<double>{1, 3, 5}));
    z.folds = {1, 1};
    EXPECT_THROW(z.validate(), std::invalid_argument);
    z.folds = {0, 3};
    EXPECT_THROW(z.validate(), std::invalid_argument);
    z.folds = {0, 2};
    z.fit = FitKind::Quadratic;
    EXPECT_EQ(nlohmann::json(z).get<ZNEConfig>(), z);
    EXPECT_THROW(fit_kind_from_name("cubic"), std::invalid_argument);
}

TEST(Improvement, Examples) {
    EXPECT_NEAR(*improvement_percent(-5, -4, -4.6), 60.0, 1e-12);
    EXPECT_NEAR(*improvement_percent(-5, -4, -5), 100.0, 1e-12);
    EXPECT_NEAR(*improvement_percent(-5, -4, -3), -100.0, 1e-12);
    EXPECT_NEAR(*improvement_percent(-5, -6, -4.6), 60.0, 1e-12);
}

TEST(Improvement, Guard) {
    EXPECT_FALSE(improvement_percent(-5, -5, -4).has_value());
    EXPECT_FALSE(improvement_percent(-5e6, -5e6 + 1, -4).has_value());
    EXPECT_TRUE(improvement_percent(-5e6, -5e6 + 10, -4).has_value());
    EXPECT_FALSE(improvement_percent(0.0, 5e-7, 0.1).has_value());
    EXPECT_THROW(improvement_percent(INFINITY, 0, 0), std::invalid_argument);
}

TEST(Improvement, AffineInvariance) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int i = 0; i < 100; ++i) {
        const double r = u(rng), b = u(rng), m = u(rng), c = u(rng);
        const auto p = improvement_percent(r, b, m), q = improvement_percent(r + c, b + c, m + c);
        ASSERT_TRUE(p && q);
        EXPECT_NEAR(*p, *q, 1e-9);
    }
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3, 1, 2}), 2);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_EQ(median({-7}), -7);
    EXPECT_THROW(median({}), std::invalid_argument);
}
