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
#include "dynem/expectation.hpp"
#include "oracle.hpp"

using namespace dynem;

TEST(Entangler, DynamicMatchesLadder) {
    for (std::size_t n : {2, 3, 4}) {
        const auto ch = channel_on_data(dynamic_entangler(n));
        EXPECT_LT(ch.distance_to_unitary(oracle::ladder(n)), 1e-9) << n;
    }
}

TEST(Entangler, InverseMatchesAdjoint) {
    for (std::size_t n : {2, 3, 4}) {
        const auto ch = channel_on_data(inverse_entangler(n));
        EXPECT_LT(ch.distance_to_unitary(oracle::ladder(n).adjoint()), 1e-9) << n;
    }
}

TEST(Gadget, RotationsMatchTarget) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (auto [basis, p] : {std::pair{PauliBasis::ZZ, 'Z'}, {PauliBasis::XX, 'X'}, {PauliBasis::YY, 'Y'}}) {
        for (int i = 0; i < 10; ++i) {
            const double th = u(rng);
            const auto ch = channel_on_data(rzz_gadget(th, 0, 1, 2, basis));
            EXPECT_LT(ch.distance_to_unitary(oracle::rpp(p, th, 0, 1, 2)), 1e-9) << p << " " << th;
        }
    }
}

namespace {

std::vector<double> random_theta(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    std::vector<double> t(count);
    for (auto &x : t) x = u(rng);
    return t;
}

AnsatzSpec ansatz(std::size_t n, EntanglerKind e, std::uint64_t seed = 3) {
    AnsatzSpec a;
    a.n = n;
    a.entangler = e;
    a.theta = random_theta(a.parameter_count(), seed);
    return a;
}

} // namespace

TEST(Hea, StaticMatchesOracleState) {
    const auto a = ansatz(3, EntanglerKind::StaticLadder);
    const auto psi = simulate_unitary(hea_circuit(a));
    const auto want = oracle::hea_state(3, a.layers, a.theta);
    cplx ov = 0;
    for (std::size_t i = 0; i < psi.dim(); ++i) ov += std::conj(want(static_cast<Eigen::Index>(i))) * psi[i];
    EXPECT_NEAR(std::norm(ov), 1.0, 1e-12);
}

TEST(Hea, DynamicEqualsStaticEnergy) {
    for (double h : {0.0, 0.5, 2.0}) {
        const auto H = tfim(3, h);
        const double es = statevector_expectation(hea_circuit(ansatz(3, EntanglerKind::StaticLadder)), H);
        const double ed = statevector_expectation(hea_circuit(ansatz(3, EntanglerKind::Dynamic)), H);
        EXPECT_NEAR(es, ed, 1e-9);
    }
}

TEST(Fold, IdentityOnEnergy) {
    const auto H = tfim(3, 0.5);
    const auto a = ansatz(3, EntanglerKind::Dynamic);
    const double e0 = statevector_expectation(fold_circuit(a, {0}), H);
    for (std::size_t k : {1, 2}) EXPECT_NEAR(statevector_expectation(fold_circuit(a, {k}), H), e0, 1e-9) << k;
}

TEST(Trotter, DynamicEqualsStatic) {
    for (auto m : {Model::Tfim, Model::Heisenberg}) {
        TrotterSpec s;
        s.model = m;
        s.n = 3;
        s.h = 0.5;
        const auto H = hamiltonian(m, 3, 0.5);
        s.gadget = GadgetKind::Static;
        const double es = statevector_expectation(trotter_circuit(s), H);
        s.gadget = GadgetKind::Dynamic;
        const double ed = statevector_expectation(trotter_circuit(s), H);
        EXPECT_NEAR(es, ed, 1e-9);
    }
}

TEST(Trotter, FidelityAgainstExactEvolution) {
    TrotterSpec s;
    s.n = 3;
    s.h = 0.5;
    s.gadget = GadgetKind::Static;
    auto infidelity = [&](std::size_t steps) {
        s.steps = steps;
        const auto psi = simulate_unitary(trotter_circuit(s));
        Eigen::VectorXcd init = Eigen::VectorXcd::Zero(8);
        init(0) = 1;
        const Eigen::VectorXcd want = oracle::expm_hermitian(oracle::tfim(3, 0.5), s.t) * init;
        cplx ov = 0;
        for (std::size_t i = 0; i < 8; ++i) ov += std::conj(want(static_cast<Eigen::Index>(i))) * psi[i];
        return 1.0 - std::norm(ov);
    };
    const double f5 = infidelity(5), f10 = infidelity(10);
    EXPECT_LE(f5, 1e-3);
    EXPECT_LT(f10, f5);
}
