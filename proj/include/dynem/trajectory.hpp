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
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "circuit.hpp"
#include "noise.hpp"
#include "schedule.hpp"
#include "statevector.hpp"

namespace dynem {

using Histogram = std::map<std::string, std::size_t>;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of shot `index` in a run seeded with `seed`.
inline std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

struct ShotRecord {
    std::vector<std::uint8_t> clbits;
    std::string data_bits; ///< data readout, character i = data qubit i
    std::uint64_t seed = 0;

    bool operator==(const ShotRecord &) const = default;
};

struct TrajectoryResult {
    ShotRecord record;
    StateVector state;
};

namespace detail {

inline void apply_pauli_digit(std::span<cplx> a, Qubit q, int digit) {
    switch (digit) {
    case 1: kernels::apply_x(a, q); break;
    case 2: kernels::apply_gate(a, make_gate(GateKind::Y, {q})); break;
    case 3: kernels::apply_diag(a, q, 1.0, -1.0); break;
    default: break;
    }
}

/// Runtime form of a noise event. Consecutive damping, dephasing and coherent
/// Z events on one qubit commute (up to global phase), so they are fused into
/// a single kernel pass.
struct FusedEvent {
    const NoiseEvent *pauli = nullptr; ///< set for gate depolarizing
    Qubit qubit = 0;
    double gamma = 0.0;
    double flip = 0.0;
    double angle = 0.0;
    bool only_if_fired = false;
};

inline std::vector<FusedEvent> fuse_events(const std::vector<NoiseEvent> &events) {
    std::vector<FusedEvent> out;
    std::map<Qubit, FusedEvent> pending;
    auto flush = [&](Qubit q) {
        auto it = pending.find(q);
        if (it == pending.end()) return;
        out.push_back(it->second);
        pending.erase(it);
    };
    auto flush_all = [&] {
        for (auto &[q, e] : pending) out.push_back(e);
        pending.clear();
    };
    for (const auto &e : events) {
        if (e.kind == NoiseKind::PauliSample) {
            for (Qubit q : e.qubits) flush(q);
            FusedEvent f;
            f.pauli = &e;
            f.only_if_fired = e.only_if_fired;
            out.push_back(f);
            continue;
        }
        if (e.kind == NoiseKind::ReadoutFlip) continue;
        const Qubit q = e.qubits[0];
        auto it = pending.find(q);
        if (it != pending.end() && it->second.only_if_fired != e.only_if_fired) {
            flush(q);
            it = pending.end();
        }
        if (it == pending.end()) {
            FusedEvent f;
            f.qubit = q;
            f.only_if_fired = e.only_if_fired;
            it = pending.emplace(q, f).first;
        }
        auto &f = it->second;
        switch (e.kind) {
        case NoiseKind::AmplitudeDamp: f.gamma = 1.0 - (1.0 - f.gamma) * (1.0 - e.value); break;
        case NoiseKind::Dephase: f.flip = f.flip * (1.0 - e.value) + (1.0 - f.flip) * e.value; break;
        case NoiseKind::CoherentZ: f.angle += e.value; break;
        default: break;
        }
    }
    flush_all();
    return out;
}

} // namespace detail

/// Stochastic statevector executor with a precomputed noise program. Immutable
/// after construction, so one runner can serve concurrent shots.
class TrajectoryRunner {
  public:
    TrajectoryRunner(const DynamicCircuit &circuit, const Schedule &schedule, const std::optional<NoiseModel> &noise)
        : circuit_(circuit) {
        circuit.validate();
        if (schedule.timed.size() != circuit.size()) throw std::invalid_argument("schedule does not match circuit");
        std::vector<NoiseEvent> events;
        if (noise) events = events_for(circuit, schedule, *noise);
        program_ = bucket_events(events, circuit.size());
        for (const auto &b : program_.before) before_.push_back(detail::fuse_events(b));
        for (const auto &a : program_.after) after_.push_back(detail::fuse_events(a));
        at_end_ = detail::fuse_events(program_.at_end);
    }

    // The fused events point into program_, so copies must rebuild them.
    TrajectoryRunner(const TrajectoryRunner &) = delete;
    TrajectoryRunner &operator=(const TrajectoryRunner &) = delete;

    const NoiseProgram &program() const { return program_; }

    TrajectoryResult run(std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        StateVector psi(circuit_.num_qubits());
        auto amps = psi.amplitudes();
        std::vector<std::uint8_t> bits(circuit_.num_clbits(), 0);

        auto apply_event = [&](const detail::FusedEvent &f) {
            if (f.pauli) {
                const auto &e = *f.pauli;
                if (uni(rng) >= e.value) return;
                const int k = static_cast<int>(e.qubits.size());
                const int count = (1 << (2 * k)) - 1;
                std::uniform_int_distribution<int> pick(1, count);
                int code = pick(rng);
                for (Qubit q : e.qubits) {
                    detail::apply_pauli_digit(amps, q, code & 3);
                    code >>= 2;
                }
                return;
            }
            const Qubit q = f.qubit;
            double norm0 = 1.0, norm1 = 1.0;
            if (f.gamma > 0) {
                // Exact unraveling: jump with probability gamma * P(1).
                const double p1 = kernels::prob_one(amps, q);
                if (uni(rng) < f.gamma * p1) {
                    kernels::project(amps, q, 1);
                    kernels::apply_x(amps, q);
                    kernels::scale(amps, 1.0 / std::sqrt(p1));
                    return;
                }
                const double keep = 1.0 / std::sqrt(1.0 - f.gamma * p1);
                norm0 = keep;
                norm1 = keep * std::sqrt(1.0 - f.gamma);
            }
            double sign = 1.0;
            if (f.flip > 0 && uni(rng) < f.flip) sign = -1.0;
            const double h = f.angle / 2;
            kernels::apply_diag(amps, q, norm0 * std::polar(1.0, -h), sign * norm1 * std::polar(1.0, h));
        };

        auto measure = [&](Qubit q) {
            const double p1 = kernels::prob_one(amps, q);
            const int outcome = uni(rng) < (1.0 - p1) ? 0 : 1;
            kernels::project(amps, q, outcome);
            kernels::scale(amps, 1.0 / std::sqrt(outcome ? p1 : 1.0 - p1));
            return outcome;
        };

        const auto &insts = circuit_.instructions();
        for (std::size_t i = 0; i < insts.size(); ++i) {
            for (const auto &e : before_[i]) apply_event(e);
            bool fired = true;
            const auto &op = insts[i].op;
            if (auto g = std::get_if<Gate>(&op)) {
                kernels::apply_gate(amps, *g);
            } else if (auto m = std::get_if<Measure>(&op)) {
                int recorded = measure(m->qubit);
                if (const auto &ro = program_.readout[i]) {
                    const double flip = recorded ? ro->value2 : ro->value;
                    if (uni(rng) < flip) recorded ^= 1;
                }
                bits[m->clbit] = static_cast<std::uint8_t>(recorded);
            } else if (auto r = std::get_if<Reset>(&op)) {
                if (measure(r->qubit)) kernels::apply_x(amps, r->qubit);
            } else if (auto c = std::get_if<ConditionalGate>(&op)) {
                int parity = 0;
                for (Clbit b : c->condition) parity ^= bits[b];
                fired = parity != 0;
                if (fired) kernels::apply_gate(amps, c->gate);
            }
            for (const auto &e : after_[i]) {
                if (e.only_if_fired && !fired) continue;
                apply_event(e);
            }
        }
        for (const auto &e : at_end_) apply_event(e);

        TrajectoryResult out{{std::move(bits), {}, seed}, std::move(psi)};
        out.record.data_bits = data_bitstring(out.record.clbits);
        return out;
    }

    /// Histogram key: the data readout bits, or all classical bits if the
    /// circuit has no designated readout.
    std::string data_bitstring(const std::vector<std::uint8_t> &bits) const {
        std::string s;
        if (circuit_.readout_clbits().empty()) {
            for (auto b : bits) s.push_back(b ? '1' : '0');
        } else {
            for (Clbit c : circuit_.readout_clbits()) s.push_back(bits[c] ? '1' : '0');
        }
        return s;
    }

  private:
    DynamicCircuit circuit_;
    NoiseProgram program_;
    std::vector<std::vector<detail::FusedEvent>> before_, after_;
    std::vector<detail::FusedEvent> at_end_;
};

inline TrajectoryResult run_trajectory(const DynamicCircuit &circuit, const Schedule &schedule,
                                       const std::optional<NoiseModel> &noise, std::uint64_t seed) {
    return TrajectoryRunner(circuit, schedule, noise).run(seed);
}

inline std::size_t default_worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs `count` independent jobs over a small worker pool. Jobs must not share
/// mutable state; `job(i)` is called exactly once per index.
template <class Job> void parallel_for(std::size_t count, Job &&job, std::size_t workers = 0) {
    if (workers == 0) workers = default_worker_count();
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    }
    for (auto &t : pool) t.join();
}

/// Aggregates `shots` trajectories, shot i seeded with shot_seed(seed, i).
inline Histogram run_shots(const TrajectoryRunner &runner, std::size_t shots, std::uint64_t seed,
                           std::size_t workers = 0) {
    if (shots == 0) throw std::invalid_argument("run_shots: shots must be >= 1");
    std::vector<std::string> keys(shots);
    parallel_for(
        shots, [&](std::size_t i) { keys[i] = runner.run(shot_seed(seed, i)).record.data_bits; }, workers);
    Histogram h;
    for (auto &k : keys) ++h[k];
    return h;
}

inline Histogram run_shots(const DynamicCircuit &circuit, const Schedule &schedule,
                           const std::optional<NoiseModel> &noise, std::size_t shots, std::uint64_t seed) {
    return run_shots(TrajectoryRunner(circuit, schedule, noise), shots, seed);
}

inline nlohmann::json histogram_to_json(const Histogram &h) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto &[k, v] : h) j[k] = v;
    return j;
}

} // namespace dynem
