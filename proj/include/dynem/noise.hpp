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
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "schedule.hpp"

namespace dynem {

/// Error parameters bound to instruction durations. Times in ns, rates in rad/ns.
struct NoiseModel {
    double p1q = 2e-4;
    double p2q = 3e-3;
    double readout_p10 = 1e-2; ///< P(read 1 | true 0)
    double readout_p01 = 1e-2; ///< P(read 0 | true 1)
    double t1_ns = 250e3;
    double t2_ns = 120e3;
    double idle_detuning = 5e-5;  ///< coherent Z rate on idle qubits
    double mcm_crosstalk = 2e-4;  ///< coherent Z rate on neighbours of a measured qubit
    std::vector<std::pair<Qubit, Qubit>> coupling_map; ///< empty: linear chain over all qubits

    static NoiseModel zero() {
        NoiseModel m;
        m.p1q = m.p2q = m.readout_p10 = m.readout_p01 = 0.0;
        m.t1_ns = m.t2_ns = std::numeric_limits<double>::infinity();
        m.idle_detuning = m.mcm_crosstalk = 0.0;
        return m;
    }

    /// Only coherent idle detuning; everything else off.
    static NoiseModel detuning_only(double rate) {
        NoiseModel m = zero();
        m.idle_detuning = rate;
        return m;
    }

    /// True when the model injects no events at all.
    bool is_silent() const {
        return p1q == 0 && p2q == 0 && readout_p10 == 0 && readout_p01 == 0 && std::isinf(t1_ns) && std::isinf(t2_ns) &&
               idle_detuning == 0 && mcm_crosstalk == 0;
    }

    double relaxation_rate() const { return std::isinf(t1_ns) ? 0.0 : 1.0 / t1_ns; }

    /// 1/T_phi = 1/T2 - 1/(2 T1)
    double pure_dephasing_rate() const {
        const double r2 = std::isinf(t2_ns) ? 0.0 : 1.0 / t2_ns;
        return std::max(0.0, r2 - 0.5 * relaxation_rate());
    }

    void validate() const {
        for (double p : {p1q, p2q, readout_p10, readout_p01}) {
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise probability outside [0,1]");
        }
        if (!(t1_ns > 0) || !(t2_ns > 0)) throw std::invalid_argument("T1 and T2 must be positive");
        if (!std::isinf(t2_ns) && !(t2_ns <= 2.0 * t1_ns)) throw std::invalid_argument("T2 must not exceed 2*T1");
        if (std::isinf(t2_ns) && !std::isinf(t1_ns)) throw std::invalid_argument("T2 must not exceed 2*T1");
        if (!std::isfinite(idle_detuning) || !std::isfinite(mcm_crosstalk)) {
            throw std::invalid_argument("noise rates must be finite");
        }
    }

    /// Multiplies every stochastic error strength by `factor`; coherent rates are untouched.
    NoiseModel scaled_stochastic(double factor) const {
        NoiseModel m = *this;
        m.p1q = std::min(1.0, p1q * factor);
        m.p2q = std::min(1.0, p2q * factor);
        m.readout_p10 = std::min(1.0, readout_p10 * factor);
        m.readout_p01 = std::min(1.0, readout_p01 * factor);
        const double r1 = relaxation_rate() * factor;
        const double rphi = pure_dephasing_rate() * factor;
        m.t1_ns = r1 > 0 ? 1.0 / r1 : std::numeric_limits<double>::infinity();
        const double r2 = rphi + 0.5 * r1;
        m.t2_ns = r2 > 0 ? 1.0 / r2 : std::numeric_limits<double>::infinity();
        return m;
    }

    std::vector<std::vector<Qubit>> neighbours(std::size_t num_qubits) const {
        std::vector<std::vector<Qubit>> adj(num_qubits);
        if (coupling_map.empty()) {
            for (Qubit q = 0; q + 1 < num_qubits; ++q) {
                adj[q].push_back(q + 1);
                adj[q + 1].push_back(q);
            }
        } else {
            for (auto [a, b] : coupling_map) {
                if (a >= num_qubits || b >= num_qubits || a == b) continue;
                adj[a].push_back(b);
                adj[b].push_back(a);
            }
            for (auto &v : adj) {
                std::sort(v.begin(), v.end());
                v.erase(std::unique(v.begin(), v.end()), v.end());
            }
        }
        return adj;
    }

    bool operator==(const NoiseModel &) const = default;
};

namespace detail {
inline nlohmann::json time_to_json(double t) { return std::isinf(t) ? nlohmann::json(nullptr) : nlohmann::json(t); }
inline double time_from_json(const nlohmann::json &j, const char *key, double def) {
    if (!j.contains(key)) return def;
    if (j.at(key).is_null()) return std::numeric_limits<double>::infinity();
    return j.at(key).get<double>();
}
} // namespace detail

inline void to_json(nlohmann::json &j, const NoiseModel &m) {
    j = {{"p1q", m.p1q},
         {"p2q", m.p2q},
         {"readout_p10", m.readout_p10},
         {"readout_p01", m.readout_p01},
         {"t1_ns", detail::time_to_json(m.t1_ns)},
         {"t2_ns", detail::time_to_json(m.t2_ns)},
         {"idle_detuning", m.idle_detuning},
         {"mcm_crosstalk", m.mcm_crosstalk}};
    if (!m.coupling_map.empty()) j["coupling_map"] = m.coupling_map;
}

inline void from_json(const nlohmann::json &j, NoiseModel &m) {
    NoiseModel d;
    m.p1q = j.value("p1q", d.p1q);
    m.p2q = j.value("p2q", d.p2q);
    m.readout_p10 = j.value("readout_p10", d.readout_p10);
    m.readout_p01 = j.value("readout_p01", d.readout_p01);
    m.t1_ns = detail::time_from_json(j, "t1_ns", d.t1_ns);
    m.t2_ns = detail::time_from_json(j, "t2_ns", d.t2_ns);
    m.idle_detuning = j.value("idle_detuning", d.idle_detuning);
    m.mcm_crosstalk = j.value("mcm_crosstalk", d.mcm_crosstalk);
    m.coupling_map = j.value("coupling_map", std::vector<std::pair<Qubit, Qubit>>{});
    m.validate();
}

enum class NoiseKind { PauliSample, AmplitudeDamp, Dephase, CoherentZ, ReadoutFlip };

/// Where an event is applied relative to its instruction.
enum class Anchor { Before, After, On, End };

struct NoiseEvent {
    double time_ns = 0.0;
    std::vector<Qubit> qubits;
    NoiseKind kind = NoiseKind::PauliSample;
    double value = 0.0;  ///< probability, damping gamma, angle (rad), or P(1|0)
    double value2 = 0.0; ///< P(0|1) for readout flips
    Anchor anchor = Anchor::After;
    std::size_t instruction = 0;
    bool only_if_fired = false; ///< depolarizing after a conditional gate

    bool operator==(const NoiseEvent &) const = default;
};

/// Events bucketed by instruction for execution.
struct NoiseProgram {
    std::vector<std::vector<NoiseEvent>> before;
    std::vector<std::vector<NoiseEvent>> after;
    std::vector<std::optional<NoiseEvent>> readout;
    std::vector<NoiseEvent> at_end;

    bool empty() const {
        auto none = [](const auto &v) {
            return std::all_of(v.begin(), v.end(), [](const auto &x) { return x.empty(); });
        };
        return none(before) && none(after) && at_end.empty() &&
               std::none_of(readout.begin(), readout.end(), [](const auto &r) { return r.has_value(); });
    }
};

namespace detail {

/// Splits [a, b] on `qubit` along its timeline (leading gap, busy intervals,
/// idle gaps, trailing gap) and calls f(length, anchor, instruction, end_time)
/// for each non-empty piece.
template <class F>
void split_on_timeline(const Schedule &s, Qubit qubit, double a, double b, F &&f) {
    const auto &ops = s.qubit_ops[qubit];
    auto piece = [&](double lo, double hi, Anchor anchor, std::size_t inst) {
        const double x = std::max(a, lo), y = std::min(b, hi);
        if (y - x > kTimeEps) f(y - x, anchor, inst, y);
    };
    if (ops.empty()) {
        piece(0.0, std::numeric_limits<double>::infinity(), Anchor::End, 0);
        return;
    }
    piece(0.0, s.timed[ops.front()].start_ns, Anchor::Before, ops.front());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const auto &t = s.timed[ops[k]];
        piece(t.start_ns, t.end_ns, Anchor::After, ops[k]);
        if (k + 1 < ops.size()) {
            piece(t.end_ns, s.timed[ops[k + 1]].start_ns, Anchor::Before, ops[k + 1]);
        }
    }
    piece(s.timed[ops.back()].end_ns, std::numeric_limits<double>::infinity(), Anchor::End, 0);
}

} // namespace detail

/// Translates a schedule into concrete noise events, ordered by time. Events
/// whose strength is exactly zero are omitted.
inline std::vector<NoiseEvent> events_for(const DynamicCircuit &circuit, const Schedule &s, const NoiseModel &model) {
    model.validate();
    std::vector<NoiseEvent> events;
    const auto &insts = circuit.instructions();

    // (a) gate depolarizing and (d) readout flips
    for (std::size_t i = 0; i < insts.size(); ++i) {
        const auto &inst = insts[i];
        const auto &t = s.timed[i];
        const Gate *g = nullptr;
        bool conditional = false;
        if (auto gg = std::get_if<Gate>(&inst.op)) {
            g = gg;
        } else if (auto c = std::get_if<ConditionalGate>(&inst.op)) {
            g = &c->gate;
            conditional = true;
        }
        if (g) {
            const double p = g->qubits.size() == 2 ? model.p2q : model.p1q;
            if (p > 0) {
                events.push_back({t.end_ns, g->qubits, NoiseKind::PauliSample, p, 0.0, Anchor::After, i, conditional});
            }
        } else if (auto m = std::get_if<Measure>(&inst.op)) {
            if (model.readout_p10 > 0 || model.readout_p01 > 0) {
                events.push_back({t.end_ns, {m->qubit}, NoiseKind::ReadoutFlip, model.readout_p10,
                                  model.readout_p01, Anchor::On, i, false});
            }
        }
    }

    // (b) idle decoherence
    const double r1 = model.relaxation_rate();
    const double rphi = model.pure_dephasing_rate();
    for (const auto &windows : s.idle) {
        for (const auto &w : windows) {
            const double len = w.length();
            const double gamma = -std::expm1(-len * r1);
            const double pz = -std::expm1(-len * rphi) / 2.0;
            const double angle = model.idle_detuning * len;
            auto push = [&](NoiseKind k, double v) {
                events.push_back({w.end_ns, {w.qubit}, k, v, 0.0, Anchor::Before, w.next_instruction, false});
            };
            if (gamma > 0) push(NoiseKind::AmplitudeDamp, gamma);
            if (pz > 0) push(NoiseKind::Dephase, pz);
            if (angle != 0) push(NoiseKind::CoherentZ, angle);
        }
    }

    // (c) measurement-induced coherent kicks on coupling-map neighbours
    if (model.mcm_crosstalk != 0) {
        const auto adj = model.neighbours(circuit.num_qubits());
        for (std::size_t i = 0; i < insts.size(); ++i) {
            auto m = std::get_if<Measure>(&insts[i].op);
            if (!m) continue;
            const auto &t = s.timed[i];
            for (Qubit nb : adj[m->qubit]) {
                detail::split_on_timeline(s, nb, t.start_ns, t.end_ns,
                                          [&](double len, Anchor anchor, std::size_t inst, double end) {
                                              events.push_back({end, {nb}, NoiseKind::CoherentZ,
                                                                model.mcm_crosstalk * len, 0.0, anchor, inst, false});
                                          });
            }
        }
    }

    std::stable_sort(events.begin(), events.end(),
                     [](const NoiseEvent &a, const NoiseEvent &b) { return a.time_ns < b.time_ns; });
    return events;
}

inline NoiseProgram bucket_events(const std::vector<NoiseEvent> &events, std::size_t num_instructions) {
    NoiseProgram p;
    p.before.resize(num_instructions);
    p.after.resize(num_instructions);
    p.readout.resize(num_instructions);
    for (const auto &e : events) {
        switch (e.anchor) {
        case Anchor::Before: p.before.at(e.instruction).push_back(e); break;
        case Anchor::After: p.after.at(e.instruction).push_back(e); break;
        case Anchor::On: p.readout.at(e.instruction) = e; break;
        case Anchor::End: p.at_end.push_back(e); break;
        }
    }
    return p;
}

} // namespace dynem
