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
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"

namespace dynem {

/// Instruction durations in nanoseconds.
struct DurationTable {
    double one_qubit_ns = 32.0;
    double two_qubit_ns = 68.0;
    double measure_ns = 1200.0;
    double feed_forward_ns = 600.0;
    double reset_ns = 800.0;

    void validate() const {
        if (!(one_qubit_ns >= 0 && two_qubit_ns >= 0 && reset_ns >= 0)) {
            throw std::invalid_argument("durations must be non-negative");
        }
        if (!(measure_ns > 0 && feed_forward_ns > 0)) {
            throw std::invalid_argument("measurement duration and feed-forward latency must be positive");
        }
    }

    double of(const Instruction &inst) const {
        if (auto g = std::get_if<Gate>(&inst.op)) return g->qubits.size() == 2 ? two_qubit_ns : one_qubit_ns;
        if (auto c = std::get_if<ConditionalGate>(&inst.op)) {
            return c->gate.qubits.size() == 2 ? two_qubit_ns : one_qubit_ns;
        }
        if (inst.is<Measure>()) return measure_ns;
        if (inst.is<Reset>()) return reset_ns;
        return 0.0;
    }

    bool operator==(const DurationTable &) const = default;
};

inline void to_json(nlohmann::json &j, const DurationTable &d) {
    j = {{"one_qubit_ns", d.one_qubit_ns},
         {"two_qubit_ns", d.two_qubit_ns},
         {"measure_ns", d.measure_ns},
         {"feed_forward_ns", d.feed_forward_ns},
         {"reset_ns", d.reset_ns}};
}

inline void from_json(const nlohmann::json &j, DurationTable &d) {
    DurationTable def;
    d.one_qubit_ns = j.value("one_qubit_ns", def.one_qubit_ns);
    d.two_qubit_ns = j.value("two_qubit_ns", def.two_qubit_ns);
    d.measure_ns = j.value("measure_ns", def.measure_ns);
    d.feed_forward_ns = j.value("feed_forward_ns", def.feed_forward_ns);
    d.reset_ns = j.value("reset_ns", def.reset_ns);
    d.validate();
}

enum class IdleCause { McmFf, GateWait };

inline const char *idle_cause_name(IdleCause c) { return c == IdleCause::McmFf ? "mcm-ff" : "gate-wait"; }

struct TimedInstruction {
    std::size_t index = 0; ///< position in the circuit's instruction list
    double start_ns = 0.0;
    double end_ns = 0.0;
};

struct IdleWindow {
    Qubit qubit = 0;
    double start_ns = 0.0;
    double end_ns = 0.0;
    IdleCause cause = IdleCause::GateWait;
    bool too_short_for_dd = false;
    std::size_t prev_instruction = 0; ///< instruction ending at start_ns on this qubit
    std::size_t next_instruction = 0; ///< instruction starting at end_ns on this qubit

    double length() const { return end_ns - start_ns; }
};

struct Schedule {
    std::size_t num_qubits = 0;
    std::vector<TimedInstruction> timed;            ///< indexed like the circuit's instructions
    std::vector<std::vector<std::size_t>> qubit_ops; ///< per qubit, instruction indices in time order
    std::vector<std::vector<IdleWindow>> idle;       ///< per qubit, in time order
    double makespan_ns = 0.0;

    bool operator==(const Schedule &o) const {
        auto same_t = [](const TimedInstruction &a, const TimedInstruction &b) {
            return a.index == b.index && a.start_ns == b.start_ns && a.end_ns == b.end_ns;
        };
        auto same_w = [](const IdleWindow &a, const IdleWindow &b) {
            return a.qubit == b.qubit && a.start_ns == b.start_ns && a.end_ns == b.end_ns &&
                   a.cause == b.cause && a.too_short_for_dd == b.too_short_for_dd &&
                   a.prev_instruction == b.prev_instruction && a.next_instruction == b.next_instruction;
        };
        if (num_qubits != o.num_qubits || timed.size() != o.timed.size() || idle.size() != o.idle.size() ||
            qubit_ops != o.qubit_ops || makespan_ns != o.makespan_ns) {
            return false;
        }
        for (std::size_t i = 0; i < timed.size(); ++i) {
            if (!same_t(timed[i], o.timed[i])) return false;
        }
        for (std::size_t q = 0; q < idle.size(); ++q) {
            if (idle[q].size() != o.idle[q].size()) return false;
            for (std::size_t i = 0; i < idle[q].size(); ++i) {
                if (!same_w(idle[q][i], o.idle[q][i])) return false;
            }
        }
        return true;
    }
};

namespace detail {
inline constexpr double kTimeEps = 1e-9;
}

/// ASAP schedule. Each instruction starts once every qubit and classical bit it
/// touches is free; conditional gates additionally wait out the feed-forward
/// latency after the last measurement they read. Runs of adjacent Measure
/// instructions on distinct qubits start together at the latest of their ready
/// times. `dd_min_window_ns` < 0 selects the default 2 x one-qubit duration.
inline Schedule schedule(const DynamicCircuit &circuit, const DurationTable &durations,
                         double dd_min_window_ns = -1.0) {
    circuit.validate();
    durations.validate();
    if (dd_min_window_ns < 0) dd_min_window_ns = 2.0 * durations.one_qubit_ns;

    const auto &insts = circuit.instructions();
    const std::size_t nq = circuit.num_qubits();
    Schedule s;
    s.num_qubits = nq;
    s.timed.resize(insts.size());
    s.qubit_ops.assign(nq, {});
    s.idle.assign(nq, {});

    std::vector<double> qubit_ready(nq, 0.0);
    std::vector<double> clbit_written(circuit.num_clbits(), 0.0); // end of the last write
    std::vector<double> clbit_busy(circuit.num_clbits(), 0.0);    // last write end or read start

    // Intervals during which some qubit is being measured, reset, or waiting on
    // the classical control loop.
    std::vector<std::pair<double, double>> mcm_ff;

    auto ready_of = [&](const Instruction &inst) {
        double t = inst.pinned_start_ns.value_or(0.0);
        for (Qubit q : touched_qubits(inst)) t = std::max(t, qubit_ready[q]);
        if (auto m = std::get_if<Measure>(&inst.op)) t = std::max(t, clbit_busy[m->clbit]);
        return t;
    };

    auto commit = [&](std::size_t i, double start) {
        const auto &inst = insts[i];
        const double end = start + durations.of(inst);
        s.timed[i] = {i, start, end};
        for (Qubit q : touched_qubits(inst)) {
            qubit_ready[q] = end;
            s.qubit_ops[q].push_back(i);
        }
        if (auto m = std::get_if<Measure>(&inst.op)) {
            clbit_written[m->clbit] = end;
            clbit_busy[m->clbit] = end;
            mcm_ff.emplace_back(start, end);
        } else if (inst.is<Reset>()) {
            mcm_ff.emplace_back(start, end);
        }
        s.makespan_ns = std::max(s.makespan_ns, end);
    };

    std::size_t i = 0;
    while (i < insts.size()) {
        const auto &inst = insts[i];
        if (inst.is<Measure>()) {
            // Gather the run of adjacent measurements on distinct qubits.
            std::size_t j = i;
            std::vector<bool> used(nq, false);
            double start = 0.0;
            while (j < insts.size() && insts[j].is<Measure>() && !used[insts[j].as<Measure>().qubit]) {
                used[insts[j].as<Measure>().qubit] = true;
                start = std::max(start, ready_of(insts[j]));
                ++j;
            }
            for (std::size_t k = i; k < j; ++k) commit(k, start);
            i = j;
            continue;
        }
        if (auto b = std::get_if<Barrier>(&inst.op)) {
            double t = inst.pinned_start_ns.value_or(0.0);
            for (Qubit q : b->qubits) t = std::max(t, qubit_ready[q]);
            commit(i, t);
            ++i;
            continue;
        }
        double start = ready_of(inst);
        if (auto c = std::get_if<ConditionalGate>(&inst.op)) {
            double latest = 0.0;
            for (Clbit b : c->condition) latest = std::max(latest, clbit_written[b]);
            start = std::max(start, latest + durations.feed_forward_ns);
            mcm_ff.emplace_back(latest, start);
            for (Clbit b : c->condition) clbit_busy[b] = std::max(clbit_busy[b], start);
        }
        commit(i, start);
        ++i;
    }

    auto overlaps_mcm_ff = [&](double a, double b) {
        return std::any_of(mcm_ff.begin(), mcm_ff.end(), [&](const auto &iv) {
            return std::min(b, iv.second) - std::max(a, iv.first) > detail::kTimeEps;
        });
    };

    for (Qubit q = 0; q < nq; ++q) {
        const auto &ops = s.qubit_ops[q];
        for (std::size_t k = 1; k < ops.size(); ++k) {
            const double a = s.timed[ops[k - 1]].end_ns;
            const double b = s.timed[ops[k]].start_ns;
            if (b - a <= detail::kTimeEps) continue;
            IdleWindow w;
            w.qubit = q;
            w.start_ns = a;
            w.end_ns = b;
            w.cause = overlaps_mcm_ff(a, b) ? IdleCause::McmFf : IdleCause::GateWait;
            w.too_short_for_dd = (b - a) < dd_min_window_ns;
            w.prev_instruction = ops[k - 1];
            w.next_instruction = ops[k];
            s.idle[q].push_back(w);
        }
    }
    return s;
}

/// Re-checks the schedule invariants; throws std::logic_error naming the
/// first violation.
inline void check_schedule(const DynamicCircuit &circuit, const Schedule &s, const DurationTable &durations) {
    const auto &insts = circuit.instructions();
    if (s.timed.size() != insts.size()) throw std::logic_error("schedule size mismatch");
    for (Qubit q = 0; q < s.num_qubits; ++q) {
        const auto &ops = s.qubit_ops[q];
        for (std::size_t k = 1; k < ops.size(); ++k) {
            if (s.timed[ops[k]].start_ns + detail::kTimeEps < s.timed[ops[k - 1]].end_ns) {
                throw std::logic_error("overlapping instructions on qubit " + std::to_string(q));
            }
        }
        // Idle windows must tile exactly the positive gaps.
        std::size_t w = 0;
        for (std::size_t k = 1; k < ops.size(); ++k) {
            const double a = s.timed[ops[k - 1]].end_ns;
            const double b = s.timed[ops[k]].start_ns;
            if (b - a <= detail::kTimeEps) continue;
            if (w >= s.idle[q].size()) throw std::logic_error("missing idle window");
            const auto &win = s.idle[q][w++];
            if (win.start_ns != a || win.end_ns != b) throw std::logic_error("idle window does not match gap");
        }
        if (w != s.idle[q].size()) throw std::logic_error("extra idle window");
    }
    std::vector<double> written(circuit.num_clbits(), 0.0);
    for (std::size_t i = 0; i < insts.size(); ++i) {
        const auto &t = s.timed[i];
        if (std::abs(t.end_ns - t.start_ns - durations.of(insts[i])) > 1e-6) {
            throw std::logic_error("instruction duration mismatch");
        }
        if (auto m = std::get_if<Measure>(&insts[i].op)) written[m->clbit] = std::max(written[m->clbit], t.end_ns);
        if (auto c = std::get_if<ConditionalGate>(&insts[i].op)) {
            for (Clbit b : c->condition) {
                if (t.start_ns + detail::kTimeEps < written[b] + durations.feed_forward_ns) {
                    throw std::logic_error("conditional gate starts before feed-forward completes");
                }
            }
        }
    }
}

} // namespace dynem
