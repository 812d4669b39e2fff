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
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dynem {

using Qubit = std::size_t;
using Clbit = std::size_t;

enum class GateKind : std::uint8_t { X, Y, Z, H, SDG, S, RX, RY, RZ, CNOT, CZ };

inline constexpr std::string_view gate_name(GateKind k) {
    switch (k) {
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::H: return "H";
    case GateKind::SDG: return "SDG";
    case GateKind::S: return "S";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    }
    return "?";
}

inline GateKind gate_from_name(std::string_view name) {
    static constexpr GateKind all[] = {GateKind::X,  GateKind::Y,  GateKind::Z,    GateKind::H,
                                       GateKind::SDG, GateKind::S, GateKind::RX,   GateKind::RY,
                                       GateKind::RZ, GateKind::CNOT, GateKind::CZ};
    for (auto k : all) {
        if (gate_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown gate name: " + std::string(name));
}

inline constexpr std::size_t gate_arity(GateKind k) {
    return (k == GateKind::CNOT || k == GateKind::CZ) ? 2 : 1;
}

inline constexpr std::size_t gate_param_count(GateKind k) {
    return (k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ) ? 1 : 0;
}

struct Gate {
    GateKind kind{GateKind::X};
    std::vector<double> params;
    std::vector<Qubit> qubits;

    bool operator==(const Gate &) const = default;
};

struct Measure {
    Qubit qubit{};
    Clbit clbit{};
    bool operator==(const Measure &) const = default;
};

struct Reset {
    Qubit qubit{};
    bool operator==(const Reset &) const = default;
};

/// Applies `gate` iff the XOR of the listed classical bits is 1.
struct ConditionalGate {
    Gate gate;
    std::vector<Clbit> condition;
    bool operator==(const ConditionalGate &) const = default;
};

struct Barrier {
    std::vector<Qubit> qubits;
    bool operator==(const Barrier &) const = default;
};

using Operation = std::variant<Gate, Measure, Reset, ConditionalGate, Barrier>;

/// One circuit instruction. `pinned_start_ns` is a scheduling floor: the
/// scheduler never starts the instruction earlier than this time.
struct Instruction {
    Operation op;
    std::optional<double> pinned_start_ns;

    bool operator==(const Instruction &) const = default;

    template <class T> bool is() const { return std::holds_alternative<T>(op); }
    template <class T> const T &as() const { return std::get<T>(op); }
};

inline Gate make_gate(GateKind k, std::vector<Qubit> qubits, std::vector<double> params = {}) {
    return Gate{k, std::move(params), std::move(qubits)};
}

inline std::vector<Qubit> touched_qubits(const Instruction &inst) {
    return std::visit(
        [](const auto &op) -> std::vector<Qubit> {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, Gate>) return op.qubits;
            else if constexpr (std::is_same_v<T, Measure>) return {op.qubit};
            else if constexpr (std::is_same_v<T, Reset>) return {op.qubit};
            else if constexpr (std::is_same_v<T, ConditionalGate>) return op.gate.qubits;
            else return op.qubits;
        },
        inst.op);
}

inline bool is_two_qubit_gate(const Instruction &inst) {
    if (auto g = std::get_if<Gate>(&inst.op)) return g->qubits.size() == 2;
    if (auto c = std::get_if<ConditionalGate>(&inst.op)) return c->gate.qubits.size() == 2;
    return false;
}

inline void validate_gate(const Gate &g) {
    if (g.qubits.size() != gate_arity(g.kind)) {
        throw std::invalid_argument("gate " + std::string(gate_name(g.kind)) + " expects " +
                                    std::to_string(gate_arity(g.kind)) + " qubit(s)");
    }
    if (g.params.size() != gate_param_count(g.kind)) {
        throw std::invalid_argument("gate " + std::string(gate_name(g.kind)) +
                                    " has wrong parameter count");
    }
    for (double p : g.params) {
        if (!std::isfinite(p)) throw std::invalid_argument("non-finite gate angle");
    }
    if (g.qubits.size() == 2 && g.qubits[0] == g.qubits[1]) {
        throw std::invalid_argument("two-qubit gate with duplicate qubits");
    }
}

/// Ordered instruction list over qubits and classical bits. Data qubits carry
/// the model spins in the order Pauli strings index them; every other qubit is
/// an ancilla.
class DynamicCircuit {
  public:
    DynamicCircuit() = default;

    DynamicCircuit(std::size_t num_qubits, std::vector<Qubit> data_qubits)
        : num_qubits_(num_qubits), data_qubits_(std::move(data_qubits)) {
        recompute_ancillas();
    }

    /// All qubits are data qubits.
    explicit DynamicCircuit(std::size_t num_qubits) : num_qubits_(num_qubits) {
        for (Qubit q = 0; q < num_qubits; ++q) data_qubits_.push_back(q);
    }

    std::size_t num_qubits() const { return num_qubits_; }
    std::size_t num_clbits() const { return num_clbits_; }
    const std::vector<Instruction> &instructions() const { return instructions_; }
    const std::vector<Qubit> &data_qubits() const { return data_qubits_; }
    const std::vector<Qubit> &ancilla_qubits() const { return ancilla_qubits_; }
    /// Classical bits holding the final data readout, one per data qubit, or empty.
    const std::vector<Clbit> &readout_clbits() const { return readout_clbits_; }
    bool empty() const { return instructions_.empty(); }
    std::size_t size() const { return instructions_.size(); }

    Clbit add_clbit() { return num_clbits_++; }
    void set_num_clbits(std::size_t n) { num_clbits_ = std::max(num_clbits_, n); }
    void set_readout_clbits(std::vector<Clbit> bits) { readout_clbits_ = std::move(bits); }

    DynamicCircuit &append(Instruction inst) {
        instructions_.push_back(std::move(inst));
        return *this;
    }
    DynamicCircuit &gate(GateKind k, std::vector<Qubit> qubits, std::vector<double> params = {}) {
        return append({make_gate(k, std::move(qubits), std::move(params)), std::nullopt});
    }
    DynamicCircuit &measure(Qubit q, Clbit c) {
        set_num_clbits(c + 1);
        return append({Measure{q, c}, std::nullopt});
    }
    DynamicCircuit &reset(Qubit q) { return append({Reset{q}, std::nullopt}); }
    DynamicCircuit &conditional(Gate g, std::vector<Clbit> condition) {
        return append({ConditionalGate{std::move(g), std::move(condition)}, std::nullopt});
    }
    DynamicCircuit &barrier(std::vector<Qubit> qubits) {
        return append({Barrier{std::move(qubits)}, std::nullopt});
    }
    DynamicCircuit &barrier_all() {
        std::vector<Qubit> all(num_qubits_);
        for (Qubit q = 0; q < num_qubits_; ++q) all[q] = q;
        return barrier(std::move(all));
    }

    /// Appends `other`'s instructions verbatim. Both circuits must share the
    /// qubit layout; classical bit indices are kept as-is.
    DynamicCircuit &extend(const DynamicCircuit &other) {
        if (other.num_qubits_ != num_qubits_) {
            throw std::invalid_argument("extend: qubit count mismatch");
        }
        instructions_.insert(instructions_.end(), other.instructions_.begin(),
                             other.instructions_.end());
        set_num_clbits(other.num_clbits_);
        return *this;
    }

    std::vector<Instruction> &mutable_instructions() { return instructions_; }

    std::size_t count_measures() const {
        return static_cast<std::size_t>(std::count_if(instructions_.begin(), instructions_.end(),
                                                      [](const auto &i) { return i.template is<Measure>(); }));
    }

    bool is_gate_only() const {
        return std::all_of(instructions_.begin(), instructions_.end(), [](const Instruction &i) {
            return i.is<Gate>() || i.is<Barrier>();
        });
    }

    /// Throws std::invalid_argument on the first violated structural invariant.
    void validate() const {
        std::vector<bool> is_data(num_qubits_, false);
        for (Qubit q : data_qubits_) {
            if (q >= num_qubits_) throw std::invalid_argument("data qubit out of range");
            if (is_data[q]) throw std::invalid_argument("duplicate data qubit");
            is_data[q] = true;
        }
        std::vector<bool> written(num_clbits_, false);
        auto check_qubits = [&](const std::vector<Qubit> &qs) {
            std::set<Qubit> seen;
            for (Qubit q : qs) {
                if (q >= num_qubits_) throw std::invalid_argument("qubit index out of range");
                if (!seen.insert(q).second) throw std::invalid_argument("duplicate qubit in instruction");
            }
        };
        for (const auto &inst : instructions_) {
            if (inst.pinned_start_ns && !(*inst.pinned_start_ns >= 0.0)) {
                throw std::invalid_argument("pinned start must be non-negative");
            }
            if (auto g = std::get_if<Gate>(&inst.op)) {
                validate_gate(*g);
                check_qubits(g->qubits);
            } else if (auto m = std::get_if<Measure>(&inst.op)) {
                check_qubits({m->qubit});
                if (m->clbit >= num_clbits_) throw std::invalid_argument("classical bit out of range");
                written[m->clbit] = true;
            } else if (auto r = std::get_if<Reset>(&inst.op)) {
                check_qubits({r->qubit});
            } else if (auto c = std::get_if<ConditionalGate>(&inst.op)) {
                validate_gate(c->gate);
                check_qubits(c->gate.qubits);
                if (c->condition.empty()) throw std::invalid_argument("conditional gate without condition bits");
                for (Clbit b : c->condition) {
                    if (b >= num_clbits_) throw std::invalid_argument("classical bit out of range");
                    if (!written[b]) {
                        throw std::invalid_argument("conditional gate reads classical bit " +
                                                    std::to_string(b) + " before any measurement writes it");
                    }
                }
            } else {
                check_qubits(inst.as<Barrier>().qubits);
            }
        }
        for (Clbit b : readout_clbits_) {
            if (b >= num_clbits_) throw std::invalid_argument("readout bit out of range");
        }
    }

    bool operator==(const DynamicCircuit &) const = default;

  private:
    void recompute_ancillas() {
        ancilla_qubits_.clear();
        std::vector<bool> is_data(num_qubits_, false);
        for (Qubit q : data_qubits_) {
            if (q < num_qubits_) is_data[q] = true;
        }
        for (Qubit q = 0; q < num_qubits_; ++q) {
            if (!is_data[q]) ancilla_qubits_.push_back(q);
        }
    }

    std::size_t num_qubits_ = 0;
    std::size_t num_clbits_ = 0;
    std::vector<Instruction> instructions_;
    std::vector<Qubit> data_qubits_;
    std::vector<Qubit> ancilla_qubits_;
    std::vector<Clbit> readout_clbits_;
};

inline Gate adjoint(const Gate &g) {
    Gate out = g;
    switch (g.kind) {
    case GateKind::S: out.kind = GateKind::SDG; break;
    case GateKind::SDG: out.kind = GateKind::S; break;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ: out.params[0] = -g.params[0]; break;
    default: break;
    }
    return out;
}

/// Reverses a unitary-only segment and replaces each gate by its adjoint.
/// Dynamic instructions have no automatic inverse and are rejected.
inline std::vector<Instruction> invert_gate_segment(const std::vector<Instruction> &segment) {
    std::vector<Instruction> out;
    out.reserve(segment.size());
    for (auto it = segment.rbegin(); it != segment.rend(); ++it) {
        if (auto g = std::get_if<Gate>(&it->op)) {
            out.push_back({adjoint(*g), std::nullopt});
        } else if (it->is<Barrier>()) {
            out.push_back({it->op, std::nullopt});
        } else {
            throw std::invalid_argument(
                "invert_gate_segment: measurement, reset and conditional instructions need a hand-built inverse");
        }
    }
    return out;
}

// JSON ---------------------------------------------------------------------

inline nlohmann::json to_json(const DynamicCircuit &c) {
    using nlohmann::json;
    json insts = json::array();
    for (const auto &inst : c.instructions()) {
        json j;
        std::visit(
            [&](const auto &op) {
                using T = std::decay_t<decltype(op)>;
                if constexpr (std::is_same_v<T, Gate>) {
                    j["kind"] = "gate";
                    j["name"] = gate_name(op.kind);
                    j["params"] = op.params;
                    j["qubits"] = op.qubits;
                } else if constexpr (std::is_same_v<T, Measure>) {
                    j["kind"] = "measure";
                    j["qubits"] = {op.qubit};
                    j["clbit"] = op.clbit;
                } else if constexpr (std::is_same_v<T, Reset>) {
                    j["kind"] = "reset";
                    j["qubits"] = {op.qubit};
                } else if constexpr (std::is_same_v<T, ConditionalGate>) {
                    j["kind"] = "conditional";
                    j["name"] = gate_name(op.gate.kind);
                    j["params"] = op.gate.params;
                    j["qubits"] = op.gate.qubits;
                    j["condition_bits"] = op.condition;
                } else {
                    j["kind"] = "barrier";
                    j["qubits"] = op.qubits;
                }
            },
            inst.op);
        if (inst.pinned_start_ns) j["start_ns"] = *inst.pinned_start_ns;
        insts.push_back(std::move(j));
    }
    json out;
    out["num_qubits"] = c.num_qubits();
    out["num_clbits"] = c.num_clbits();
    out["data_qubits"] = c.data_qubits();
    if (!c.readout_clbits().empty()) out["readout_clbits"] = c.readout_clbits();
    out["instructions"] = std::move(insts);
    return out;
}

inline DynamicCircuit circuit_from_json(const nlohmann::json &j) {
    DynamicCircuit c(j.at("num_qubits").get<std::size_t>(), j.at("data_qubits").get<std::vector<Qubit>>());
    c.set_num_clbits(j.value("num_clbits", std::size_t{0}));
    for (const auto &ji : j.at("instructions")) {
        const auto kind = ji.at("kind").get<std::string>();
        const auto qubits = ji.at("qubits").get<std::vector<Qubit>>();
        Instruction inst;
        if (kind == "gate" || kind == "conditional") {
            Gate g{gate_from_name(ji.at("name").get<std::string>()),
                   ji.value("params", std::vector<double>{}), qubits};
            if (kind == "gate") {
                inst.op = std::move(g);
            } else {
                inst.op = ConditionalGate{std::move(g), ji.at("condition_bits").get<std::vector<Clbit>>()};
            }
        } else if (kind == "measure") {
            if (qubits.size() != 1) throw std::invalid_argument("measure takes one qubit");
            inst.op = Measure{qubits[0], ji.at("clbit").get<Clbit>()};
        } else if (kind == "reset") {
            if (qubits.size() != 1) throw std::invalid_argument("reset takes one qubit");
            inst.op = Reset{qubits[0]};
        } else if (kind == "barrier") {
            inst.op = Barrier{qubits};
        } else {
            throw std::invalid_argument("unknown instruction kind: " + kind);
        }
        if (ji.contains("start_ns")) inst.pinned_start_ns = ji.at("start_ns").get<double>();
        c.append(std::move(inst));
    }
    if (j.contains("readout_clbits")) c.set_readout_clbits(j.at("readout_clbits").get<std::vector<Clbit>>());
    c.validate();
    return c;
}

} // namespace dynem
