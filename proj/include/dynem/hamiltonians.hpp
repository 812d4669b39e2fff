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
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "circuit.hpp"
#include "statevector.hpp"

namespace dynem {

/// Word over {I, X, Y, Z}; character i acts on data qubit i.
class PauliString {
  public:
    PauliString() = default;
    explicit PauliString(std::string word) : word_(std::move(word)) {
        for (char c : word_) {
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
                throw std::invalid_argument("PauliString: invalid letter '" + std::string(1, c) + "'");
            }
        }
    }

    const std::string &str() const { return word_; }
    std::size_t size() const { return word_.size(); }
    char operator[](std::size_t i) const { return word_[i]; }

    /// Mask form with data qubit i placed on register qubit `layout[i]`.
    kernels::PauliMask mask(const std::vector<Qubit> &layout) const {
        if (layout.size() != word_.size()) throw std::invalid_argument("PauliString: layout length mismatch");
        kernels::PauliMask m;
        for (std::size_t i = 0; i < word_.size(); ++i) {
            const std::uint64_t bit = std::uint64_t{1} << layout[i];
            switch (word_[i]) {
            case 'X': m.x_mask |= bit; break;
            case 'Y':
                m.x_mask |= bit;
                m.z_mask |= bit;
                ++m.num_y;
                break;
            case 'Z': m.z_mask |= bit; break;
            default: break;
            }
        }
        return m;
    }

    kernels::PauliMask mask() const {
        std::vector<Qubit> id(word_.size());
        for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
        return mask(id);
    }

    auto operator<=>(const PauliString &) const = default;

  private:
    std::string word_;
};

struct PauliTerm {
    double coeff = 0.0;
    PauliString pauli;
    bool operator==(const PauliTerm &) const = default;
};

/// Real-weighted sum of distinct Pauli strings over a fixed number of spins.
class PauliSum {
  public:
    PauliSum() = default;
    explicit PauliSum(std::size_t num_qubits) : n_(num_qubits) {}

    PauliSum &add(double coeff, const std::string &word) {
        if (word.size() != n_) throw std::invalid_argument("PauliSum: string length must equal qubit count");
        if (!std::isfinite(coeff)) throw std::invalid_argument("PauliSum: non-finite coefficient");
        PauliString p(word);
        for (const auto &t : terms_) {
            if (t.pauli == p) throw std::invalid_argument("PauliSum: duplicate term " + word);
        }
        terms_.push_back({coeff, std::move(p)});
        return *this;
    }

    std::size_t num_qubits() const { return n_; }
    const std::vector<PauliTerm> &terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }

    bool operator==(const PauliSum &) const = default;

    /// Dense 2^n x 2^n matrix; basis bit i is data qubit i.
    Eigen::MatrixXcd dense() const {
        const std::size_t d = std::size_t{1} << n_;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (const auto &t : terms_) {
            const auto pm = t.pauli.mask();
            for (std::uint64_t i = 0; i < d; ++i) {
                m(static_cast<Eigen::Index>(i ^ pm.x_mask), static_cast<Eigen::Index>(i)) += t.coeff * pm.phase(i);
            }
        }
        return m;
    }

    /// <psi|H|psi> for a statevector whose qubit i is data qubit layout[i].
    double expectation(const StateVector &psi, const std::vector<Qubit> &layout) const {
        double e = 0.0;
        for (const auto &t : terms_) e += t.coeff * psi.expectation(t.pauli.mask(layout));
        return e;
    }

    double expectation(const StateVector &psi) const {
        std::vector<Qubit> id(n_);
        for (std::size_t i = 0; i < n_; ++i) id[i] = i;
        return expectation(psi, id);
    }

  private:
    std::size_t n_ = 0;
    std::vector<PauliTerm> terms_;
};

inline nlohmann::json to_json(const PauliSum &h) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto &t : h.terms()) j.push_back({t.coeff, t.pauli.str()});
    return j;
}

inline PauliSum pauli_sum_from_json(const nlohmann::json &j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("PauliSum JSON must be a non-empty array");
    PauliSum h(j.at(0).at(1).get<std::string>().size());
    for (const auto &t : j) h.add(t.at(0).get<double>(), t.at(1).get<std::string>());
    return h;
}

namespace detail {
inline std::string single_site(std::size_t n, std::size_t i, char p) {
    std::string s(n, 'I');
    s[i] = p;
    return s;
}
inline std::string bond(std::size_t n, std::size_t i, char p) {
    std::string s(n, 'I');
    s[i] = s[i + 1] = p;
    return s;
}
} // namespace detail

/// Transverse-field Ising chain: sum Z_i Z_{i+1} + h sum X_i (open boundary).
inline PauliSum tfim(std::size_t n, double h) {
    if (n < 2) throw std::invalid_argument("tfim: need at least 2 spins");
    PauliSum H(n);
    for (std::size_t i = 0; i + 1 < n; ++i) H.add(1.0, detail::bond(n, i, 'Z'));
    if (h != 0.0) {
        for (std::size_t i = 0; i < n; ++i) H.add(h, detail::single_site(n, i, 'X'));
    }
    return H;
}

/// Heisenberg chain: sum (XX + YY + ZZ) on bonds + h sum Z_i.
inline PauliSum heisenberg(std::size_t n, double h) {
    if (n < 2) throw std::invalid_argument("heisenberg: need at least 2 spins");
    PauliSum H(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        H.add(1.0, detail::bond(n, i, 'X'));
        H.add(1.0, detail::bond(n, i, 'Y'));
        H.add(1.0, detail::bond(n, i, 'Z'));
    }
    if (h != 0.0) {
        for (std::size_t i = 0; i < n; ++i) H.add(h, detail::single_site(n, i, 'Z'));
    }
    return H;
}

enum class Model { Tfim, Heisenberg };

inline const char *model_name(Model m) { return m == Model::Tfim ? "tfim" : "heisenberg"; }

inline Model model_from_name(const std::string &s) {
    if (s == "tfim" || s == "ising") return Model::Tfim;
    if (s == "heisenberg") return Model::Heisenberg;
    throw std::invalid_argument("unknown model: " + s);
}

inline PauliSum hamiltonian(Model m, std::size_t n, double h) { return m == Model::Tfim ? tfim(n, h) : heisenberg(n, h); }

inline constexpr std::size_t kMaxDenseQubits = 12;

inline double exact_ground_energy(const PauliSum &H) {
    if (H.num_qubits() > kMaxDenseQubits) throw std::invalid_argument("exact_ground_energy: at most 12 spins");
    const Eigen::MatrixXcd m = H.dense();
    if (m.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real(), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// psi(t) = exp(-i H t) psi0 through the dense eigendecomposition.
inline StateVector exact_evolve(const PauliSum &H, double t, const StateVector &psi0) {
    if (H.num_qubits() > kMaxDenseQubits) throw std::invalid_argument("exact_evolve: at most 12 spins");
    if (psi0.num_qubits() != H.num_qubits()) throw std::invalid_argument("exact_evolve: size mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
    const auto &v = es.eigenvectors();
    const auto d = static_cast<Eigen::Index>(psi0.dim());
    Eigen::VectorXcd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = psi0[static_cast<std::size_t>(i)];
    Eigen::VectorXcd c = v.adjoint() * x;
    for (Eigen::Index k = 0; k < d; ++k) c(k) *= std::polar(1.0, -es.eigenvalues()(k) * t);
    Eigen::VectorXcd y = v * c;
    std::vector<cplx> out(y.data(), y.data() + d);
    return StateVector(psi0.num_qubits(), std::move(out));
}

/// One qubit-wise basis assignment and the terms it measures.
struct MeasurementSetting {
    std::string bases;              ///< 'X', 'Y' or 'Z' per data qubit
    std::vector<std::size_t> terms; ///< indices into PauliSum::terms()

    bool operator==(const MeasurementSetting &) const = default;
};

/// First-fit qubit-wise-commuting grouping. Unconstrained qubits default to Z.
inline std::vector<MeasurementSetting> measurement_settings(const PauliSum &H) {
    std::vector<std::string> partial;
    std::vector<MeasurementSetting> out;
    for (std::size_t t = 0; t < H.size(); ++t) {
        const auto &word = H.terms()[t].pauli.str();
        bool placed = false;
        for (std::size_t g = 0; g < partial.size() && !placed; ++g) {
            bool ok = true;
            for (std::size_t i = 0; i < word.size() && ok; ++i) {
                ok = word[i] == 'I' || partial[g][i] == 'I' || partial[g][i] == word[i];
            }
            if (!ok) continue;
            for (std::size_t i = 0; i < word.size(); ++i) {
                if (word[i] != 'I') partial[g][i] = word[i];
            }
            out[g].terms.push_back(t);
            placed = true;
        }
        if (!placed) {
            partial.push_back(word);
            out.push_back({{}, {t}});
        }
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        out[g].bases = partial[g];
        std::replace(out[g].bases.begin(), out[g].bases.end(), 'I', 'Z');
    }
    return out;
}

/// Copy of `circuit` followed by the setting's basis change (H for X, SDG then
/// H for Y), a global barrier, and a measurement of every data qubit into
/// fresh classical bits.
inline DynamicCircuit with_readout(const DynamicCircuit &circuit, const MeasurementSetting &setting) {
    const auto &data = circuit.data_qubits();
    if (setting.bases.size() != data.size()) throw std::invalid_argument("with_readout: basis length mismatch");
    DynamicCircuit out = circuit;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (setting.bases[i] == 'X') {
            out.gate(GateKind::H, {data[i]});
        } else if (setting.bases[i] == 'Y') {
            out.gate(GateKind::SDG, {data[i]});
            out.gate(GateKind::H, {data[i]});
        }
    }
    out.barrier_all();
    std::vector<Clbit> bits;
    for (Qubit q : data) {
        const Clbit c = out.add_clbit();
        out.measure(q, c);
        bits.push_back(c);
    }
    out.set_readout_clbits(std::move(bits));
    return out;
}

struct EnergyEstimate {
    double energy = 0.0;
    double standard_error = 0.0;
};

/// Energy from one outcome histogram per measurement setting. Each term's
/// expectation is the mean +-1 parity over its support; the standard error adds
/// per-term binomial variances and ignores covariances between terms that share
/// a setting.
inline EnergyEstimate estimate_energy(const std::vector<std::map<std::string, std::size_t>> &histograms,
                                      const PauliSum &H, const std::vector<MeasurementSetting> &settings) {
    if (histograms.size() != settings.size()) throw std::invalid_argument("estimate_energy: one histogram per setting");
    EnergyEstimate est;
    double var = 0.0;
    for (std::size_t g = 0; g < settings.size(); ++g) {
        const auto &hist = histograms[g];
        std::size_t total = 0;
        for (const auto &[k, v] : hist) total += v;
        if (total == 0) throw std::invalid_argument("estimate_energy: empty histogram");
        for (std::size_t t : settings[g].terms) {
            const auto &term = H.terms()[t];
            const auto &word = term.pauli.str();
            long long signed_sum = 0;
            for (const auto &[key, count] : hist) {
                if (key.size() != word.size()) throw std::invalid_argument("estimate_energy: bitstring length mismatch");
                int parity = 0;
                for (std::size_t i = 0; i < word.size(); ++i) {
                    if (word[i] != 'I' && key[i] == '1') parity ^= 1;
                }
                signed_sum += parity ? -static_cast<long long>(count) : static_cast<long long>(count);
            }
            const double mean = static_cast<double>(signed_sum) / static_cast<double>(total);
            est.energy += term.coeff * mean;
            var += term.coeff * term.coeff * (1.0 - mean * mean) / static_cast<double>(total);
        }
    }
    est.standard_error = std::sqrt(var);
    return est;
}

/// <0...0|H|0...0>: only all-{I,Z} terms contribute, each with +1.
inline double computational_zero_energy(const PauliSum &H) {
    double e = 0.0;
    for (const auto &t : H.terms()) {
        const auto &w = t.pauli.str();
        if (std::all_of(w.begin(), w.end(), [](char c) { return c == 'I' || c == 'Z'; })) e += t.coeff;
    }
    return e;
}

} // namespace dynem
