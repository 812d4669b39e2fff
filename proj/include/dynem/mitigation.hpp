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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "circuit.hpp"
#include "schedule.hpp"

namespace dynem {

// Dynamical decoupling -------------------------------------------------------

/// X-X pair placed at fractions `first` and `second` of each eligible idle
/// window. Windows shorter than `min_window_ns` (0 selects 2 x one-qubit
/// duration) or too short to hold both pulses are skipped.
struct DDPolicy {
    double first = 0.25;
    double second = 0.75;
    double min_window_ns = 0.0;

    void validate() const {
        if (!(0.0 < first && first < second && second < 1.0)) {
            throw std::invalid_argument("DDPolicy: need 0 < first < second < 1");
        }
        if (!(min_window_ns >= 0.0)) throw std::invalid_argument("DDPolicy: negative minimum window");
    }

    bool operator==(const DDPolicy &) const = default;
};

inline void to_json(nlohmann::json &j, const DDPolicy &p) {
    j = {{"first", p.first}, {"second", p.second}, {"min_window_ns", p.min_window_ns}};
}
inline void from_json(const nlohmann::json &j, DDPolicy &p) {
    DDPolicy d;
    p.first = j.value("first", d.first);
    p.second = j.value("second", d.second);
    p.min_window_ns = j.value("min_window_ns", d.min_window_ns);
    p.validate();
}

struct DDResult {
    DynamicCircuit circuit;
    std::size_t pulse_pairs = 0;
    std::size_t skipped_windows = 0; ///< eligible by cause but too short
};

/// Inserts a pinned X-X pair into every mcm-ff idle window of a data qubit.
/// The pulses go immediately before the instruction that closes the window, so
/// rescheduling the output reproduces the original timing of every other
/// instruction and splits the window into three sub-windows.
inline DDResult insert_dd(const DynamicCircuit &circuit, const Schedule &schedule, const DDPolicy &policy,
                          const DurationTable &durations) {
    policy.validate();
    const auto &insts = circuit.instructions();
    if (schedule.timed.size() != insts.size()) throw std::invalid_argument("insert_dd: schedule does not match circuit");
    const double pulse = durations.one_qubit_ns;
    const double min_len = std::max({policy.min_window_ns > 0 ? policy.min_window_ns : 2.0 * pulse,
                                     pulse / (1.0 - policy.second), pulse / (policy.second - policy.first)});

    std::vector<std::vector<Instruction>> pending(insts.size());
    DDResult out;
    for (Qubit q : circuit.data_qubits()) {
        for (const auto &w : schedule.idle[q]) {
            if (w.cause != IdleCause::McmFf) continue;
            if (w.length() + detail::kTimeEps < min_len) {
                ++out.skipped_windows;
                continue;
            }
            // Keep runs of simultaneous measurements contiguous.
            std::size_t at = w.next_instruction;
            while (at > 0 && insts[at].is<Measure>() && insts[at - 1].is<Measure>()) --at;
            for (double f : {policy.first, policy.second}) {
                Instruction x{make_gate(GateKind::X, {q}), w.start_ns + f * w.length()};
                pending[at].push_back(std::move(x));
            }
            ++out.pulse_pairs;
        }
    }

    DynamicCircuit c(circuit.num_qubits(), circuit.data_qubits());
    c.set_num_clbits(circuit.num_clbits());
    for (std::size_t i = 0; i < insts.size(); ++i) {
        for (auto &p : pending[i]) c.append(std::move(p));
        c.append(insts[i]);
    }
    c.set_readout_clbits(circuit.readout_clbits());
    out.circuit = std::move(c);
    return out;
}

// Zero-noise extrapolation ---------------------------------------------------

enum class FitKind { Linear, Quadratic, Exponential };

inline const char *fit_kind_name(FitKind k) {
    switch (k) {
    case FitKind::Linear: return "linear";
    case FitKind::Quadratic: return "quadratic";
    case FitKind::Exponential: return "exponential";
    }
    return "?";
}

inline FitKind fit_kind_from_name(const std::string &s) {
    if (s == "linear") return FitKind::Linear;
    if (s == "quadratic") return FitKind::Quadratic;
    if (s == "exponential") return FitKind::Exponential;
    throw std::invalid_argument("unknown fit kind: " + s);
}

struct ZNEConfig {
    std::vector<std::size_t> folds{0, 1, 2};
    FitKind fit = FitKind::Linear;

    std::vector<double> lambdas() const {
        std::vector<double> l;
        for (auto k : folds) l.push_back(1.0 + 2.0 * static_cast<double>(k));
        return l;
    }

    void validate() const {
        auto f = folds;
        std::sort(f.begin(), f.end());
        if (std::unique(f.begin(), f.end()) - f.begin() < 2) throw std::invalid_argument("ZNEConfig: need >= 2 distinct folds");
        if (f.back() > 2) throw std::invalid_argument("ZNEConfig: folds must be 0, 1 or 2");
    }

    bool operator==(const ZNEConfig &) const = default;
};

inline void to_json(nlohmann::json &j, const ZNEConfig &z) { j = {{"folds", z.folds}, {"fit", fit_kind_name(z.fit)}}; }
inline void from_json(const nlohmann::json &j, ZNEConfig &z) {
    ZNEConfig d;
    z.folds = j.value("folds", d.folds);
    z.fit = fit_kind_from_name(j.value("fit", std::string(fit_kind_name(d.fit))));
    z.validate();
}

struct ZNEPoint {
    double lambda = 1.0;
    double energy = 0.0;
    double stderr_ = 0.0; ///< <= 0 means unweighted
};

struct ZNEResult {
    double e0 = 0.0;
    double residual_norm = 0.0;
    FitKind requested = FitKind::Linear;
    FitKind used = FitKind::Linear;
    bool fell_back = false; ///< exponential fit did not converge; linear used instead
    std::size_t iterations = 0;
    std::vector<double> coefficients;
};

namespace detail {

inline std::vector<double> point_weights(const std::vector<ZNEPoint> &pts) {
    const bool weighted = std::all_of(pts.begin(), pts.end(), [](const ZNEPoint &p) { return p.stderr_ > 0; });
    std::vector<double> w(pts.size(), 1.0);
    if (weighted) {
        for (std::size_t i = 0; i < pts.size(); ++i) w[i] = 1.0 / (pts[i].stderr_ * pts[i].stderr_);
    }
    return w;
}

/// Weighted least squares for E = sum_k c_k lambda^k, k < degree + 1.
inline ZNEResult polynomial_fit(const std::vector<ZNEPoint> &pts, std::size_t degree) {
    const auto w = point_weights(pts);
    const auto m = static_cast<Eigen::Index>(pts.size());
    const auto p = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd A(m, p);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
        double x = 1.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            A(i, k) = sw * x;
            x *= pts[static_cast<std::size_t>(i)].lambda;
        }
        b(i) = sw * pts[static_cast<std::size_t>(i)].energy;
    }
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    ZNEResult r;
    r.e0 = coef(0);
    r.residual_norm = (A * coef - b).norm();
    r.coefficients.assign(coef.data(), coef.data() + coef.size());
    return r;
}

/// a + b exp(-c lambda): c from the slope of log|successive differences|,
/// (a, b) by linear least squares at that c, then Levenberg-Marquardt.
inline std::optional<ZNEResult> exponential_fit(const std::vector<ZNEPoint> &pts, std::size_t max_iter = 200) {
    auto sorted = pts;
    std::sort(sorted.begin(), sorted.end(), [](const auto &x, const auto &y) { return x.lambda < y.lambda; });
    std::vector<double> xs, ls;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double d = (sorted[i + 1].energy - sorted[i].energy) / (sorted[i + 1].lambda - sorted[i].lambda);
        if (d == 0.0) return std::nullopt;
        if (i > 0 && (d > 0) != (xs.empty() ? d > 0 : (sorted[1].energy - sorted[0].energy) > 0)) return std::nullopt;
        xs.push_back(0.5 * (sorted[i].lambda + sorted[i + 1].lambda));
        ls.push_back(std::log(std::abs(d)));
    }
    double c = 0.0;
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ls[i];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ls[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        c = -sxy / sxx;
    }
    if (!std::isfinite(c) || std::abs(c) < 1e-12) return std::nullopt;

    const auto w = point_weights(pts);
    auto linear_at = [&](double cc, double &a, double &b) {
        double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double e = std::exp(-cc * pts[i].lambda);
            s0 += w[i];
            s1 += w[i] * e;
            s2 += w[i] * e * e;
            t0 += w[i] * pts[i].energy;
            t1 += w[i] * e * pts[i].energy;
        }
        const double det = s0 * s2 - s1 * s1;
        if (std::abs(det) < 1e-300) return false;
        a = (t0 * s2 - s1 * t1) / det;
        b = (s0 * t1 - s1 * t0) / det;
        return true;
    };
    auto cost = [&](const Eigen::Vector3d &x) {
        double s = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double r = x(0) + x(1) * std::exp(-x(2) * pts[i].lambda) - pts[i].energy;
            s += w[i] * r * r;
        }
        return s;
    };

    Eigen::Vector3d x;
    if (!linear_at(c, x(0), x(1))) return std::nullopt;
    x(2) = c;
    double f = cost(x);
    double mu = 1e-3;
    bool converged = f < 1e-28;
    std::size_t it = 0;
    for (; it < max_iter && !converged; ++it) {
        Eigen::Matrix3d JtJ = Eigen::Matrix3d::Zero();
        Eigen::Vector3d Jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double e = std::exp(-x(2) * pts[i].lambda);
            const double r = x(0) + x(1) * e - pts[i].energy;
            const Eigen::Vector3d g(1.0, e, -x(1) * pts[i].lambda * e);
            JtJ += w[i] * g * g.transpose();
            Jtr += w[i] * g * r;
        }
        bool accepted = false;
        for (int tries = 0; tries < 30 && !accepted; ++tries) {
            Eigen::Matrix3d M = JtJ;
            M.diagonal() += mu * JtJ.diagonal().cwiseMax(1e-12);
            const Eigen::Vector3d step = M.ldlt().solve(-Jtr);
            const Eigen::Vector3d cand = x + step;
            const double fc = cost(cand);
            if (std::isfinite(fc) && fc <= f) {
                const double rel = step.norm() / (x.norm() + 1e-12);
                x = cand;
                converged = rel < 1e-12 || f - fc <= 1e-15 * (f + 1e-300) || fc < 1e-28;
                f = fc;
                mu = std::max(mu / 3.0, 1e-12);
                accepted = true;
            } else {
                mu *= 4.0;
            }
        }
        if (!accepted) converged = true; // no descent direction left: stationary point
    }
    if (!converged || !x.allFinite()) return std::nullopt;
    ZNEResult r;
    r.e0 = x(0) + x(1);
    r.residual_norm = std::sqrt(f);
    r.iterations = it;
    r.coefficients = {x(0), x(1), x(2)};
    return r;
}

} // namespace detail

/// Fits E(lambda) and returns the intercept at lambda = 0. Weighted by
/// 1/stderr^2 when every point carries a positive standard error.
inline ZNEResult zne_extrapolate(const std::vector<ZNEPoint> &points, FitKind fit) {
    if (points.size() < 2) throw std::invalid_argument("zne_extrapolate: need at least 2 points");
    std::vector<double> l;
    for (const auto &p : points) {
        if (!std::isfinite(p.lambda) || !std::isfinite(p.energy)) throw std::invalid_argument("zne_extrapolate: non-finite point");
        l.push_back(p.lambda);
    }
    std::sort(l.begin(), l.end());
    if (std::adjacent_find(l.begin(), l.end()) != l.end()) throw std::invalid_argument("zne_extrapolate: duplicate lambda");

    const bool flat = std::all_of(points.begin(), points.end(), [&](const ZNEPoint &p) { return p.energy == points[0].energy; });
    ZNEResult r;
    switch (fit) {
    case FitKind::Linear: r = detail::polynomial_fit(points, 1); break;
    case FitKind::Quadratic:
        if (points.size() < 3) throw std::invalid_argument("zne_extrapolate: quadratic fit needs at least 3 points");
        r = detail::polynomial_fit(points, 2);
        break;
    case FitKind::Exponential:
        if (points.size() < 3) throw std::invalid_argument("zne_extrapolate: exponential fit needs at least 3 points");
        if (flat) {
            r.e0 = points[0].energy;
            r.coefficients = {points[0].energy, 0.0, 0.0};
            break;
        }
        if (auto e = detail::exponential_fit(points)) {
            r = *e;
        } else {
            r = detail::polynomial_fit(points, 1);
            r.fell_back = true;
            r.requested = fit;
            r.used = FitKind::Linear;
            return r;
        }
        break;
    }
    r.requested = fit;
    r.used = fit;
    return r;
}

inline ZNEResult zne_extrapolate(const std::vector<ZNEPoint> &points, const ZNEConfig &config) {
    return zne_extrapolate(points, config.fit);
}

// Metrics -------------------------------------------------------------------

/// 100 * (1 - |E_mit - E_ref| / |E_base - E_ref|), or nullopt when the
/// baseline gap is below 1e-6 * max(1, |E_ref|).
inline std::optional<double> improvement_percent(double e_ref, double e_baseline, double e_mitigated) {
    if (!std::isfinite(e_ref) || !std::isfinite(e_baseline) || !std::isfinite(e_mitigated)) {
        throw std::invalid_argument("improvement_percent: non-finite input");
    }
    const double gap = std::abs(e_baseline - e_ref);
    if (gap < 1e-6 * std::max(1.0, std::abs(e_ref))) return std::nullopt;
    return 100.0 * (1.0 - std::abs(e_mitigated - e_ref) / gap);
}

/// Middle element after sorting (mean of the middle two for even sizes).
inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace dynem
