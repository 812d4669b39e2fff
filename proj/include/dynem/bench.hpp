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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "builders.hpp"
#include "expectation.hpp"
#include "hamiltonians.hpp"
#include "mitigation.hpp"
#include "noise.hpp"
#include "schedule.hpp"
#include "trajectory.hpp"
#include "vqe.hpp"

namespace dynem {

inline constexpr const char *kVersion = "0.1.0";

enum class Suite { GroundState, TimeEvolution };

inline const char *suite_name(Suite s) { return s == Suite::GroundState ? "ground-state" : "time-evolution"; }

inline Suite suite_from_name(const std::string &s) {
    if (s == "ground-state") return Suite::GroundState;
    if (s == "time-evolution") return Suite::TimeEvolution;
    throw std::invalid_argument("unknown suite: " + s);
}

/// Largest ground-state size run without the explicit large flag.
inline constexpr std::size_t kDeskMaxGroundStateN = 8;

struct ExperimentSpec {
    Suite suite = Suite::GroundState;
    Model model = Model::Tfim;
    std::vector<std::size_t> n;
    std::vector<double> h;
    double t = 0.25;
    std::size_t steps = 5;
    std::size_t trajectories = 2000;
    std::size_t repeats = 3;
    std::size_t layers = 2;
    NoiseModel noise;
    DurationTable durations;
    DDPolicy dd;
    ZNEConfig zne;
    std::uint64_t seed = 20250101;
    std::uint64_t training_seed = 7;
    bool large = false;

    static ExperimentSpec defaults(Suite s) {
        ExperimentSpec e;
        e.suite = s;
        if (s == Suite::GroundState) {
            e.n = {3, 5, 8, 12};
            e.h = {0.0, 0.5, 2.0, 5.0};
        } else {
            e.n = {5, 12};
            e.h = {0.5, 5.0};
        }
        return e;
    }

    /// Sizes actually executed: ground-state sizes above the desk limit need `large`.
    std::vector<std::size_t> active_n() const {
        std::vector<std::size_t> out;
        for (auto v : n) {
            if (suite == Suite::GroundState && !large && v > kDeskMaxGroundStateN) continue;
            out.push_back(v);
        }
        return out;
    }

    void validate() const {
        if (n.empty() || h.empty()) throw std::invalid_argument("ExperimentSpec: empty n or h list");
        for (auto v : n) {
            if (v < 2) throw std::invalid_argument("ExperimentSpec: n must be >= 2");
        }
        for (double v : h) {
            if (!std::isfinite(v)) throw std::invalid_argument("ExperimentSpec: non-finite h");
        }
        if (trajectories == 0 || repeats == 0) throw std::invalid_argument("ExperimentSpec: trajectories and repeats must be >= 1");
        if (steps == 0 || !std::isfinite(t)) throw std::invalid_argument("ExperimentSpec: invalid t or N");
        if (layers == 0) throw std::invalid_argument("ExperimentSpec: layers must be >= 1");
        noise.validate();
        durations.validate();
        dd.validate();
        zne.validate();
    }

    bool operator==(const ExperimentSpec &) const = default;
};

inline void to_json(nlohmann::json &j, const ExperimentSpec &s) {
    j = {{"suite", suite_name(s.suite)},
         {"model", model_name(s.model)},
         {"n", s.n},
         {"h", s.h},
         {"t", s.t},
         {"N", s.steps},
         {"trajectories", s.trajectories},
         {"repeats", s.repeats},
         {"layers", s.layers},
         {"noise", s.noise},
         {"durations", s.durations},
         {"mitigation", {{"dd", s.dd}, {"zne", s.zne}}},
         {"seed", s.seed},
         {"training_seed", s.training_seed},
         {"large", s.large}};
}

inline void from_json(const nlohmann::json &j, ExperimentSpec &s) {
    const Suite suite = suite_from_name(j.at("suite").get<std::string>());
    s = ExperimentSpec::defaults(suite);
    if (j.contains("model")) s.model = model_from_name(j.at("model").get<std::string>());
    if (j.contains("n")) s.n = j.at("n").get<std::vector<std::size_t>>();
    if (j.contains("h")) s.h = j.at("h").get<std::vector<double>>();
    s.t = j.value("t", s.t);
    s.steps = j.value("N", s.steps);
    s.trajectories = j.value("trajectories", s.trajectories);
    s.repeats = j.value("repeats", s.repeats);
    s.layers = j.value("layers", s.layers);
    if (j.contains("noise")) s.noise = j.at("noise").get<NoiseModel>();
    if (j.contains("durations")) s.durations = j.at("durations").get<DurationTable>();
    if (j.contains("mitigation")) {
        const auto &m = j.at("mitigation");
        if (m.contains("dd")) s.dd = m.at("dd").get<DDPolicy>();
        if (m.contains("zne")) s.zne = m.at("zne").get<ZNEConfig>();
    }
    s.seed = j.value("seed", s.seed);
    s.training_seed = j.value("training_seed", s.training_seed);
    s.large = j.value("large", s.large);
    s.validate();
}

inline ExperimentSpec load_spec(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return j.get<ExperimentSpec>();
}

// Report types ----------------------------------------------------------------

/// One executed circuit variant: fold count x DD on/off.
struct ConfigurationResult {
    std::size_t folds = 0;
    bool dd = false;
    double energy = 0.0;
    double standard_error = 0.0;
    std::size_t dd_pairs = 0;

    bool operator==(const ConfigurationResult &) const = default;
};

struct StrategyResult {
    std::string name;
    double energy = 0.0;
    std::optional<double> improvement; ///< nullopt: guard tripped
    std::optional<std::string> fit;    ///< ZNE strategies only
    double residual_norm = 0.0;
    bool fit_fell_back = false;

    bool operator==(const StrategyResult &) const = default;
};

struct RepeatResult {
    std::size_t repeat = 0;
    std::uint64_t seed = 0;
    std::vector<ConfigurationResult> configurations;
    std::vector<StrategyResult> strategies;

    bool operator==(const RepeatResult &) const = default;
};

struct StrategyMedian {
    std::string name;
    double energy = 0.0;
    std::optional<double> improvement;

    bool operator==(const StrategyMedian &) const = default;
};

struct GridPointResult {
    std::size_t n = 0;
    double h = 0.0;
    std::string reference_kind; ///< "E_ideal" or "E_init"
    double reference = 0.0;
    std::vector<double> theta; ///< ground-state suite only
    std::vector<RepeatResult> repeats;
    std::vector<StrategyMedian> medians;
    std::optional<std::string> error;

    bool operator==(const GridPointResult &) const = default;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::string version = kVersion;
    std::string timestamp;
    std::string optimizer = kOptimizerName;
    std::vector<std::string> strategies;
    std::vector<std::size_t> skipped_n;
    std::vector<GridPointResult> points;

    bool partial() const {
        return std::any_of(points.begin(), points.end(), [](const auto &p) { return p.error.has_value(); });
    }

    bool operator==(const ExperimentReport &) const = default;
};

inline std::vector<std::string> strategy_names(const ZNEConfig &z) {
    std::string folds;
    for (std::size_t i = 0; i < z.folds.size(); ++i) folds += (i ? "," : "") + std::to_string(z.folds[i]);
    return {"baseline", "ZNE(" + folds + ")", "DD", "DD+ZNE(" + folds + ")"};
}

namespace detail {

inline nlohmann::json optional_json(const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
inline std::optional<double> optional_from(const nlohmann::json &j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

} // namespace detail

inline void to_json(nlohmann::json &j, const ConfigurationResult &c) {
    j = {{"folds", c.folds}, {"dd", c.dd}, {"energy", c.energy}, {"standard_error", c.standard_error}, {"dd_pairs", c.dd_pairs}};
}
inline void from_json(const nlohmann::json &j, ConfigurationResult &c) {
    c.folds = j.at("folds").get<std::size_t>();
    c.dd = j.at("dd").get<bool>();
    c.energy = j.at("energy").get<double>();
    c.standard_error = j.at("standard_error").get<double>();
    c.dd_pairs = j.at("dd_pairs").get<std::size_t>();
}

inline void to_json(nlohmann::json &j, const StrategyResult &s) {
    j = {{"name", s.name}, {"energy", s.energy}, {"improvement_percent", detail::optional_json(s.improvement)}};
    if (s.fit) {
        j["fit"] = *s.fit;
        j["residual_norm"] = s.residual_norm;
        j["fit_fell_back"] = s.fit_fell_back;
    }
}
inline void from_json(const nlohmann::json &j, StrategyResult &s) {
    s.name = j.at("name").get<std::string>();
    s.energy = j.at("energy").get<double>();
    s.improvement = detail::optional_from(j.at("improvement_percent"));
    s.fit.reset();
    s.residual_norm = 0.0;
    s.fit_fell_back = false;
    if (j.contains("fit")) {
        s.fit = j.at("fit").get<std::string>();
        s.residual_norm = j.at("residual_norm").get<double>();
        s.fit_fell_back = j.at("fit_fell_back").get<bool>();
    }
}

inline void to_json(nlohmann::json &j, const RepeatResult &r) {
    j = {{"repeat", r.repeat}, {"seed", r.seed}, {"configurations", r.configurations}, {"strategies", r.strategies}};
}
inline void from_json(const nlohmann::json &j, RepeatResult &r) {
    r.repeat = j.at("repeat").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.configurations = j.at("configurations").get<std::vector<ConfigurationResult>>();
    r.strategies = j.at("strategies").get<std::vector<StrategyResult>>();
}

inline void to_json(nlohmann::json &j, const StrategyMedian &m) {
    j = {{"name", m.name}, {"energy", m.energy}, {"improvement_percent", detail::optional_json(m.improvement)}};
}
inline void from_json(const nlohmann::json &j, StrategyMedian &m) {
    m.name = j.at("name").get<std::string>();
    m.energy = j.at("energy").get<double>();
    m.improvement = detail::optional_from(j.at("improvement_percent"));
}

inline void to_json(nlohmann::json &j, const GridPointResult &p) {
    j = {{"n", p.n},
         {"h", p.h},
         {"reference_kind", p.reference_kind},
         {"reference", p.reference},
         {"theta", p.theta},
         {"repeats", p.repeats},
         {"medians", p.medians},
         {"error", p.error ? nlohmann::json(*p.error) : nlohmann::json(nullptr)}};
}
inline void from_json(const nlohmann::json &j, GridPointResult &p) {
    p.n = j.at("n").get<std::size_t>();
    p.h = j.at("h").get<double>();
    p.reference_kind = j.at("reference_kind").get<std::string>();
    p.reference = j.at("reference").get<double>();
    p.theta = j.at("theta").get<std::vector<double>>();
    p.repeats = j.at("repeats").get<std::vector<RepeatResult>>();
    p.medians = j.at("medians").get<std::vector<StrategyMedian>>();
    p.error.reset();
    if (!j.at("error").is_null()) p.error = j.at("error").get<std::string>();
}

inline void to_json(nlohmann::json &j, const ExperimentReport &r) {
    j = {{"version", r.version},
         {"timestamp", r.timestamp},
         {"spec", r.spec},
         {"optimizer", r.optimizer},
         {"strategies", r.strategies},
         {"skipped_n", r.skipped_n},
         {"partial", r.partial()},
         {"points", r.points}};
}
inline void from_json(const nlohmann::json &j, ExperimentReport &r) {
    r.version = j.at("version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.spec = j.at("spec").get<ExperimentSpec>();
    r.optimizer = j.at("optimizer").get<std::string>();
    r.strategies = j.at("strategies").get<std::vector<std::string>>();
    r.skipped_n = j.at("skipped_n").get<std::vector<std::size_t>>();
    r.points = j.at("points").get<std::vector<GridPointResult>>();
}

// Execution -----------------------------------------------------------------------

struct RunOptions {
    std::optional<std::filesystem::path> cache_path; ///< theta* artifact; none trains in memory
    bool retrain = false;
    std::size_t workers = 0;
    std::function<void(const std::string &)> log;
};

/// Energy of one circuit under noise, one trajectory batch per measurement setting.
inline ConfigurationResult measure_configuration(const DynamicCircuit &circuit, const PauliSum &H,
                                                 const std::vector<MeasurementSetting> &settings,
                                                 const ExperimentSpec &spec, bool dd, std::uint64_t seed,
                                                 std::size_t workers) {
    ConfigurationResult out;
    out.dd = dd;
    if (spec.noise.is_silent()) {
        // Nothing to sample but shot noise: use the exact ensemble expectation.
        DynamicCircuit c = circuit;
        if (dd) {
            auto r = insert_dd(c, schedule(c, spec.durations), spec.dd, spec.durations);
            out.dd_pairs = r.pulse_pairs;
            c = std::move(r.circuit);
        }
        out.energy = statevector_expectation(c, H);
        return out;
    }
    std::vector<Histogram> hists;
    for (std::size_t g = 0; g < settings.size(); ++g) {
        DynamicCircuit c = with_readout(circuit, settings[g]);
        Schedule s = schedule(c, spec.durations);
        if (dd) {
            auto r = insert_dd(c, s, spec.dd, spec.durations);
            out.dd_pairs += r.pulse_pairs;
            c = std::move(r.circuit);
            s = schedule(c, spec.durations);
        }
        // DD-on and DD-off share per-setting seeds (common random numbers).
        const TrajectoryRunner runner(c, s, spec.noise);
        hists.push_back(run_shots(runner, spec.trajectories, shot_seed(seed, g), workers));
    }
    const auto e = estimate_energy(hists, H, settings);
    out.energy = e.energy;
    out.standard_error = e.standard_error;
    return out;
}

/// Combines the six configurations into the four strategies.
inline std::vector<StrategyResult> combine_strategies(const std::vector<ConfigurationResult> &configs,
                                                      const ExperimentSpec &spec, double reference) {
    const auto names = strategy_names(spec.zne);
    auto find = [&](std::size_t k, bool dd) -> const ConfigurationResult & {
        for (const auto &c : configs) {
            if (c.folds == k && c.dd == dd) return c;
        }
        throw std::logic_error("missing configuration");
    };
    auto extrapolate = [&](bool dd) {
        std::vector<ZNEPoint> pts;
        for (auto k : spec.zne.folds) {
            const auto &c = find(k, dd);
            pts.push_back({1.0 + 2.0 * static_cast<double>(k), c.energy, c.standard_error});
        }
        return zne_extrapolate(pts, spec.zne);
    };
    const double base = find(0, false).energy;
    std::vector<StrategyResult> out;
    auto add = [&](const std::string &name, double e) {
        StrategyResult s;
        s.name = name;
        s.energy = e;
        s.improvement = improvement_percent(reference, base, e);
        out.push_back(s);
        return &out.back();
    };
    add(names[0], base);
    {
        const auto z = extrapolate(false);
        auto *s = add(names[1], z.e0);
        s->fit = fit_kind_name(z.used);
        s->residual_norm = z.residual_norm;
        s->fit_fell_back = z.fell_back;
    }
    add(names[2], find(0, true).energy);
    {
        const auto z = extrapolate(true);
        auto *s = add(names[3], z.e0);
        s->fit = fit_kind_name(z.used);
        s->residual_norm = z.residual_norm;
        s->fit_fell_back = z.fell_back;
    }
    return out;
}

/// Median energy and median improvement (over valid repeats) per strategy.
inline std::vector<StrategyMedian> strategy_medians(const std::vector<RepeatResult> &repeats) {
    std::vector<StrategyMedian> out;
    if (repeats.empty()) return out;
    for (std::size_t s = 0; s < repeats.front().strategies.size(); ++s) {
        StrategyMedian m;
        m.name = repeats.front().strategies[s].name;
        std::vector<double> energies, improvements;
        for (const auto &r : repeats) {
            energies.push_back(r.strategies[s].energy);
            if (r.strategies[s].improvement) improvements.push_back(*r.strategies[s].improvement);
        }
        m.energy = median(energies);
        if (!improvements.empty()) m.improvement = median(improvements);
        out.push_back(m);
    }
    return out;
}

namespace detail {

inline std::uint64_t point_seed(std::uint64_t seed, std::size_t n, double h, std::size_t repeat) {
    std::uint64_t hb = 0;
    std::memcpy(&hb, &h, sizeof hb);
    return splitmix64(splitmix64(splitmix64(seed ^ n) ^ hb) ^ repeat);
}

inline std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline TrainingResult trained_parameters(const ExperimentSpec &spec, std::size_t n, double h, const RunOptions &opt) {
    AnsatzSpec a;
    a.layers = spec.layers;
    if (!opt.cache_path) return optimize_params(spec.model, n, h, a, spec.training_seed);
    TrainingCache cache(*opt.cache_path);
    const auto key = TrainingCache::key(spec.model, n, h, spec.layers);
    if (!opt.retrain) {
        if (auto hit = cache.find(key)) return *hit;
    }
    auto r = optimize_params(spec.model, n, h, a, spec.training_seed);
    cache.store(key, r);
    return r;
}

inline GridPointResult run_point(const ExperimentSpec &spec, std::size_t n, double h, const RunOptions &opt) {
    GridPointResult p;
    p.n = n;
    p.h = h;
    const auto H = hamiltonian(spec.model, n, h);
    const auto settings = measurement_settings(H);
    BuilderTarget target;
    if (spec.suite == Suite::GroundState) {
        const auto tr = trained_parameters(spec, n, h, opt);
        AnsatzSpec a;
        a.n = n;
        a.layers = spec.layers;
        a.theta = tr.theta;
        a.entangler = EntanglerKind::Dynamic;
        target = a;
        p.reference_kind = "E_ideal";
        p.reference = tr.e_ideal;
        p.theta = tr.theta;
    } else {
        TrotterSpec t;
        t.model = spec.model;
        t.n = n;
        t.h = h;
        t.t = spec.t;
        t.steps = spec.steps;
        t.gadget = GadgetKind::Dynamic;
        target = t;
        p.reference_kind = "E_init";
        p.reference = computational_zero_energy(H);
    }

    std::vector<std::size_t> folds = spec.zne.folds;
    if (std::find(folds.begin(), folds.end(), 0) == folds.end()) folds.insert(folds.begin(), 0);
    std::map<std::size_t, DynamicCircuit> circuits;
    for (auto k : folds) circuits.emplace(k, fold_circuit(target, {k}));

    for (std::size_t r = 0; r < spec.repeats; ++r) {
        RepeatResult rr;
        rr.repeat = r;
        rr.seed = point_seed(spec.seed, n, h, r);
        for (bool dd : {false, true}) {
            for (auto k : folds) {
                if (opt.log) {
                    opt.log(std::string(suite_name(spec.suite)) + " n=" + std::to_string(n) + " h=" + std::to_string(h) +
                            " repeat=" + std::to_string(r) + " folds=" + std::to_string(k) + (dd ? " dd=on" : " dd=off"));
                }
                auto c = measure_configuration(circuits.at(k), H, settings, spec, dd, shot_seed(rr.seed, k), opt.workers);
                c.folds = k;
                rr.configurations.push_back(c);
            }
        }
        rr.strategies = combine_strategies(rr.configurations, spec, p.reference);
        p.repeats.push_back(std::move(rr));
    }
    p.medians = strategy_medians(p.repeats);
    return p;
}

inline ExperimentReport run_suite(const ExperimentSpec &spec, const RunOptions &opt) {
    spec.validate();
    ExperimentReport rep;
    rep.spec = spec;
    rep.timestamp = iso_timestamp();
    rep.strategies = strategy_names(spec.zne);
    const auto active = spec.active_n();
    for (auto v : spec.n) {
        if (std::find(active.begin(), active.end(), v) == active.end()) rep.skipped_n.push_back(v);
    }
    for (auto n : active) {
        for (double h : spec.h) {
            try {
                rep.points.push_back(run_point(spec, n, h, opt));
            } catch (const std::exception &e) {
                GridPointResult p;
                p.n = n;
                p.h = h;
                p.reference_kind = spec.suite == Suite::GroundState ? "E_ideal" : "E_init";
                std::ostringstream os;
                os << "n=" << n << " h=" << h << ": " << e.what();
                p.error = os.str();
                rep.points.push_back(std::move(p));
            }
        }
    }
    return rep;
}

} // namespace detail

/// Six configurations per grid point and repeat; improvements against E_ideal.
inline ExperimentReport run_ground_state_suite(ExperimentSpec spec, const RunOptions &opt = {}) {
    spec.suite = Suite::GroundState;
    return detail::run_suite(spec, opt);
}

/// Same protocol on dynamic Trotter circuits; gaps measured against E_init.
inline ExperimentReport run_time_evolution_suite(ExperimentSpec spec, const RunOptions &opt = {}) {
    spec.suite = Suite::TimeEvolution;
    return detail::run_suite(spec, opt);
}

inline ExperimentReport run_experiment(const ExperimentSpec &spec, const RunOptions &opt = {}) {
    return spec.suite == Suite::GroundState ? run_ground_state_suite(spec, opt) : run_time_evolution_suite(spec, opt);
}

// Output -----------------------------------------------------------------------------

enum class ReportFormat { Json, ImprovementsCsv, PlotCsv };

struct EmittedFiles {
    std::filesystem::path json, improvements_csv, plot_csv;
};

namespace detail {

inline std::string csv_number(const std::optional<double> &v) {
    if (!v) return "";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace detail

inline std::string report_json(const ExperimentReport &r) { return nlohmann::json(r).dump(2) + "\n"; }

/// model,n,h,strategy,improvement_percent,valid (median over repeats).
inline std::string improvements_csv(const ExperimentReport &r) {
    std::ostringstream os;
    os << "model,n,h,strategy,improvement_percent,valid\n";
    for (const auto &p : r.points) {
        for (const auto &m : p.medians) {
            os << model_name(r.spec.model) << ',' << p.n << ',' << detail::csv_number(p.h) << ",\"" << m.name << "\","
               << detail::csv_number(m.improvement) << ',' << (m.improvement ? "true" : "false") << '\n';
        }
    }
    return os.str();
}

/// One bar per (group, strategy); groups are the (n, h) points in grid order.
inline std::string plot_csv(const ExperimentReport &r) {
    std::ostringstream os;
    os << "group,n,h,strategy,median_improvement_percent,min_improvement_percent,max_improvement_percent,"
          "median_energy,reference\n";
    for (const auto &p : r.points) {
        for (std::size_t s = 0; s < p.medians.size(); ++s) {
            std::optional<double> lo, hi;
            for (const auto &rep : p.repeats) {
                if (const auto &v = rep.strategies[s].improvement) {
                    lo = lo ? std::min(*lo, *v) : *v;
                    hi = hi ? std::max(*hi, *v) : *v;
                }
            }
            os << "\"n=" << p.n << " h=" << detail::csv_number(p.h) << "\"," << p.n << ',' << detail::csv_number(p.h)
               << ",\"" << p.medians[s].name << "\"," << detail::csv_number(p.medians[s].improvement) << ','
               << detail::csv_number(lo) << ',' << detail::csv_number(hi) << ','
               << detail::csv_number(p.medians[s].energy) << ',' << detail::csv_number(p.reference) << '\n';
        }
    }
    return os.str();
}

inline EmittedFiles emit_report(const ExperimentReport &r, const std::filesystem::path &dir,
                                const std::vector<ReportFormat> &formats = {ReportFormat::Json, ReportFormat::ImprovementsCsv,
                                                                            ReportFormat::PlotCsv}) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = std::string(suite_name(r.spec.suite)) + "_" + model_name(r.spec.model);
    EmittedFiles f;
    for (auto fmt : formats) {
        switch (fmt) {
        case ReportFormat::Json:
            f.json = dir / (stem + "_report.json");
            detail::write_file(f.json, report_json(r));
            break;
        case ReportFormat::ImprovementsCsv:
            f.improvements_csv = dir / (stem + "_improvements.csv");
            detail::write_file(f.improvements_csv, improvements_csv(r));
            break;
        case ReportFormat::PlotCsv:
            f.plot_csv = dir / (stem + "_plot.csv");
            detail::write_file(f.plot_csv, plot_csv(r));
            break;
        }
    }
    return f;
}

inline ExperimentReport read_report(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    nlohmann::json j;
    in >> j;
    return j.get<ExperimentReport>();
}

} // namespace dynem
