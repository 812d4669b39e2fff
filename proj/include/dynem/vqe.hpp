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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <json.hpp>

#include "builders.hpp"
#include "expectation.hpp"
#include "hamiltonians.hpp"
#include "trajectory.hpp"

namespace dynem {

inline constexpr const char *kOptimizerName = "gsl-nmsimplex2";
inline constexpr int kAnsatzLayoutVersion = 1;

struct OptimizerOptions {
    std::size_t restarts = 8;
    std::size_t max_evaluations = 2000; ///< per restart
    double size_tolerance = 1e-8;
    double initial_step = 0.5;
};

struct TracePoint {
    std::size_t evaluation = 0;
    double energy = 0.0; ///< best energy seen so far

    bool operator==(const TracePoint &) const = default;
};

struct TrainingResult {
    std::vector<double> theta;
    double e_ideal = 0.0;
    std::vector<TracePoint> trace;
    bool converged = false;
    std::size_t evaluations = 0;

    bool operator==(const TrainingResult &) const = default;
};

namespace detail {

struct RestartOutcome {
    std::vector<double> theta;
    double energy = std::numeric_limits<double>::infinity();
    std::vector<TracePoint> trace;
    bool converged = false;
    std::size_t evaluations = 0;
};

struct Objective {
    const PauliSum *H;
    AnsatzSpec spec;
    std::size_t evaluations = 0;
    double best = std::numeric_limits<double>::infinity();
    std::vector<TracePoint> *trace;
};

inline double objective_fn(const gsl_vector *x, void *params) {
    auto *o = static_cast<Objective *>(params);
    for (std::size_t i = 0; i < o->spec.theta.size(); ++i) o->spec.theta[i] = gsl_vector_get(x, i);
    const double e = statevector_expectation(hea_circuit(o->spec), *o->H);
    ++o->evaluations;
    if (e < o->best) {
        o->best = e;
        o->trace->push_back({o->evaluations, e});
    }
    return e;
}

inline RestartOutcome nelder_mead(const PauliSum &H, AnsatzSpec spec, std::vector<double> start,
                                  const OptimizerOptions &opt) {
    const std::size_t dim = start.size();
    RestartOutcome out;
    Objective obj{&H, spec, 0, std::numeric_limits<double>::infinity(), &out.trace};
    obj.spec.theta = start;

    gsl_multimin_function f{&objective_fn, dim, &obj};
    gsl_vector *x = gsl_vector_alloc(dim);
    gsl_vector *step = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x, i, start[i]);
    gsl_vector_set_all(step, opt.initial_step);
    gsl_multimin_fminimizer *s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(s, &f, x, step);

    while (obj.evaluations < opt.max_evaluations) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opt.size_tolerance) == GSL_SUCCESS) {
            out.converged = true;
            break;
        }
    }
    const gsl_vector *best = gsl_multimin_fminimizer_x(s);
    out.theta.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) out.theta[i] = gsl_vector_get(best, i);
    out.evaluations = obj.evaluations;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(step);
    gsl_vector_free(x);

    // Re-evaluate at the reported point so E_ideal and theta agree exactly.
    spec.theta = out.theta;
    out.energy = statevector_expectation(hea_circuit(spec), H);
    return out;
}

} // namespace detail

/// Noiseless variational training of the HEA on the static-entangler circuit.
/// Restarts draw theta uniformly from [-pi, pi) with seed-derived generators,
/// run independently and the lowest final energy wins (lowest index on ties).
inline TrainingResult optimize_params(Model model, std::size_t n, double h, AnsatzSpec ansatz, std::uint64_t seed,
                                      const OptimizerOptions &opt = {}) {
    ansatz.n = n;
    ansatz.entangler = EntanglerKind::StaticLadder;
    ansatz.theta.assign(ansatz.parameter_count(), 0.0);
    ansatz.validate();
    if (opt.restarts == 0) throw std::invalid_argument("optimize_params: need at least one restart");
    gsl_set_error_handler_off();
    const auto H = hamiltonian(model, n, h);

    std::vector<detail::RestartOutcome> runs(opt.restarts);
    parallel_for(opt.restarts, [&](std::size_t r) {
        std::mt19937_64 rng(shot_seed(seed, r));
        std::uniform_real_distribution<double> u(-M_PI, M_PI);
        std::vector<double> start(ansatz.parameter_count());
        for (auto &x : start) x = u(rng);
        runs[r] = detail::nelder_mead(H, ansatz, std::move(start), opt);
    });

    TrainingResult res;
    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].energy < runs[best].energy) best = r;
    }
    res.theta = runs[best].theta;
    res.e_ideal = runs[best].energy;
    res.converged = runs[best].converged;
    // Concatenated trace in restart order, best-so-far across restarts.
    double so_far = std::numeric_limits<double>::infinity();
    std::size_t offset = 0;
    for (const auto &r : runs) {
        for (const auto &p : r.trace) {
            if (p.energy < so_far) {
                so_far = p.energy;
                res.trace.push_back({offset + p.evaluation, p.energy});
            }
        }
        offset += r.evaluations;
    }
    res.evaluations = offset;
    return res;
}

inline void to_json(nlohmann::json &j, const TrainingResult &r) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto &p : r.trace) trace.push_back({p.evaluation, p.energy});
    j = {{"theta", r.theta},
         {"e_ideal", r.e_ideal},
         {"converged", r.converged},
         {"evaluations", r.evaluations},
         {"trace", trace}};
}

inline void from_json(const nlohmann::json &j, TrainingResult &r) {
    r.theta = j.at("theta").get<std::vector<double>>();
    r.e_ideal = j.at("e_ideal").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.evaluations = j.value("evaluations", std::size_t{0});
    r.trace.clear();
    for (const auto &p : j.value("trace", nlohmann::json::array())) {
        r.trace.push_back({p.at(0).get<std::size_t>(), p.at(1).get<double>()});
    }
}

/// theta* artifacts keyed by model, size, field, layer count and layout version.
class TrainingCache {
  public:
    explicit TrainingCache(std::filesystem::path path) : path_(std::move(path)) {
        if (std::filesystem::exists(path_)) {
            std::ifstream in(path_);
            if (!in) throw std::runtime_error("cannot read " + path_.string());
            in >> data_;
        }
        if (!data_.is_object()) data_ = nlohmann::json::object();
    }

    static std::string key(Model m, std::size_t n, double h, std::size_t layers) {
        std::ostringstream os;
        os.precision(17);
        os << model_name(m) << "/n=" << n << "/h=" << h << "/layers=" << layers << "/layout=v" << kAnsatzLayoutVersion;
        return os.str();
    }

    std::optional<TrainingResult> find(const std::string &k) const {
        auto it = data_.find(k);
        if (it == data_.end()) return std::nullopt;
        return it->get<TrainingResult>();
    }

    void store(const std::string &k, const TrainingResult &r) {
        data_[k] = r;
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_);
        if (!out) throw std::runtime_error("cannot write " + path_.string());
        out << data_.dump(2) << '\n';
    }

  private:
    std::filesystem::path path_;
    nlohmann::json data_;
};

} // namespace dynem
