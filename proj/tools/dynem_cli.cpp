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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynem/dynem.hpp"

namespace {

int run_command(const std::string &suite, const std::string &config, const std::string &out,
                const std::optional<std::uint64_t> &seed, bool large, bool retrain, const std::string &cache,
                std::size_t workers, bool quiet) {
    nlohmann::json j;
    {
        std::ifstream in(config);
        if (!in) throw std::runtime_error("cannot read config " + config);
        in >> j;
    }
    if (!j.contains("suite")) j["suite"] = suite;
    if (j.at("suite").get<std::string>() != suite) {
        throw std::runtime_error("config suite '" + j.at("suite").get<std::string>() + "' does not match --suite " + suite);
    }
    auto spec = j.get<dynem::ExperimentSpec>();
    if (seed) spec.seed = *seed;
    if (large) spec.large = true;

    dynem::RunOptions opt;
    opt.cache_path = cache.empty() ? std::filesystem::path(out) / "theta_cache.json" : std::filesystem::path(cache);
    opt.retrain = retrain;
    opt.workers = workers;
    if (!quiet) opt.log = [](const std::string &s) { std::cerr << "[dynem] " << s << '\n'; };

    const auto report = dynem::run_experiment(spec, opt);
    const auto files = dynem::emit_report(report, out);
    std::cout << "report: " << files.json.string() << '\n'
              << "improvements: " << files.improvements_csv.string() << '\n'
              << "plot data: " << files.plot_csv.string() << '\n';
    for (const auto &p : report.points) {
        if (p.error) {
            std::cerr << "error: " << *p.error << '\n';
            continue;
        }
        std::cout << "n=" << p.n << " h=" << p.h << " " << p.reference_kind << "=" << p.reference;
        for (const auto &m : p.medians) {
            std::cout << "  " << m.name << ": ";
            if (m.improvement) std::cout << *m.improvement << "%";
            else std::cout << "invalid";
        }
        std::cout << '\n';
    }
    if (!report.skipped_n.empty()) {
        std::cout << "skipped n (needs --large):";
        for (auto n : report.skipped_n) std::cout << ' ' << n;
        std::cout << '\n';
    }
    return report.partial() ? 2 : 0;
}

int verify_command(std::uint64_t seed) {
    bool all = true;
    for (const auto &r : dynem::run_verification(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all = all && r.passed;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Noisy dynamic-circuit simulator and error-mitigation benchmark"};
    app.set_version_flag("--version", dynem::kVersion);
    app.require_subcommand(1);

    auto *run = app.add_subcommand("run", "Run an experiment suite and write reports");
    std::string suite, config, out = "results", cache;
    std::optional<std::uint64_t> seed;
    bool large = false, retrain = false, quiet = false;
    std::size_t workers = 0;
    run->add_option("--suite", suite, "Experiment suite")
        ->required()
        ->check(CLI::IsMember({"ground-state", "time-evolution"}));
    run->add_option("--config", config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory")->capture_default_str();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_flag("--large", large, "Include ground-state sizes above the desk limit");
    run->add_flag("--retrain", retrain, "Ignore cached trained parameters");
    run->add_option("--cache", cache, "Trained-parameter cache (default OUT/theta_cache.json)");
    run->add_option("--workers", workers, "Trajectory worker threads (0 = all cores)");
    run->add_flag("--quiet", quiet, "Suppress progress output");

    auto *verify = app.add_subcommand("verify", "Run the built-in oracle and property checks");
    std::uint64_t verify_seed = 1;
    verify->add_option("--seed", verify_seed, "Seed for randomized checks")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return run_command(suite, config, out, seed, large, retrain, cache, workers, quiet);
        return verify_command(verify_seed);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
