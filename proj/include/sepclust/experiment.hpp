#pragma once

#include "sepclust/analysis.hpp"
#include "sepclust/cluster.hpp"
#include "sepclust/generators.hpp"
#include "sepclust/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sepclust {

/// Batch-harness configuration; round-trips losslessly through JSON.
struct ExperimentConfig {
    struct Generator {
        std::string kind = "gaussian"; // gaussian | planted | orss
        std::size_t k = 4;
        std::size_t d = 20;
        std::size_t n = 1000;
        double sigma = 1.0;
        double target_c = 100.0;            // gaussian
        std::vector<double> weights;        // gaussian; empty = equal
        std::vector<std::size_t> sizes;     // planted; empty = equal split of n
        double p_in = 0.5, p_out = 0.1;     // planted
        double c0 = 1.0, delta = 0.05;      // planted condition report
        double epsilon = 0.01;              // orss
    } generator;

    struct Algorithm {
        int max_iter = 500;
        bool run_part3 = true;
    } algorithm;

    std::vector<std::string> suites = {"projection", "part1", "core", "margin", "good", "drift"};

    struct Sweep {
        std::vector<double> c_grid = {100.0};
        std::vector<std::size_t> k_grid = {4};
        std::vector<double> gamma_grid = {1.0};
        std::size_t trials = 1;
    } sweep;

    std::uint64_t master_seed = 1;
    std::string out_dir = "out";

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    std::string canonical_dump() const { return to_json().dump(); }
    std::string config_hash() const;
};

/// Names of all verify suites (the --suite "all" expansion).
const std::vector<std::string>& all_suites();

struct GeneratedFiles {
    std::filesystem::path dataset;
    std::filesystem::path labels;
    std::filesystem::path certificate;
};

/// One instance per the config's generator (seed defaults to the master
/// seed); writes dataset CSV + labels JSON + certificate JSON.
GeneratedFiles run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override = {});

/// Runs the pipeline on a dataset and writes result JSON. Returns the run.
ClusterRunResult run_cluster(const Matrix& data, std::size_t k, const ClusterOptions& options,
                             const std::filesystem::path& out_file,
                             const std::string& self_description);

struct VerifyOutcome {
    std::vector<InequalityCheck> checks;
    std::size_t failures = 0;
};

/// Runs the selected verifier suites against a dataset + target. The
/// optional certificate enables the stored-stats consistency suite.
VerifyOutcome run_verify(const Matrix& data, const TargetClustering& target,
                         const std::vector<std::string>& suites, std::uint64_t seed,
                         const nlohmann::json* certificate = nullptr);

/// Writes checks JSONL + aggregate CSV for a verify outcome.
void write_verify_reports(const VerifyOutcome& outcome, const std::filesystem::path& out_dir,
                          const std::string& self_description);

/// Full sweep: for every (c, k, γ, trial) generate → cluster → evaluate →
/// verify; writes aggregate CSV (rows sorted by axes) and the three SVG
/// plots. Returns the aggregate CSV path.
std::filesystem::path run_sweep(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir);

} // namespace sepclust
