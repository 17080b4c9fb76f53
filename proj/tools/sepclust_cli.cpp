// Batch experiment harness around the sepclust library.
//
//   sepclust generate --config cfg.json [--seed S] [--out DIR]
//   sepclust cluster  --data data.csv --k K [--seed S] [--max-iter N]
//                     [--no-part3] [--out DIR]
//   sepclust verify   --data data.csv --labels labels.json [--suite LIST]
//                     [--cert certificate.json] [--seed S] [--out DIR]
//   sepclust sweep    --config cfg.json [--seed S] [--jobs N] [--out DIR]
//
// Exit codes: 0 ok, 1 verification failure, 2 input error.
// SEPCLUST_OUT overrides the output directory.

#include "sepclust/errors.hpp"
#include "sepclust/experiment.hpp"
#include "sepclust/io.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/model.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitInputError = 2;

std::filesystem::path resolve_out(const std::string& flag_value, const std::string& fallback) {
    if (const char* env = std::getenv("SEPCLUST_OUT"); env && *env) return env;
    if (!flag_value.empty()) return flag_value;
    return fallback;
}

sepclust::ExperimentConfig load_config(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(sepclust::io::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw sepclust::input_error("config parse error in " + path + ": " + e.what());
    }
    return sepclust::ExperimentConfig::from_json(j);
}

std::vector<std::string> split_suites(const std::string& list) {
    if (list == "all") return sepclust::all_suites();
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        std::size_t next = list.find(',', pos);
        std::string item = list.substr(pos, next == std::string::npos ? next : next - pos);
        if (!item.empty()) out.push_back(item);
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"separation-conditioned spectral k-means experiment harness"};
    app.require_subcommand(1);

    std::string config_path, data_path, labels_path, cert_path, out_flag;
    std::string suite_list = "all";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t k = 0;
    int max_iter = 500;
    bool no_part3 = false;
    int jobs = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_flag, "output directory");
        cmd->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        cmd->add_option("--jobs", jobs, "worker threads for the parallel kernels");
    };

    CLI::App* generate = app.add_subcommand("generate", "write dataset/labels/certificate files");
    generate->add_option("--config", config_path, "experiment config JSON")->required();
    add_common(generate);

    CLI::App* cluster_cmd = app.add_subcommand("cluster", "run the pipeline on a dataset CSV");
    cluster_cmd->add_option("--data", data_path, "dataset CSV")->required();
    cluster_cmd->add_option("--k", k, "number of clusters")->required();
    cluster_cmd->add_option("--max-iter", max_iter, "Lloyd-phase iteration cap");
    cluster_cmd->add_flag("--no-part3", no_part3, "stop after the core-set stage");
    add_common(cluster_cmd);

    CLI::App* verify = app.add_subcommand("verify", "run verifier suites against a dataset");
    verify->add_option("--data", data_path, "dataset CSV")->required();
    verify->add_option("--labels", labels_path, "target labels JSON")->required();
    verify->add_option("--suite", suite_list, "comma-separated suites, or 'all'");
    verify->add_option("--cert", cert_path, "certificate JSON (enables consistency suite)");
    add_common(verify);

    CLI::App* sweep = app.add_subcommand("sweep", "grid sweep: generate, cluster, verify");
    sweep->add_option("--config", config_path, "experiment config JSON")->required();
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    if (jobs > 0) sepclust::kernels::set_num_threads(jobs);

    try {
        if (generate->parsed()) {
            sepclust::ExperimentConfig cfg = load_config(config_path);
            auto out_dir = resolve_out(out_flag, cfg.out_dir);
            auto files = sepclust::run_generate(
                cfg, out_dir,
                seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt);
            std::printf("wrote %s\nwrote %s\nwrote %s\n", files.dataset.c_str(),
                        files.labels.c_str(), files.certificate.c_str());
            return kExitOk;
        }

        if (cluster_cmd->parsed()) {
            sepclust::Matrix data = sepclust::io::read_matrix_csv(data_path);
            auto out_dir = resolve_out(out_flag, "out");
            sepclust::ClusterOptions options{.seed = seed, .max_iter = max_iter,
                                             .run_part3 = !no_part3};
            auto out_file = out_dir / std::filesystem::path("result.json");
            sepclust::ClusterRunResult run = sepclust::run_cluster(
                data, k, options, out_file,
                "data=" + data_path + " seed=" + std::to_string(seed));
            std::printf("wrote %s (part3_converged=%s)\n", out_file.c_str(),
                        run.part3_converged ? "true" : "false");
            return kExitOk;
        }

        if (verify->parsed()) {
            sepclust::Matrix data = sepclust::io::read_matrix_csv(data_path);
            auto [labels_k, labels] = sepclust::io::read_labels_json(labels_path);
            sepclust::TargetClustering target = sepclust::build_target(data, labels);
            if (target.k != labels_k)
                throw sepclust::input_error("labels JSON k does not match label values");

            std::vector<std::string> suites = split_suites(suite_list);
            nlohmann::json cert;
            bool has_cert = false;
            if (!cert_path.empty()) {
                cert = nlohmann::json::parse(sepclust::io::read_text(cert_path));
                has_cert = true;
            }
            sepclust::VerifyOutcome outcome = sepclust::run_verify(
                data, target, suites, seed, has_cert ? &cert : nullptr);
            auto out_dir = resolve_out(out_flag, "out");
            sepclust::write_verify_reports(outcome, out_dir,
                                           "data=" + data_path +
                                               " seed=" + std::to_string(seed));
            std::printf("%zu checks, %zu failures\n", outcome.checks.size(), outcome.failures);
            return outcome.failures == 0 ? kExitOk : kExitVerifyFailure;
        }

        if (sweep->parsed()) {
            sepclust::ExperimentConfig cfg = load_config(config_path);
            if (seed_set) cfg.master_seed = seed;
            auto out_dir = resolve_out(out_flag, cfg.out_dir);
            auto csv = sepclust::run_sweep(cfg, out_dir);
            std::printf("wrote %s\n", csv.c_str());
            return kExitOk;
        }
    } catch (const sepclust::input_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    }
    return kExitOk;
}
