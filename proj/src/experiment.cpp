#include "sepclust/experiment.hpp"

#include "sepclust/errors.hpp"
#include "sepclust/io.hpp"
#include "sepclust/kernels.hpp"
#include "sepclust/linalg.hpp"
#include "sepclust/rng.hpp"
#include "sepclust/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace sepclust {

namespace {

// Seed salts for the independent random streams of one experiment.
enum Salt : std::uint64_t {
    kSaltMeans = 11,
    kSaltSample = 12,
    kSaltAlgorithm = 13,
    kSaltVerify = 14,
};

std::vector<double> equal_weights(std::size_t k) {
    return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

struct Instance {
    Matrix data;
    TargetClustering target;
    nlohmann::json certificate;
};

Instance generate_instance(const ExperimentConfig& cfg, std::uint64_t seed, double target_c,
                           std::size_t k) {
    const auto& g = cfg.generator;
    Instance inst;
    if (g.kind == "gaussian") {
        std::vector<double> weights = g.weights.empty() ? equal_weights(k) : g.weights;
        PlacedMeans placed = place_separated_means(k, g.d, target_c, g.sigma, weights, g.n,
                                                   derive_seed(seed, kSaltMeans));
        MixtureSpec spec;
        spec.k = k;
        spec.d = g.d;
        spec.n = g.n;
        spec.weights = weights;
        spec.means = placed.means;
        spec.sigma.assign(k, g.sigma);
        GeneratedInstance gen = gen_gaussian_mixture(spec, derive_seed(seed, kSaltSample));
        inst.data = std::move(gen.data);
        inst.target = std::move(gen.target);
        inst.certificate = {{"kind", "gaussian"},
                            {"target_c", target_c},
                            {"pilot_separation", placed.pilot_separation},
                            {"doublings", placed.doublings},
                            {"sigma", g.sigma}};
    } else if (g.kind == "planted") {
        std::vector<std::size_t> sizes = g.sizes;
        if (sizes.empty()) {
            sizes.assign(k, g.n / k);
            for (std::size_t r = 0; r < g.n % k; ++r) sizes[r]++;
        }
        PlantedPartitionSpec spec;
        spec.sizes = sizes;
        spec.probabilities = Matrix(k, k, g.p_out);
        for (std::size_t r = 0; r < k; ++r) spec.probabilities(r, r) = g.p_in;
        PlantedInstance gen =
            gen_planted_partition(spec, derive_seed(seed, kSaltSample), g.c0, g.delta);
        inst.data = std::move(gen.data);
        inst.target = std::move(gen.target);
        inst.certificate = {{"kind", "planted"},
                            {"sigma_max", gen.report.sigma_max},
                            {"w_min", gen.report.w_min},
                            {"c0", gen.report.c0},
                            {"delta", gen.report.delta},
                            {"condition_rhs", gen.report.rhs},
                            {"min_ratio", gen.report.min_ratio},
                            {"satisfied", gen.report.satisfied}};
    } else if (g.kind == "orss") {
        OrssInstance gen = gen_orss(k, g.d, g.epsilon, g.n, derive_seed(seed, kSaltSample));
        inst.data = std::move(gen.data);
        inst.target = std::move(gen.target);
        inst.certificate = {{"kind", "orss"},
                            {"epsilon_target", gen.certificate.epsilon_target},
                            {"epsilon_achieved", gen.certificate.epsilon_achieved},
                            {"target_cost", gen.certificate.target_cost},
                            {"best_k_minus_1_cost", gen.certificate.best_k_minus_1_cost},
                            {"doublings", gen.certificate.doublings},
                            {"heuristic", gen.certificate.heuristic}};
    } else {
        throw input_error("unknown generator kind '" + g.kind + "'");
    }
    return inst;
}

// Stats are embedded in certificates for instances small enough to audit.
bool embed_stats(const ExperimentConfig& cfg) {
    return cfg.generator.kind != "planted" || cfg.generator.n <= 1000;
}

void append_stats(nlohmann::json& certificate, const Matrix& data, const TargetClustering& t) {
    SpectralStats stats = spectral_stats(data, t);
    certificate["stats"] = {{"spec_norm", stats.spec_norm},
                            {"frob_norm", stats.frob_norm},
                            {"delta", stats.delta},
                            {"degenerate", stats.degenerate},
                            {"separation_c",
                             std::isinf(stats.separation_c) ? -1.0 : stats.separation_c}};
}

} // namespace

nlohmann::json ExperimentConfig::to_json() const {
    return {{"generator",
             {{"kind", generator.kind},
              {"k", generator.k},
              {"d", generator.d},
              {"n", generator.n},
              {"sigma", generator.sigma},
              {"target_c", generator.target_c},
              {"weights", generator.weights},
              {"sizes", generator.sizes},
              {"p_in", generator.p_in},
              {"p_out", generator.p_out},
              {"c0", generator.c0},
              {"delta", generator.delta},
              {"epsilon", generator.epsilon}}},
            {"algorithm", {{"max_iter", algorithm.max_iter}, {"run_part3", algorithm.run_part3}}},
            {"suites", suites},
            {"sweep",
             {{"c_grid", sweep.c_grid},
              {"k_grid", sweep.k_grid},
              {"gamma_grid", sweep.gamma_grid},
              {"trials", sweep.trials}}},
            {"master_seed", master_seed},
            {"out_dir", out_dir}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            auto& out = cfg.generator;
            if (g.contains("kind")) out.kind = g.at("kind").get<std::string>();
            if (g.contains("k")) out.k = g.at("k").get<std::size_t>();
            if (g.contains("d")) out.d = g.at("d").get<std::size_t>();
            if (g.contains("n")) out.n = g.at("n").get<std::size_t>();
            if (g.contains("sigma")) out.sigma = g.at("sigma").get<double>();
            if (g.contains("target_c")) out.target_c = g.at("target_c").get<double>();
            if (g.contains("weights")) out.weights = g.at("weights").get<std::vector<double>>();
            if (g.contains("sizes")) out.sizes = g.at("sizes").get<std::vector<std::size_t>>();
            if (g.contains("p_in")) out.p_in = g.at("p_in").get<double>();
            if (g.contains("p_out")) out.p_out = g.at("p_out").get<double>();
            if (g.contains("c0")) out.c0 = g.at("c0").get<double>();
            if (g.contains("delta")) out.delta = g.at("delta").get<double>();
            if (g.contains("epsilon")) out.epsilon = g.at("epsilon").get<double>();
        }
        if (j.contains("algorithm")) {
            const auto& a = j.at("algorithm");
            if (a.contains("max_iter")) cfg.algorithm.max_iter = a.at("max_iter").get<int>();
            if (a.contains("run_part3")) cfg.algorithm.run_part3 = a.at("run_part3").get<bool>();
        }
        if (j.contains("suites")) cfg.suites = j.at("suites").get<std::vector<std::string>>();
        if (j.contains("sweep")) {
            const auto& s = j.at("sweep");
            if (s.contains("c_grid")) cfg.sweep.c_grid = s.at("c_grid").get<std::vector<double>>();
            if (s.contains("k_grid"))
                cfg.sweep.k_grid = s.at("k_grid").get<std::vector<std::size_t>>();
            if (s.contains("gamma_grid"))
                cfg.sweep.gamma_grid = s.at("gamma_grid").get<std::vector<double>>();
            if (s.contains("trials")) cfg.sweep.trials = s.at("trials").get<std::size_t>();
        }
        if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("bad config JSON: ") + e.what());
    }
    if (cfg.sweep.trials < 1) throw input_error("config: sweep.trials must be >= 1");
    if (cfg.sweep.c_grid.empty() || cfg.sweep.k_grid.empty() || cfg.sweep.gamma_grid.empty())
        throw input_error("config: sweep grids must be non-empty");
    return cfg;
}

std::string ExperimentConfig::config_hash() const { return io::hash_hex(io::fnv1a(canonical_dump())); }

const std::vector<std::string>& all_suites() {
    static const std::vector<std::string> names = {"projection", "part1", "core",   "margin",
                                                   "good",       "drift", "subset", "consistency"};
    return names;
}

GeneratedFiles run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                            std::optional<std::uint64_t> seed_override) {
    const std::uint64_t seed = seed_override.value_or(cfg.master_seed);
    Instance inst = generate_instance(cfg, seed, cfg.generator.target_c, cfg.generator.k);
    if (embed_stats(cfg)) append_stats(inst.certificate, inst.data, inst.target);

    const std::string describe = "config_hash=" + cfg.config_hash() + " seed=" + std::to_string(seed);
    GeneratedFiles files;
    files.dataset = out_dir / "dataset.csv";
    files.labels = out_dir / "labels.json";
    files.certificate = out_dir / "certificate.json";
    io::write_matrix_csv(files.dataset, inst.data, describe);
    io::write_labels_json(files.labels, inst.target.k, inst.target.labels,
                          {{"config_hash", cfg.config_hash()}, {"seed", seed}});
    inst.certificate["config_hash"] = cfg.config_hash();
    inst.certificate["seed"] = seed;
    io::write_text(files.certificate, inst.certificate.dump(2) + "\n");
    return files;
}

ClusterRunResult run_cluster(const Matrix& data, std::size_t k, const ClusterOptions& options,
                             const std::filesystem::path& out_file,
                             const std::string& self_description) {
    ClusterRunResult run = cluster(data, k, options);
    nlohmann::json j = io::cluster_result_to_json(run);
    j["k"] = k;
    j["seed"] = options.seed;
    j["self"] = self_description;
    io::write_text(out_file, j.dump(2) + "\n");
    return run;
}

VerifyOutcome run_verify(const Matrix& data, const TargetClustering& target,
                         const std::vector<std::string>& suites, std::uint64_t seed,
                         const nlohmann::json* certificate) {
    if (suites.empty()) throw input_error("run_verify: empty suite selection");
    for (const auto& s : suites)
        if (std::find(all_suites().begin(), all_suites().end(), s) == all_suites().end())
            throw input_error("run_verify: unknown suite '" + s + "'");
    auto selected = [&](const std::string& name) {
        return std::find(suites.begin(), suites.end(), name) != suites.end();
    };

    SpectralStats stats = spectral_stats(data, target);
    VerifyOutcome out;
    auto add = [&](InequalityCheck check) { out.checks.push_back(std::move(check)); };
    auto add_all = [&](std::vector<InequalityCheck> checks) {
        for (auto& c : checks) out.checks.push_back(std::move(c));
    };

    if (selected("projection")) add(check_projection_cost(data, target, stats));

    const bool needs_run = selected("part1") || selected("core") || selected("margin") ||
                           selected("good");
    ClusterRunResult run;
    if (needs_run) run = cluster(data, target.k, {.seed = derive_seed(seed, kSaltAlgorithm)});

    if (selected("part1")) {
        add_all(check_matched_center_distance(target, stats, run.nu));
        add_all(check_projection_misclassification(target, stats, run.z_labels, run.nu));
        add(check_projection_cost_ratio(data, target, stats, run.z_labels, run.nu));
    }
    if (selected("core") && !stats.degenerate && std::isfinite(stats.separation_c)) {
        add_all(check_core_coverage(target, stats, run.core_sets, run.nu));
        add_all(check_core_leakage(target, stats, run.core_sets, run.nu));
        bool all_cores_filled =
            std::none_of(run.core_empty.begin(), run.core_empty.end(), [](bool b) { return b; });
        if (all_cores_filled)
            add_all(check_refined_center_distance(target, stats, run.theta, run.nu));
        if (stats.separation_c > 60.0) { // the exclusion property's hypothesis
            SvdResult svd = truncated_svd(data, target.k);
            Matrix mu_hat = project_rows(target.means, svd.right);
            add(check_core_exclusion(run.projected, target, run.nu, mu_hat));
        }
    }
    if (selected("margin") && target.k >= 2 && !stats.degenerate) {
        const double sqrt_k = std::sqrt(static_cast<double>(target.k));
        Rng dir_rng(derive_seed(seed, kSaltVerify, 1));
        for (double alpha : {0.1, 0.5, 1.0 / sqrt_k}) {
            for (double beta : {1.0 / 3.0, 1.0}) {
                for (std::size_t r = 0; r < target.k; ++r) {
                    for (std::size_t s = 0; s < target.k; ++s) {
                        if (r == s) continue;
                        // ζ = μ + 0.999·α·Δ along a seeded direction
                        auto offset = [&](std::size_t c) {
                            std::vector<double> z(target.means.row(c).begin(),
                                                  target.means.row(c).end());
                            std::vector<double> dir(data.cols());
                            for (double& v : dir) v = dir_rng.normal();
                            double norm = std::sqrt(kernels::dot(dir, dir));
                            if (norm > 0.0)
                                for (std::size_t p = 0; p < dir.size(); ++p)
                                    z[p] += 0.999 * alpha * stats.delta[c] * dir[p] / norm;
                            return z;
                        };
                        add(check_line_margin_count(data, target, stats, r, s, offset(r),
                                                    offset(s), alpha, beta));
                    }
                }
            }
        }
    }
    if (selected("good") && target.k >= 2 && !stats.degenerate &&
        std::isfinite(stats.separation_c))
        add_all(check_good_point_misclassification(data, target, stats, run.theta, 1.0));
    if (selected("drift")) add_all(check_projected_mean_drift(data, target, stats));
    if (selected("subset")) {
        Rng rng(derive_seed(seed, kSaltVerify, 2));
        for (std::size_t r = 0; r < target.k; ++r) {
            std::vector<int> members;
            for (std::size_t i = 0; i < data.rows(); ++i)
                if (static_cast<std::size_t>(target.labels[i]) == r)
                    members.push_back(static_cast<int>(i));
            Matrix rows(members.size(), data.cols());
            for (std::size_t i = 0; i < members.size(); ++i)
                rows.set_row(i, data.row(static_cast<std::size_t>(members[i])));
            for (int trial = 0; trial < 8; ++trial) {
                std::vector<int> subset;
                for (std::size_t i = 0; i < members.size(); ++i)
                    if (rng.uniform() < 0.3) subset.push_back(static_cast<int>(i));
                add_all(check_subset_mean(rows, subset));
            }
        }
    }
    if (selected("consistency")) {
        if (certificate && certificate->contains("stats")) {
            const auto& stored = certificate->at("stats");
            auto close = [](double a, double b) {
                return std::abs(a - b) <= 1e-7 * std::max({std::abs(a), std::abs(b), 1e-30});
            };
            auto recorded = [&](const char* key) { return stored.at(key).get<double>(); };
            add(make_check("stats_spec_norm_consistency",
                           std::abs(stats.spec_norm - recorded("spec_norm")),
                           1e-7 * std::max(stats.spec_norm, 1e-30), "stored vs recomputed"));
            add(make_check("stats_frob_norm_consistency",
                           std::abs(stats.frob_norm - recorded("frob_norm")),
                           1e-7 * std::max(stats.frob_norm, 1e-30), "stored vs recomputed"));
            auto stored_delta = stored.at("delta").get<std::vector<double>>();
            bool delta_ok = stored_delta.size() == stats.delta.size();
            for (std::size_t r = 0; delta_ok && r < stats.delta.size(); ++r)
                delta_ok = close(stats.delta[r], stored_delta[r]);
            add(make_check("stats_delta_consistency", delta_ok ? 0.0 : 1.0, 0.0,
                           "stored vs recomputed"));
        }
    }

    for (const auto& check : out.checks)
        if (!check.holds) out.failures++;
    return out;
}

void write_verify_reports(const VerifyOutcome& outcome, const std::filesystem::path& out_dir,
                          const std::string& self_description) {
    std::ostringstream jsonl;
    for (const auto& check : outcome.checks) jsonl << io::check_to_json(check).dump() << "\n";
    io::write_text(out_dir / "checks.jsonl", jsonl.str());

    struct Agg {
        std::size_t trials = 0, failures = 0;
        double worst_ratio = 0.0;
    };
    std::map<std::string, Agg> by_fact;
    for (const auto& check : outcome.checks) {
        Agg& agg = by_fact[check.fact_id];
        agg.trials++;
        if (!check.holds) agg.failures++;
        double ratio;
        if (check.rhs > 0.0)
            ratio = check.lhs / check.rhs;
        else
            ratio = check.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        agg.worst_ratio = std::max(agg.worst_ratio, ratio);
    }
    std::ostringstream csv;
    csv << "# " << self_description << "\n";
    csv << "fact_id,trials,failures,worst_ratio\n";
    for (const auto& [fact, agg] : by_fact)
        csv << fact << ',' << agg.trials << ',' << agg.failures << ','
            << io::format_double(agg.worst_ratio) << "\n";
    io::write_text(out_dir / "aggregate.csv", csv.str());
}

std::filesystem::path run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    const std::string describe =
        "config_hash=" + cfg.config_hash() + " master_seed=" + std::to_string(cfg.master_seed);

    struct Row {
        double c_target, gamma;
        std::size_t k, trial;
        std::uint64_t seed;
        double c_measured, miscl_fraction, cost_ratio, theta_drift;
        std::size_t checks_passed, checks_total;
    };
    std::vector<Row> rows;

    for (std::size_t ci = 0; ci < cfg.sweep.c_grid.size(); ++ci) {
        for (std::size_t ki = 0; ki < cfg.sweep.k_grid.size(); ++ki) {
            for (std::size_t gi = 0; gi < cfg.sweep.gamma_grid.size(); ++gi) {
                for (std::size_t trial = 0; trial < cfg.sweep.trials; ++trial) {
                    const std::uint64_t seed = derive_seed(cfg.master_seed, ci, ki,
                                                           gi * 1000 + trial);
                    const std::size_t k = cfg.sweep.k_grid[ki];
                    const double c_target = cfg.sweep.c_grid[ci];
                    const double gamma = cfg.sweep.gamma_grid[gi];

                    Instance inst = generate_instance(cfg, seed, c_target, k);
                    SpectralStats stats = spectral_stats(inst.data, inst.target);
                    ClusterRunResult run =
                        cluster(inst.data, k,
                                {.seed = derive_seed(seed, kSaltAlgorithm),
                                 .max_iter = cfg.algorithm.max_iter,
                                 .run_part3 = cfg.algorithm.run_part3});
                    const std::vector<int>& labels =
                        cfg.algorithm.run_part3 ? run.final_labels : run.z_labels;
                    const Matrix& centers = cfg.algorithm.run_part3 ? run.final_centers : run.nu;
                    EvaluationReport rep = evaluate(inst.data, inst.target, labels, centers);

                    double drift = 0.0;
                    for (std::size_t r = 0; r < k; ++r)
                        drift = std::max(
                            drift, std::sqrt(kernels::sq_dist(run.theta.row(r),
                                                              inst.target.means.row(r))) *
                                       std::sqrt(static_cast<double>(inst.target.sizes[r])) /
                                       std::max(stats.spec_norm, 1e-300));

                    std::size_t passed = 0, total = 0;
                    if (!cfg.suites.empty()) {
                        VerifyOutcome verify = run_verify(inst.data, inst.target, cfg.suites,
                                                          derive_seed(seed, kSaltVerify));
                        total = verify.checks.size();
                        passed = total - verify.failures;
                    }

                    rows.push_back({c_target, gamma, k, trial, seed, stats.separation_c,
                                    static_cast<double>(rep.total_misclassified) /
                                        static_cast<double>(inst.data.rows()),
                                    rep.cost_ratio, drift, passed, total});
                }
            }
        }
    }

    std::ostringstream csv;
    csv << "# " << describe << "\n";
    csv << "c_target,k,gamma,trial,seed,c_measured,miscl_fraction,cost_ratio,theta_drift,"
           "checks_passed,checks_total\n";
    for (const Row& row : rows)
        csv << io::format_double(row.c_target) << ',' << row.k << ','
            << io::format_double(row.gamma) << ',' << row.trial << ',' << row.seed << ','
            << io::format_double(row.c_measured) << ',' << io::format_double(row.miscl_fraction)
            << ',' << io::format_double(row.cost_ratio) << ','
            << io::format_double(row.theta_drift) << ',' << row.checks_passed << ','
            << row.checks_total << "\n";
    const std::filesystem::path csv_path = out_dir / "sweep.csv";
    io::write_text(csv_path, csv.str());
    io::write_text(out_dir / "sweep_config.json", cfg.to_json().dump(2) + "\n");

    // Per-k series over the c grid (trial/γ means).
    auto plot = [&](const std::string& file, const std::string& title, const std::string& ylabel,
                    auto value_of) {
        SvgLinePlot svg;
        svg.title = title;
        svg.x_label = "target separation c";
        svg.y_label = ylabel;
        svg.comment = describe;
        for (std::size_t k : cfg.sweep.k_grid) {
            SvgLinePlot::Series series;
            series.name = "k=" + std::to_string(k);
            for (double c : cfg.sweep.c_grid) {
                double sum = 0.0;
                std::size_t count = 0;
                for (const Row& row : rows)
                    if (row.k == k && row.c_target == c) {
                        sum += value_of(row);
                        count++;
                    }
                if (count) series.points.emplace_back(c, sum / static_cast<double>(count));
            }
            svg.series.push_back(std::move(series));
        }
        svg.write(out_dir / file);
    };
    plot("misclassification.svg", "Misclassified fraction vs separation", "misclassified fraction",
         [](const Row& row) { return row.miscl_fraction; });
    plot("cost_ratio.svg", "k-means cost ratio vs separation", "cost ratio",
         [](const Row& row) { return row.cost_ratio; });
    plot("center_drift.svg", "Refined-center drift vs separation",
         "max_r sqrt(n_r) dist(theta_r, mu_r) / spectral norm",
         [](const Row& row) { return row.theta_drift; });
    return csv_path;
}

} // namespace sepclust
