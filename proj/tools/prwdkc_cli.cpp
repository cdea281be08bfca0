// Command-line front end: graph construction, single clustering runs,
// diffusion-time estimation, grid search, NMI evaluation and the synthetic
// generator. Subcommand outputs land in --out (default: current directory).

#include "prwdkc/prwdkc.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

namespace {

using namespace prwdkc;

struct DatasetFlags {
    std::string graph_path;
    std::string labels_path;
    std::string input_csv;
    std::string synthetic;
    uint64_t synth_seed = kDefaultSynthSeed;
    int knn = 0;
    bool zscore = false;
    bool largest_component = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--graph", graph_path, "edge-list file ('src dst [weight]', 0-based ids)");
        cmd->add_option("--labels", labels_path, "vertex label file ('vertex label' per line)");
        cmd->add_option("--input", input_csv, "feature CSV (optional final 'label' column)");
        cmd->add_option("--synthetic", synthetic, "built-in generator; only 'gaussians'");
        cmd->add_option("--synth-seed", synth_seed, "seed for the synthetic generator");
        cmd->add_option("--knn", knn, "K for the K-NN digraph (default: floor(log N))");
        cmd->add_flag("--zscore", zscore, "z-score feature columns before the K-NN build");
        cmd->add_flag("--largest-component", largest_component,
                      "cluster the largest weakly-connected component only");
    }

    void apply(ExperimentConfig& config) const {
        const int sources = (!graph_path.empty()) + (!input_csv.empty()) + (!synthetic.empty());
        require(sources == 1, "pass exactly one of --graph, --input, --synthetic");
        if (!graph_path.empty()) {
            config.source = ExperimentConfig::Source::edges;
            config.data_path = graph_path;
            config.labels_path = labels_path;
        } else if (!input_csv.empty()) {
            config.source = ExperimentConfig::Source::csv;
            config.data_path = input_csv;
        } else {
            require(synthetic == "gaussians", "unknown synthetic dataset '" + synthetic + "'");
            config.source = ExperimentConfig::Source::synthetic;
            config.synth_seed = synth_seed;
        }
        config.knn = knn;
        config.zscore = zscore;
        config.largest_component = largest_component;
    }
};

std::string out_path(const std::string& out_dir, const std::string& file) {
    if (out_dir.empty() || out_dir == ".") return file;
    std::filesystem::create_directories(out_dir);
    return (std::filesystem::path(out_dir) / file).string();
}

void write_outputs(const ExperimentConfig& config, const GridSearchOutput& output,
                   const std::string& out_dir) {
    write_report_json(out_path(out_dir, "report.json"), config, output);
    write_results_csv(out_path(out_dir, "results.csv"), output);
    write_partition(out_path(out_dir, "partition.txt"), output.headline_partition);
    if (output.td_estimate) write_td_trace(out_path(out_dir, "td_trace.csv"), *output.td_estimate);

    const ResultRecord& headline = output.records[output.headline];
    std::cout << "headline: method=" << headline.method;
    if (std::isfinite(headline.alpha))
        std::cout << " alpha=" << headline.alpha << " gamma=" << headline.gamma
                  << " t=" << headline.t;
    std::cout << " t_d=" << headline.t_d;
    if (headline.nmi_score) std::cout << " nmi=" << *headline.nmi_score;
    if (headline.ch_score) std::cout << " ch=" << *headline.ch_score;
    std::cout << "\n";
}

void run_and_report(const ExperimentConfig& config, const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    GridSearchOutput output = grid_search(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(config, output, out_dir);
    std::cerr << "wall time: " << seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-walk diffusion kernel clustering for directed and undirected graphs"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags (--seed/--threads/--out) may follow the subcommand

    uint64_t seed = 0;
    int threads = hardware_threads();
    std::string out_dir;
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (1 = fully serial)")
        ->capture_default_str();
    app.add_option("--out", out_dir, "output directory");

    // --- synth ---------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate the six-Gaussian synthetic dataset");
    uint64_t synth_seed = kDefaultSynthSeed;
    synth_cmd->add_option("--synth-seed", synth_seed, "generator seed")->capture_default_str();

    // --- build-graph ---------------------------------------------------
    auto* build_cmd = app.add_subcommand("build-graph", "build a K-NN digraph from a feature CSV");
    std::string build_input;
    int build_knn = 0;
    bool build_zscore = false;
    build_cmd->add_option("--input", build_input, "feature CSV")->required();
    build_cmd->add_option("--knn", build_knn, "K (default: floor(log N))");
    build_cmd->add_flag("--zscore", build_zscore, "z-score feature columns first");

    // --- shared method/grid flags for cluster + grid-search -------------
    auto add_method_flags = [](CLI::App* cmd, ExperimentConfig& config, std::string& td_spec,
                               std::vector<Real>& alphas, std::vector<Real>& gammas,
                               std::vector<long>& ts, std::string& method, std::string& op,
                               std::string& measure, std::string& policy, bool& raw_rows) {
        cmd->add_option("--k", config.k, "number of clusters");
        cmd->add_option("--method", method, "p-rwdkc | pic");
        cmd->add_option("--operator", op, "standard | modified");
        cmd->add_option("--measure", measure, "power | alt-power");
        cmd->add_option("--alpha", alphas, "measure exponent grid");
        cmd->add_option("--gamma", gammas, "out/in mixing grid");
        cmd->add_option("--t", ts, "measure diffusion step grid");
        cmd->add_option("--td", td_spec, "kernel diffusion time, or 'estimate'");
        cmd->add_option("--J", config.td_max_exponent,
                        "max dyadic exponent for --td estimate");
        cmd->add_option("--restarts", config.kmeans.restarts, "k-means restarts");
        cmd->add_option("--policy", policy, "best-inertia | best-nmi");
        cmd->add_flag("--raw-rows", raw_rows, "cluster raw kernel rows (no L2 normalization)");
    };

    ExperimentConfig cluster_config;
    DatasetFlags cluster_data;
    std::string cluster_td = "1", cluster_method = "p-rwdkc", cluster_op = "standard";
    std::string cluster_measure = "power", cluster_policy = "best-inertia";
    std::vector<Real> cluster_alphas{1.0}, cluster_gammas{0.5};
    std::vector<long> cluster_ts{1};
    bool cluster_raw_rows = false;
    auto* cluster_cmd = app.add_subcommand("cluster", "run one clustering configuration");
    cluster_data.attach(cluster_cmd);
    add_method_flags(cluster_cmd, cluster_config, cluster_td, cluster_alphas, cluster_gammas,
                     cluster_ts, cluster_method, cluster_op, cluster_measure, cluster_policy,
                     cluster_raw_rows);

    ExperimentConfig grid_config;
    DatasetFlags grid_data;
    std::string grid_td = "1", grid_method = "p-rwdkc", grid_op = "standard";
    std::string grid_measure = "power", grid_policy = "best-nmi";
    std::vector<Real> grid_alphas{1.0}, grid_gammas{0.5};
    std::vector<long> grid_ts{1};
    bool grid_raw_rows = false;
    std::string grid_config_file;
    auto* grid_cmd = app.add_subcommand("grid-search", "sweep a parameter grid");
    grid_cmd->add_option("--config", grid_config_file, "INI config file (flags override it)");
    grid_data.attach(grid_cmd);
    add_method_flags(grid_cmd, grid_config, grid_td, grid_alphas, grid_gammas, grid_ts,
                     grid_method, grid_op, grid_measure, grid_policy, grid_raw_rows);

    // --- estimate-td -----------------------------------------------------
    auto* td_cmd = app.add_subcommand("estimate-td", "estimate the diffusion time (dyadic search)");
    DatasetFlags td_data;
    td_data.attach(td_cmd);
    int td_k = 2, td_J = 15, td_restarts = 100;
    std::string td_op = "standard", td_score = "auto";
    td_cmd->add_option("--k", td_k, "number of clusters")->required();
    td_cmd->add_option("--J", td_J, "max dyadic exponent")->capture_default_str();
    td_cmd->add_option("--operator", td_op, "standard | modified");
    td_cmd->add_option("--score", td_score, "ch | dch | auto (ch when features exist)");
    td_cmd->add_option("--restarts", td_restarts, "k-means restarts per candidate");

    // --- eval-nmi --------------------------------------------------------
    auto* nmi_cmd = app.add_subcommand("eval-nmi", "NMI between two partition files");
    std::string nmi_a, nmi_b;
    nmi_cmd->add_option("--a", nmi_a, "first partition file")->required();
    nmi_cmd->add_option("--b", nmi_b, "second partition file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) {
            const FeatureDataset data = synth_gaussians(synth_seed);
            write_feature_csv(out_path(out_dir, "synthetic.csv"), data);
            std::cout << "wrote " << out_path(out_dir, "synthetic.csv") << " (N=" << data.size()
                      << ")\n";
            return 0;
        }

        if (build_cmd->parsed()) {
            FeatureDataset data = read_feature_csv(build_input);
            if (build_zscore) data.points = zscore_columns(data.points);
            const int k_nn = build_knn > 0 ? build_knn : default_knn_k(data.size());
            const Digraph g = build_knn_digraph(data, k_nn, threads);
            write_edge_list(out_path(out_dir, "graph.edges"), g);
            std::cout << "wrote " << out_path(out_dir, "graph.edges") << " (N=" << g.size()
                      << ", K=" << k_nn << ", edges=" << g.edge_count() << ")\n";
            return 0;
        }

        if (nmi_cmd->parsed()) {
            const Partition a = read_partition(nmi_a);
            const Partition b = read_partition(nmi_b);
            std::cout << nmi(a, b) << "\n";
            return 0;
        }

        if (td_cmd->parsed()) {
            ExperimentConfig config;
            td_data.apply(config);
            config.threads = threads;
            const ExperimentData data = load_experiment_data(config);

            TdOptions options;
            options.max_exponent = td_J;
            options.walk = td_op == "modified" ? WalkVariant::modified : WalkVariant::standard;
            options.threads = threads;
            if (td_score == "ch" || (td_score == "auto" && data.features)) {
                require(data.features.has_value(), "CH scoring needs feature coordinates");
                options.mode = TdScoreMode::ch_on_features;
                options.features = &*data.features;
            } else {
                options.mode = TdScoreMode::dch_on_walk;
            }
            KMeansConfig km;
            km.restarts = td_restarts;
            km.seed = seed;
            const DiffusionTimeEstimate estimate =
                estimate_diffusion_time(data.graph, td_k, options, km);
            write_td_trace(out_path(out_dir, "td_trace.csv"), estimate);
            for (const auto& entry : estimate.trace)
                std::cout << "j=" << entry.j << " t=" << entry.t << " score="
                          << entry.score.value << (entry.score.degenerate ? " (degenerate)" : "")
                          << "\n";
            std::cout << "t* = " << estimate.t_star << "\n";
            return 0;
        }

        // cluster / grid-search share the runner; cluster is a 1-cell grid
        const bool is_grid = grid_cmd->parsed();
        ExperimentConfig& config = is_grid ? grid_config : cluster_config;
        DatasetFlags& dataset = is_grid ? grid_data : cluster_data;
        const std::string& method = is_grid ? grid_method : cluster_method;
        const std::string& op = is_grid ? grid_op : cluster_op;
        const std::string& measure = is_grid ? grid_measure : cluster_measure;
        const std::string& policy = is_grid ? grid_policy : cluster_policy;
        const std::string& td_spec = is_grid ? grid_td : cluster_td;

        if (is_grid && !grid_config_file.empty())
            apply_config_file(config, read_config_file(grid_config_file));

        dataset.apply(config);
        config.method = method == "pic" ? ExperimentConfig::Method::pic
                                        : ExperimentConfig::Method::p_rwdkc;
        require(method == "pic" || method == "p-rwdkc", "unknown --method '" + method + "'");
        config.walk = op == "modified" ? WalkVariant::modified : WalkVariant::standard;
        require(op == "standard" || op == "modified", "unknown --operator '" + op + "'");
        config.measure = measure == "alt-power" ? ExperimentConfig::MeasureVariant::alt_power
                                                : ExperimentConfig::MeasureVariant::power;
        require(measure == "power" || measure == "alt-power",
                "unknown --measure '" + measure + "'");
        config.policy = policy == "best-nmi" ? ExperimentConfig::RestartPolicy::best_nmi
                                             : ExperimentConfig::RestartPolicy::best_inertia;
        require(policy == "best-inertia" || policy == "best-nmi",
                "unknown --policy '" + policy + "'");
        config.normalize_rows = !(is_grid ? grid_raw_rows : cluster_raw_rows);
        config.alpha_grid = is_grid ? grid_alphas : cluster_alphas;
        config.gamma_grid = is_grid ? grid_gammas : cluster_gammas;
        config.t_grid = is_grid ? grid_ts : cluster_ts;
        if (td_spec == "estimate") {
            config.estimate_td = true;
        } else {
            config.estimate_td = false;
            config.td_grid.clear();
            std::stringstream ss(td_spec);
            std::string item;
            while (std::getline(ss, item, ',')) config.td_grid.push_back(std::stol(item));
        }
        config.seed = seed;
        config.threads = threads;

        run_and_report(config, out_dir);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
