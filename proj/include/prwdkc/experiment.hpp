#pragma once

#include "prwdkc/cluster.hpp"
#include "prwdkc/common.hpp"
#include "prwdkc/criteria.hpp"
#include "prwdkc/graph.hpp"
#include "prwdkc/io.hpp"
#include "prwdkc/kernel.hpp"
#include "prwdkc/kmeans.hpp"
#include "prwdkc/nmi.hpp"
#include "prwdkc/parallel.hpp"
#include "prwdkc/synth.hpp"
#include "prwdkc/walk.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace prwdkc {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    enum class Source { csv, edges, synthetic };
    enum class Method { p_rwdkc, pic };
    enum class MeasureVariant { power, alt_power };
    enum class RestartPolicy { best_inertia, best_nmi };

    // dataset
    Source source = Source::csv;
    std::string data_path;
    std::string labels_path;  // companion labels for edge lists
    uint64_t synth_seed = kDefaultSynthSeed;
    std::string dataset_name;
    int knn = 0;  // 0: the floor(log N) rule
    bool zscore = false;
    bool largest_component = false;

    // method
    Method method = Method::p_rwdkc;
    MeasureVariant measure = MeasureVariant::power;
    WalkVariant walk = WalkVariant::standard;
    bool normalize_rows = true;
    int k = 2;

    // grids
    std::vector<Real> alpha_grid{1.0};
    std::vector<Real> gamma_grid{0.5};
    std::vector<long> t_grid{1};
    std::vector<long> td_grid{1};
    bool estimate_td = false;  // "estimate": run the dyadic search instead of td_grid
    int td_max_exponent = 15;

    KMeansConfig kmeans;
    RestartPolicy policy = RestartPolicy::best_inertia;
    uint64_t seed = 0;
    int threads = 1;
    std::string out_dir;

    void validate() const {
        require(k >= 2, "k must be >= 2");
        require(!alpha_grid.empty() && !gamma_grid.empty() && !t_grid.empty(),
                "parameter grids must be non-empty");
        require(estimate_td || !td_grid.empty(), "t_d grid must be non-empty or 'estimate'");
        require(td_max_exponent >= 0, "td max exponent must be >= 0");
    }
};

struct ResultRecord {
    std::string dataset;
    Index n = 0;
    Index d = 0;
    int k = 0;
    std::string method;
    Real alpha = std::numeric_limits<Real>::quiet_NaN();
    Real gamma = std::numeric_limits<Real>::quiet_NaN();
    long t = -1;
    long t_d = -1;
    std::optional<Real> nmi_score;
    std::optional<Real> ch_score;
    std::optional<Real> dch_score;
    Real inertia = 0.0;
    uint64_t seed = 0;
    double wall_seconds = 0.0;  // never serialized: reports must be reproducible
};

struct GridSearchOutput {
    std::vector<ResultRecord> records;
    std::size_t headline = 0;  // argmax-NMI record (argmax validity without labels)
    Partition headline_partition;
    std::optional<DiffusionTimeEstimate> td_estimate;
};

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

/// A loaded experiment input: the digraph plus whatever side information the
/// source provides.
struct ExperimentData {
    Digraph graph;
    std::optional<Matrix> features;
    std::optional<std::vector<int>> labels;
    std::string name;
    Index feature_dim = 0;
};

inline Matrix zscore_columns(Matrix points) {
    for (Index c = 0; c < points.cols(); ++c) {
        const Real mean = points.col(c).mean();
        points.col(c).array() -= mean;
        const Real sd = std::sqrt(points.col(c).squaredNorm() / static_cast<Real>(points.rows()));
        if (sd > 0.0) points.col(c) /= sd;
    }
    return points;
}

inline ExperimentData load_experiment_data(const ExperimentConfig& config) {
    ExperimentData data;
    if (config.source == ExperimentConfig::Source::synthetic) {
        FeatureDataset synth = synth_gaussians(config.synth_seed);
        std::vector<int> labels = config.k == 2 ? two_scale_labels(*synth.labels) : *synth.labels;
        Matrix points = config.zscore ? zscore_columns(synth.points) : synth.points;
        const int k_nn = config.knn > 0 ? config.knn : default_knn_k(points.rows());
        FeatureDataset for_graph{points, std::nullopt, synth.name};
        data.graph = build_knn_digraph(for_graph, k_nn, config.threads);
        data.features = std::move(points);
        data.labels = std::move(labels);
        data.name = config.dataset_name.empty() ? synth.name : config.dataset_name;
        data.feature_dim = 2;
    } else if (config.source == ExperimentConfig::Source::csv) {
        FeatureDataset csv = read_feature_csv(config.data_path);
        Matrix points = config.zscore ? zscore_columns(csv.points) : csv.points;
        const int k_nn = config.knn > 0 ? config.knn : default_knn_k(points.rows());
        FeatureDataset for_graph{points, std::nullopt, csv.name};
        data.graph = build_knn_digraph(for_graph, k_nn, config.threads);
        data.feature_dim = points.cols();
        data.features = std::move(points);
        data.labels = csv.labels;
        data.name = config.dataset_name.empty() ? config.data_path : config.dataset_name;
    } else {
        Digraph g = read_edge_list(config.data_path);
        std::optional<std::vector<int>> labels;
        if (!config.labels_path.empty())
            labels = read_vertex_labels(config.labels_path, g.size());
        if (config.largest_component) {
            auto [sub, index_map] = largest_weak_component(g);
            if (labels) {
                std::vector<int> sub_labels(index_map.size());
                for (std::size_t i = 0; i < index_map.size(); ++i)
                    sub_labels[i] = (*labels)[static_cast<std::size_t>(index_map[i])];
                labels = std::move(sub_labels);
            }
            g = std::move(sub);
        }
        data.graph = std::move(g);
        data.labels = std::move(labels);
        data.name = config.dataset_name.empty() ? config.data_path : config.dataset_name;
    }
    return data;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

namespace detail {

struct GridCell {
    Real alpha = 1.0;
    Real gamma = 0.5;
    long t = 1;
    long t_d = 1;
};

struct CellOutcome {
    Partition partition;
    Real inertia = 0.0;
    std::optional<Real> nmi_score;
    std::optional<Real> ch_score;
    std::optional<Real> dch_score;
};

// One grid cell: build the measure and walk, take the kernel (or the plain
// power for PIC), cluster under the configured restart policy, score.
inline CellOutcome evaluate_cell(const ExperimentConfig& config, const ExperimentData& data,
                                 const GridCell& cell, uint64_t cell_seed) {
    const Digraph& g = data.graph;
    KMeansConfig km = config.kmeans;
    km.k = config.k;
    km.seed = cell_seed;

    Matrix stochastic_rows;  // rows of the operator power, for DCH
    Matrix cluster_rows;
    if (config.method == ExperimentConfig::Method::pic) {
        const TransitionMatrix p = natural_transition(g, Direction::out,
                                                      ZeroDegreePolicy::self_loop);
        stochastic_rows = transition_power_dense(p, cell.t_d);
        cluster_rows = stochastic_rows;
    } else {
        const MeasureParams params{cell.t, cell.gamma, cell.alpha};
        const VertexMeasure nu = config.measure == ExperimentConfig::MeasureVariant::power
                                     ? power_vertex_measure(g, params)
                                     : alt_power_vertex_measure(g, params);
        auto [p_nu, mu] = build_walk(g, nu, config.walk, ZeroDegreePolicy::self_loop);
        stochastic_rows = transition_power_dense(p_nu, cell.t_d);
        const DiffusionKernel kernel = p_rwdk_from_power(stochastic_rows, mu, cell.t_d);
        cluster_rows = config.normalize_rows ? l2_normalize_rows(kernel.matrix) : kernel.matrix;
    }

    CellOutcome outcome;
    if (config.policy == ExperimentConfig::RestartPolicy::best_nmi) {
        require(data.labels.has_value(), "best-nmi restart policy needs ground-truth labels");
        auto restarts = kmeans_all_restarts(cluster_rows, km, 1);
        std::size_t best = 0;
        Real best_nmi = -1.0;
        for (std::size_t r = 0; r < restarts.size(); ++r) {
            const Real score = nmi(restarts[r].partition.assignment, *data.labels);
            if (score > best_nmi) {
                best_nmi = score;
                best = r;
            }
        }
        outcome.partition = std::move(restarts[best].partition);
        outcome.inertia = restarts[best].inertia;
        outcome.nmi_score = best_nmi;
    } else {
        ClusteringResult result = kmeans(cluster_rows, km, 1);
        outcome.partition = std::move(result.partition);
        outcome.inertia = result.inertia;
        if (data.labels) outcome.nmi_score = nmi(outcome.partition.assignment, *data.labels);
    }

    if (data.features) {
        const ValidityScore ch = ch_criterion(*data.features, outcome.partition);
        if (!ch.degenerate) outcome.ch_score = ch.value;
    }
    const ValidityScore dch = dch_criterion(stochastic_rows, outcome.partition);
    if (!dch.degenerate) outcome.dch_score = dch.value;
    return outcome;
}

}  // namespace detail

/// Exhaustive deterministic sweep over the configured parameter grid; one
/// record per grid point, plus the argmax-NMI headline. "Cross-validation" in
/// the reported tables means exactly this grid argmax against the ground
/// truth; there are no folds.
inline GridSearchOutput grid_search(const ExperimentConfig& config) {
    config.validate();
    if (config.policy == ExperimentConfig::RestartPolicy::best_nmi)
        require(config.source != ExperimentConfig::Source::edges || !config.labels_path.empty(),
                "best-nmi restart policy needs ground-truth labels");

    const ExperimentData data = load_experiment_data(config);

    GridSearchOutput output;
    std::vector<long> td_values = config.td_grid;
    if (config.estimate_td) {
        TdOptions td_options;
        td_options.max_exponent = config.td_max_exponent;
        td_options.walk = config.walk;
        td_options.threads = config.threads;
        if (data.features) {
            td_options.mode = TdScoreMode::ch_on_features;
            td_options.features = &*data.features;
        } else {
            td_options.mode = TdScoreMode::dch_on_walk;
        }
        KMeansConfig td_km = config.kmeans;
        td_km.seed = derive_seed(config.seed, 0x7d0);
        output.td_estimate = estimate_diffusion_time(data.graph, config.k, td_options, td_km);
        td_values = {output.td_estimate->t_star};
    }

    std::vector<detail::GridCell> cells;
    if (config.method == ExperimentConfig::Method::pic) {
        for (long td : td_values) cells.push_back({1.0, 0.5, 1, td});
    } else {
        for (Real alpha : config.alpha_grid)
            for (Real gamma : config.gamma_grid)
                for (long t : config.t_grid)
                    for (long td : td_values) cells.push_back({alpha, gamma, t, td});
    }

    output.records.resize(cells.size());
    std::vector<Partition> partitions(cells.size());
    parallel_for(cells.size(), config.threads, [&](std::size_t c) {
        const auto start = std::chrono::steady_clock::now();
        detail::CellOutcome outcome =
            detail::evaluate_cell(config, data, cells[c], derive_seed(config.seed, c));

        ResultRecord& rec = output.records[c];
        rec.dataset = data.name;
        rec.n = data.graph.size();
        rec.d = data.feature_dim;
        rec.k = config.k;
        rec.method = config.method == ExperimentConfig::Method::pic ? "pic" : "p-rwdkc";
        if (config.method == ExperimentConfig::Method::p_rwdkc) {
            rec.alpha = cells[c].alpha;
            rec.gamma = cells[c].gamma;
            rec.t = cells[c].t;
        }
        rec.t_d = cells[c].t_d;
        rec.nmi_score = outcome.nmi_score;
        rec.ch_score = outcome.ch_score;
        rec.dch_score = outcome.dch_score;
        rec.inertia = outcome.inertia;
        rec.seed = derive_seed(config.seed, c);
        rec.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        partitions[c] = std::move(outcome.partition);
    });

    // headline: argmax NMI, falling back to the validity score without labels
    std::size_t best = 0;
    Real best_score = -std::numeric_limits<Real>::infinity();
    for (std::size_t c = 0; c < output.records.size(); ++c) {
        const ResultRecord& rec = output.records[c];
        Real score = -std::numeric_limits<Real>::infinity();
        if (rec.nmi_score)
            score = *rec.nmi_score;
        else if (rec.ch_score)
            score = *rec.ch_score;
        else if (rec.dch_score)
            score = *rec.dch_score;
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    output.headline = best;
    output.headline_partition = std::move(partitions[best]);
    return output;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json record_to_json(const ResultRecord& rec) {
    nlohmann::ordered_json j;
    j["dataset"] = rec.dataset;
    j["n"] = rec.n;
    j["d"] = rec.d;
    j["k"] = rec.k;
    j["method"] = rec.method;
    if (std::isfinite(rec.alpha)) j["alpha"] = rec.alpha;
    if (std::isfinite(rec.gamma)) j["gamma"] = rec.gamma;
    if (rec.t >= 0) j["t"] = rec.t;
    j["t_d"] = rec.t_d;
    if (rec.nmi_score) j["nmi"] = *rec.nmi_score;
    if (rec.ch_score) j["ch"] = *rec.ch_score;
    if (rec.dch_score) j["dch"] = *rec.dch_score;
    j["inertia"] = rec.inertia;
    j["seed"] = rec.seed;
    return j;
}

}  // namespace detail

/// report.json: stable field order, no timestamps, byte-identical across
/// reruns of the same config + seed.
inline void write_report_json(const std::string& path, const ExperimentConfig& config,
                              const GridSearchOutput& output) {
    nlohmann::ordered_json j;
    j["k"] = config.k;
    j["method"] = config.method == ExperimentConfig::Method::pic ? "pic" : "p-rwdkc";
    j["measure"] =
        config.measure == ExperimentConfig::MeasureVariant::power ? "power" : "alt-power";
    j["operator"] = config.walk == WalkVariant::standard ? "standard" : "modified";
    j["normalize_rows"] = config.normalize_rows;
    j["policy"] = config.policy == ExperimentConfig::RestartPolicy::best_nmi ? "best-nmi"
                                                                             : "best-inertia";
    j["restarts"] = config.kmeans.restarts;
    j["seed"] = config.seed;
    if (output.td_estimate) {
        j["estimated_td"] = output.td_estimate->t_star;
        j["estimated_j"] = output.td_estimate->j_star;
    }
    j["headline"] = detail::record_to_json(output.records[output.headline]);
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& rec : output.records) records.push_back(detail::record_to_json(rec));
    j["records"] = std::move(records);

    std::ofstream out(path);
    require(out.good(), "cannot write report: " + path);
    out << j.dump(2) << "\n";
}

/// results.csv: flat mirror of the records, diffable in CI.
inline void write_results_csv(const std::string& path, const GridSearchOutput& output) {
    std::ofstream out(path);
    require(out.good(), "cannot write results: " + path);
    out.precision(17);
    out << "dataset,n,d,k,method,alpha,gamma,t,t_d,nmi,ch,dch,inertia,seed\n";
    for (const auto& rec : output.records) {
        out << rec.dataset << "," << rec.n << "," << rec.d << "," << rec.k << "," << rec.method
            << ",";
        if (std::isfinite(rec.alpha)) out << rec.alpha;
        out << ",";
        if (std::isfinite(rec.gamma)) out << rec.gamma;
        out << ",";
        if (rec.t >= 0) out << rec.t;
        out << "," << rec.t_d << ",";
        if (rec.nmi_score) out << *rec.nmi_score;
        out << ",";
        if (rec.ch_score) out << *rec.ch_score;
        out << ",";
        if (rec.dch_score) out << *rec.dch_score;
        out << "," << rec.inertia << "," << rec.seed << "\n";
    }
}

// ---------------------------------------------------------------------------
// Config files (INI-style: [section] + key = value, '#' comments)
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace detail

/// Key-value view of a config file: keys are "section.key".
inline std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file: " + path);
    std::map<std::string, std::string> values;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "malformed section at " + path + ":" +
                                            std::to_string(line_no));
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos,
                "expected key = value at " + path + ":" + std::to_string(line_no));
        const std::string key = detail::trim(line.substr(0, eq));
        values[section.empty() ? key : section + "." + key] = detail::trim(line.substr(eq + 1));
    }
    return values;
}

/// Applies config-file values onto an ExperimentConfig. CLI flags are applied
/// afterwards by the caller, so they override file values.
inline void apply_config_file(ExperimentConfig& config,
                              const std::map<std::string, std::string>& values) {
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = values.find(key);
        return it == values.end() ? nullptr : &it->second;
    };
    auto parse_bool = [](const std::string& s) {
        const std::string v = detail::lowercase(s);
        require(v == "true" || v == "false" || v == "0" || v == "1",
                "expected boolean, got '" + s + "'");
        return v == "true" || v == "1";
    };

    if (auto* v = get("dataset.source")) {
        if (*v == "csv") config.source = ExperimentConfig::Source::csv;
        else if (*v == "edges") config.source = ExperimentConfig::Source::edges;
        else if (*v == "synthetic") config.source = ExperimentConfig::Source::synthetic;
        else throw Error("unknown dataset.source '" + *v + "'");
    }
    if (auto* v = get("dataset.path")) config.data_path = *v;
    if (auto* v = get("dataset.labels")) config.labels_path = *v;
    if (auto* v = get("dataset.name")) config.dataset_name = *v;
    if (auto* v = get("dataset.synth_seed")) config.synth_seed = std::stoull(*v);
    if (auto* v = get("dataset.knn")) config.knn = std::stoi(*v);
    if (auto* v = get("dataset.zscore")) config.zscore = parse_bool(*v);
    if (auto* v = get("dataset.largest_component")) config.largest_component = parse_bool(*v);

    if (auto* v = get("method.name")) {
        if (*v == "p-rwdkc") config.method = ExperimentConfig::Method::p_rwdkc;
        else if (*v == "pic") config.method = ExperimentConfig::Method::pic;
        else throw Error("unknown method.name '" + *v + "'");
    }
    if (auto* v = get("method.operator")) {
        if (*v == "standard") config.walk = WalkVariant::standard;
        else if (*v == "modified") config.walk = WalkVariant::modified;
        else throw Error("unknown method.operator '" + *v + "'");
    }
    if (auto* v = get("method.measure")) {
        if (*v == "power") config.measure = ExperimentConfig::MeasureVariant::power;
        else if (*v == "alt-power") config.measure = ExperimentConfig::MeasureVariant::alt_power;
        else throw Error("unknown method.measure '" + *v + "'");
    }
    if (auto* v = get("method.normalize_rows")) config.normalize_rows = parse_bool(*v);
    if (auto* v = get("method.k")) config.k = std::stoi(*v);

    if (auto* v = get("grid.alpha")) {
        config.alpha_grid.clear();
        for (const auto& item : detail::split_list(*v)) config.alpha_grid.push_back(std::stod(item));
    }
    if (auto* v = get("grid.gamma")) {
        config.gamma_grid.clear();
        for (const auto& item : detail::split_list(*v)) config.gamma_grid.push_back(std::stod(item));
    }
    if (auto* v = get("grid.t")) {
        config.t_grid.clear();
        for (const auto& item : detail::split_list(*v)) config.t_grid.push_back(std::stol(item));
    }
    if (auto* v = get("grid.td")) {
        if (*v == "estimate") {
            config.estimate_td = true;
        } else {
            config.estimate_td = false;
            config.td_grid.clear();
            for (const auto& item : detail::split_list(*v)) config.td_grid.push_back(std::stol(item));
        }
    }
    if (auto* v = get("grid.td_max_exponent")) config.td_max_exponent = std::stoi(*v);

    if (auto* v = get("kmeans.restarts")) config.kmeans.restarts = std::stoi(*v);
    if (auto* v = get("kmeans.max_iters")) config.kmeans.max_iters = std::stoi(*v);
    if (auto* v = get("kmeans.tol")) config.kmeans.tol = std::stod(*v);
    if (auto* v = get("kmeans.init")) {
        if (*v == "plus-plus") config.kmeans.init = KMeansConfig::Init::plus_plus;
        else if (*v == "uniform-random") config.kmeans.init = KMeansConfig::Init::uniform_random;
        else throw Error("unknown kmeans.init '" + *v + "'");
    }

    if (auto* v = get("run.policy")) {
        if (*v == "best-inertia") config.policy = ExperimentConfig::RestartPolicy::best_inertia;
        else if (*v == "best-nmi") config.policy = ExperimentConfig::RestartPolicy::best_nmi;
        else throw Error("unknown run.policy '" + *v + "'");
    }
    if (auto* v = get("run.seed")) config.seed = std::stoull(*v);
    if (auto* v = get("run.threads")) config.threads = std::stoi(*v);
    if (auto* v = get("run.out")) config.out_dir = *v;
}

}  // namespace prwdkc
