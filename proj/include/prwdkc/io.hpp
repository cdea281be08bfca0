#pragma once

#include "prwdkc/common.hpp"
#include "prwdkc/criteria.hpp"
#include "prwdkc/graph.hpp"
#include "prwdkc/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace prwdkc {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline bool parse_real(const std::string& s, Real& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

inline std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace detail

/// Feature CSV: one row per point, numeric columns, optional header. A final
/// column named "label" (detected by header) carries class ids, string or
/// integer; it is never fed to the clustering path.
inline FeatureDataset read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open feature CSV: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    }
    require(!lines.empty(), "empty feature CSV: " + path);

    auto first = detail::split_csv_line(lines.front());
    bool has_header = false;
    for (const auto& f : first) {
        Real ignored;
        if (!detail::parse_real(f, ignored)) has_header = true;
    }
    const bool has_label = has_header && !first.empty() &&
                           detail::lowercase(first.back()) == "label";

    const std::size_t start = has_header ? 1 : 0;
    require(lines.size() > start, "feature CSV has no data rows: " + path);
    const std::size_t cols = detail::split_csv_line(lines[start]).size();
    require(cols >= (has_label ? 2u : 1u), "feature CSV needs at least one numeric column");
    const std::size_t dims = cols - (has_label ? 1 : 0);

    FeatureDataset data;
    data.points.resize(static_cast<Index>(lines.size() - start), static_cast<Index>(dims));
    std::vector<int> labels;
    std::map<std::string, int> label_ids;

    for (std::size_t r = start; r < lines.size(); ++r) {
        auto fields = detail::split_csv_line(lines[r]);
        require(fields.size() == cols, "ragged CSV row " + std::to_string(r + 1) + " in " + path);
        for (std::size_t c = 0; c < dims; ++c) {
            Real v;
            require(detail::parse_real(fields[c], v),
                    "non-numeric value '" + fields[c] + "' at row " + std::to_string(r + 1));
            data.points(static_cast<Index>(r - start), static_cast<Index>(c)) = v;
        }
        if (has_label) {
            auto [it, inserted] = label_ids.emplace(fields.back(),
                                                    static_cast<int>(label_ids.size()));
            labels.push_back(it->second);
        }
    }
    if (has_label) data.labels = std::move(labels);
    data.name = path;
    data.validate();
    return data;
}

inline void write_feature_csv(const std::string& path, const FeatureDataset& data) {
    std::ofstream out(path);
    require(out.good(), "cannot write feature CSV: " + path);
    out.precision(17);
    for (Index c = 0; c < data.dim(); ++c) out << "x" << c << ",";
    out << (data.labels ? "label\n" : "\n");
    for (Index i = 0; i < data.size(); ++i) {
        for (Index c = 0; c < data.dim(); ++c) out << data.points(i, c) << ",";
        if (data.labels)
            out << (*data.labels)[static_cast<std::size_t>(i)] << "\n";
        else
            out << "\n";
    }
}

/// Edge list: whitespace-separated "src dst [weight]", 0-based ids, '#'
/// comments. Vertex count is 1 + max id unless a larger count is forced.
inline Digraph read_edge_list(const std::string& path, Index n_vertices = -1) {
    std::ifstream in(path);
    require(in.good(), "cannot open edge list: " + path);

    std::vector<Eigen::Triplet<Real>> triplets;
    Index max_vertex = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        long src, dst;
        double weight = 1.0;
        require(static_cast<bool>(ss >> src >> dst),
                "malformed edge at " + path + ":" + std::to_string(line_no));
        ss >> weight;
        require(src >= 0 && dst >= 0,
                "negative vertex id at " + path + ":" + std::to_string(line_no));
        triplets.emplace_back(src, dst, weight);
        max_vertex = std::max<Index>(max_vertex, std::max<Index>(src, dst));
    }
    require(max_vertex >= 0, "edge list has no edges: " + path);
    const Index n = n_vertices > 0 ? n_vertices : max_vertex + 1;
    require(n > max_vertex, "vertex id exceeds forced vertex count");
    return Digraph::from_triplets(n, triplets);
}

inline void write_edge_list(const std::string& path, const Digraph& g) {
    std::ofstream out(path);
    require(out.good(), "cannot write edge list: " + path);
    out.precision(17);
    const SpMatrix& w = g.adjacency();
    for (Index i = 0; i < w.outerSize(); ++i)
        for (SpMatrix::InnerIterator it(w, i); it; ++it) {
            out << i << " " << it.col();
            if (it.value() != 1.0) out << " " << it.value();
            out << "\n";
        }
}

/// Companion label file: "vertex label" per line, '#' comments.
inline std::vector<int> read_vertex_labels(const std::string& path, Index n_vertices) {
    std::ifstream in(path);
    require(in.good(), "cannot open label file: " + path);
    std::vector<int> labels(static_cast<std::size_t>(n_vertices), -1);
    std::map<std::string, int> label_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::stringstream ss(line);
        long v;
        std::string label;
        require(static_cast<bool>(ss >> v >> label),
                "malformed label at " + path + ":" + std::to_string(line_no));
        require(v >= 0 && v < n_vertices,
                "vertex id out of range at " + path + ":" + std::to_string(line_no));
        auto [it, inserted] = label_ids.emplace(label, static_cast<int>(label_ids.size()));
        labels[static_cast<std::size_t>(v)] = it->second;
    }
    for (std::size_t v = 0; v < labels.size(); ++v)
        require(labels[v] >= 0, "vertex " + std::to_string(v) + " has no label in " + path);
    return labels;
}

/// Partition file: "vertex_id cluster_id" per line.
inline void write_partition(const std::string& path, const Partition& partition) {
    std::ofstream out(path);
    require(out.good(), "cannot write partition: " + path);
    for (Index i = 0; i < partition.size(); ++i)
        out << i << " " << partition.assignment[static_cast<std::size_t>(i)] << "\n";
}

inline Partition read_partition(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open partition: " + path);
    std::map<Index, int> by_vertex;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        long v, c;
        require(static_cast<bool>(ss >> v >> c), "malformed partition line: " + line);
        by_vertex[v] = static_cast<int>(c);
    }
    require(!by_vertex.empty(), "empty partition file: " + path);
    Partition partition;
    partition.assignment.resize(by_vertex.size());
    int max_cluster = 0;
    for (const auto& [v, c] : by_vertex) {
        require(v >= 0 && v < static_cast<Index>(by_vertex.size()),
                "partition vertex ids must be 0..N-1");
        partition.assignment[static_cast<std::size_t>(v)] = c;
        max_cluster = std::max(max_cluster, c);
    }
    partition.k = max_cluster + 1;
    return partition;
}

/// Text kernel dump: header "N t", then row-major entries, one row per line.
inline void write_kernel(const std::string& path, const DiffusionKernel& kernel) {
    std::ofstream out(path);
    require(out.good(), "cannot write kernel dump: " + path);
    out.precision(17);
    out << kernel.size() << " " << kernel.time << "\n";
    for (Index i = 0; i < kernel.size(); ++i) {
        for (Index j = 0; j < kernel.size(); ++j)
            out << kernel.matrix(i, j) << (j + 1 == kernel.size() ? "" : " ");
        out << "\n";
    }
}

/// Diffusion-time trace: "j,t,score,degenerate" rows, the plot data behind
/// the diffusion-time curves.
inline void write_td_trace(const std::string& path, const DiffusionTimeEstimate& estimate) {
    std::ofstream out(path);
    require(out.good(), "cannot write trace: " + path);
    out.precision(17);
    out << "j,t,score,degenerate\n";
    for (const auto& entry : estimate.trace)
        out << entry.j << "," << entry.t << "," << entry.score.value << ","
            << (entry.score.degenerate ? 1 : 0) << "\n";
}

}  // namespace prwdkc
