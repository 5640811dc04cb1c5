// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/geometry/adjacency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace eegpipe::geometry {

void AdjacencyMatrix::validate() const {
    if (weights.rows() != weights.cols())
        throw InvalidConfig("adjacency matrix must be square");
    if (weights.rows() != static_cast<long>(labels.size()))
        throw InvalidConfig("adjacency labels do not match matrix size");
    for (long i = 0; i < weights.rows(); ++i) {
        if (weights(i, i) != 0.0) throw InvalidConfig("adjacency diagonal must be zero");
        for (long j = 0; j < weights.cols(); ++j) {
            if (weights(i, j) < 0.0) throw InvalidConfig("adjacency entries must be non-negative");
            if (weights(i, j) != weights(j, i))
                throw InvalidConfig("adjacency matrix must be symmetric");
        }
    }
}

int default_k(int n) {
    if (n < 2) throw InvalidConfig("need at least 2 channels");
    const double x = 0.2 * n;
    // round half to even
    const double floor_x = std::floor(x);
    const double frac = x - floor_x;
    long k;
    if (frac > 0.5) {
        k = static_cast<long>(floor_x) + 1;
    } else if (frac < 0.5) {
        k = static_cast<long>(floor_x);
    } else {
        k = static_cast<long>(floor_x);
        if (k % 2 != 0) ++k;
    }
    return static_cast<int>(std::max<long>(1, k));
}

AdjacencyMatrix knn_adjacency(const MontageLayout& layout, int k) {
    layout.validate();
    const long n = layout.size();
    if (k < 1) throw InvalidConfig("K must be >= 1");
    if (k >= n) throw KTooLarge("K = " + std::to_string(k) + " with only " + std::to_string(n) +
                                " channels");

    AdjacencyMatrix adj;
    adj.weights = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : layout.positions) adj.labels.push_back(p.label);

    for (long i = 0; i < n; ++i) {
        // quantized distance key, then index: deterministic under rotation
        std::vector<std::pair<long long, long>> order;
        order.reserve(n - 1);
        for (long j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = spherical_distance(layout.positions[i], layout.positions[j],
                                                layout.r);
            order.emplace_back(std::llround(d * 1e9), j);
        }
        std::sort(order.begin(), order.end());
        for (int m = 0; m < k; ++m) {
            const long j = order[static_cast<std::size_t>(m)].second;
            adj.weights(i, j) = 1.0;
            adj.weights(j, i) = 1.0;
        }
    }
    return adj;
}

AdjacencyMatrix apply_global_pairs(const AdjacencyMatrix& adj, const MontageLayout& layout,
                                   const std::vector<std::pair<std::string, std::string>>& pairs) {
    AdjacencyMatrix out = adj;
    for (const auto& [a, b] : pairs) {
        const long i = layout.find(a).label.index;
        const long j = layout.find(b).label.index;
        out.weights(i, j) += 1.0;
        out.weights(j, i) += 1.0;
    }
    return out;
}

const std::vector<std::pair<std::string, std::string>>& global_pairs() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"FP1", "FP2"}, {"AF3", "AF4"}, {"F5", "F6"},   {"FC5", "FC6"}, {"C5", "C6"},
        {"CP5", "CP6"}, {"P5", "P6"},   {"PO5", "PO6"}, {"O1", "O2"},
    };
    return pairs;
}

void write_adjacency_csv(const AdjacencyMatrix& adj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < adj.labels.size(); ++i)
        out << (i ? "," : "") << adj.labels[i].name;
    out << '\n';
    out.precision(17);
    for (long i = 0; i < adj.size(); ++i) {
        for (long j = 0; j < adj.size(); ++j) out << (j ? "," : "") << adj.weights(i, j);
        out << '\n';
    }
}

AdjacencyMatrix read_adjacency_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty adjacency file " + path.string());
    AdjacencyMatrix adj;
    {
        std::stringstream ss(line);
        std::string name;
        int idx = 0;
        while (std::getline(ss, name, ',')) adj.labels.push_back({name, idx++});
    }
    const long n = static_cast<long>(adj.labels.size());
    adj.weights.resize(n, n);
    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw ParseError("adjacency file " + path.string() + " truncated at row " +
                             std::to_string(i));
        std::stringstream ss(line);
        std::string field;
        for (long j = 0; j < n; ++j) {
            if (!std::getline(ss, field, ','))
                throw ParseError("short adjacency row " + std::to_string(i));
            adj.weights(i, j) = std::stod(field);
        }
    }
    adj.validate();
    return adj;
}

}  // namespace eegpipe::geometry
