#include "pointmatch/superpoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "pointmatch/rng.hpp"

namespace pointmatch {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool merge(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);  // keep the lower index as root
        parent[b] = a;
        return true;
    }
};

struct Edge {
    double cost;
    std::size_t a, b;  // a < b

    bool operator<(const Edge& o) const {
        if (cost != o.cost) return cost < o.cost;
        if (a != o.a) return a < o.a;
        return b < o.b;
    }
};

double joint_distance(const PointCloud& cloud, std::size_t i, std::size_t j,
                      const ClusterConfig& cfg) {
    double dp = 0.0, dc = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
        const double pd = cloud.positions(i, a) - cloud.positions(j, a);
        const double cd = cloud.colors(i, a) - cloud.colors(j, a);
        dp += pd * pd;
        dc += cd * cd;
    }
    return cfg.dist_weight * std::sqrt(dp) + cfg.color_weight * std::sqrt(dc);
}

// Canonical relabeling: group ids in order of first appearance over points.
SuperPointPartition canonicalize(const std::vector<std::size_t>& raw_group) {
    SuperPointPartition part;
    part.group_of.resize(raw_group.size());
    std::map<std::size_t, int> relabel;
    for (std::size_t i = 0; i < raw_group.size(); ++i) {
        auto it = relabel.try_emplace(raw_group[i], static_cast<int>(relabel.size())).first;
        part.group_of[i] = it->second;
    }
    part.num_groups = static_cast<int>(relabel.size());
    return part;
}

}  // namespace

void ClusterConfig::validate() const {
    if (k_neighbors < 1) throw std::invalid_argument("ClusterConfig: k_neighbors must be >= 1");
    if (dist_weight < 0.0 || color_weight < 0.0)
        throw std::invalid_argument("ClusterConfig: negative weight");
    if (dist_weight == 0.0 && color_weight == 0.0)
        throw std::invalid_argument("ClusterConfig: both weights zero");
    if (!(merge_threshold > 0.0))
        throw std::invalid_argument("ClusterConfig: merge_threshold must be > 0");
}

std::uint64_t ClusterConfig::hash() const {
    auto mix_double = [](std::uint64_t h, double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        return splitmix64(h ^ bits);
    };
    std::uint64_t h = splitmix64(0x5b5ca11u ^ static_cast<std::uint64_t>(k_neighbors));
    h = mix_double(h, dist_weight);
    h = mix_double(h, color_weight);
    h = mix_double(h, merge_threshold);
    h = splitmix64(h ^ static_cast<std::uint64_t>(min_group_size));
    return h;
}

SuperPointPartition build_superpoints(const PointCloud& cloud, const ClusterConfig& cfg) {
    cfg.validate();
    cloud.validate();
    const std::size_t n = cloud.size();

    // k-NN edges on positions, deduplicated as undirected pairs
    const auto neighbors = knn_indices(cloud.positions, std::min(cfg.k_neighbors + 1, n));
    std::vector<Edge> edges;
    edges.reserve(n * cfg.k_neighbors);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : neighbors[i]) {
            if (j == i) continue;
            const std::size_t a = std::min(i, j);
            const std::size_t b = std::max(i, j);
            edges.push_back({joint_distance(cloud, a, b, cfg), a, b});
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) { return x.a == y.a && x.b == y.b; }),
                edges.end());

    UnionFind uf(n);
    for (const Edge& e : edges) {
        if (e.cost > cfg.merge_threshold) break;
        uf.merge(e.a, e.b);
    }

    std::vector<std::size_t> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = uf.find(i);
    SuperPointPartition part = canonicalize(raw);

    if (cfg.min_group_size <= 1) {
        part.validate();
        return part;
    }

    // Absorb undersized groups into the nearest group by joint centroid
    // distance. Smallest group first, ids break ties.
    while (part.num_groups > 1) {
        const auto groups = part.members();
        const std::size_t m = groups.size();
        std::vector<std::array<double, 6>> centroid(m, {0, 0, 0, 0, 0, 0});
        for (std::size_t g = 0; g < m; ++g) {
            for (std::size_t idx : groups[g]) {
                for (std::size_t a = 0; a < 3; ++a) {
                    centroid[g][a] += cloud.positions(idx, a);
                    centroid[g][a + 3] += cloud.colors(idx, a);
                }
            }
            for (double& v : centroid[g]) v /= static_cast<double>(groups[g].size());
        }

        std::size_t smallest = m;
        for (std::size_t g = 0; g < m; ++g) {
            if (groups[g].size() >= cfg.min_group_size) continue;
            if (smallest == m || groups[g].size() < groups[smallest].size()) smallest = g;
        }
        if (smallest == m) break;  // all groups large enough

        std::size_t target = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < m; ++g) {
            if (g == smallest) continue;
            double dp = 0.0, dc = 0.0;
            for (std::size_t a = 0; a < 3; ++a) {
                const double pd = centroid[smallest][a] - centroid[g][a];
                const double cd = centroid[smallest][a + 3] - centroid[g][a + 3];
                dp += pd * pd;
                dc += cd * cd;
            }
            const double cost = cfg.dist_weight * std::sqrt(dp) + cfg.color_weight * std::sqrt(dc);
            if (cost < best) {
                best = cost;
                target = g;
            }
        }

        std::vector<std::size_t> merged(part.group_of.begin(), part.group_of.end());
        for (std::size_t idx : groups[smallest]) merged[idx] = target;
        part = canonicalize(merged);
    }

    part.validate();
    return part;
}

double partition_purity(const SuperPointPartition& part, const std::vector<int>& labels) {
    part.validate();
    if (labels.size() != part.size())
        throw std::invalid_argument("partition_purity: label length mismatch");
    const auto groups = part.members();
    std::size_t majority_total = 0;
    for (const auto& members : groups) {
        std::map<int, std::size_t> counts;
        for (std::size_t idx : members) ++counts[labels[idx]];
        std::size_t best = 0;
        for (const auto& [cls, cnt] : counts) best = std::max(best, cnt);
        majority_total += best;
    }
    return static_cast<double>(majority_total) / static_cast<double>(part.size());
}

}  // namespace pointmatch
