#pragma once

#include <cstdint>
#include <vector>

#include "pointmatch/core.hpp"

namespace pointmatch {

// Low-level position+color clustering that stands in for external super-point
// partitioners. Greedy union-find over ascending k-NN edge costs, then small
// groups are absorbed into their nearest-centroid neighbor.
struct ClusterConfig {
    std::size_t k_neighbors = 6;
    double dist_weight = 1.0;
    double color_weight = 0.25;
    double merge_threshold = 0.25;
    std::size_t min_group_size = 5;

    void validate() const;
    std::uint64_t hash() const;  // cache key for partition files
};

SuperPointPartition build_superpoints(const PointCloud& cloud, const ClusterConfig& cfg);

// Fraction of points whose label matches their group's majority label.
double partition_purity(const SuperPointPartition& part, const std::vector<int>& labels);

}  // namespace pointmatch
