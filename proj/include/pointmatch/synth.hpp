#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointmatch/core.hpp"

namespace pointmatch {

// Recipe for one synthetic scene: a handful of box/ellipsoid instances with
// class-dependent base colors, instance-level color shifts, and per-point
// noise on both position and color.
struct SceneSpec {
    std::size_t num_instances = 4;
    int num_classes = 6;
    std::vector<int> classes_present;  // empty means all of [0, num_classes)
    std::size_t points_min = 80;
    std::size_t points_max = 140;
    double extent_min = 0.25;  // instance half-extent bounds, meters
    double extent_max = 0.85;
    double noise_sigma = 0.01;        // positional jitter std, meters
    double color_noise_sigma = 0.06;  // per-point color noise std
    std::uint64_t seed = 0;

    void validate() const;
};

struct Scene {
    PointCloud cloud;               // gt_labels always present
    std::vector<int> instance_ids;  // length N, instance index per point
    std::size_t num_instances = 0;
};

Scene generate_scene(const SceneSpec& spec);

// Weak supervision schemes of the evaluation protocol: a label ratio, a fixed
// per-scene budget, or one click per instance.
struct WeakScheme {
    enum class Kind { Ratio, PointsPerScene, OneClickPerInstance };

    Kind kind = Kind::OneClickPerInstance;
    double fraction = 0.001;   // Ratio
    std::size_t points = 20;   // PointsPerScene
    std::uint64_t seed = 0;

    static WeakScheme ratio(double fraction, std::uint64_t seed = 0);
    static WeakScheme points_per_scene(std::size_t k, std::uint64_t seed = 0);
    static WeakScheme one_click(std::uint64_t seed = 0);

    // "ratio:0.001" | "points:20" | "oneclick"
    static WeakScheme parse(const std::string& text);
    std::string tag() const;  // filesystem-safe name, e.g. "ratio_0.001"

    void validate() const;
};

// Draws the labeled index set for `scheme` and copies classes from gt.
// instance_ids may be empty unless the scheme is OneClickPerInstance.
WeakLabels sample_weak_labels(const PointCloud& cloud, const std::vector<int>& instance_ids,
                              const WeakScheme& scheme);

}  // namespace pointmatch
