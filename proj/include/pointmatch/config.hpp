#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pointmatch/superpoint.hpp"
#include "pointmatch/synth.hpp"
#include "pointmatch/trainer.hpp"

namespace pointmatch {

// Everything a run needs, in one flat key-value config. CLI flags override
// file values; unknown keys are hard errors so hyper-parameter typos cannot
// pass silently.
struct RunConfig {
    std::uint64_t seed = 1;

    // dataset
    std::size_t train_scenes = 50;
    std::size_t val_scenes = 10;
    int num_classes = 8;
    std::size_t instances_min = 1;
    std::size_t instances_max = 2;
    std::size_t points_min = 180;
    std::size_t points_max = 320;
    double extent_min = 0.25;
    double extent_max = 0.85;
    double noise_sigma = 0.01;
    double color_noise_sigma = 0.13;
    WeakScheme scheme = WeakScheme::one_click();

    // super-points
    ClusterConfig cluster;

    // training (includes the augmentation policy)
    TrainConfig train;

    void validate() const;

    // Scene spec for one concrete scene of this run (seed derived per index).
    SceneSpec scene_spec(std::size_t scene_index) const;

    // Canonical serialized form; also what gets hashed into the run manifest.
    std::string serialize() const;
    std::uint64_t hash() const;

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_text(const std::string& text, const std::string& origin = "<config>");

    // Applies one "key value" override (same keys as the file format).
    void set(const std::string& key, const std::string& value);
};

}  // namespace pointmatch
