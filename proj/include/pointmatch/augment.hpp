#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "pointmatch/core.hpp"

namespace pointmatch {

// Scene-level augmentation policy. Each of the seven transform families
// (scale, flip, offset, rotation, shear, position jitter, color jitter) is
// enabled independently with probability 1/2 per draw; the geometric ones
// compose into a single affine map applied about the scene centroid.
struct AugmentPolicy {
    double scale_min = 0.8;
    double scale_max = 1.2;
    double rotation_min = -3.14159265358979323846;  // z-axis, radians
    double rotation_max = 3.14159265358979323846;
    double flip_prob_x = 0.5;  // flips are x/y only; scenes are gravity-aligned
    double flip_prob_y = 0.5;
    double offset_min = -0.5;
    double offset_max = 0.5;
    double shear_min = -0.1;
    double shear_max = 0.1;
    double pos_jitter_sigma = 0.01;   // meters; kept small to preserve local structure
    double color_jitter_sigma = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
    static AugmentPolicy identity();

    // Same policy with every magnitude scaled: scale bounds move away from 1,
    // rotation/offset/shear bounds and jitter sigmas multiply. Flip
    // probabilities are left alone.
    AugmentPolicy scaled(double strength) const;
};

struct AffineMap {
    std::array<std::array<double, 3>, 3> linear{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    std::array<double, 3> translation{0, 0, 0};

    std::array<double, 3> apply(const std::array<double, 3>& p) const;
    double determinant() const;
};

// Families in draw order; indexes `ViewSample::enabled`.
enum AugmentFamily : int {
    kScale = 0,
    kFlip = 1,
    kOffset = 2,
    kRotation = 3,
    kShear = 4,
    kPosJitter = 5,
    kColorJitter = 6,
    kNumFamilies = 7,
};

struct ViewSample {
    PointCloud view;
    AffineMap map;  // composed geometric transform (jitter excluded)
    std::array<bool, kNumFamilies> enabled{};
};

// Draws one augmented view. Point count, order, labels and class count are
// unchanged, so index i in the view corresponds to index i in the source.
PointCloud sample_view(const PointCloud& cloud, const AugmentPolicy& policy);
ViewSample sample_view_detailed(const PointCloud& cloud, const AugmentPolicy& policy);

// Two independent draws with distinct seeds; rejects seed_a == seed_b.
std::pair<PointCloud, PointCloud> make_view_pair(const PointCloud& cloud,
                                                 const AugmentPolicy& policy,
                                                 std::uint64_t seed_a, std::uint64_t seed_b);

}  // namespace pointmatch
