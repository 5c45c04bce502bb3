#include "pointmatch/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pointmatch/rng.hpp"

namespace pointmatch {

namespace {

std::array<std::array<double, 3>, 3> matmul3(const std::array<std::array<double, 3>, 3>& a,
                                             const std::array<std::array<double, 3>, 3>& b) {
    std::array<std::array<double, 3>, 3> out{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) out[i][j] += a[i][k] * b[k][j];
    return out;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void AugmentPolicy::validate() const {
    if (!(scale_min > 0.0) || scale_min > scale_max)
        throw std::invalid_argument("AugmentPolicy: invalid scale range");
    if (rotation_min > rotation_max)
        throw std::invalid_argument("AugmentPolicy: invalid rotation range");
    if (offset_min > offset_max) throw std::invalid_argument("AugmentPolicy: invalid offset range");
    if (shear_min > shear_max) throw std::invalid_argument("AugmentPolicy: invalid shear range");
    if (flip_prob_x < 0.0 || flip_prob_x > 1.0 || flip_prob_y < 0.0 || flip_prob_y > 1.0)
        throw std::invalid_argument("AugmentPolicy: flip probabilities must be in [0,1]");
    if (pos_jitter_sigma < 0.0 || color_jitter_sigma < 0.0)
        throw std::invalid_argument("AugmentPolicy: negative jitter sigma");
}

AugmentPolicy AugmentPolicy::identity() {
    AugmentPolicy p;
    p.scale_min = p.scale_max = 1.0;
    p.rotation_min = p.rotation_max = 0.0;
    p.flip_prob_x = p.flip_prob_y = 0.0;
    p.offset_min = p.offset_max = 0.0;
    p.shear_min = p.shear_max = 0.0;
    p.pos_jitter_sigma = 0.0;
    p.color_jitter_sigma = 0.0;
    return p;
}

AugmentPolicy AugmentPolicy::scaled(double strength) const {
    if (!(strength > 0.0)) throw std::invalid_argument("AugmentPolicy: strength must be > 0");
    AugmentPolicy p = *this;
    p.scale_min = std::max(1e-6, 1.0 + (scale_min - 1.0) * strength);
    p.scale_max = 1.0 + (scale_max - 1.0) * strength;
    p.rotation_min = rotation_min * strength;
    p.rotation_max = rotation_max * strength;
    p.offset_min = offset_min * strength;
    p.offset_max = offset_max * strength;
    p.shear_min = shear_min * strength;
    p.shear_max = shear_max * strength;
    p.pos_jitter_sigma = pos_jitter_sigma * strength;
    p.color_jitter_sigma = color_jitter_sigma * strength;
    p.validate();
    return p;
}

std::array<double, 3> AffineMap::apply(const std::array<double, 3>& p) const {
    std::array<double, 3> out = translation;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i] += linear[i][j] * p[j];
    return out;
}

double AffineMap::determinant() const {
    const auto& m = linear;
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

ViewSample sample_view_detailed(const PointCloud& cloud, const AugmentPolicy& policy) {
    policy.validate();
    cloud.validate();
    Rng rng(policy.seed);
    const std::size_t n = cloud.size();

    ViewSample out;
    // which families participate this draw; redraw until at least one is on
    do {
        for (int f = 0; f < kNumFamilies; ++f) out.enabled[static_cast<std::size_t>(f)] = rng.bernoulli(0.5);
    } while (std::none_of(out.enabled.begin(), out.enabled.end(), [](bool b) { return b; }));

    // family parameters, drawn in fixed order
    double scale = 1.0;
    if (out.enabled[kScale]) scale = rng.uniform(policy.scale_min, policy.scale_max);
    bool flip_x = false, flip_y = false;
    if (out.enabled[kFlip]) {
        flip_x = rng.bernoulli(policy.flip_prob_x);
        flip_y = rng.bernoulli(policy.flip_prob_y);
    }
    std::array<double, 3> offset{0, 0, 0};
    if (out.enabled[kOffset]) {
        for (double& v : offset) v = rng.uniform(policy.offset_min, policy.offset_max);
    }
    double angle = 0.0;
    if (out.enabled[kRotation]) angle = rng.uniform(policy.rotation_min, policy.rotation_max);
    double shear_xy = 0.0, shear_yx = 0.0;
    if (out.enabled[kShear]) {
        shear_xy = rng.uniform(policy.shear_min, policy.shear_max);
        shear_yx = rng.uniform(policy.shear_min, policy.shear_max);
    }

    // linear part: rotation * shear * flip * scale, acting about the centroid
    const std::array<std::array<double, 3>, 3> scale_m{
        {{scale, 0, 0}, {0, scale, 0}, {0, 0, scale}}};
    const std::array<std::array<double, 3>, 3> flip_m{
        {{flip_x ? -1.0 : 1.0, 0, 0}, {0, flip_y ? -1.0 : 1.0, 0}, {0, 0, 1.0}}};
    const std::array<std::array<double, 3>, 3> shear_m{
        {{1.0, shear_xy, 0}, {shear_yx, 1.0, 0}, {0, 0, 1.0}}};
    const double ca = std::cos(angle), sa = std::sin(angle);
    const std::array<std::array<double, 3>, 3> rot_m{{{ca, -sa, 0}, {sa, ca, 0}, {0, 0, 1.0}}};
    out.map.linear = matmul3(rot_m, matmul3(shear_m, matmul3(flip_m, scale_m)));

    std::array<double, 3> centroid{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < 3; ++a) centroid[a] += cloud.positions(i, a);
    for (double& v : centroid) v /= static_cast<double>(n);

    // t = c - L*c + offset, so the map fixes the centroid before offsetting
    std::array<double, 3> lc{0, 0, 0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            lc[static_cast<std::size_t>(i)] +=
                out.map.linear[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                centroid[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < 3; ++a) out.map.translation[a] = centroid[a] - lc[a] + offset[a];

    out.view = cloud;
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, 3> p{cloud.positions(i, 0), cloud.positions(i, 1),
                                cloud.positions(i, 2)};
        p = out.map.apply(p);
        if (out.enabled[kPosJitter]) {
            for (double& v : p) v += rng.normal(0.0, policy.pos_jitter_sigma);
        }
        for (std::size_t a = 0; a < 3; ++a) out.view.positions(i, a) = p[a];
        if (out.enabled[kColorJitter]) {
            for (std::size_t a = 0; a < 3; ++a)
                out.view.colors(i, a) =
                    clamp01(cloud.colors(i, a) + rng.normal(0.0, policy.color_jitter_sigma));
        }
    }
    return out;
}

PointCloud sample_view(const PointCloud& cloud, const AugmentPolicy& policy) {
    return sample_view_detailed(cloud, policy).view;
}

std::pair<PointCloud, PointCloud> make_view_pair(const PointCloud& cloud,
                                                 const AugmentPolicy& policy,
                                                 std::uint64_t seed_a, std::uint64_t seed_b) {
    if (seed_a == seed_b)
        throw std::invalid_argument("make_view_pair: the two views need distinct seeds");
    AugmentPolicy pa = policy, pb = policy;
    pa.seed = seed_a;
    pb.seed = seed_b;
    return {sample_view(cloud, pa), sample_view(cloud, pb)};
}

}  // namespace pointmatch
