#include "pointmatch/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pointmatch/rng.hpp"

namespace pointmatch {

namespace {

// Fixed palette: base rgb per class, spread over color space so classes are
// separable in principle but overlap once instance shifts and noise pile on.
std::array<double, 3> class_base_color(int cls) {
    static const std::array<std::array<double, 3>, 10> palette = {{
        {0.85, 0.25, 0.25},
        {0.25, 0.75, 0.30},
        {0.25, 0.35, 0.85},
        {0.85, 0.75, 0.25},
        {0.70, 0.30, 0.80},
        {0.30, 0.75, 0.75},
        {0.80, 0.50, 0.25},
        {0.55, 0.55, 0.55},
        {0.90, 0.40, 0.60},
        {0.40, 0.60, 0.30},
    }};
    if (cls < static_cast<int>(palette.size())) return palette[static_cast<std::size_t>(cls)];
    // beyond the palette, hash the class id into a color
    const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(cls) + 17);
    auto channel = [&](int shift) {
        return 0.15 + 0.7 * static_cast<double>((h >> shift) & 0xffff) / 65535.0;
    };
    return {channel(0), channel(16), channel(32)};
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

void SceneSpec::validate() const {
    if (num_instances < 1) throw std::invalid_argument("SceneSpec: num_instances must be >= 1");
    if (num_classes < 1) throw std::invalid_argument("SceneSpec: num_classes must be >= 1");
    if (points_min < 1 || points_min > points_max)
        throw std::invalid_argument("SceneSpec: empty points_per_instance range");
    if (!(extent_min > 0.0) || extent_min > extent_max)
        throw std::invalid_argument("SceneSpec: degenerate instance extent range");
    if (noise_sigma < 0.0 || color_noise_sigma < 0.0)
        throw std::invalid_argument("SceneSpec: negative noise sigma");
    for (int cls : classes_present) {
        if (cls < 0 || cls >= num_classes)
            throw std::invalid_argument("SceneSpec: classes_present entry out of range");
    }
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    Rng rng = stream_rng(spec.seed, Stream::SceneGen);

    std::vector<int> classes = spec.classes_present;
    if (classes.empty()) {
        classes.resize(static_cast<std::size_t>(spec.num_classes));
        for (int c = 0; c < spec.num_classes; ++c) classes[static_cast<std::size_t>(c)] = c;
    }

    // Tight room so neighboring instances regularly come into contact.
    const double room_xy = 1.6 + 1.1 * static_cast<double>(spec.num_instances);
    const double room_z = 2.5;

    struct Inst {
        std::array<double, 3> center;
        std::array<double, 3> half_extent;
        std::array<double, 3> color;
        int cls = 0;
        bool ellipsoid = false;
        std::size_t points = 0;
    };
    std::vector<Inst> instances(spec.num_instances);

    for (std::size_t k = 0; k < spec.num_instances; ++k) {
        Inst& inst = instances[k];
        inst.cls = classes[rng.below(classes.size())];
        inst.ellipsoid = (inst.cls % 2 == 1);
        for (int a = 0; a < 3; ++a)
            inst.half_extent[static_cast<std::size_t>(a)] =
                rng.uniform(spec.extent_min, spec.extent_max);
        // instances may touch (contact regions give super-points real
        // impurity) but should not sit inside each other
        double max_half = 0.0;
        for (double h : inst.half_extent) max_half = std::max(max_half, h);
        for (int attempt = 0; attempt < 64; ++attempt) {
            inst.center = {rng.uniform(spec.extent_max, room_xy - spec.extent_max),
                           rng.uniform(spec.extent_max, room_xy - spec.extent_max),
                           rng.uniform(spec.extent_max, room_z - spec.extent_max)};
            bool ok = true;
            for (std::size_t j = 0; j < k; ++j) {
                double other_half = 0.0;
                for (double h : instances[j].half_extent) other_half = std::max(other_half, h);
                const double min_gap = 0.75 * (max_half + other_half);
                double d2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const double diff = inst.center[static_cast<std::size_t>(a)] -
                                        instances[j].center[static_cast<std::size_t>(a)];
                    d2 += diff * diff;
                }
                if (d2 < min_gap * min_gap) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
        }
        // instance-level shift at half the per-point sigma: instances stay
        // resolvable through neighborhood averaging while single points don't
        const auto base = class_base_color(inst.cls);
        for (int a = 0; a < 3; ++a)
            inst.color[static_cast<std::size_t>(a)] =
                base[static_cast<std::size_t>(a)] + rng.normal(0.0, 0.5 * spec.color_noise_sigma);
        inst.points = spec.points_min + rng.below(spec.points_max - spec.points_min + 1);
    }

    std::size_t total = 0;
    for (const Inst& inst : instances) total += inst.points;

    Scene scene;
    scene.num_instances = spec.num_instances;
    scene.cloud.num_classes = spec.num_classes;
    scene.cloud.positions = Matrix(total, 3);
    scene.cloud.colors = Matrix(total, 3);
    scene.cloud.gt_labels.resize(total);
    scene.instance_ids.resize(total);

    std::size_t row = 0;
    for (std::size_t k = 0; k < spec.num_instances; ++k) {
        const Inst& inst = instances[k];
        for (std::size_t p = 0; p < inst.points; ++p, ++row) {
            std::array<double, 3> offset{};
            if (inst.ellipsoid) {
                // uniform in the unit ball, then scaled per axis
                double u[3];
                double norm2 = 0.0;
                do {
                    norm2 = 0.0;
                    for (double& ui : u) {
                        ui = rng.uniform(-1.0, 1.0);
                        norm2 += ui * ui;
                    }
                } while (norm2 > 1.0);
                for (int a = 0; a < 3; ++a)
                    offset[static_cast<std::size_t>(a)] =
                        u[a] * inst.half_extent[static_cast<std::size_t>(a)];
            } else {
                for (int a = 0; a < 3; ++a)
                    offset[static_cast<std::size_t>(a)] =
                        rng.uniform(-inst.half_extent[static_cast<std::size_t>(a)],
                                    inst.half_extent[static_cast<std::size_t>(a)]);
            }
            for (int a = 0; a < 3; ++a) {
                scene.cloud.positions(row, static_cast<std::size_t>(a)) =
                    inst.center[static_cast<std::size_t>(a)] +
                    offset[static_cast<std::size_t>(a)] + rng.normal(0.0, spec.noise_sigma);
                scene.cloud.colors(row, static_cast<std::size_t>(a)) =
                    clamp01(inst.color[static_cast<std::size_t>(a)] +
                            rng.normal(0.0, spec.color_noise_sigma));
            }
            scene.cloud.gt_labels[row] = inst.cls;
            scene.instance_ids[row] = static_cast<int>(k);
        }
    }
    scene.cloud.validate();
    return scene;
}

WeakScheme WeakScheme::ratio(double fraction, std::uint64_t seed) {
    WeakScheme s;
    s.kind = Kind::Ratio;
    s.fraction = fraction;
    s.seed = seed;
    s.validate();
    return s;
}

WeakScheme WeakScheme::points_per_scene(std::size_t k, std::uint64_t seed) {
    WeakScheme s;
    s.kind = Kind::PointsPerScene;
    s.points = k;
    s.seed = seed;
    s.validate();
    return s;
}

WeakScheme WeakScheme::one_click(std::uint64_t seed) {
    WeakScheme s;
    s.kind = Kind::OneClickPerInstance;
    s.seed = seed;
    return s;
}

WeakScheme WeakScheme::parse(const std::string& text) {
    if (text == "oneclick") return one_click();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string head = text.substr(0, colon);
        const std::string arg = text.substr(colon + 1);
        try {
            if (head == "ratio") return ratio(std::stod(arg));
            if (head == "points") return points_per_scene(std::stoul(arg));
        } catch (const std::invalid_argument&) {
            // falls through to the rejection below
        }
    }
    throw std::invalid_argument("WeakScheme: cannot parse '" + text +
                                "' (expected ratio:F | points:K | oneclick)");
}

std::string WeakScheme::tag() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Ratio:
            os << "ratio_" << fraction;
            break;
        case Kind::PointsPerScene:
            os << "points_" << points;
            break;
        case Kind::OneClickPerInstance:
            os << "oneclick";
            break;
    }
    return os.str();
}

void WeakScheme::validate() const {
    if (kind == Kind::Ratio && !(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("WeakScheme: fraction must be in (0,1]");
    if (kind == Kind::PointsPerScene && points < 1)
        throw std::invalid_argument("WeakScheme: points must be >= 1");
}

WeakLabels sample_weak_labels(const PointCloud& cloud, const std::vector<int>& instance_ids,
                              const WeakScheme& scheme) {
    scheme.validate();
    if (!cloud.has_gt())
        throw std::invalid_argument("sample_weak_labels: cloud has no ground-truth labels");
    const std::size_t n = cloud.size();
    Rng rng = stream_rng(scheme.seed, Stream::WeakLabels);

    std::vector<std::size_t> chosen;
    switch (scheme.kind) {
        case WeakScheme::Kind::Ratio: {
            // floor at one label: an empty set would make the supervised loss undefined
            const std::size_t count = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(scheme.fraction * static_cast<double>(n))));
            chosen = rng.sample_without_replacement(n, count);
            break;
        }
        case WeakScheme::Kind::PointsPerScene: {
            chosen = rng.sample_without_replacement(n, std::min(scheme.points, n));
            break;
        }
        case WeakScheme::Kind::OneClickPerInstance: {
            if (instance_ids.size() != n)
                throw std::invalid_argument(
                    "sample_weak_labels: one-click scheme requires instance ids");
            int max_id = -1;
            for (int id : instance_ids) max_id = std::max(max_id, id);
            std::vector<std::vector<std::size_t>> per_instance(
                static_cast<std::size_t>(max_id + 1));
            for (std::size_t i = 0; i < n; ++i) {
                if (instance_ids[i] < 0)
                    throw std::invalid_argument("sample_weak_labels: negative instance id");
                per_instance[static_cast<std::size_t>(instance_ids[i])].push_back(i);
            }
            for (const auto& members : per_instance) {
                if (members.empty()) continue;
                chosen.push_back(members[rng.below(members.size())]);
            }
            std::sort(chosen.begin(), chosen.end());
            break;
        }
    }

    WeakLabels weak;
    weak.indices = std::move(chosen);
    weak.classes.reserve(weak.indices.size());
    for (std::size_t idx : weak.indices) weak.classes.push_back(cloud.gt_labels[idx]);
    weak.validate(n, cloud.num_classes);
    return weak;
}

}  // namespace pointmatch
