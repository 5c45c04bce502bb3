#include "pointmatch/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pointmatch/io.hpp"
#include "pointmatch/rng.hpp"

namespace pointmatch {

namespace {

std::uint64_t parse_u64(const std::string& v) { return std::stoull(v); }
long parse_long(const std::string& v) { return std::stol(v); }
std::size_t parse_size(const std::string& v) { return std::stoul(v); }
double parse_double(const std::string& v) { return std::stod(v); }

}  // namespace

void RunConfig::validate() const {
    if (train_scenes < 1) throw std::invalid_argument("config: train_scenes must be >= 1");
    if (num_classes < 2) throw std::invalid_argument("config: num_classes must be >= 2");
    if (instances_min < 1 || instances_min > instances_max)
        throw std::invalid_argument("config: empty instances range");
    scheme.validate();
    cluster.validate();
    train.validate();
    SceneSpec probe = scene_spec(0);
    probe.validate();
}

SceneSpec RunConfig::scene_spec(std::size_t scene_index) const {
    SceneSpec spec;
    spec.num_classes = num_classes;
    spec.points_min = points_min;
    spec.points_max = points_max;
    spec.extent_min = extent_min;
    spec.extent_max = extent_max;
    spec.noise_sigma = noise_sigma;
    spec.color_noise_sigma = color_noise_sigma;
    spec.seed = derive_seed(seed, Stream::SceneGen, scene_index);
    Rng rng(derive_seed(seed, Stream::SceneGen, scene_index, 0x1c0u));
    spec.num_instances = instances_min + rng.below(instances_max - instances_min + 1);
    return spec;
}

// The single source of truth for config keys: each entry knows how to apply a
// value and how to print the current one.
namespace {

struct KeyHandler {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, KeyHandler>& key_table() {
    static const std::map<std::string, KeyHandler> table = [] {
        std::map<std::string, KeyHandler> t;
        auto add = [&](const std::string& key, auto setter, auto getter) {
            t[key] = KeyHandler{setter, getter};
        };
        auto real = [](double v) { return format_real(v, 17); };

        add("seed", [](RunConfig& c, const std::string& v) { c.seed = parse_u64(v); },
            [](const RunConfig& c) { return std::to_string(c.seed); });
        add("train_scenes",
            [](RunConfig& c, const std::string& v) { c.train_scenes = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.train_scenes); });
        add("val_scenes", [](RunConfig& c, const std::string& v) { c.val_scenes = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.val_scenes); });
        add("num_classes",
            [](RunConfig& c, const std::string& v) { c.num_classes = static_cast<int>(parse_long(v)); },
            [](const RunConfig& c) { return std::to_string(c.num_classes); });
        add("instances_min",
            [](RunConfig& c, const std::string& v) { c.instances_min = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.instances_min); });
        add("instances_max",
            [](RunConfig& c, const std::string& v) { c.instances_max = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.instances_max); });
        add("points_min", [](RunConfig& c, const std::string& v) { c.points_min = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.points_min); });
        add("points_max", [](RunConfig& c, const std::string& v) { c.points_max = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.points_max); });
        add("extent_min", [real](RunConfig& c, const std::string& v) { c.extent_min = parse_double(v); },
            [real](const RunConfig& c) { return real(c.extent_min); });
        add("extent_max", [real](RunConfig& c, const std::string& v) { c.extent_max = parse_double(v); },
            [real](const RunConfig& c) { return real(c.extent_max); });
        add("noise_sigma",
            [real](RunConfig& c, const std::string& v) { c.noise_sigma = parse_double(v); },
            [real](const RunConfig& c) { return real(c.noise_sigma); });
        add("color_noise_sigma",
            [real](RunConfig& c, const std::string& v) { c.color_noise_sigma = parse_double(v); },
            [real](const RunConfig& c) { return real(c.color_noise_sigma); });
        add("scheme", [](RunConfig& c, const std::string& v) { c.scheme = WeakScheme::parse(v); },
            [](const RunConfig& c) {
                switch (c.scheme.kind) {
                    case WeakScheme::Kind::Ratio:
                        return "ratio:" + format_real(c.scheme.fraction, 17);
                    case WeakScheme::Kind::PointsPerScene:
                        return "points:" + std::to_string(c.scheme.points);
                    case WeakScheme::Kind::OneClickPerInstance:
                        return std::string("oneclick");
                }
                return std::string("oneclick");
            });

        add("sp_k_neighbors",
            [](RunConfig& c, const std::string& v) { c.cluster.k_neighbors = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.cluster.k_neighbors); });
        add("sp_dist_weight",
            [real](RunConfig& c, const std::string& v) { c.cluster.dist_weight = parse_double(v); },
            [real](const RunConfig& c) { return real(c.cluster.dist_weight); });
        add("sp_color_weight",
            [real](RunConfig& c, const std::string& v) { c.cluster.color_weight = parse_double(v); },
            [real](const RunConfig& c) { return real(c.cluster.color_weight); });
        add("sp_merge_threshold",
            [real](RunConfig& c, const std::string& v) { c.cluster.merge_threshold = parse_double(v); },
            [real](const RunConfig& c) { return real(c.cluster.merge_threshold); });
        add("sp_min_group_size",
            [](RunConfig& c, const std::string& v) { c.cluster.min_group_size = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.cluster.min_group_size); });

        add("tau", [real](RunConfig& c, const std::string& v) { c.train.tau = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.tau); });
        add("tau_sp", [real](RunConfig& c, const std::string& v) { c.train.tau_sp = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.tau_sp); });
        add("lambda", [real](RunConfig& c, const std::string& v) { c.train.lambda = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.lambda); });
        add("alpha", [real](RunConfig& c, const std::string& v) { c.train.alpha = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.alpha); });
        add("epoch_divisor",
            [](RunConfig& c, const std::string& v) { c.train.epoch_divisor = parse_long(v); },
            [](const RunConfig& c) { return std::to_string(c.train.epoch_divisor); });
        add("epochs", [](RunConfig& c, const std::string& v) { c.train.epochs = parse_long(v); },
            [](const RunConfig& c) { return std::to_string(c.train.epochs); });
        add("lr", [real](RunConfig& c, const std::string& v) { c.train.lr = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.lr); });
        add("batch_size",
            [](RunConfig& c, const std::string& v) { c.train.batch_size = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.train.batch_size); });
        add("ablation",
            [](RunConfig& c, const std::string& v) { c.train.ablation = Ablation::parse(v); },
            [](const RunConfig& c) {
                switch (c.train.ablation.kind) {
                    case Ablation::Kind::Full:
                        return std::string("full");
                    case Ablation::Kind::NoConsistency:
                        return std::string("no-consistency");
                    case Ablation::Kind::FixedW:
                        return "fixed-w:" + format_real(c.train.ablation.fixed_w, 17);
                    case Ablation::Kind::FastDecay:
                        return "fast-decay:" + std::to_string(c.train.ablation.fast_divisor);
                }
                return std::string("full");
            });
        add("hidden_dim",
            [](RunConfig& c, const std::string& v) { c.train.hidden_dim = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.train.hidden_dim); });
        add("k_feat", [](RunConfig& c, const std::string& v) { c.train.k_feat = parse_size(v); },
            [](const RunConfig& c) { return std::to_string(c.train.k_feat); });
        add("adam_beta1",
            [real](RunConfig& c, const std::string& v) { c.train.adam_beta1 = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.adam_beta1); });
        add("adam_beta2",
            [real](RunConfig& c, const std::string& v) { c.train.adam_beta2 = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.adam_beta2); });
        add("adam_eps",
            [real](RunConfig& c, const std::string& v) { c.train.adam_eps = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.adam_eps); });
        add("view_b_strength",
            [real](RunConfig& c, const std::string& v) { c.train.view_b_strength = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.view_b_strength); });
        add("val_every",
            [](RunConfig& c, const std::string& v) { c.train.val_every = parse_long(v); },
            [](const RunConfig& c) { return std::to_string(c.train.val_every); });

        add("aug_scale_min",
            [real](RunConfig& c, const std::string& v) { c.train.augment.scale_min = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.scale_min); });
        add("aug_scale_max",
            [real](RunConfig& c, const std::string& v) { c.train.augment.scale_max = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.scale_max); });
        add("aug_rotation_min",
            [real](RunConfig& c, const std::string& v) { c.train.augment.rotation_min = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.rotation_min); });
        add("aug_rotation_max",
            [real](RunConfig& c, const std::string& v) { c.train.augment.rotation_max = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.rotation_max); });
        add("aug_flip_prob_x",
            [real](RunConfig& c, const std::string& v) { c.train.augment.flip_prob_x = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.flip_prob_x); });
        add("aug_flip_prob_y",
            [real](RunConfig& c, const std::string& v) { c.train.augment.flip_prob_y = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.flip_prob_y); });
        add("aug_offset_min",
            [real](RunConfig& c, const std::string& v) { c.train.augment.offset_min = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.offset_min); });
        add("aug_offset_max",
            [real](RunConfig& c, const std::string& v) { c.train.augment.offset_max = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.offset_max); });
        add("aug_shear_min",
            [real](RunConfig& c, const std::string& v) { c.train.augment.shear_min = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.shear_min); });
        add("aug_shear_max",
            [real](RunConfig& c, const std::string& v) { c.train.augment.shear_max = parse_double(v); },
            [real](const RunConfig& c) { return real(c.train.augment.shear_max); });
        add("aug_pos_jitter_sigma",
            [real](RunConfig& c, const std::string& v) {
                c.train.augment.pos_jitter_sigma = parse_double(v);
            },
            [real](const RunConfig& c) { return real(c.train.augment.pos_jitter_sigma); });
        add("aug_color_jitter_sigma",
            [real](RunConfig& c, const std::string& v) {
                c.train.augment.color_jitter_sigma = parse_double(v);
            },
            [real](const RunConfig& c) { return real(c.train.augment.color_jitter_sigma); });
        return t;
    }();
    return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end()) throw std::invalid_argument("config: unknown key '" + key + "'");
    try {
        it->second.set(*this, value);
    } catch (const std::invalid_argument& e) {
        // the scheme/ablation parsers already produce a useful message
        const std::string what = e.what();
        if (what.rfind("WeakScheme:", 0) == 0 || what.rfind("Ablation:", 0) == 0) throw;
        throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad value '" + value + "' for key '" + key + "'");
    }
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    for (const auto& [key, handler] : key_table()) {
        out << key << " = " << handler.get(*this) << "\n";
    }
    return out.str();
}

std::uint64_t RunConfig::hash() const {
    // FNV-1a over the canonical serialization
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : serialize()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

RunConfig RunConfig::from_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.resize(hash_pos);
        std::istringstream row(line);
        std::string key, eq, value;
        if (!(row >> key)) continue;  // blank line
        if (!(row >> eq) || eq != "=" || !(row >> value)) {
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        }
        std::string rest;
        if (row >> rest)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": trailing tokens after value");
        cfg.set(key, value);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str(), path.string());
}

}  // namespace pointmatch
