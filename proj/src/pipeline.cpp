#include "pointmatch/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pointmatch/rng.hpp"
#include "pointmatch/superpoint.hpp"

namespace pointmatch {

namespace fs = std::filesystem;

namespace {

std::string scene_stem(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04zu", index);
    return buf;
}

std::string hex16(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

fs::path weak_dir(const RunConfig& cfg, const fs::path& dir) {
    return dir / ("weak_" + cfg.scheme.tag());
}

fs::path sp_dir(const RunConfig& cfg, const fs::path& dir) {
    return dir / ("sp_" + hex16(cfg.cluster.hash()));
}

std::uint64_t weak_seed(const RunConfig& cfg, std::size_t scene_index) {
    // keyed by scheme tag so different schemes draw independent labels
    std::uint64_t tag_hash = 0xcbf29ce484222325ULL;
    for (char ch : cfg.scheme.tag()) {
        tag_hash ^= static_cast<unsigned char>(ch);
        tag_hash *= 0x100000001b3ULL;
    }
    return derive_seed(cfg.seed, Stream::WeakLabels, scene_index, tag_hash);
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

void generate_dataset(const RunConfig& cfg, const fs::path& dir) {
    cfg.validate();
    fs::create_directories(dir);
    const fs::path wdir = weak_dir(cfg, dir);
    fs::create_directories(wdir);

    std::vector<ManifestEntry> manifest;
    const std::size_t total = cfg.train_scenes + cfg.val_scenes;
    for (std::size_t i = 0; i < total; ++i) {
        const bool is_train = i < cfg.train_scenes;
        const SceneSpec spec = cfg.scene_spec(i);
        const Scene scene = generate_scene(spec);
        const std::string stem = scene_stem(i);

        write_scene(dir / (stem + ".txt"), scene.cloud);
        if (is_train) {
            write_instances(dir / (stem + ".inst"), scene.instance_ids);
            WeakScheme scheme = cfg.scheme;
            scheme.seed = weak_seed(cfg, i);
            const WeakLabels weak = sample_weak_labels(scene.cloud, scene.instance_ids, scheme);
            write_weak_labels(wdir / (stem + ".weak"), weak);
        }

        ManifestEntry entry;
        entry.file = stem + ".txt";
        entry.num_points = scene.cloud.size();
        entry.num_classes = scene.cloud.num_classes;
        entry.seed = spec.seed;
        entry.split = is_train ? "train" : "val";
        manifest.push_back(entry);
    }
    write_manifest(dir / "manifest.txt", manifest);
}

fs::path ensure_weak_labels(const RunConfig& cfg, const fs::path& dir) {
    const fs::path wdir = weak_dir(cfg, dir);
    const auto manifest = read_manifest(dir / "manifest.txt");
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (manifest[i].split != "train") continue;
        const std::string stem = scene_stem(i);
        const fs::path weak_path = wdir / (stem + ".weak");
        if (fs::exists(weak_path)) continue;
        fs::create_directories(wdir);
        const PointCloud cloud = read_scene(dir / manifest[i].file);
        const std::vector<int> instance_ids = read_instances(dir / (stem + ".inst"));
        WeakScheme scheme = cfg.scheme;
        scheme.seed = weak_seed(cfg, i);
        write_weak_labels(weak_path, sample_weak_labels(cloud, instance_ids, scheme));
    }
    return wdir;
}

fs::path ensure_superpoints(const RunConfig& cfg, const fs::path& dir) {
    const fs::path cache = sp_dir(cfg, dir);
    const auto manifest = read_manifest(dir / "manifest.txt");
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        if (manifest[i].split != "train") continue;  // inference never uses super-points
        const std::string stem = scene_stem(i);
        const fs::path sp_path = cache / (stem + ".sp");
        if (fs::exists(sp_path)) continue;
        fs::create_directories(cache);
        const PointCloud cloud = read_scene(dir / manifest[i].file);
        write_partition(sp_path, build_superpoints(cloud, cfg.cluster));
    }
    return cache;
}

Dataset load_dataset(const RunConfig& cfg, const fs::path& dir) {
    if (!fs::exists(dir / "manifest.txt")) generate_dataset(cfg, dir);
    const fs::path wdir = ensure_weak_labels(cfg, dir);
    const fs::path cache = ensure_superpoints(cfg, dir);

    Dataset data;
    const auto manifest = read_manifest(dir / "manifest.txt");
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const std::string stem = scene_stem(i);
        if (manifest[i].split == "train") {
            TrainScene scene;
            scene.cloud = read_scene(dir / manifest[i].file);
            scene.weak = read_weak_labels(wdir / (stem + ".weak"));
            scene.weak.validate(scene.cloud.size(), scene.cloud.num_classes);
            scene.superpoints = read_partition(cache / (stem + ".sp"));
            if (scene.superpoints.size() != scene.cloud.size())
                throw std::runtime_error("partition cache does not match scene " + stem);
            data.train.push_back(std::move(scene));
        } else {
            data.val.push_back(read_scene(dir / manifest[i].file));
        }
    }
    if (data.train.empty()) throw std::runtime_error("dataset has no training scenes");
    return data;
}

std::vector<PointCloud> load_val_scenes(const fs::path& dir) {
    const auto manifest = read_manifest(dir / "manifest.txt");
    std::vector<PointCloud> val;
    for (const auto& entry : manifest) {
        if (entry.split == "val") val.push_back(read_scene(dir / entry.file));
    }
    if (val.empty()) throw std::runtime_error("dataset has no validation scenes");
    return val;
}

QualityReport summarize_pseudolabel_quality(const std::vector<EpochMetrics>& history) {
    QualityReport report;
    const std::size_t quarter = std::max<std::size_t>(1, history.size() / 4);
    for (std::size_t i = 0; i < quarter && i < history.size(); ++i) {
        const EpochMetrics& m = history[i];
        if (std::isnan(m.pl_accuracy) || std::isnan(m.sp_pl_accuracy)) continue;
        ++report.logged_epochs;
        if (m.sp_pl_accuracy >= m.pl_accuracy) ++report.sp_wins;
    }
    report.sp_ge_pt_fraction =
        report.logged_epochs
            ? static_cast<double>(report.sp_wins) / static_cast<double>(report.logged_epochs)
            : std::numeric_limits<double>::quiet_NaN();
    return report;
}

void write_quality_report(const fs::path& path, const std::vector<EpochMetrics>& history) {
    const QualityReport q = summarize_pseudolabel_quality(history);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "pointmatch-report v1\n";
    out << "total_epochs " << history.size() << "\n";
    out << "first_quarter_logged " << q.logged_epochs << "\n";
    out << "sp_ge_pt_epochs " << q.sp_wins << "\n";
    out << "sp_ge_pt_fraction " << format_real(q.sp_ge_pt_fraction, 9) << "\n";
    out << "epoch pt_masked_acc sp_masked_acc mask_rate sp_mask_rate val_miou\n";
    for (const EpochMetrics& m : history) {
        out << m.epoch << " " << format_real(m.pl_accuracy, 9) << " "
            << format_real(m.sp_pl_accuracy, 9) << " " << format_real(m.mask_rate, 9) << " "
            << format_real(m.sp_mask_rate, 9) << " " << format_real(m.val_miou, 9) << "\n";
    }
}

void write_iou_report(const fs::path& path, const IoUReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "pointmatch-iou v1\n";
    out << "class iou gt_points pred_points\n";
    const std::size_t c = report.confusion.size();
    for (std::size_t k = 0; k < c; ++k) {
        long long gt_count = 0, pred_count = 0;
        for (std::size_t j = 0; j < c; ++j) {
            gt_count += report.confusion[k][j];
            pred_count += report.confusion[j][k];
        }
        out << k << " "
            << (report.defined[k] ? format_real(report.per_class_iou[k], 9) : std::string("-"))
            << " " << gt_count << " " << pred_count << "\n";
    }
    out << "miou " << format_real(report.miou, 9) << "\n";
}

RunArtifacts run_train(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir) {
    cfg.validate();
    const std::string started = timestamp_utc();
    const Dataset data = load_dataset(cfg, data_dir);
    fs::create_directories(out_dir);

    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = cfg.seed;
    const TrainResult result = run_training(train_cfg, data);

    RunArtifacts art;
    art.metrics_csv = out_dir / "metrics.csv";
    art.checkpoint = out_dir / "checkpoint.ckpt";
    art.config_echo = out_dir / "config_used.txt";
    art.report = out_dir / "report.txt";
    art.manifest = out_dir / "run_manifest.txt";
    art.history = result.history;
    art.final_val_miou =
        result.history.empty() ? 0.0 : result.history.back().val_miou;

    write_metrics_csv(art.metrics_csv, result.history);
    write_checkpoint(art.checkpoint, result.params);
    {
        std::ofstream echo(art.config_echo);
        if (!echo) throw std::runtime_error("cannot write config echo");
        echo << cfg.serialize();
    }
    write_quality_report(art.report, result.history);
    {
        std::ofstream man(art.manifest);
        if (!man) throw std::runtime_error("cannot write run manifest");
        man << "pointmatch-run v1\n";
        man << "config_hash " << hex16(cfg.hash()) << "\n";
        man << "dataset " << data_dir.string() << "\n";
        man << "seed " << cfg.seed << "\n";
        man << "scheme " << cfg.scheme.tag() << "\n";
        man << "ablation " << cfg.train.ablation.tag() << "\n";
        man << "metrics " << art.metrics_csv.filename().string() << "\n";
        man << "checkpoint " << art.checkpoint.filename().string() << "\n";
        man << "config " << art.config_echo.filename().string() << "\n";
        man << "report " << art.report.filename().string() << "\n";
        man << "started " << started << "\n";
        man << "finished " << timestamp_utc() << "\n";
    }
    return art;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<WeakScheme>& schemes,
                                      std::size_t num_seeds, const fs::path& work_dir) {
    if (schemes.empty()) throw std::invalid_argument("run_ablation: no schemes");
    if (num_seeds < 1) throw std::invalid_argument("run_ablation: need at least one seed");

    const std::vector<Ablation> variants = {
        Ablation{Ablation::Kind::Full},
        Ablation{Ablation::Kind::NoConsistency},
        Ablation{Ablation::Kind::FixedW, 0.0},
        Ablation{Ablation::Kind::FixedW, 1.0},
        Ablation{Ablation::Kind::FixedW, 0.5},
        Ablation{Ablation::Kind::FastDecay, 0.0, std::max(1L, base.train.epoch_divisor / 2)},
    };

    std::vector<AblationRow> rows;
    for (const WeakScheme& scheme : schemes) {
        for (const Ablation& variant : variants) {
            AblationRow row;
            row.scheme = scheme.tag();
            row.variant = variant.tag();
            rows.push_back(row);
        }
    }

    for (std::size_t s = 0; s < num_seeds; ++s) {
        RunConfig cfg = base;
        cfg.seed = base.seed + s;
        // one dataset per seed, shared by every variant and scheme
        const fs::path data_dir = work_dir / ("data_seed" + std::to_string(cfg.seed));

        std::size_t row_index = 0;
        for (const WeakScheme& scheme : schemes) {
            cfg.scheme = scheme;
            for (const Ablation& variant : variants) {
                cfg.train.ablation = variant;
                const fs::path out_dir = work_dir / ("run_" + scheme.tag() + "_" + variant.tag() +
                                                     "_seed" + std::to_string(cfg.seed));
                const RunArtifacts art = run_train(cfg, data_dir, out_dir);
                rows[row_index].per_seed_miou.push_back(art.final_val_miou);
                ++row_index;
            }
        }
    }

    for (AblationRow& row : rows) {
        double sum = 0.0;
        for (double v : row.per_seed_miou) sum += v;
        row.mean_miou = sum / static_cast<double>(row.per_seed_miou.size());
    }
    return rows;
}

void write_ablation_table(const fs::path& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "pointmatch-ablation v1\n";
    out << "scheme variant mean_miou per_seed\n";
    for (const AblationRow& row : rows) {
        out << row.scheme << " " << row.variant << " " << format_real(row.mean_miou, 9);
        for (double v : row.per_seed_miou) out << " " << format_real(v, 9);
        out << "\n";
    }
}

}  // namespace pointmatch
