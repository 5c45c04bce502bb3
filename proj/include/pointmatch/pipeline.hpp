#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pointmatch/config.hpp"
#include "pointmatch/eval.hpp"
#include "pointmatch/io.hpp"
#include "pointmatch/trainer.hpp"

namespace pointmatch {

// Dataset directory layout:
//   scene_0000.txt        scene files (train then val, numbered contiguously)
//   scene_0000.inst       instance ids (train scenes)
//   manifest.txt
//   weak_<scheme>/scene_0000.weak      sampled weak labels per scheme
//   sp_<confighash>/scene_0000.sp      partition cache per cluster config

// Writes scenes + manifest + instance ids + weak labels for cfg.scheme.
// Deterministic: rerunning with the same config reproduces every byte.
void generate_dataset(const RunConfig& cfg, const std::filesystem::path& dir);

// Ensures the partition cache for cfg.cluster exists; returns its directory.
std::filesystem::path ensure_superpoints(const RunConfig& cfg, const std::filesystem::path& dir);

// Ensures weak labels for cfg.scheme exist (re-samples from the instance
// sidecars when missing); returns the weak directory.
std::filesystem::path ensure_weak_labels(const RunConfig& cfg, const std::filesystem::path& dir);

// Loads the training view of the dataset (scenes + weak labels + partitions),
// generating any missing piece on demand. Generates the dataset itself if the
// manifest is absent.
Dataset load_dataset(const RunConfig& cfg, const std::filesystem::path& dir);

// Validation-only load; never touches weak labels or the partition cache.
std::vector<PointCloud> load_val_scenes(const std::filesystem::path& dir);

struct RunArtifacts {
    std::filesystem::path metrics_csv;
    std::filesystem::path checkpoint;
    std::filesystem::path config_echo;
    std::filesystem::path report;
    std::filesystem::path manifest;
    std::vector<EpochMetrics> history;
    double final_val_miou = 0.0;
};

// Full training command: dataset on demand, training, artifact emission.
RunArtifacts run_train(const RunConfig& cfg, const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir);

// Pseudo-label quality report (early vs late comparison). Returns the
// fraction of first-quarter epochs, among those where both accuracies are
// defined, with super-point masked accuracy >= point-wise masked accuracy.
struct QualityReport {
    std::size_t logged_epochs = 0;   // first-quarter epochs with both defined
    std::size_t sp_wins = 0;         // sp >= pt among those
    double sp_ge_pt_fraction = 0.0;  // NaN when nothing was logged
};
QualityReport summarize_pseudolabel_quality(const std::vector<EpochMetrics>& history);
void write_quality_report(const std::filesystem::path& path,
                          const std::vector<EpochMetrics>& history);

// IoU report emission for `eval`.
void write_iou_report(const std::filesystem::path& path, const IoUReport& report);

// Ablation grid: the fixed variant list over shared seeds; one table row per
// (scheme, variant) with per-seed and mean validation mIoU.
struct AblationRow {
    std::string scheme;
    std::string variant;
    std::vector<double> per_seed_miou;
    double mean_miou = 0.0;
};
std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<WeakScheme>& schemes,
                                      std::size_t num_seeds,
                                      const std::filesystem::path& work_dir);
void write_ablation_table(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace pointmatch
