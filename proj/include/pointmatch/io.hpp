#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pointmatch/core.hpp"
#include "pointmatch/model.hpp"
#include "pointmatch/trainer.hpp"

namespace pointmatch {

// Scene files: "pointmatch-scene v1 N C" header, then N lines
// "x y z r g b label" with label -1 when ground truth is absent.
// Reals are serialized with 9 significant digits.
void write_scene(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_scene(const std::filesystem::path& path);

// Instance-id sidecar ("pointmatch-inst v1 N" + one id per line); lets weak
// supervision be re-sampled for any scheme after generation.
void write_instances(const std::filesystem::path& path, const std::vector<int>& instance_ids);
std::vector<int> read_instances(const std::filesystem::path& path);

// Weak labels: "pointmatch-weak v1 |L|" then "index class" lines (0-based).
void write_weak_labels(const std::filesystem::path& path, const WeakLabels& weak);
WeakLabels read_weak_labels(const std::filesystem::path& path);

// Partition cache: "pointmatch-sp v1 N M" then one group id per line.
void write_partition(const std::filesystem::path& path, const SuperPointPartition& part);
SuperPointPartition read_partition(const std::filesystem::path& path);

// Checkpoint: text header (magic, layer dims), then raw little-endian 64-bit
// parameter values, weights row-major then biases, in layer order.
void write_checkpoint(const std::filesystem::path& path, const MlpParams& params);
MlpParams read_checkpoint(const std::filesystem::path& path);

// Dataset manifest: "manifest v1" then "file N C seed split" per scene.
struct ManifestEntry {
    std::string file;
    std::size_t num_points = 0;
    int num_classes = 0;
    std::uint64_t seed = 0;
    std::string split;  // "train" | "val"
};
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Metrics history: one CSV row per epoch, 17-digit reals so reruns are
// byte-identical and values round-trip exactly.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochMetrics>& history);
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

std::string format_real(double v, int significant_digits);

}  // namespace pointmatch
