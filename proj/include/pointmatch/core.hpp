#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pointmatch {

// Dense row-major matrix of doubles. Everything in this project is small
// enough that a flat buffer is the right representation; no BLAS needed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// A scene: N points with xyz positions (meters), rgb colors in [0,1], and
// optionally a dense ground-truth class per point.
struct PointCloud {
    Matrix positions;            // N x 3
    Matrix colors;               // N x 3, componentwise in [0,1]
    std::vector<int> gt_labels;  // empty, or length N with values in [0, num_classes)
    int num_classes = 0;

    std::size_t size() const { return positions.rows(); }
    bool has_gt() const { return !gt_labels.empty(); }

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;
};

// Sparse point-level supervision: the labeled index set and its classes.
struct WeakLabels {
    std::vector<std::size_t> indices;  // strictly increasing
    std::vector<int> classes;          // class per labeled point

    std::size_t count() const { return indices.size(); }
    void validate(std::size_t n, int num_classes) const;
};

// Row-stochastic N x C prediction.
struct ProbMatrix {
    Matrix probs;

    std::size_t num_points() const { return probs.rows(); }
    std::size_t num_classes() const { return probs.cols(); }

    // Each row must sum to 1 within 1e-9 and all entries lie in [0,1].
    // Always on; the training loop relies on this firing loudly.
    void validate() const;
};

inline constexpr double kRowSumTolerance = 1e-9;

// Disjoint grouping of point indices into super-points.
struct SuperPointPartition {
    std::vector<int> group_of;  // length N, values in [0, num_groups)
    int num_groups = 0;

    std::size_t size() const { return group_of.size(); }
    void validate() const;

    // Member indices per group, each list ascending.
    std::vector<std::vector<std::size_t>> members() const;

    static SuperPointPartition singletons(std::size_t n);
};

// Hard per-point targets derived from predictions, with a binary inclusion
// mask and the confidence that produced each class.
struct PseudoLabel {
    std::vector<int> classes;
    std::vector<std::uint8_t> mask;
    std::vector<double> confidences;

    std::size_t size() const { return classes.size(); }
};

// One-hot extension of weak labels: row i is the unit vector for class y_i if
// i is labeled, all-zero otherwise.
Matrix one_hot_extend(const WeakLabels& weak, std::size_t n, int num_classes);

struct ArgmaxResult {
    std::vector<int> classes;
    std::vector<double> confidences;
};

// Per-row argmax with ties broken to the lowest class index.
ArgmaxResult row_argmax(const ProbMatrix& q);

// Brute-force k-nearest-neighbor indices on row vectors of `points`
// (Euclidean, self included, ties broken by index). Returns min(k, N)
// neighbors per point, ascending by (distance, index).
std::vector<std::vector<std::size_t>> knn_indices(const Matrix& points, std::size_t k);

}  // namespace pointmatch
