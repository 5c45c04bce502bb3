#include "pointmatch/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pointmatch {

void PointCloud::validate() const {
    const std::size_t n = positions.rows();
    if (n < 1) throw std::invalid_argument("PointCloud: empty cloud");
    if (positions.cols() != 3) throw std::invalid_argument("PointCloud: positions must be Nx3");
    if (colors.rows() != n || colors.cols() != 3)
        throw std::invalid_argument("PointCloud: colors must match positions row count");
    if (num_classes <= 0) throw std::invalid_argument("PointCloud: num_classes must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            const double v = colors(i, c);
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("PointCloud: color out of [0,1] at point " +
                                            std::to_string(i));
            if (!std::isfinite(positions(i, c)))
                throw std::invalid_argument("PointCloud: non-finite position at point " +
                                            std::to_string(i));
        }
    }
    if (!gt_labels.empty()) {
        if (gt_labels.size() != n)
            throw std::invalid_argument("PointCloud: gt_labels length mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (gt_labels[i] < 0 || gt_labels[i] >= num_classes)
                throw std::invalid_argument("PointCloud: gt label out of range at point " +
                                            std::to_string(i));
        }
    }
}

void WeakLabels::validate(std::size_t n, int num_classes) const {
    if (indices.size() != classes.size())
        throw std::invalid_argument("WeakLabels: indices/classes length mismatch");
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= n)
            throw std::invalid_argument("WeakLabels: index " + std::to_string(indices[i]) +
                                        " out of range (n=" + std::to_string(n) + ")");
        if (i > 0 && indices[i] <= indices[i - 1])
            throw std::invalid_argument("WeakLabels: indices not strictly increasing at position " +
                                        std::to_string(i));
        if (classes[i] < 0 || classes[i] >= num_classes)
            throw std::invalid_argument("WeakLabels: class " + std::to_string(classes[i]) +
                                        " out of range at index " + std::to_string(indices[i]));
    }
}

void ProbMatrix::validate() const {
    const std::size_t n = probs.rows();
    const std::size_t c = probs.cols();
    if (c == 0) throw std::invalid_argument("ProbMatrix: zero classes");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const double v = probs(i, j);
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("ProbMatrix: entry out of [0,1] at row " +
                                            std::to_string(i));
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance)
            throw std::invalid_argument("ProbMatrix: row " + std::to_string(i) +
                                        " sums to " + std::to_string(sum));
    }
}

void SuperPointPartition::validate() const {
    if (num_groups <= 0) throw std::invalid_argument("SuperPointPartition: no groups");
    std::vector<std::size_t> sizes(static_cast<std::size_t>(num_groups), 0);
    for (std::size_t i = 0; i < group_of.size(); ++i) {
        const int g = group_of[i];
        if (g < 0 || g >= num_groups)
            throw std::invalid_argument("SuperPointPartition: group id out of range at point " +
                                        std::to_string(i));
        ++sizes[static_cast<std::size_t>(g)];
    }
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (total != group_of.size())
        throw std::invalid_argument("SuperPointPartition: sizes do not sum to N");
    for (int g = 0; g < num_groups; ++g) {
        if (sizes[static_cast<std::size_t>(g)] == 0)
            throw std::invalid_argument("SuperPointPartition: empty group " + std::to_string(g));
    }
}

std::vector<std::vector<std::size_t>> SuperPointPartition::members() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_groups));
    for (std::size_t i = 0; i < group_of.size(); ++i) {
        out[static_cast<std::size_t>(group_of[i])].push_back(i);
    }
    return out;
}

SuperPointPartition SuperPointPartition::singletons(std::size_t n) {
    SuperPointPartition p;
    p.group_of.resize(n);
    std::iota(p.group_of.begin(), p.group_of.end(), 0);
    p.num_groups = static_cast<int>(n);
    return p;
}

Matrix one_hot_extend(const WeakLabels& weak, std::size_t n, int num_classes) {
    weak.validate(n, num_classes);
    Matrix out(n, static_cast<std::size_t>(num_classes), 0.0);
    for (std::size_t i = 0; i < weak.indices.size(); ++i) {
        out(weak.indices[i], static_cast<std::size_t>(weak.classes[i])) = 1.0;
    }
    return out;
}

ArgmaxResult row_argmax(const ProbMatrix& q) {
    const std::size_t n = q.num_points();
    const std::size_t c = q.num_classes();
    ArgmaxResult r;
    r.classes.resize(n);
    r.confidences.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = q.probs.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j) {
            if (row[j] > row[best]) best = j;  // strict: ties keep the lowest index
        }
        r.classes[i] = static_cast<int>(best);
        r.confidences[i] = row[best];
    }
    return r;
}

std::vector<std::vector<std::size_t>> knn_indices(const Matrix& points, std::size_t k) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    const std::size_t kk = std::min(k, n);
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* pi = points.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double* pj = points.row(j);
            double d2 = 0.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double diff = pi[a] - pj[a];
                d2 += diff * diff;
            }
            dist[j] = {d2, j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk),
                          dist.end());
        auto& nb = out[i];
        nb.resize(kk);
        for (std::size_t j = 0; j < kk; ++j) nb[j] = dist[j].second;
    }
    return out;
}

}  // namespace pointmatch
