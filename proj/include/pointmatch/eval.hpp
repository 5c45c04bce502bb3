#pragma once

#include <optional>
#include <vector>

#include "pointmatch/core.hpp"

namespace pointmatch {

// Per-class segmentation quality. Classes absent from gt and predictions are
// excluded from the mean so sparse synthetic scenes stay comparable.
struct IoUReport {
    std::vector<double> per_class_iou;  // NaN where undefined
    std::vector<bool> defined;
    double miou = 0.0;
    std::vector<std::vector<long long>> confusion;
};

// entry (i, j) = number of points with gt class i predicted as class j
std::vector<std::vector<long long>> confusion_matrix(const std::vector<int>& pred,
                                                     const std::vector<int>& gt, int num_classes);

IoUReport miou_from_confusion(const std::vector<std::vector<long long>>& confusion);

struct PseudoAccuracy {
    std::optional<double> masked_acc;  // absent when no point is masked in
    double unmasked_acc = 0.0;         // over all points
    double mask_rate = 0.0;
};

PseudoAccuracy pseudolabel_accuracy(const PseudoLabel& pseudo, const std::vector<int>& gt);

}  // namespace pointmatch
