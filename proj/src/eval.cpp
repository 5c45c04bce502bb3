#include "pointmatch/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pointmatch {

std::vector<std::vector<long long>> confusion_matrix(const std::vector<int>& pred,
                                                     const std::vector<int>& gt, int num_classes) {
    if (pred.size() != gt.size())
        throw std::invalid_argument("confusion_matrix: pred/gt length mismatch");
    if (num_classes <= 0) throw std::invalid_argument("confusion_matrix: num_classes must be > 0");
    std::vector<std::vector<long long>> conf(
        static_cast<std::size_t>(num_classes),
        std::vector<long long>(static_cast<std::size_t>(num_classes), 0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (gt[i] < 0 || gt[i] >= num_classes || pred[i] < 0 || pred[i] >= num_classes)
            throw std::invalid_argument("confusion_matrix: class out of range at point " +
                                        std::to_string(i));
        ++conf[static_cast<std::size_t>(gt[i])][static_cast<std::size_t>(pred[i])];
    }
    return conf;
}

IoUReport miou_from_confusion(const std::vector<std::vector<long long>>& confusion) {
    const std::size_t c = confusion.size();
    if (c == 0) throw std::invalid_argument("miou: empty confusion matrix");
    for (const auto& row : confusion)
        if (row.size() != c) throw std::invalid_argument("miou: confusion matrix not square");

    IoUReport report;
    report.confusion = confusion;
    report.per_class_iou.assign(c, std::numeric_limits<double>::quiet_NaN());
    report.defined.assign(c, false);

    double sum = 0.0;
    std::size_t defined_count = 0;
    for (std::size_t k = 0; k < c; ++k) {
        const long long tp = confusion[k][k];
        long long fp = 0, fn = 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == k) continue;
            fn += confusion[k][j];
            fp += confusion[j][k];
        }
        const long long denom = tp + fp + fn;
        if (denom == 0) continue;  // class absent everywhere: excluded from the mean
        report.per_class_iou[k] = static_cast<double>(tp) / static_cast<double>(denom);
        report.defined[k] = true;
        sum += report.per_class_iou[k];
        ++defined_count;
    }
    if (defined_count == 0)
        throw std::invalid_argument("miou: no class is present in gt or predictions");
    report.miou = sum / static_cast<double>(defined_count);
    return report;
}

PseudoAccuracy pseudolabel_accuracy(const PseudoLabel& pseudo, const std::vector<int>& gt) {
    if (pseudo.size() != gt.size())
        throw std::invalid_argument("pseudolabel_accuracy: length mismatch");
    const std::size_t n = gt.size();
    if (n == 0) throw std::invalid_argument("pseudolabel_accuracy: empty input");

    std::size_t masked = 0, masked_correct = 0, correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ok = pseudo.classes[i] == gt[i];
        if (ok) ++correct;
        if (pseudo.mask[i]) {
            ++masked;
            if (ok) ++masked_correct;
        }
    }
    PseudoAccuracy acc;
    acc.unmasked_acc = static_cast<double>(correct) / static_cast<double>(n);
    acc.mask_rate = static_cast<double>(masked) / static_cast<double>(n);
    if (masked > 0)
        acc.masked_acc = static_cast<double>(masked_correct) / static_cast<double>(masked);
    return acc;
}

}  // namespace pointmatch
