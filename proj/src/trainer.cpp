#include "pointmatch/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "pointmatch/eval.hpp"
#include "pointmatch/rng.hpp"

namespace pointmatch {

namespace {

constexpr double kLogFloor = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe_neg_log(double p) { return -std::log(std::max(p, kLogFloor)); }

}  // namespace

double ce_loss(const ProbMatrix& q, const WeakLabels& weak) {
    if (weak.count() == 0)
        throw std::invalid_argument("ce_loss: empty labeled set (loss undefined)");
    weak.validate(q.num_points(), static_cast<int>(q.num_classes()));
    double sum = 0.0;
    for (std::size_t i = 0; i < weak.count(); ++i) {
        sum += safe_neg_log(q.probs(weak.indices[i], static_cast<std::size_t>(weak.classes[i])));
    }
    return sum / static_cast<double>(weak.count());
}

std::vector<std::uint8_t> confidence_mask(const ProbMatrix& qa, double tau) {
    const std::size_t n = qa.num_points();
    const std::size_t c = qa.num_classes();
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = qa.probs.row(i);
        double best = row[0];
        for (std::size_t j = 1; j < c; ++j) best = std::max(best, row[j]);
        mask[i] = best >= tau ? 1 : 0;
    }
    return mask;
}

PseudoLabel pointwise_pseudolabel(const ProbMatrix& qa, double tau) {
    PseudoLabel out;
    ArgmaxResult arg = row_argmax(qa);
    out.classes = std::move(arg.classes);
    out.confidences = std::move(arg.confidences);
    out.mask = confidence_mask(qa, tau);
    return out;
}

double pl_loss(const ProbMatrix& qb, const PseudoLabel& pseudo) {
    const std::size_t n = qb.num_points();
    if (pseudo.size() != n) throw std::invalid_argument("pl_loss: pseudo-label length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!pseudo.mask[i]) continue;
        sum += safe_neg_log(qb.probs(i, static_cast<std::size_t>(pseudo.classes[i])));
    }
    return sum / static_cast<double>(n);
}

PseudoLabel superpoint_pseudolabel(const ProbMatrix& qa, const SuperPointPartition& part,
                                   double tau_sp) {
    const std::size_t n = qa.num_points();
    const std::size_t c = qa.num_classes();
    if (part.size() != n)
        throw std::invalid_argument("superpoint_pseudolabel: partition does not cover the cloud");
    part.validate();

    PseudoLabel out;
    out.classes.resize(n);
    out.mask.resize(n);
    out.confidences.resize(n);

    const auto groups = part.members();
    std::vector<double> mean(c);
    for (const auto& members : groups) {
        std::fill(mean.begin(), mean.end(), 0.0);
        for (std::size_t idx : members) {
            const double* row = qa.probs.row(idx);
            for (std::size_t j = 0; j < c; ++j) mean[j] += row[j];
        }
        for (double& v : mean) v /= static_cast<double>(members.size());

        std::size_t best = 0;
        for (std::size_t j = 1; j < c; ++j)
            if (mean[j] > mean[best]) best = j;
        const double confidence = mean[best];
        const std::uint8_t m = confidence >= tau_sp ? 1 : 0;
        for (std::size_t idx : members) {
            out.classes[idx] = static_cast<int>(best);
            out.mask[idx] = m;
            out.confidences[idx] = confidence;
        }
    }
    return out;
}

double sp_pl_loss(const ProbMatrix& qb, const PseudoLabel& sp_pseudo) {
    return pl_loss(qb, sp_pseudo);
}

double adaptive_weight(long epoch, double alpha, long divisor) {
    if (epoch < 0) throw std::invalid_argument("adaptive_weight: negative epoch");
    if (divisor < 1) throw std::invalid_argument("adaptive_weight: divisor must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("adaptive_weight: alpha must be > 0");
    const long e = epoch / divisor;
    if (e < 1) return 1.0;
    return std::min(1.0, alpha / static_cast<double>(e));
}

double combined_pl_loss(double l_pl, double l_pl_sp, double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("combined_pl_loss: w must be in [0,1]");
    return l_pl + w * (l_pl_sp - l_pl);
}

double total_loss(double l_ce, double l_pl_prime, double lambda) {
    return l_ce + lambda * l_pl_prime;
}

// ---------------------------------------------------------------------------

Ablation Ablation::parse(const std::string& text) {
    Ablation a;
    if (text == "full") {
        a.kind = Kind::Full;
        return a;
    }
    if (text == "no-consistency") {
        a.kind = Kind::NoConsistency;
        return a;
    }
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string head = text.substr(0, colon);
        const std::string arg = text.substr(colon + 1);
        bool parsed = false;
        if (head == "fixed-w") {
            a.kind = Kind::FixedW;
            try {
                a.fixed_w = std::stod(arg);
                parsed = true;
            } catch (const std::exception&) {
            }
            if (parsed && a.fixed_w >= 0.0 && a.fixed_w <= 1.0) return a;
            throw std::invalid_argument("Ablation: fixed-w value must be a number in [0,1], got '" +
                                        arg + "'");
        }
        if (head == "fast-decay") {
            a.kind = Kind::FastDecay;
            try {
                a.fast_divisor = std::stol(arg);
                parsed = true;
            } catch (const std::exception&) {
            }
            if (parsed && a.fast_divisor >= 1) return a;
            throw std::invalid_argument("Ablation: fast-decay divisor must be an integer >= 1, got '" +
                                        arg + "'");
        }
    }
    throw std::invalid_argument(
        "Ablation: cannot parse '" + text +
        "' (expected full | no-consistency | fixed-w:V | fast-decay:D)");
}

std::string Ablation::tag() const {
    switch (kind) {
        case Kind::Full:
            return "full";
        case Kind::NoConsistency:
            return "no-consistency";
        case Kind::FixedW:
            return "fixed-w_" + std::to_string(fixed_w);
        case Kind::FastDecay:
            return "fast-decay_" + std::to_string(fast_divisor);
    }
    return "full";
}

void TrainConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("TrainConfig: tau must be in (0,1]");
    if (!(tau_sp > 0.0 && tau_sp <= 1.0))
        throw std::invalid_argument("TrainConfig: tau_sp must be in (0,1]");
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("TrainConfig: alpha must be > 0");
    if (epoch_divisor < 1) throw std::invalid_argument("TrainConfig: epoch_divisor must be >= 1");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: negative epoch count");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (hidden_dim < 1 || k_feat < 1)
        throw std::invalid_argument("TrainConfig: hidden_dim and k_feat must be >= 1");
    if (val_every < 1) throw std::invalid_argument("TrainConfig: val_every must be >= 1");
    if (!(view_b_strength > 0.0))
        throw std::invalid_argument("TrainConfig: view_b_strength must be > 0");
    augment.validate();
}

double TrainConfig::weight_at(long epoch) const {
    switch (ablation.kind) {
        case Ablation::Kind::Full:
            return adaptive_weight(epoch, alpha, epoch_divisor);
        case Ablation::Kind::NoConsistency:
            return adaptive_weight(epoch, alpha, epoch_divisor);  // unused; pseudo terms are off
        case Ablation::Kind::FixedW:
            return ablation.fixed_w;
        case Ablation::Kind::FastDecay:
            return adaptive_weight(epoch, alpha, ablation.fast_divisor);
    }
    return 1.0;
}

std::uint64_t view_seed_a(std::uint64_t root, long epoch, std::size_t scene_index) {
    return derive_seed(root, Stream::AugmentA, static_cast<std::uint64_t>(epoch), scene_index);
}

std::uint64_t view_seed_b(std::uint64_t root, long epoch, std::size_t scene_index) {
    return derive_seed(root, Stream::AugmentB, static_cast<std::uint64_t>(epoch), scene_index);
}

namespace {

// Everything one scene contributes to a batch step.
struct SceneResult {
    Gradients grads;
    double l_ce = 0.0;
    double l_pl = 0.0;
    double l_pl_sp = 0.0;
    double l_total = 0.0;
    std::size_t points = 0;
    std::size_t masked = 0;
    std::size_t sp_masked = 0;
    std::size_t masked_correct = 0;
    std::size_t sp_masked_correct = 0;
    bool skipped = false;
};

SceneResult process_scene(const TrainScene& scene, const MlpParams& params,
                          const TrainConfig& cfg, long epoch, std::size_t scene_index, double w) {
    SceneResult res;
    if (scene.weak.count() == 0) {
        res.skipped = true;
        return res;
    }
    const std::size_t n = scene.cloud.size();
    const bool consistency = cfg.ablation.kind != Ablation::Kind::NoConsistency;

    const std::uint64_t seed_a = view_seed_a(cfg.seed, epoch, scene_index);
    const std::uint64_t seed_b = view_seed_b(cfg.seed, epoch, scene_index);

    AugmentPolicy policy_a = cfg.augment;
    policy_a.seed = seed_a;
    const PointCloud view_a = sample_view(scene.cloud, policy_a);

    const Matrix feats_a = extract_features(view_a, cfg.k_feat);
    const ForwardCache fwd_a = forward_cache(params, feats_a);
    const std::size_t c = fwd_a.probs.num_classes();

    // supervised term on view A
    res.l_ce = ce_loss(fwd_a.probs, scene.weak);
    Matrix grad_logits_a(n, c);
    const double inv_l = 1.0 / static_cast<double>(scene.weak.count());
    for (std::size_t k = 0; k < scene.weak.count(); ++k) {
        const std::size_t i = scene.weak.indices[k];
        const std::size_t y = static_cast<std::size_t>(scene.weak.classes[k]);
        const double* qi = fwd_a.probs.probs.row(i);
        double* gi = grad_logits_a.row(i);
        for (std::size_t j = 0; j < c; ++j) gi[j] += inv_l * qi[j];
        gi[y] -= inv_l;
    }
    res.grads = backward(params, feats_a, fwd_a, grad_logits_a);

    res.points = n;
    res.l_total = res.l_ce;

    if (consistency) {
        AugmentPolicy policy_b =
            cfg.view_b_strength == 1.0 ? cfg.augment : cfg.augment.scaled(cfg.view_b_strength);
        policy_b.seed = seed_b;
        const PointCloud view_b = sample_view(scene.cloud, policy_b);
        const Matrix feats_b = extract_features(view_b, cfg.k_feat);
        const ForwardCache fwd_b = forward_cache(params, feats_b);

        // both targets come from view A's predictions, as constants
        const PseudoLabel pt = pointwise_pseudolabel(fwd_a.probs, cfg.tau);
        const PseudoLabel sp = superpoint_pseudolabel(fwd_a.probs, scene.superpoints, cfg.tau_sp);

        res.l_pl = pl_loss(fwd_b.probs, pt);
        res.l_pl_sp = sp_pl_loss(fwd_b.probs, sp);
        const double l_pl_prime = combined_pl_loss(res.l_pl, res.l_pl_sp, w);
        res.l_total = total_loss(res.l_ce, l_pl_prime, cfg.lambda);

        // d(total)/d(logits_B); per point the two variants blend the same way
        // the losses do: g = g_pt + w * (g_sp - g_pt)
        Matrix grad_logits_b(n, c);
        const double coeff = cfg.lambda / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!pt.mask[i] && !sp.mask[i]) continue;
            const double* qi = fwd_b.probs.probs.row(i);
            double* gi = grad_logits_b.row(i);
            for (std::size_t j = 0; j < c; ++j) {
                const double g_pt =
                    pt.mask[i] ? (qi[j] - (static_cast<std::size_t>(pt.classes[i]) == j ? 1.0 : 0.0))
                               : 0.0;
                const double g_sp =
                    sp.mask[i] ? (qi[j] - (static_cast<std::size_t>(sp.classes[i]) == j ? 1.0 : 0.0))
                               : 0.0;
                gi[j] = coeff * (g_pt + w * (g_sp - g_pt));
            }
        }
        res.grads.accumulate(backward(params, feats_b, fwd_b, grad_logits_b));

        if (scene.cloud.has_gt()) {
            for (std::size_t i = 0; i < n; ++i) {
                if (pt.mask[i]) {
                    ++res.masked;
                    if (pt.classes[i] == scene.cloud.gt_labels[i]) ++res.masked_correct;
                }
                if (sp.mask[i]) {
                    ++res.sp_masked;
                    if (sp.classes[i] == scene.cloud.gt_labels[i]) ++res.sp_masked_correct;
                }
            }
        }
    }
    return res;
}

}  // namespace

EpochMetrics train_epoch(TrainState& state, const Dataset& data, const TrainConfig& cfg,
                         long epoch) {
    cfg.validate();
    const std::size_t num_scenes = data.train.size();
    if (num_scenes == 0) throw std::invalid_argument("train_epoch: empty training set");

    const double w = cfg.weight_at(epoch);
    Rng shuffle_rng = stream_rng(cfg.seed, Stream::Shuffle, static_cast<std::uint64_t>(epoch));
    const std::vector<std::size_t> order = shuffle_rng.permutation(num_scenes);

    EpochMetrics m;
    m.epoch = epoch;
    m.w = w;
    std::size_t scenes_used = 0;
    std::size_t total_points = 0, total_masked = 0, total_sp_masked = 0;
    std::size_t total_masked_correct = 0, total_sp_masked_correct = 0;

    const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());

    for (std::size_t start = 0; start < num_scenes; start += cfg.batch_size) {
        const std::size_t end = std::min(start + cfg.batch_size, num_scenes);

        // scenes are processed concurrently but merged in batch order, so the
        // result is identical to the sequential loop
        std::vector<SceneResult> results(end - start);
        if (workers > 1 && end - start > 1) {
            std::vector<std::future<SceneResult>> futures;
            futures.reserve(end - start);
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t scene_index = order[b];
                futures.push_back(std::async(std::launch::async, [&, scene_index] {
                    return process_scene(data.train[scene_index], state.params, cfg, epoch,
                                         scene_index, w);
                }));
            }
            for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
        } else {
            for (std::size_t b = start; b < end; ++b) {
                results[b - start] =
                    process_scene(data.train[order[b]], state.params, cfg, epoch, order[b], w);
            }
        }

        Gradients batch_grads = Gradients::zeros_like(state.params);
        std::size_t batch_scenes = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            SceneResult& res = results[i];
            if (res.skipped) {
                std::cerr << "warning: scene " << order[start + i]
                          << " has no weak labels; skipped\n";
                continue;
            }
            batch_grads.accumulate(res.grads);
            ++batch_scenes;
            m.l_ce += res.l_ce;
            m.l_pl += res.l_pl;
            m.l_pl_sp += res.l_pl_sp;
            m.l_total += res.l_total;
            total_points += res.points;
            total_masked += res.masked;
            total_sp_masked += res.sp_masked;
            total_masked_correct += res.masked_correct;
            total_sp_masked_correct += res.sp_masked_correct;
        }
        if (batch_scenes == 0) continue;
        batch_grads.scale(1.0 / static_cast<double>(batch_scenes));
        ++state.step;
        adam_step(state.params, batch_grads, state.adam, cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                  cfg.adam_eps, state.step);
        scenes_used += batch_scenes;
    }

    if (scenes_used > 0) {
        const double inv = 1.0 / static_cast<double>(scenes_used);
        m.l_ce *= inv;
        m.l_pl *= inv;
        m.l_pl_sp *= inv;
        m.l_total *= inv;
    }
    m.mask_rate =
        total_points ? static_cast<double>(total_masked) / static_cast<double>(total_points) : 0.0;
    m.sp_mask_rate =
        total_points ? static_cast<double>(total_sp_masked) / static_cast<double>(total_points)
                     : 0.0;
    m.pl_accuracy = total_masked ? static_cast<double>(total_masked_correct) /
                                       static_cast<double>(total_masked)
                                 : kNaN;
    m.sp_pl_accuracy = total_sp_masked ? static_cast<double>(total_sp_masked_correct) /
                                             static_cast<double>(total_sp_masked)
                                       : kNaN;
    m.val_miou = kNaN;
    if (!data.val.empty() && (epoch % cfg.val_every == 0 || epoch == cfg.epochs - 1)) {
        m.val_miou = validation_miou(state.params, data.val, cfg.k_feat);
    }
    return m;
}

double validation_miou(const MlpParams& params, const std::vector<PointCloud>& val,
                       std::size_t k_feat) {
    if (val.empty()) throw std::invalid_argument("validation_miou: empty validation set");
    const int c = val.front().num_classes;
    std::vector<std::vector<long long>> conf(static_cast<std::size_t>(c),
                                             std::vector<long long>(static_cast<std::size_t>(c), 0));
    for (const PointCloud& cloud : val) {
        if (!cloud.has_gt())
            throw std::invalid_argument("validation_miou: validation scene lacks gt labels");
        const Matrix feats = extract_features(cloud, k_feat);
        const ProbMatrix q = forward(params, feats);
        const ArgmaxResult pred = row_argmax(q);
        const auto scene_conf = confusion_matrix(pred.classes, cloud.gt_labels, c);
        for (std::size_t i = 0; i < scene_conf.size(); ++i)
            for (std::size_t j = 0; j < scene_conf.size(); ++j) conf[i][j] += scene_conf[i][j];
    }
    return miou_from_confusion(conf).miou;
}

TrainResult run_training(const TrainConfig& cfg, const Dataset& data) {
    cfg.validate();
    if (data.train.empty()) throw std::invalid_argument("run_training: empty training set");
    const int num_classes = data.train.front().cloud.num_classes;

    TrainState state;
    Rng init_rng = stream_rng(cfg.seed, Stream::Init);
    state.params = MlpParams::init(kFeatureDim, cfg.hidden_dim, num_classes, init_rng);
    state.adam = AdamState::zeros_like(state.params);

    TrainResult result;
    result.history.reserve(static_cast<std::size_t>(cfg.epochs));
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        result.history.push_back(train_epoch(state, data, cfg, epoch));
    }
    result.params = std::move(state.params);
    return result;
}

}  // namespace pointmatch
