#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pointmatch/augment.hpp"
#include "pointmatch/core.hpp"
#include "pointmatch/model.hpp"
#include "pointmatch/synth.hpp"

namespace pointmatch {

// ---------------------------------------------------------------------------
// Loss stack
// ---------------------------------------------------------------------------

// Supervised cross-entropy over the labeled set: (1/|L|) sum -log q[i, y_i].
// Log arguments are floored at 1e-12. Rejects an empty labeled set.
double ce_loss(const ProbMatrix& q, const WeakLabels& weak);

// m_i = 1 iff max(q_i) >= tau (boundary inclusive).
std::vector<std::uint8_t> confidence_mask(const ProbMatrix& qa, double tau);

// Hard targets from one view's predictions; targets are constants, nothing
// differentiates through their construction.
PseudoLabel pointwise_pseudolabel(const ProbMatrix& qa, double tau);

// (1/N) sum m_i * -log qb[i, class_i]; normalized by N, not by sum(m).
// Masked-out points are skipped outright and contribute exactly zero.
double pl_loss(const ProbMatrix& qb, const PseudoLabel& pseudo);

// Per super-point: average the prediction rows, argmax the average (lowest
// index on ties), propagate the class to every member; the group confidence
// max(mean row) gates the whole group against tau_sp.
PseudoLabel superpoint_pseudolabel(const ProbMatrix& qa, const SuperPointPartition& part,
                                   double tau_sp);

// Same form as pl_loss, over the super-point targets.
double sp_pl_loss(const ProbMatrix& qb, const PseudoLabel& sp_pseudo);

// Inverse decay on the effective epoch e = floor(k / divisor): w = 1 while
// e < 1 (the raw rule is undefined there), else min(1, alpha / e).
double adaptive_weight(long epoch, double alpha, long divisor);

// w * l_pl_sp + (1 - w) * l_pl, computed as l_pl + w * (l_pl_sp - l_pl) so
// the degenerate case l_pl_sp == l_pl reproduces l_pl bit-exactly.
double combined_pl_loss(double l_pl, double l_pl_sp, double w);

// l_ce + lambda * l_pl_prime
double total_loss(double l_ce, double l_pl_prime, double lambda);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct Ablation {
    enum class Kind { Full, NoConsistency, FixedW, FastDecay };

    Kind kind = Kind::Full;
    double fixed_w = 0.5;     // FixedW
    long fast_divisor = 16;   // FastDecay

    static Ablation parse(const std::string& text);  // full | no-consistency | fixed-w:V | fast-decay:D
    std::string tag() const;
};

struct TrainConfig {
    double tau = 0.95;
    double tau_sp = 0.95;
    double lambda = 1.0;
    double alpha = 1.0;
    long epoch_divisor = 32;
    long epochs = 128;
    double lr = 0.01;
    std::size_t batch_size = 4;
    std::uint64_t seed = 0;
    Ablation ablation;

    std::size_t hidden_dim = 64;
    std::size_t k_feat = 8;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    long val_every = 1;
    AugmentPolicy augment;
    // magnitude multiplier for view B's draw (1 = symmetric views); the
    // pseudo-label source view A always uses the policy as configured
    double view_b_strength = 1.0;

    void validate() const;

    // w actually used at epoch k under the configured ablation
    double weight_at(long epoch) const;
};

struct EpochMetrics {
    long epoch = 0;
    double w = 0.0;
    double l_ce = 0.0;
    double l_pl = 0.0;
    double l_pl_sp = 0.0;
    double l_total = 0.0;
    double mask_rate = 0.0;
    double sp_mask_rate = 0.0;
    double pl_accuracy = 0.0;     // masked accuracy vs gt; NaN when no point is masked in
    double sp_pl_accuracy = 0.0;  // same for the super-point targets
    double val_miou = 0.0;        // NaN on epochs without validation
};

struct TrainScene {
    PointCloud cloud;
    WeakLabels weak;
    SuperPointPartition superpoints;  // computed once on the clean cloud
};

struct Dataset {
    std::vector<TrainScene> train;
    std::vector<PointCloud> val;  // dense gt for evaluation
};

struct TrainState {
    MlpParams params;
    AdamState adam;
    long step = 0;  // optimizer steps taken
};

// One pass over the dataset: per scene, draw the two views, predict both,
// build both pseudo-labels from view A, supervise view A with the weak labels
// and view B with the blended pseudo targets, then Adam per batch.
EpochMetrics train_epoch(TrainState& state, const Dataset& data, const TrainConfig& cfg,
                         long epoch);

struct TrainResult {
    MlpParams params;
    std::vector<EpochMetrics> history;
};

TrainResult run_training(const TrainConfig& cfg, const Dataset& data);

// Validation pass: un-augmented forward, per-point argmax, mIoU over the
// summed confusion. Super-points are never consulted here.
double validation_miou(const MlpParams& params, const std::vector<PointCloud>& val,
                       std::size_t k_feat);

// Seed helpers shared by the trainer and by tests that re-derive the stream
// layout: per (epoch, scene) augmentation seeds for the two views.
std::uint64_t view_seed_a(std::uint64_t root, long epoch, std::size_t scene_index);
std::uint64_t view_seed_b(std::uint64_t root, long epoch, std::size_t scene_index);

}  // namespace pointmatch
