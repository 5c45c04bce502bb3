#pragma once

#include <cstdint>
#include <vector>

#include "pointmatch/core.hpp"
#include "pointmatch/rng.hpp"

namespace pointmatch {

// Per-point input features: centered xyz, rgb, neighborhood mean xyz offset,
// neighborhood mean rgb, normalized neighborhood size.
inline constexpr std::size_t kFeatureDim = 13;

// Neighborhood stats use the k_feat nearest neighbors (self included) in the
// given view; with fewer than k_feat points, all points are used and the size
// stat reports |NN| / k_feat.
Matrix extract_features(const PointCloud& view, std::size_t k_feat);

struct Layer {
    Matrix weights;               // out x in
    std::vector<double> biases;   // out
};

// Per-point classifier: F -> H -> H -> C with ReLU between layers and a
// row-wise softmax at the end. Gradients are hand-derived for this fixed
// architecture; no autodiff tape.
struct MlpParams {
    std::vector<Layer> layers;

    static MlpParams init(std::size_t feature_dim, std::size_t hidden_dim, int num_classes,
                          Rng& rng);

    std::size_t feature_dim() const { return layers.front().weights.cols(); }
    std::size_t hidden_dim() const { return layers.front().weights.rows(); }
    int num_classes() const { return static_cast<int>(layers.back().weights.rows()); }

    void validate() const;  // shapes chain, all values finite
};

struct ForwardCache {
    Matrix logits;                        // N x C
    std::vector<Matrix> pre_activations;  // z per hidden layer
    std::vector<Matrix> activations;      // relu(z) per hidden layer
    ProbMatrix probs;
};

// Softmax is computed with per-row max subtraction; output row sums are
// checked unconditionally (training correctness depends on it).
ForwardCache forward_cache(const MlpParams& params, const Matrix& features);
ProbMatrix forward(const MlpParams& params, const Matrix& features);

struct Gradients {
    std::vector<Layer> layers;  // same shapes as the parameters

    static Gradients zeros_like(const MlpParams& params);
    void accumulate(const Gradients& other);
    void scale(double s);
};

// Reverse pass from a gradient on the logits (loss layers fuse softmax+CE, so
// they hand over d(loss)/d(logits) directly).
Gradients backward(const MlpParams& params, const Matrix& features, const ForwardCache& cache,
                   const Matrix& grad_logits);

struct AdamState {
    std::vector<Layer> m;  // first moments
    std::vector<Layer> v;  // second moments

    static AdamState zeros_like(const MlpParams& params);
};

// Standard bias-corrected Adam; t is 1-based.
void adam_step(MlpParams& params, const Gradients& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps_adam, long t);

}  // namespace pointmatch
