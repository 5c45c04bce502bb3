#include "pointmatch/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace pointmatch {

Matrix extract_features(const PointCloud& view, std::size_t k_feat) {
    view.validate();
    if (k_feat < 1) throw std::invalid_argument("extract_features: k_feat must be >= 1");
    const std::size_t n = view.size();

    std::array<double, 3> centroid{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < 3; ++a) centroid[a] += view.positions(i, a);
    for (double& v : centroid) v /= static_cast<double>(n);

    const auto neighbors = knn_indices(view.positions, k_feat);

    Matrix feats(n, kFeatureDim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nb = neighbors[i];
        std::array<double, 3> mean_pos{0, 0, 0}, mean_rgb{0, 0, 0};
        for (std::size_t j : nb) {
            for (std::size_t a = 0; a < 3; ++a) {
                mean_pos[a] += view.positions(j, a);
                mean_rgb[a] += view.colors(j, a);
            }
        }
        for (std::size_t a = 0; a < 3; ++a) {
            mean_pos[a] /= static_cast<double>(nb.size());
            mean_rgb[a] /= static_cast<double>(nb.size());
        }
        for (std::size_t a = 0; a < 3; ++a) {
            feats(i, a) = view.positions(i, a) - centroid[a];
            feats(i, 3 + a) = view.colors(i, a);
            feats(i, 6 + a) = mean_pos[a] - view.positions(i, a);
            feats(i, 9 + a) = mean_rgb[a];
        }
        feats(i, 12) = static_cast<double>(nb.size()) / static_cast<double>(k_feat);
    }
    return feats;
}

MlpParams MlpParams::init(std::size_t feature_dim, std::size_t hidden_dim, int num_classes,
                          Rng& rng) {
    if (num_classes < 2) throw std::invalid_argument("MlpParams: need at least 2 classes");
    const std::size_t dims[4] = {feature_dim, hidden_dim, hidden_dim,
                                 static_cast<std::size_t>(num_classes)};
    MlpParams p;
    for (int l = 0; l < 3; ++l) {
        Layer layer;
        layer.weights = Matrix(dims[l + 1], dims[l]);
        layer.biases.assign(dims[l + 1], 0.0);
        const double std_dev = std::sqrt(2.0 / static_cast<double>(dims[l]));
        for (double& w : layer.weights.data()) w = rng.normal(0.0, std_dev);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

void MlpParams::validate() const {
    if (layers.size() != 3) throw std::invalid_argument("MlpParams: expected 3 layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        if (layer.biases.size() != layer.weights.rows())
            throw std::invalid_argument("MlpParams: bias/weight shape mismatch");
        if (l > 0 && layer.weights.cols() != layers[l - 1].weights.rows())
            throw std::invalid_argument("MlpParams: layer shapes do not chain");
        for (double w : layer.weights.data())
            if (!std::isfinite(w)) throw std::invalid_argument("MlpParams: non-finite weight");
        for (double b : layer.biases)
            if (!std::isfinite(b)) throw std::invalid_argument("MlpParams: non-finite bias");
    }
}

namespace {

// out = x * W^T + b, rows of x are samples
Matrix affine(const Matrix& x, const Layer& layer) {
    const std::size_t n = x.rows();
    const std::size_t in = layer.weights.cols();
    const std::size_t out = layer.weights.rows();
    Matrix y(n, out);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double* yi = y.row(i);
        for (std::size_t o = 0; o < out; ++o) {
            double acc = layer.biases[o];
            const double* w = layer.weights.row(o);
            for (std::size_t k = 0; k < in; ++k) acc += w[k] * xi[k];
            yi[o] = acc;
        }
    }
    return y;
}

}  // namespace

ForwardCache forward_cache(const MlpParams& params, const Matrix& features) {
    params.validate();
    if (features.cols() != params.feature_dim())
        throw std::invalid_argument("forward: feature dimension mismatch");

    ForwardCache cache;
    Matrix x = features;
    for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
        Matrix z = affine(x, params.layers[l]);
        cache.pre_activations.push_back(z);
        for (double& v : z.data()) v = std::max(0.0, v);
        cache.activations.push_back(z);
        x = std::move(z);
    }
    cache.logits = affine(x, params.layers.back());

    const std::size_t n = cache.logits.rows();
    const std::size_t c = cache.logits.cols();
    cache.probs.probs = Matrix(n, c);
    for (std::size_t i = 0; i < n; ++i) {
        const double* zi = cache.logits.row(i);
        double zmax = zi[0];
        for (std::size_t j = 1; j < c; ++j) zmax = std::max(zmax, zi[j]);
        double sum = 0.0;
        double* pi = cache.probs.probs.row(i);
        for (std::size_t j = 0; j < c; ++j) {
            pi[j] = std::exp(zi[j] - zmax);
            sum += pi[j];
        }
        for (std::size_t j = 0; j < c; ++j) pi[j] /= sum;
    }
    cache.probs.validate();
    return cache;
}

ProbMatrix forward(const MlpParams& params, const Matrix& features) {
    return forward_cache(params, features).probs;
}

Gradients Gradients::zeros_like(const MlpParams& params) {
    Gradients g;
    for (const Layer& layer : params.layers) {
        Layer zero;
        zero.weights = Matrix(layer.weights.rows(), layer.weights.cols());
        zero.biases.assign(layer.biases.size(), 0.0);
        g.layers.push_back(std::move(zero));
    }
    return g;
}

void Gradients::accumulate(const Gradients& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& w = layers[l].weights.data();
        const auto& ow = other.layers[l].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += ow[i];
        for (std::size_t i = 0; i < layers[l].biases.size(); ++i)
            layers[l].biases[i] += other.layers[l].biases[i];
    }
}

void Gradients::scale(double s) {
    for (Layer& layer : layers) {
        for (double& w : layer.weights.data()) w *= s;
        for (double& b : layer.biases) b *= s;
    }
}

Gradients backward(const MlpParams& params, const Matrix& features, const ForwardCache& cache,
                   const Matrix& grad_logits) {
    const std::size_t n = features.rows();
    if (grad_logits.rows() != n || grad_logits.cols() != cache.logits.cols())
        throw std::invalid_argument("backward: grad_logits shape mismatch");

    Gradients grads = Gradients::zeros_like(params);
    Matrix delta = grad_logits;  // d(loss)/d(z) of the current layer

    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const Layer& layer = params.layers[l];
        const Matrix& input = (l == 0) ? features : cache.activations[l - 1];
        Layer& g = grads.layers[l];

        const std::size_t out = layer.weights.rows();
        const std::size_t in = layer.weights.cols();
        for (std::size_t i = 0; i < n; ++i) {
            const double* di = delta.row(i);
            const double* xi = input.row(i);
            for (std::size_t o = 0; o < out; ++o) {
                const double d = di[o];
                if (d == 0.0) continue;
                double* gw = g.weights.row(o);
                for (std::size_t k = 0; k < in; ++k) gw[k] += d * xi[k];
                g.biases[o] += d;
            }
        }

        if (l == 0) break;
        Matrix next(n, in);
        const Matrix& pre = cache.pre_activations[l - 1];
        for (std::size_t i = 0; i < n; ++i) {
            const double* di = delta.row(i);
            double* ni = next.row(i);
            for (std::size_t k = 0; k < in; ++k) {
                double acc = 0.0;
                for (std::size_t o = 0; o < out; ++o) acc += layer.weights(o, k) * di[o];
                ni[k] = pre(i, k) > 0.0 ? acc : 0.0;  // ReLU gate
            }
        }
        delta = std::move(next);
    }
    return grads;
}

AdamState AdamState::zeros_like(const MlpParams& params) {
    AdamState s;
    const Gradients z = Gradients::zeros_like(params);
    s.m = z.layers;
    s.v = z.layers;
    return s;
}

void adam_step(MlpParams& params, const Gradients& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps_adam, long t) {
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].weights.data();
        auto& b = params.layers[l].biases;
        const auto& gw = grads.layers[l].weights.data();
        const auto& gb = grads.layers[l].biases;
        auto& mw = state.m[l].weights.data();
        auto& mb = state.m[l].biases;
        auto& vw = state.v[l].weights.data();
        auto& vb = state.v[l].biases;

        auto update = [&](double& param, double& m, double& v, double g) {
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            param -= lr * m_hat / (std::sqrt(v_hat) + eps_adam);
        };
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], mw[i], vw[i], gw[i]);
        for (std::size_t i = 0; i < b.size(); ++i) update(b[i], mb[i], vb[i], gb[i]);
    }
}

}  // namespace pointmatch
