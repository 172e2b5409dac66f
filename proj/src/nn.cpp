#include "gridnav/nn.hpp"

#include <cmath>
#include <numeric>

namespace gridnav::nn {

MlpNetwork MlpNetwork::init(const std::vector<int>& layer_sizes, std::uint64_t seed,
                            Activation final_activation) {
    if (layer_sizes.size() < 2)
        throw std::invalid_argument("network needs at least input and output sizes");
    for (int s : layer_sizes)
        if (s <= 0) throw std::invalid_argument("layer sizes must be positive");

    std::mt19937_64 rng(seed);
    MlpNetwork net;
    for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
        Layer layer;
        int in = layer_sizes[i];
        int out = layer_sizes[i + 1];
        bool last = (i + 2 == layer_sizes.size());
        layer.activation = last ? final_activation : Activation::ReLU;
        double stddev = std::sqrt((layer.activation == Activation::ReLU ? 2.0 : 1.0) / in);
        std::normal_distribution<double> dist(0.0, stddev);
        layer.weights.resize(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) layer.weights(r, c) = dist(rng);
        layer.biases = Vector::Zero(out);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Matrix MlpNetwork::forward(const Matrix& input, ForwardCache* cache) const {
    if (layers.empty()) throw std::logic_error("forward on empty network");
    if (input.cols() != input_size())
        throw std::invalid_argument("input width " + std::to_string(input.cols()) +
                                    " != network input size " + std::to_string(input_size()));
    if (cache) {
        cache->pre.clear();
        cache->post.clear();
        cache->post.push_back(input);
    }
    Matrix x = input;
    for (const Layer& layer : layers) {
        Matrix z = x * layer.weights.transpose();
        z.rowwise() += layer.biases.transpose();
        if (cache) cache->pre.push_back(z);
        if (layer.activation == Activation::ReLU) x = z.cwiseMax(0.0);
        else x = std::move(z);
        if (cache) cache->post.push_back(x);
    }
    return x;
}

Vector MlpNetwork::forward1(const Vector& input) const {
    Matrix row = input.transpose();
    return forward(row).row(0).transpose();
}

Gradients MlpNetwork::backward(const ForwardCache& cache, const Matrix& output_grad,
                               Matrix* input_grad) const {
    if (cache.pre.size() != layers.size() || cache.post.size() != layers.size() + 1)
        throw std::invalid_argument("cache does not match network depth");
    if (output_grad.rows() != cache.post.back().rows() ||
        output_grad.cols() != cache.post.back().cols())
        throw std::invalid_argument("output gradient shape mismatch");

    Gradients g;
    g.weights.resize(layers.size());
    g.biases.resize(layers.size());
    Matrix delta = output_grad;
    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
        const Layer& layer = layers[static_cast<std::size_t>(l)];
        if (layer.activation == Activation::ReLU) {
            delta.array() *=
                (cache.pre[static_cast<std::size_t>(l)].array() > 0.0).cast<double>();
        }
        g.weights[static_cast<std::size_t>(l)] =
            delta.transpose() * cache.post[static_cast<std::size_t>(l)];
        g.biases[static_cast<std::size_t>(l)] = delta.colwise().sum().transpose();
        if (l > 0 || input_grad) delta = delta * layer.weights;
    }
    if (input_grad) *input_grad = std::move(delta);
    return g;
}

long MlpNetwork::param_count() const {
    long n = 0;
    for (const Layer& l : layers) n += l.weights.size() + l.biases.size();
    return n;
}

std::vector<int> MlpNetwork::layer_sizes() const {
    std::vector<int> sizes;
    if (layers.empty()) return sizes;
    sizes.push_back(input_size());
    for (const Layer& l : layers) sizes.push_back(static_cast<int>(l.weights.rows()));
    return sizes;
}

Gradients zeros_like(const MlpNetwork& net) {
    Gradients g;
    for (const Layer& l : net.layers) {
        g.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        g.biases.push_back(Vector::Zero(l.biases.size()));
    }
    return g;
}

double squared_norm(const Gradients& g) {
    double s = 0.0;
    for (const auto& w : g.weights) s += w.squaredNorm();
    for (const auto& b : g.biases) s += b.squaredNorm();
    return s;
}

bool all_finite(const Gradients& g) {
    for (const auto& w : g.weights)
        if (!w.allFinite()) return false;
    for (const auto& b : g.biases)
        if (!b.allFinite()) return false;
    return true;
}

void clip_global_norm(std::vector<Gradients*> grads, double max_norm) {
    double sq = 0.0;
    for (const Gradients* g : grads) sq += squared_norm(*g);
    double norm = std::sqrt(sq);
    if (norm <= max_norm || norm == 0.0) return;
    double scale = max_norm / norm;
    for (Gradients* g : grads) {
        for (auto& w : g->weights) w *= scale;
        for (auto& b : g->biases) b *= scale;
    }
}

void sgd_step(MlpNetwork& net, const Gradients& g, double lr) {
    if (!all_finite(g)) throw TrainingError("non-finite gradients in sgd_step");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        net.layers[i].weights -= lr * g.weights[i];
        net.layers[i].biases -= lr * g.biases[i];
    }
}

AdamState AdamState::like(const MlpNetwork& net) {
    AdamState s;
    for (const Layer& l : net.layers) {
        s.m_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        s.v_weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
        s.m_biases.push_back(Vector::Zero(l.biases.size()));
        s.v_biases.push_back(Vector::Zero(l.biases.size()));
    }
    return s;
}

void adam_step(MlpNetwork& net, const Gradients& g, AdamState& state, double lr) {
    if (!all_finite(g)) throw TrainingError("non-finite gradients in adam_step");
    ++state.step;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        auto& m_w = state.m_weights[i];
        auto& v_w = state.v_weights[i];
        m_w = state.beta1 * m_w + (1.0 - state.beta1) * g.weights[i];
        v_w = state.beta2 * v_w.array().matrix() +
              (1.0 - state.beta2) * g.weights[i].array().square().matrix();
        net.layers[i].weights.array() -=
            lr * (m_w.array() / bc1) / ((v_w.array() / bc2).sqrt() + state.eps);

        auto& m_b = state.m_biases[i];
        auto& v_b = state.v_biases[i];
        m_b = state.beta1 * m_b + (1.0 - state.beta1) * g.biases[i];
        v_b = state.beta2 * v_b.array().matrix() +
              (1.0 - state.beta2) * g.biases[i].array().square().matrix();
        net.layers[i].biases.array() -=
            lr * (m_b.array() / bc1) / ((v_b.array() / bc2).sqrt() + state.eps);
    }
}

HuberResult huber(double pred, double target, double delta) {
    if (!std::isfinite(pred) || !std::isfinite(target))
        throw TrainingError("non-finite huber inputs");
    double e = pred - target;
    HuberResult r;
    if (std::abs(e) <= delta) {
        r.value = 0.5 * e * e;
        r.grad = e;
    } else {
        r.value = delta * (std::abs(e) - 0.5 * delta);
        r.grad = e > 0 ? delta : -delta;
    }
    return r;
}

Vector softmax(const Vector& logits) {
    if (logits.size() == 0) throw std::invalid_argument("softmax of empty logits");
    Vector shifted = logits.array() - logits.maxCoeff();
    Vector e = shifted.array().exp();
    return e / e.sum();
}

Vector log_softmax(const Vector& logits) {
    if (logits.size() == 0) throw std::invalid_argument("log_softmax of empty logits");
    Vector shifted = logits.array() - logits.maxCoeff();
    double lse = std::log(shifted.array().exp().sum());
    return shifted.array() - lse;
}

int categorical_sample(const Vector& probs, std::mt19937_64& rng) {
    if (probs.size() == 0) throw std::invalid_argument("sample from empty distribution");
    if (std::abs(probs.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities must sum to 1");
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;  // guard against rounding at 1.0
}

double entropy(const Vector& probs) {
    double h = 0.0;
    for (int i = 0; i < probs.size(); ++i)
        if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
    return h;
}

}  // namespace gridnav::nn
