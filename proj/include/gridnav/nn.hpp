#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

#include "gridnav/errors.hpp"

namespace gridnav::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation : std::uint8_t { ReLU, Identity };

struct Layer {
    Matrix weights;  // out x in
    Vector biases;   // out
    Activation activation = Activation::ReLU;
};

/// Per-layer tensors saved by forward() so backward() can replay the chain
/// rule. post[0] is the input batch; pre[i]/post[i+1] belong to layer i.
struct ForwardCache {
    std::vector<Matrix> pre;
    std::vector<Matrix> post;
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

/// Dense feedforward network, 64-bit throughout. Hidden layers ReLU, final
/// layer Identity. Plain value type: copy to snapshot, no hidden state.
class MlpNetwork {
public:
    MlpNetwork() = default;

    /// He-style normal init (std = sqrt(2/fan_in); a final Identity layer
    /// uses sqrt(1/fan_in)), zero biases. Deterministic for a fixed seed.
    /// `final_activation` is ReLU for trunk networks that feed other heads.
    static MlpNetwork init(const std::vector<int>& layer_sizes, std::uint64_t seed,
                           Activation final_activation = Activation::Identity);

    /// Batched forward pass: input is (batch x input_size). Pass a cache to
    /// enable backward().
    Matrix forward(const Matrix& input, ForwardCache* cache = nullptr) const;

    /// Single-sample convenience.
    Vector forward1(const Vector& input) const;

    /// Exact reverse-mode gradients of the scalar loss whose output gradient
    /// is supplied (batch x output_size). Optionally also d(loss)/d(input),
    /// which is what lets head networks chain into a shared trunk.
    Gradients backward(const ForwardCache& cache, const Matrix& output_grad,
                       Matrix* input_grad = nullptr) const;

    int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols()); }
    int output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weights.rows()); }
    long param_count() const;
    std::vector<int> layer_sizes() const;

    std::vector<Layer> layers;
};

Gradients zeros_like(const MlpNetwork& net);
double squared_norm(const Gradients& g);
bool all_finite(const Gradients& g);

/// Global-norm clipping across one or more gradient sets (joint norm).
void clip_global_norm(std::vector<Gradients*> grads, double max_norm);

/// Plain gradient descent: params -= lr * grad. Throws TrainingError on
/// non-finite gradients.
void sgd_step(MlpNetwork& net, const Gradients& g, double lr);

/// Adam moment accumulators; shapes mirror the network.
struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Vector> m_biases, v_biases;

    static AdamState like(const MlpNetwork& net);
};

/// Adam update with bias correction. Throws TrainingError on non-finite
/// gradients.
void adam_step(MlpNetwork& net, const Gradients& g, AdamState& state, double lr);

// ---- losses / distributions ----

struct HuberResult {
    double value = 0.0;
    double grad = 0.0;  // d(value)/d(pred)
};

HuberResult huber(double pred, double target, double delta);

/// Numerically stable softmax (max subtraction). Throws on empty input.
Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

/// Inverse-CDF draw over `probs` (must sum to 1 within 1e-12).
int categorical_sample(const Vector& probs, std::mt19937_64& rng);

double entropy(const Vector& probs);

}  // namespace gridnav::nn
