#include <doctest.h>

#include <cmath>
#include <random>

#include "gridnav/nn.hpp"
#include "gridnav/validation.hpp"

using namespace gridnav;
using namespace gridnav::nn;

namespace {

// Straightforward per-neuron re-evaluation, no Eigen: the forward oracle.
std::vector<double> naive_forward(const MlpNetwork& net, const std::vector<double>& input) {
    std::vector<double> x = input;
    for (const Layer& layer : net.layers) {
        std::vector<double> y(static_cast<std::size_t>(layer.weights.rows()), 0.0);
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            double acc = layer.biases[r];
            for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
                acc += layer.weights(r, c) * x[static_cast<std::size_t>(c)];
            if (layer.activation == Activation::ReLU && acc < 0.0) acc = 0.0;
            y[static_cast<std::size_t>(r)] = acc;
        }
        x = std::move(y);
    }
    return x;
}

}  // namespace

TEST_CASE("init_network shapes, determinism, and validation") {
    MlpNetwork net = MlpNetwork::init({4, 8, 2}, 7);
    CHECK(net.param_count() == 58);
    CHECK(net.input_size() == 4);
    CHECK(net.output_size() == 2);
    CHECK(net.layers[0].activation == Activation::ReLU);
    CHECK(net.layers[1].activation == Activation::Identity);
    for (const auto& l : net.layers) CHECK(l.biases.isZero());

    MlpNetwork again = MlpNetwork::init({4, 8, 2}, 7);
    for (std::size_t i = 0; i < net.layers.size(); ++i)
        CHECK(net.layers[i].weights == again.layers[i].weights);

    MlpNetwork other = MlpNetwork::init({4, 8, 2}, 8);
    CHECK(net.layers[0].weights != other.layers[0].weights);

    CHECK_THROWS_AS(MlpNetwork::init({4}, 1), std::invalid_argument);
    CHECK_THROWS_AS(MlpNetwork::init({4, 0, 2}, 1), std::invalid_argument);
}

TEST_CASE("param_count matches the formula and is additive") {
    CHECK(MlpNetwork::init({35, 256, 256, 256, 4}, 1).param_count() == 141828);
    long ab = MlpNetwork::init({7, 11}, 1).param_count();
    long bc = MlpNetwork::init({11, 3}, 1).param_count();
    CHECK(MlpNetwork::init({7, 11, 3}, 1).param_count() == ab + bc);
    // count equals the flattened parameter total
    MlpNetwork net = MlpNetwork::init({5, 9, 4}, 2);
    long flat = 0;
    for (const auto& l : net.layers) flat += l.weights.size() + l.biases.size();
    CHECK(net.param_count() == flat);
}

TEST_CASE("forward basics") {
    SUBCASE("identity weights with ReLU clip negatives") {
        MlpNetwork net;
        Layer l;
        l.weights = Matrix::Identity(2, 2);
        l.biases = Vector::Zero(2);
        l.activation = Activation::ReLU;
        net.layers.push_back(l);
        Vector in(2);
        in << -1.0, 2.0;
        Vector out = net.forward1(in);
        CHECK(out[0] == 0.0);
        CHECK(out[1] == 2.0);
    }
    SUBCASE("zero weights pass the bias through") {
        MlpNetwork net;
        Layer l;
        l.weights = Matrix::Zero(1, 3);
        l.biases = Vector::Constant(1, 3.0);
        l.activation = Activation::Identity;
        net.layers.push_back(l);
        Vector in(3);
        in << 5.0, -2.0, 0.5;
        CHECK(net.forward1(in)[0] == 3.0);
    }
    SUBCASE("dimension mismatch throws") {
        MlpNetwork net = MlpNetwork::init({3, 2}, 1);
        Matrix bad(1, 4);
        bad.setZero();
        CHECK_THROWS_AS(net.forward(bad), std::invalid_argument);
    }
}

TEST_CASE("forward matches an independent naive evaluation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> size(1, 16);
        std::vector<int> sizes{size(rng), size(rng), size(rng), size(rng)};
        MlpNetwork net = MlpNetwork::init(sizes, rng());
        std::vector<double> input(static_cast<std::size_t>(sizes[0]));
        for (auto& v : input) v = unit(rng);
        Vector in = Eigen::Map<const Vector>(input.data(), sizes[0]);
        Vector got = net.forward1(in);
        std::vector<double> want = naive_forward(net, input);
        REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
        for (Eigen::Index i = 0; i < got.size(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
}

TEST_CASE("batched forward equals row-by-row forward") {
    MlpNetwork net = MlpNetwork::init({6, 12, 3}, 21);
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix batch(5, 6);
    for (Eigen::Index r = 0; r < 5; ++r)
        for (Eigen::Index c = 0; c < 6; ++c) batch(r, c) = unit(rng);
    Matrix out = net.forward(batch);
    for (Eigen::Index r = 0; r < 5; ++r) {
        Vector row = net.forward1(batch.row(r).transpose());
        for (Eigen::Index c = 0; c < 3; ++c) CHECK(out(r, c) == row[c]);
    }
}

TEST_CASE("backward zero output-gradient gives zero parameter gradients") {
    MlpNetwork net = MlpNetwork::init({4, 6, 2}, 3);
    Matrix in(1, 4);
    in << 0.3, -0.2, 0.9, 0.1;
    ForwardCache cache;
    net.forward(in, &cache);
    Gradients g = net.backward(cache, Matrix::Zero(1, 2));
    CHECK(squared_norm(g) == 0.0);
}

TEST_CASE("backward single identity layer is the outer product") {
    MlpNetwork net;
    Layer l;
    l.weights = Matrix::Zero(2, 3);
    l.weights << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
    l.biases = Vector::Zero(2);
    l.activation = Activation::Identity;
    net.layers.push_back(l);

    Matrix in(1, 3);
    in << 0.5, -1.0, 2.0;
    ForwardCache cache;
    net.forward(in, &cache);
    Matrix og(1, 2);
    og << 2.0, -3.0;
    Gradients g = net.backward(cache, og);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 3; ++c) CHECK(g.weights[0](r, c) == og(0, r) * in(0, c));
    CHECK(g.biases[0][0] == 2.0);
    CHECK(g.biases[0][1] == -3.0);
}

TEST_CASE("gradient check: analytic backward vs central finite differences") {
    auto result = validation::gradient_check(100, 12345);
    CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("gradient check fails under an injected bug (negative control)") {
    auto result = validation::gradient_check(10, 12345, 1e-5, true);
    CHECK(result.max_rel_error > 1e-4);
}

TEST_CASE("sgd_step examples") {
    MlpNetwork net;
    Layer l;
    l.weights = Matrix::Constant(1, 1, 1.0);
    l.biases = Vector::Zero(1);
    l.activation = Activation::Identity;
    net.layers.push_back(l);

    Gradients g = zeros_like(net);
    SUBCASE("zero gradient is the identity") {
        sgd_step(net, g, 0.1);
        CHECK(net.layers[0].weights(0, 0) == 1.0);
    }
    SUBCASE("w=1, g=2, lr=0.1 gives 0.8") {
        g.weights[0](0, 0) = 2.0;
        sgd_step(net, g, 0.1);
        CHECK(net.layers[0].weights(0, 0) == doctest::Approx(0.8));
    }
    SUBCASE("non-finite gradients are a training error") {
        g.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(sgd_step(net, g, 0.1), TrainingError);
    }
}

TEST_CASE("adam first step matches the hand-computed bias-corrected update") {
    MlpNetwork net = MlpNetwork::init({3, 4, 2}, 17);
    MlpNetwork before = net;
    AdamState state = AdamState::like(net);
    Gradients g = zeros_like(net);
    for (auto& w : g.weights) w.setConstant(0.5);
    for (auto& b : g.biases) b.setConstant(0.5);

    double lr = 1e-3;
    adam_step(net, g, state, lr);
    // m_hat = g, v_hat = g^2 after bias correction, so the step is
    // lr * g / (|g| + eps).
    double expected_delta = lr * 0.5 / (0.5 + state.eps);
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        Matrix diff = before.layers[i].weights - net.layers[i].weights;
        for (Eigen::Index k = 0; k < diff.size(); ++k)
            CHECK(diff.data()[k] == doctest::Approx(expected_delta).epsilon(1e-12));
    }
    CHECK(state.step == 1);
}

TEST_CASE("adam with zero gradients keeps parameters fixed") {
    MlpNetwork net = MlpNetwork::init({3, 4, 2}, 17);
    MlpNetwork before = net;
    AdamState state = AdamState::like(net);
    adam_step(net, zeros_like(net), state, 1e-3);
    for (std::size_t i = 0; i < net.layers.size(); ++i)
        CHECK(net.layers[i].weights == before.layers[i].weights);
}

TEST_CASE("global norm clipping caps the joint norm") {
    MlpNetwork a = MlpNetwork::init({2, 2}, 1);
    Gradients ga = zeros_like(a);
    ga.weights[0].setConstant(3.0);  // norm contribution 36
    Gradients gb = zeros_like(a);
    gb.weights[0].setConstant(4.0);  // norm contribution 64
    clip_global_norm({&ga, &gb}, 5.0);
    double norm = std::sqrt(squared_norm(ga) + squared_norm(gb));
    CHECK(norm == doctest::Approx(5.0));
    // direction preserved
    CHECK(ga.weights[0](0, 0) / gb.weights[0](0, 0) == doctest::Approx(0.75));

    Gradients gc = zeros_like(a);
    gc.weights[0].setConstant(0.1);
    clip_global_norm({&gc}, 5.0);
    CHECK(gc.weights[0](0, 0) == 0.1);  // under the cap: untouched
}

TEST_CASE("huber value and gradient") {
    CHECK(huber(1.0, 1.0, 1.0).value == 0.0);
    CHECK(huber(1.0, 1.0, 1.0).grad == 0.0);
    auto quad = huber(1.5, 1.0, 1.0);  // inside delta
    CHECK(quad.value == doctest::Approx(0.125));
    CHECK(quad.grad == doctest::Approx(0.5));
    auto lin = huber(5.0, 1.0, 1.0);  // outside delta
    CHECK(lin.value == doctest::Approx(1.0 * (4.0 - 0.5)));
    CHECK(lin.grad == 1.0);
    auto neg = huber(-5.0, 1.0, 1.0);
    CHECK(neg.grad == -1.0);
    CHECK_THROWS_AS(huber(std::numeric_limits<double>::infinity(), 0.0, 1.0), TrainingError);
}

TEST_CASE("softmax, log_softmax, entropy") {
    Vector logits = Vector::Zero(4);
    Vector p = softmax(logits);
    for (int i = 0; i < 4; ++i) CHECK(p[i] == doctest::Approx(0.25));
    CHECK(entropy(p) == doctest::Approx(std::log(4.0)));

    Vector lp = log_softmax(logits);
    for (int i = 0; i < 4; ++i) CHECK(lp[i] == doctest::Approx(std::log(0.25)));

    // extreme logits stay finite and sum to one
    Vector big(3);
    big << 1000.0, -1000.0, 999.0;
    Vector pb = softmax(big);
    CHECK(pb.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
        CHECK(std::isfinite(pb[i]));
        CHECK(pb[i] > 0.0);
    }
    CHECK_THROWS_AS(softmax(Vector()), std::invalid_argument);
}

TEST_CASE("property: softmax sums to one and stays positive") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> logit(-30.0, 30.0);
    for (int trial = 0; trial < 200; ++trial) {
        Vector logits(4);
        for (int i = 0; i < 4; ++i) logits[i] = logit(rng);
        Vector p = softmax(logits);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        for (int i = 0; i < 4; ++i) CHECK(p[i] > 0.0);
        CHECK(entropy(p) >= 0.0);
        CHECK(entropy(p) <= std::log(4.0) + 1e-12);
    }
}

TEST_CASE("categorical_sample follows the distribution") {
    std::mt19937_64 rng(41);
    Vector p(4);
    p << 0.1, 0.2, 0.3, 0.4;
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(categorical_sample(p, rng))];
    for (int i = 0; i < 4; ++i)
        CHECK(static_cast<double>(counts[static_cast<std::size_t>(i)]) / n ==
              doctest::Approx(p[i]).epsilon(0.05));

    Vector bad(2);
    bad << 0.5, 0.6;
    CHECK_THROWS_AS(categorical_sample(bad, rng), std::invalid_argument);
}
