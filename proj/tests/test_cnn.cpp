#include <gtest/gtest.h>

#include <cstring>

#include "fixtures.hpp"

using namespace sleeper;
using cnn::CnnConfig;
using cnn::CnnModel;

namespace {

std::vector<double> random_input(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

double example_loss(const CnnModel<double>& m, const std::vector<double>& x, int label) {
    const auto tr = m.forward(std::span<const double>(x));
    return CnnModel<double>::cross_entropy(label, tr.probs);
}

// Micro stack fed from whole epochs: 6000 samples averaged down to 200.
CnnConfig tiny_config() {
    auto c = CnnConfig::micro();
    c.decimation = 30;
    c.input_scale = 0.02;
    c.lr = 1e-2;
    c.train_epochs = 40;
    c.lr_decay_after = 40;
    c.seed = 3;
    return c;
}

const std::vector<Recording>& small_corpus() {
    static const auto c = [] {
        synth::SynthConfig cfg;
        cfg.n_subjects = 5;
        cfg.epochs_per_subject = 10;
        cfg.seed = 21;
        return synth::generate_synthetic(cfg);
    }();
    return c;
}

template <class T>
std::vector<cnn::TrainingBatch<T>> batches_for(const CnnModel<T>& m, const std::vector<Recording>& recs) {
    std::vector<cnn::TrainingBatch<T>> out;
    for (const auto& r : recs) {
        cnn::TrainingBatch<T> b;
        for (std::size_t e = 0; e < r.epochs.size(); ++e) {
            b.inputs.push_back(m.prepare(r.epochs[e]));
            b.labels.push_back(stage_code((*r.labels)[e]));
        }
        out.push_back(std::move(b));
    }
    return out;
}

}  // namespace

TEST(CnnConfig, FullStackLengths) {
    const auto cfg = CnnConfig::full();
    const std::vector<std::pair<int, int>> expected = {{5800, 725}, {715, 143}, {130, 26}};
    EXPECT_EQ(cfg.lengths(), expected);
    EXPECT_EQ(cfg.flatten_dim(), 2496);
    EXPECT_EQ(cfg.lr, 1e-4);
    EXPECT_EQ(cfg.train_epochs, 40);
    EXPECT_EQ(cfg.lr_decay_after, 10);
    EXPECT_EQ(CnnConfig::desk().flatten_dim(), 160);
    EXPECT_EQ(CnnConfig::micro().flatten_dim(), 16);
}

TEST(CnnConfig, InvalidStacksRejected) {
    auto c = CnnConfig::full();
    c.conv[1].in_ch = 31;
    EXPECT_THROW(c.validate(), ConfigError);
    c = CnnConfig::micro();
    c.input_length = 20;
    EXPECT_THROW(c.validate(), ConfigError);
    c = CnnConfig::micro();
    c.lr = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(CnnForward, ZeroInputFullModel) {
    const auto m = CnnModel<float>::initialized(CnnConfig::full());
    const auto p = cnn::forward(m, fixtures::zero_epoch());
    ASSERT_EQ(p.embedding.size(), 2496u);
    for (double v : p.embedding) EXPECT_EQ(v, 0.0);
    ASSERT_EQ(p.probs.size(), 5u);
    for (double s : p.probs) EXPECT_NEAR(s, 0.2, 1e-7);
}

TEST(CnnForward, ZeroScaledInputMatchesZeroInput) {
    auto m = CnnModel<double>::initialized(CnnConfig::micro());
    std::mt19937_64 rng(4);
    std::normal_distribution<double> d(0.0, 0.3);
    for (auto& v : m.params()) v += d(rng);  // nonzero biases too
    auto x = random_input(9 * 200, rng);
    for (auto& v : x) v *= 0.0;
    const std::vector<double> zeros(9 * 200, 0.0);
    const auto a = cnn::forward(m, std::span<const double>(x)), b = cnn::forward(m, std::span<const double>(zeros));
    EXPECT_EQ(a.embedding, b.embedding);
    EXPECT_EQ(a.probs, b.probs);
}

TEST(CnnForward, OutputsAreValid) {
    const auto m = CnnModel<float>::initialized(CnnConfig::desk());
    for (const auto& r : small_corpus())
        for (const auto& e : r.epochs) {
            const auto p = cnn::forward(m, e);
            ASSERT_EQ(p.embedding.size(), 160u);
            for (double v : p.embedding) ASSERT_GE(v, 0.0);
            double sum = 0.0;
            for (double s : p.probs) {
                ASSERT_GT(s, 0.0);
                ASSERT_LT(s, 1.0);
                sum += s;
            }
            ASSERT_NEAR(sum, 1.0, 1e-6);
        }
}

TEST(CnnForward, WrongInputShape) {
    const auto m = CnnModel<double>::initialized(CnnConfig::micro());
    const std::vector<double> x(9 * 199, 0.0);
    EXPECT_THROW(m.forward(std::span<const double>(x)), ShapeError);
    EXPECT_THROW(m.prepare(fixtures::zero_epoch()), ShapeError);
}

TEST(CnnForward, SoftmaxTranslationInvariance) {
    auto m = CnnModel<double>::initialized(CnnConfig::micro());
    std::mt19937_64 rng(6);
    const auto x = random_input(9 * 200, rng);
    const auto before = cnn::forward(m, std::span<const double>(x));
    for (double c : {-50.0, -1.0, 0.3, 7.0, 400.0}) {
        auto shifted = m;
        for (int k = 0; k < 5; ++k) shifted.params()[m.layout().fc_b + k] += c;
        const auto after = cnn::forward(shifted, std::span<const double>(x));
        for (int k = 0; k < 5; ++k) EXPECT_NEAR(after.probs[k], before.probs[k], 1e-9);
    }
}

TEST(CnnForward, NonFiniteParametersRaise) {
    auto m = CnnModel<float>::initialized(CnnConfig::desk());
    m.params()[m.layout().fc_b + 2] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(cnn::forward(m, fixtures::zero_epoch()), NumericsError);
    EXPECT_FALSE(m.all_finite());
}

TEST(CnnLoss, Examples) {
    EXPECT_LE(cnn::loss(std::vector<double>{1, 0, 0, 0, 0}, std::vector<double>{1, 0, 0, 0, 0}), 1e-9);
    EXPECT_NEAR(cnn::loss(std::vector<double>{0, 0, 0, 1, 0}, std::vector<double>(5, 0.2)), std::log(5.0), 1e-12);
    EXPECT_NEAR(cnn::loss(std::vector<double>{0, 0, 1, 0, 0}, std::vector<double>{0.1, 0.2, 0.5, 0.1, 0.1}),
                std::log(2.0), 1e-12);
    // A zero probability at the true class is clamped, not an error.
    const double clamped = cnn::loss(std::vector<double>{0, 1, 0, 0, 0}, std::vector<double>{1, 0, 0, 0, 0});
    EXPECT_TRUE(std::isfinite(clamped));
    EXPECT_NEAR(clamped, -std::log(1e-12), 1e-9);
}

TEST(CnnBackward, GradientMatchesCentralDifferences) {
    auto m = CnnModel<double>::initialized(CnnConfig::micro());
    std::mt19937_64 rng(8);
    std::normal_distribution<double> d(0.0, 0.1);
    for (auto& v : m.params()) v += d(rng);
    const auto x = random_input(9 * 200, rng);
    const int label = 2;

    std::vector<double> grad(m.params().size(), 0.0);
    m.backward(m.forward(std::span<const double>(x)), label, 1.0, grad);

    const double delta = 1e-3;
    double worst = 0.0;
    std::size_t worst_at = 0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
        auto plus = m, minus = m;
        plus.params()[i] += delta;
        minus.params()[i] -= delta;
        const double numeric = (example_loss(plus, x, label) - example_loss(minus, x, label)) / (2.0 * delta);
        const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
        const double rel = std::abs(numeric - grad[i]) / scale;
        if (rel > worst) {
            worst = rel;
            worst_at = i;
        }
    }
    EXPECT_LT(worst, 1e-3) << "parameter " << worst_at;
}

TEST(CnnTrain, TinyNetHalvesLoss) {
    auto m = CnnModel<double>::initialized(tiny_config());
    const auto batches = batches_for(m, small_corpus());
    std::vector<double> grad(m.params().size());
    double initial = 0.0;
    for (const auto& b : batches) initial += cnn::batch_gradient(m, b, grad);
    initial /= static_cast<double>(batches.size());

    const auto res = cnn::train(m, batches);
    ASSERT_EQ(res.loss_trace.size(), 40u);
    for (double l : res.loss_trace) EXPECT_TRUE(std::isfinite(l));
    EXPECT_LT(res.loss_trace.back(), 0.5 * initial) << "initial " << initial;
}

TEST(CnnTrain, SameSeedSameWeights) {
    auto cfg = tiny_config();
    cfg.train_epochs = 5;
    auto a = CnnModel<float>::initialized(cfg), b = CnnModel<float>::initialized(cfg);
    const auto batches = batches_for(a, small_corpus());
    const auto ra = cnn::train(a, batches), rb = cnn::train(b, batches);
    ASSERT_EQ(a.params().size(), b.params().size());
    EXPECT_EQ(std::memcmp(a.params().data(), b.params().data(), a.params().size() * sizeof(float)), 0);
    EXPECT_EQ(ra.loss_trace, rb.loss_trace);
}

TEST(CnnTrain, Errors) {
    auto m = CnnModel<float>::initialized(tiny_config());
    EXPECT_THROW(cnn::train(m, std::vector<cnn::TrainingBatch<float>>{}), FitError);
    auto batches = batches_for(m, small_corpus());
    batches[0].inputs[0][17] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(cnn::train(m, batches), NumericsError);
}

TEST(EmbedAll, ShapesPurityAndSign) {
    const auto m = CnnModel<float>::initialized(CnnConfig::desk());
    const auto empty = cnn::embed_all(m, std::vector<std::vector<float>>{});
    EXPECT_EQ(empty.rows, 0u);
    EXPECT_EQ(empty.cols, 160u);

    const auto& r = small_corpus()[0];
    std::vector<std::vector<float>> inputs = {m.prepare(r.epochs[0]), m.prepare(r.epochs[1]), m.prepare(r.epochs[0])};
    const auto h = cnn::embed_all(m, inputs, 2);
    ASSERT_EQ(h.rows, 3u);
    for (std::size_t j = 0; j < h.cols; ++j) EXPECT_EQ(h(0, j), h(2, j));
    for (double v : h.data) EXPECT_GE(v, 0.0);

    const auto all = cnn::embed_all(m, small_corpus(), 1);
    EXPECT_EQ(all.rows, 50u);
    for (std::size_t j = 0; j < all.cols; ++j) EXPECT_EQ(all(1, j), h(1, j));
}

TEST(Checkpoint, RoundTrip) {
    const auto m = CnnModel<float>::initialized(CnnConfig::desk());
    const auto bytes = cnn::encode_checkpoint(m);
    EXPECT_EQ(bytes.substr(0, 4), "SLCN");
    const auto back = cnn::decode_checkpoint(bytes);
    EXPECT_EQ(back.config().profile, "desk");
    EXPECT_EQ(back.embedding_dim(), 160);
    EXPECT_EQ(cnn::encode_checkpoint(back), bytes);
}

TEST(Checkpoint, CorruptionIsDetected) {
    const auto bytes = cnn::encode_checkpoint(CnnModel<float>::initialized(CnnConfig::micro()));
    auto bad = bytes;
    bad[1] = 'X';
    EXPECT_THROW(cnn::decode_checkpoint(bad), FormatError);
    EXPECT_THROW(cnn::decode_checkpoint(bytes.substr(0, bytes.size() - 3)), FormatError);
    EXPECT_THROW(cnn::decode_checkpoint(bytes + "z"), FormatError);
    bad = bytes;
    bad[4] = 7;  // version
    EXPECT_THROW(cnn::decode_checkpoint(bad), FormatError);
}
