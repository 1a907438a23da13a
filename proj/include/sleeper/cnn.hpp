#pragma once

// 1-D convolutional epoch embedder trained end-to-end on stage labels.
//
// Architecture: N x [valid conv (stride 1) -> ReLU -> non-overlapping max
// pool], flatten (channel-major), one fully connected layer to 5 logits,
// softmax. After training the flattened conv output h(X) is the embedding.
//
// Inputs are preprocessed by block-averaging `decimation` samples and
// multiplying by `input_scale`; the default profile uses decimation 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sleeper/io.hpp"
#include "sleeper/matrix.hpp"
#include "sleeper/parallel.hpp"
#include "sleeper/types.hpp"

namespace sleeper::cnn {

struct ConvSpec {
    int in_ch;
    int out_ch;
    int kernel;
    int pool;
};

struct CnnConfig {
    std::string profile = "default";
    std::vector<ConvSpec> conv = {{9, 32, 201, 8}, {32, 64, 11, 5}, {64, 96, 14, 5}};
    int input_length = 6000;  // after decimation
    int decimation = 1;
    double input_scale = 0.02;  // 1 / 50 uV
    int n_classes = static_cast<int>(kNumStages);

    double lr = 1e-4;
    int lr_decay_after = 10;  // sweeps at full rate
    double lr_decay_factor = 10.0;
    int train_epochs = 40;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uint64_t seed = 1;

    // Per-layer output lengths: conv_len, pooled_len for each layer.
    std::vector<std::pair<int, int>> lengths() const {
        std::vector<std::pair<int, int>> out;
        int len = input_length;
        for (const auto& c : conv) {
            const int conv_len = len - c.kernel + 1;
            const int pooled = c.pool > 0 ? conv_len / c.pool : 0;
            out.emplace_back(conv_len, pooled);
            len = pooled;
        }
        return out;
    }

    int flatten_dim() const {
        const auto l = lengths();
        return l.empty() ? 0 : conv.back().out_ch * l.back().second;
    }

    void validate() const {
        if (conv.empty()) throw ConfigError("CNN needs at least one conv layer");
        if (conv.front().in_ch != static_cast<int>(kNumChannels)) throw ConfigError("first conv layer must take 9 channels");
        for (std::size_t i = 1; i < conv.size(); ++i)
            if (conv[i].in_ch != conv[i - 1].out_ch) throw ConfigError("conv channel widths do not chain");
        for (const auto& c : conv)
            if (c.in_ch <= 0 || c.out_ch <= 0 || c.kernel <= 0 || c.pool <= 0)
                throw ConfigError("conv layer dimensions must be positive");
        if (decimation <= 0 || input_length <= 0) throw ConfigError("input length/decimation must be positive");
        for (const auto& [conv_len, pooled] : lengths())
            if (conv_len <= 0 || pooled <= 0) throw ConfigError("input too short for the conv stack");
        if (n_classes < 2) throw ConfigError("need at least 2 classes");
        if (!(lr > 0) || train_epochs < 0 || !(lr_decay_factor > 0)) throw ConfigError("invalid optimizer settings");
    }

    // Full-size stack; 6000 -> 5800 -> 725 -> 715 -> 143 -> 130 -> 26, 96 x 26 = 2496.
    static CnnConfig full() { return {}; }

    // Reduced-width profile for desktop runs on the full corpus: inputs
    // averaged over 4 samples (50 Hz), first kernel keeps its 1 s span.
    // 1500 -> 1450 -> 290 -> 280 -> 56 -> 50 -> 10, flatten 16 x 10 = 160.
    static CnnConfig desk() {
        CnnConfig c;
        c.profile = "desk";
        c.conv = {{9, 8, 51, 5}, {8, 16, 11, 5}, {16, 16, 7, 5}};
        c.decimation = 4;
        c.input_length = 1500;
        c.lr = 1e-3;
        c.lr_decay_after = 6;
        c.train_epochs = 8;
        return c;
    }

    // Tiny fixture for gradient checks: 9 x 200 input, widths 2/3/4.
    // 200 -> 180 -> 45 -> 40 -> 10 -> 8 -> 4, flatten 4 x 4 = 16.
    static CnnConfig micro() {
        CnnConfig c;
        c.profile = "micro";
        c.conv = {{9, 2, 21, 4}, {2, 3, 6, 4}, {3, 4, 3, 2}};
        c.input_length = 200;
        c.decimation = 1;
        c.input_scale = 1.0;
        return c;
    }
};

// Offsets of each parameter tensor inside the flat parameter vector.
struct ParamLayout {
    struct Conv {
        std::size_t w, b;
    };
    std::vector<Conv> conv;
    std::size_t fc_w = 0, fc_b = 0;  // fc weight stored D x n_classes
    std::size_t total = 0;

    explicit ParamLayout(const CnnConfig& cfg) {
        std::size_t off = 0;
        for (const auto& c : cfg.conv) {
            Conv l{};
            l.w = off;
            off += static_cast<std::size_t>(c.out_ch) * c.in_ch * c.kernel;
            l.b = off;
            off += static_cast<std::size_t>(c.out_ch);
            conv.push_back(l);
        }
        fc_w = off;
        off += static_cast<std::size_t>(cfg.flatten_dim()) * cfg.n_classes;
        fc_b = off;
        off += static_cast<std::size_t>(cfg.n_classes);
        total = off;
    }
};

// Cached activations of one forward pass, kept for backprop.
template <class T>
struct ForwardTrace {
    std::vector<std::vector<T>> inputs;       // input to each conv layer (C_in x L_in)
    std::vector<std::vector<T>> pooled;       // ReLU(max-pool) output per layer (C_out x L_pool)
    std::vector<std::vector<int>> argmax;     // absolute conv position chosen by each pooled cell
    std::vector<T> logits;
    std::vector<double> probs;

    const std::vector<T>& embedding() const { return pooled.back(); }
};

template <class T>
class CnnModel {
public:
    CnnModel() = default;

    explicit CnnModel(CnnConfig cfg) : cfg_((cfg.validate(), std::move(cfg))), layout_(cfg_) {
        params_.assign(layout_.total, T(0));
    }

    // He-uniform weights, zero biases.
    static CnnModel initialized(const CnnConfig& cfg) {
        CnnModel m(cfg);
        std::mt19937_64 rng(cfg.seed);
        auto fill = [&](std::size_t off, std::size_t n, double fan_in) {
            const double limit = std::sqrt(6.0 / fan_in);
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (std::size_t i = 0; i < n; ++i) m.params_[off + i] = static_cast<T>(dist(rng));
        };
        for (std::size_t l = 0; l < cfg.conv.size(); ++l) {
            const auto& c = cfg.conv[l];
            fill(m.layout_.conv[l].w, static_cast<std::size_t>(c.out_ch) * c.in_ch * c.kernel,
                 static_cast<double>(c.in_ch) * c.kernel);
        }
        fill(m.layout_.fc_w, static_cast<std::size_t>(cfg.flatten_dim()) * cfg.n_classes, cfg.flatten_dim());
        return m;
    }

    template <class U>
    CnnModel<U> cast() const {
        CnnModel<U> out(cfg_);
        for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<U>(params_[i]);
        return out;
    }

    const CnnConfig& config() const { return cfg_; }
    const ParamLayout& layout() const { return layout_; }
    std::vector<T>& params() { return params_; }
    const std::vector<T>& params() const { return params_; }
    int embedding_dim() const { return cfg_.flatten_dim(); }

    // Block-average + scale a raw 9 x 6000 epoch into the network input.
    std::vector<T> prepare(const Epoch& epoch) const {
        return prepare(std::span<const float>(epoch.samples()), kSamplesPerEpoch);
    }

    std::vector<T> prepare(std::span<const float> samples, std::size_t raw_len) const {
        const auto d = static_cast<std::size_t>(cfg_.decimation);
        const auto len = static_cast<std::size_t>(cfg_.input_length);
        if (raw_len / d != len || samples.size() != kNumChannels * raw_len)
            throw ShapeError("input of length " + std::to_string(raw_len) + " does not match the CNN input (" +
                             std::to_string(len) + " after decimation " + std::to_string(d) + ")");
        std::vector<T> out(kNumChannels * len);
        const double scale = cfg_.input_scale / static_cast<double>(d);
        for (std::size_t c = 0; c < kNumChannels; ++c)
            for (std::size_t t = 0; t < len; ++t) {
                double s = 0.0;
                for (std::size_t k = 0; k < d; ++k) s += samples[c * raw_len + t * d + k];
                out[c * len + t] = static_cast<T>(s * scale);
            }
        return out;
    }

    // Forward pass on a prepared input.
    ForwardTrace<T> forward(std::span<const T> input) const {
        ForwardTrace<T> tr;
        const auto lens = cfg_.lengths();
        std::vector<T> x(input.begin(), input.end());
        int len_in = cfg_.input_length;
        if (x.size() != kNumChannels * static_cast<std::size_t>(len_in)) throw ShapeError("CNN input size mismatch");

        for (std::size_t l = 0; l < cfg_.conv.size(); ++l) {
            const auto& c = cfg_.conv[l];
            const int conv_len = lens[l].first, pooled_len = lens[l].second;
            const T* W = params_.data() + layout_.conv[l].w;
            const T* B = params_.data() + layout_.conv[l].b;

            std::vector<T> y(static_cast<std::size_t>(c.out_ch) * conv_len);
            for (int o = 0; o < c.out_ch; ++o) {
                T* yr = y.data() + static_cast<std::size_t>(o) * conv_len;
                std::fill(yr, yr + conv_len, B[o]);
                for (int i = 0; i < c.in_ch; ++i) {
                    const T* xr = x.data() + static_cast<std::size_t>(i) * len_in;
                    const T* wr = W + (static_cast<std::size_t>(o) * c.in_ch + i) * c.kernel;
                    for (int k = 0; k < c.kernel; ++k) {
                        const T w = wr[k];
                        const T* xs = xr + k;
                        for (int t = 0; t < conv_len; ++t) yr[t] += w * xs[t];
                    }
                }
            }

            std::vector<T> p(static_cast<std::size_t>(c.out_ch) * pooled_len);
            std::vector<int> am(p.size());
            for (int o = 0; o < c.out_ch; ++o) {
                const T* yr = y.data() + static_cast<std::size_t>(o) * conv_len;
                for (int u = 0; u < pooled_len; ++u) {
                    int best = u * c.pool;
                    for (int t = best + 1; t < (u + 1) * c.pool; ++t)
                        if (yr[t] > yr[best]) best = t;
                    const std::size_t idx = static_cast<std::size_t>(o) * pooled_len + u;
                    am[idx] = best;
                    p[idx] = std::max(yr[best], T(0));
                }
            }
            tr.inputs.push_back(std::move(x));
            tr.pooled.push_back(p);
            tr.argmax.push_back(std::move(am));
            x = std::move(p);
            len_in = pooled_len;
        }

        const auto& h = tr.pooled.back();
        const std::size_t D = h.size();
        const std::size_t K = static_cast<std::size_t>(cfg_.n_classes);
        const T* FW = params_.data() + layout_.fc_w;
        const T* FB = params_.data() + layout_.fc_b;
        tr.logits.assign(FB, FB + K);
        for (std::size_t d = 0; d < D; ++d) {
            const T hd = h[d];
            if (hd == T(0)) continue;
            for (std::size_t k = 0; k < K; ++k) tr.logits[k] += FW[d * K + k] * hd;
        }
        tr.probs = softmax(tr.logits);
        return tr;
    }

    // Accumulates d(loss)/d(params) * weight into grad for one example, given
    // its trace and true class. Returns the example's cross-entropy.
    double backward(const ForwardTrace<T>& tr, int label, T weight, std::vector<T>& grad) const {
        const std::size_t K = static_cast<std::size_t>(cfg_.n_classes);
        const auto lens = cfg_.lengths();
        const auto& h = tr.pooled.back();
        const std::size_t D = h.size();
        T* G = grad.data();
        const T* P = params_.data();

        std::vector<T> dz(K);
        for (std::size_t k = 0; k < K; ++k)
            dz[k] = static_cast<T>(tr.probs[k] - (static_cast<int>(k) == label ? 1.0 : 0.0)) * weight;
        for (std::size_t k = 0; k < K; ++k) G[layout_.fc_b + k] += dz[k];

        std::vector<T> dp(D, T(0));  // gradient w.r.t. pooled output of current layer
        for (std::size_t d = 0; d < D; ++d) {
            const T* fw = P + layout_.fc_w + d * K;
            T* gw = G + layout_.fc_w + d * K;
            T acc = 0;
            for (std::size_t k = 0; k < K; ++k) {
                gw[k] += h[d] * dz[k];
                acc += fw[k] * dz[k];
            }
            dp[d] = acc;
        }

        for (std::size_t l = cfg_.conv.size(); l-- > 0;) {
            const auto& c = cfg_.conv[l];
            const int pooled_len = lens[l].second;
            const int len_in = l == 0 ? cfg_.input_length : lens[l - 1].second;
            const auto& x = tr.inputs[l];
            const auto& am = tr.argmax[l];
            const auto& pooled = tr.pooled[l];
            const T* W = P + layout_.conv[l].w;
            T* GW = G + layout_.conv[l].w;
            T* GB = G + layout_.conv[l].b;
            const bool need_dx = l > 0;
            std::vector<T> dx(need_dx ? x.size() : 0, T(0));

            // Only the argmax position of each pool window carries gradient,
            // and only when the ReLU was active there.
            for (int o = 0; o < c.out_ch; ++o) {
                for (int u = 0; u < pooled_len; ++u) {
                    const std::size_t idx = static_cast<std::size_t>(o) * pooled_len + u;
                    const T g = dp[idx];
                    if (g == T(0) || !(pooled[idx] > T(0))) continue;
                    const int t = am[idx];
                    GB[o] += g;
                    for (int i = 0; i < c.in_ch; ++i) {
                        const T* xs = x.data() + static_cast<std::size_t>(i) * len_in + t;
                        T* gw = GW + (static_cast<std::size_t>(o) * c.in_ch + i) * c.kernel;
                        for (int k = 0; k < c.kernel; ++k) gw[k] += g * xs[k];
                        if (need_dx) {
                            const T* wr = W + (static_cast<std::size_t>(o) * c.in_ch + i) * c.kernel;
                            T* dxs = dx.data() + static_cast<std::size_t>(i) * len_in + t;
                            for (int k = 0; k < c.kernel; ++k) dxs[k] += g * wr[k];
                        }
                    }
                }
            }
            dp = std::move(dx);
        }

        return cross_entropy(label, tr.probs);
    }

    static std::vector<double> softmax(std::span<const T> z) {
        double mx = -std::numeric_limits<double>::infinity();
        for (T v : z) mx = std::max(mx, static_cast<double>(v));
        std::vector<double> s(z.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            s[k] = std::exp(static_cast<double>(z[k]) - mx);
            sum += s[k];
        }
        for (double& v : s) v /= sum;
        return s;
    }

    // -log s[label], with s clamped at 1e-12.
    static double cross_entropy(int label, std::span<const double> s) {
        return -std::log(std::max(s[static_cast<std::size_t>(label)], 1e-12));
    }

    bool all_finite() const {
        return std::all_of(params_.begin(), params_.end(), [](T v) { return std::isfinite(static_cast<double>(v)); });
    }

private:
    CnnConfig cfg_;
    ParamLayout layout_{cfg_};
    std::vector<T> params_;
};

// Loss on a one-hot target: -sum_j y[j] log s[j].
inline double loss(std::span<const double> one_hot, std::span<const double> probs) {
    double l = 0.0;
    for (std::size_t j = 0; j < one_hot.size(); ++j)
        if (one_hot[j] != 0.0) l -= one_hot[j] * std::log(std::max(probs[j], 1e-12));
    return l;
}

struct Prediction {
    std::vector<double> embedding;  // h, nonnegative
    std::vector<double> probs;      // s, sums to 1
};

template <class T>
Prediction forward(const CnnModel<T>& model, std::span<const T> prepared) {
    const auto tr = model.forward(prepared);
    for (T v : tr.logits)
        if (!std::isfinite(static_cast<double>(v))) throw NumericsError("non-finite logit in CNN forward pass");
    Prediction p;
    p.embedding.assign(tr.embedding().begin(), tr.embedding().end());
    p.probs = tr.probs;
    return p;
}

template <class T>
Prediction forward(const CnnModel<T>& model, const Epoch& epoch) {
    const auto x = model.prepare(epoch);
    return forward(model, std::span<const T>(x));
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

// One optimizer step's worth of data: all epochs of one recording.
template <class T>
struct TrainingBatch {
    std::vector<std::vector<T>> inputs;  // prepared inputs
    std::vector<int> labels;
};

template <class T>
class Adam {
public:
    Adam(std::size_t n, double beta1, double beta2, double eps)
        : m_(n, 0.0), v_(n, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<T>& params, const std::vector<T>& grad, double lr) {
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = static_cast<double>(grad[i]);
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
            const double mhat = m_[i] / c1, vhat = v_[i] / c2;
            params[i] = static_cast<T>(static_cast<double>(params[i]) - lr * mhat / (std::sqrt(vhat) + eps_));
        }
    }

private:
    std::vector<double> m_, v_;
    double beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
};

// Mean cross-entropy and its gradient over one batch.
template <class T>
double batch_gradient(const CnnModel<T>& model, const TrainingBatch<T>& batch, std::vector<T>& grad) {
    std::fill(grad.begin(), grad.end(), T(0));
    if (batch.inputs.empty()) return 0.0;
    const T w = static_cast<T>(1.0 / static_cast<double>(batch.inputs.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
        const auto tr = model.forward(std::span<const T>(batch.inputs[i]));
        total += model.backward(tr, batch.labels[i], w, grad);
    }
    return total / static_cast<double>(batch.inputs.size());
}

struct TrainResult {
    std::vector<double> loss_trace;  // mean per-recording loss, one entry per sweep
};

using ProgressFn = std::function<void(int sweep, double mean_loss)>;

// Adam over recordings (one recording per step), recordings visited in a
// seeded random order each sweep; lr divided by lr_decay_factor once after
// lr_decay_after sweeps.
template <class T>
TrainResult train(CnnModel<T>& model, const std::vector<TrainingBatch<T>>& batches,
                  const ProgressFn& progress = {}) {
    const auto& cfg = model.config();
    if (batches.empty()) throw FitError("CNN training needs at least one labeled recording");
    Adam<T> opt(model.params().size(), cfg.beta1, cfg.beta2, cfg.adam_eps);
    std::vector<T> grad(model.params().size());
    std::mt19937_64 rng(cfg.seed ^ 0x5EEDC0FFEEULL);
    std::vector<std::size_t> order(batches.size());
    std::iota(order.begin(), order.end(), 0);

    TrainResult res;
    for (int sweep = 0; sweep < cfg.train_epochs; ++sweep) {
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
        const double lr = sweep < cfg.lr_decay_after ? cfg.lr : cfg.lr / cfg.lr_decay_factor;
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t b : order) {
            if (batches[b].inputs.empty()) continue;
            const double l = batch_gradient(model, batches[b], grad);
            if (!std::isfinite(l)) throw NumericsError("non-finite training loss at sweep " + std::to_string(sweep));
            opt.step(model.params(), grad, lr);
            sum += l;
            ++n;
        }
        const double mean = n ? sum / static_cast<double>(n) : 0.0;
        res.loss_trace.push_back(mean);
        if (!model.all_finite()) throw NumericsError("non-finite parameters after sweep " + std::to_string(sweep));
        if (progress) progress(sweep, mean);
    }
    return res;
}

// Embeddings of prepared inputs, one row each. N may be 0.
template <class T>
Matrix embed_all(const CnnModel<T>& model, const std::vector<std::vector<T>>& inputs, int jobs = 1) {
    Matrix h(inputs.size(), static_cast<std::size_t>(model.embedding_dim()));
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        const auto p = forward(model, std::span<const T>(inputs[i]));
        std::copy(p.embedding.begin(), p.embedding.end(), h.row(i).begin());
    });
    return h;
}

template <class T>
Matrix embed_all(const CnnModel<T>& model, const std::vector<Recording>& recordings, int jobs = 1) {
    std::vector<std::vector<T>> inputs;
    for (const auto& r : recordings)
        for (const auto& e : r.epochs) inputs.push_back(model.prepare(e));
    return embed_all(model, inputs, jobs);
}

// ---------------------------------------------------------------------------
// Checkpoint: "SLCN", u16 version, profile string, architecture, u64 param
// count, then float32 parameters in layout order (per conv layer: W[out][in][k],
// b[out]; then fc W[D][classes], fc b[classes]).
// ---------------------------------------------------------------------------

inline constexpr char kCheckpointMagic[4] = {'S', 'L', 'C', 'N'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

inline std::string encode_checkpoint(const CnnModel<float>& model) {
    const auto& cfg = model.config();
    io::detail::ByteWriter w;
    w.bytes(kCheckpointMagic, 4);
    w.u16(kCheckpointVersion);
    w.str(cfg.profile);
    w.u32(static_cast<std::uint32_t>(cfg.conv.size()));
    for (const auto& c : cfg.conv) {
        w.u32(static_cast<std::uint32_t>(c.in_ch));
        w.u32(static_cast<std::uint32_t>(c.out_ch));
        w.u32(static_cast<std::uint32_t>(c.kernel));
        w.u32(static_cast<std::uint32_t>(c.pool));
    }
    w.u32(static_cast<std::uint32_t>(cfg.input_length));
    w.u32(static_cast<std::uint32_t>(cfg.decimation));
    w.f64(cfg.input_scale);
    w.u32(static_cast<std::uint32_t>(cfg.n_classes));
    w.u64(model.params().size());
    for (float v : model.params()) w.f32(v);
    return w.data();
}

inline CnnModel<float> decode_checkpoint(std::string bytes) {
    io::detail::ByteReader r(std::move(bytes));
    r.expect_magic(kCheckpointMagic);
    const auto at = r.pos();
    if (r.u16() != kCheckpointVersion) throw FormatError("unsupported checkpoint version", at);
    CnnConfig cfg;
    cfg.profile = r.str();
    const std::uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 64) throw FormatError("implausible layer count", r.pos() - 4);
    cfg.conv.clear();
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        ConvSpec c{};
        c.in_ch = static_cast<int>(r.u32());
        c.out_ch = static_cast<int>(r.u32());
        c.kernel = static_cast<int>(r.u32());
        c.pool = static_cast<int>(r.u32());
        cfg.conv.push_back(c);
    }
    cfg.input_length = static_cast<int>(r.u32());
    cfg.decimation = static_cast<int>(r.u32());
    cfg.input_scale = r.f64();
    cfg.n_classes = static_cast<int>(r.u32());
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid architecture in checkpoint: ") + e.what(), r.pos());
    }
    CnnModel<float> model(cfg);
    const auto count_at = r.pos();
    const std::uint64_t n = r.u64();
    if (n != model.params().size()) throw FormatError("parameter count does not match architecture", count_at);
    r.need(n * 4, "parameters");
    for (auto& v : model.params()) v = r.f32();
    if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint", r.pos());
    return model;
}

inline void save_checkpoint(const CnnModel<float>& model, const std::filesystem::path& path) {
    io::detail::spit(path, encode_checkpoint(model));
}

inline CnnModel<float> load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(io::detail::slurp(path));
}

}  // namespace sleeper::cnn
