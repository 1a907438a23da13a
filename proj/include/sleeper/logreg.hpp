#pragma once

// Multinomial logistic regression fitted by full-batch gradient descent with
// backtracking step halving.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleeper/matrix.hpp"
#include "sleeper/tree.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

struct LogRegParams {
    double l2 = 1e-4;
    int max_iters = 2000;
    double step = 1.0;
    double tolerance = 1e-7;
};

class LogRegModel {
public:
    LogRegModel() = default;
    explicit LogRegModel(std::size_t n_features)
        : W_(n_features, kNumStages), b_{}, mean_(n_features, 0.0), scale_(n_features, 1.0) {}

    std::size_t n_features() const { return W_.rows; }
    const Matrix& weights() const { return W_; }
    Matrix& weights() { return W_; }
    const ClassVector& bias() const { return b_; }
    ClassVector& bias() { return b_; }
    double l2() const { return l2_; }
    int iterations() const { return iterations_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }

    // Features are standardized internally with training mean/scale; the
    // decision function is W^T z + b on the standardized row z.
    ClassVector scores(std::span<const double> x) const {
        if (x.size() != W_.rows) throw ShapeError("feature row width does not match the model");
        ClassVector z = b_;
        for (std::size_t f = 0; f < W_.rows; ++f) {
            const double v = (x[f] - mean_[f]) / scale_[f];
            if (v == 0.0) continue;
            for (std::size_t k = 0; k < kNumStages; ++k) z[k] += W_(f, k) * v;
        }
        return z;
    }

    ClassVector predict_proba(std::span<const double> x) const { return softmax(scores(x)); }

    SleepStage predict(std::span<const double> x) const { return argmax_stage(scores(x)); }

    static ClassVector softmax(const ClassVector& z) {
        const double m = *std::max_element(z.begin(), z.end());
        ClassVector p{};
        double s = 0.0;
        for (std::size_t k = 0; k < kNumStages; ++k) s += (p[k] = std::exp(z[k] - m));
        for (auto& v : p) v /= s;
        return p;
    }

    static LogRegModel fit(const Matrix& X, std::span<const SleepStage> y, LogRegParams params = {}) {
        if (X.rows == 0) throw FitError("cannot fit logistic regression on empty data");
        if (y.size() != X.rows) throw ShapeError("labels must align with feature rows");
        const std::size_t N = X.rows, F = X.cols;
        LogRegModel m(F);
        m.l2_ = params.l2;
        for (std::size_t f = 0; f < F; ++f) {
            double mu = 0.0;
            for (std::size_t i = 0; i < N; ++i) mu += X(i, f);
            mu /= static_cast<double>(N);
            double var = 0.0;
            for (std::size_t i = 0; i < N; ++i) var += (X(i, f) - mu) * (X(i, f) - mu);
            const double sd = std::sqrt(var / static_cast<double>(N));
            m.mean_[f] = mu;
            m.scale_[f] = sd > 1e-12 ? sd : 1.0;
        }
        Matrix Z(N, F);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t f = 0; f < F; ++f) Z(i, f) = (X(i, f) - m.mean_[f]) / m.scale_[f];
        std::vector<int> label(N);
        for (std::size_t i = 0; i < N; ++i) label[i] = stage_code(y[i]);

        auto objective = [&](const Matrix& W, const ClassVector& b, Matrix* gW, ClassVector* gb) {
            double loss = 0.0;
            if (gW) std::fill(gW->data.begin(), gW->data.end(), 0.0);
            if (gb) gb->fill(0.0);
            for (std::size_t i = 0; i < N; ++i) {
                ClassVector z = b;
                auto zi = Z.row(i);
                for (std::size_t f = 0; f < F; ++f)
                    for (std::size_t k = 0; k < kNumStages; ++k) z[k] += W(f, k) * zi[f];
                const auto p = softmax(z);
                loss -= std::log(std::max(p[label[i]], 1e-300));
                if (gW) {
                    ClassVector d = p;
                    d[label[i]] -= 1.0;
                    for (std::size_t f = 0; f < F; ++f)
                        for (std::size_t k = 0; k < kNumStages; ++k) (*gW)(f, k) += d[k] * zi[f];
                    for (std::size_t k = 0; k < kNumStages; ++k) (*gb)[k] += d[k];
                }
            }
            const double inv = 1.0 / static_cast<double>(N);
            double reg = 0.0;
            for (double w : W.data) reg += w * w;
            loss = loss * inv + 0.5 * params.l2 * reg;
            if (gW) {
                for (std::size_t t = 0; t < W.data.size(); ++t) gW->data[t] = gW->data[t] * inv + params.l2 * W.data[t];
                for (auto& g : *gb) g *= inv;
            }
            return loss;
        };

        Matrix gW(F, kNumStages);
        ClassVector gb{};
        double step = params.step;
        double loss = objective(m.W_, m.b_, &gW, &gb);
        m.loss_trace_.push_back(loss);
        for (int it = 0; it < params.max_iters; ++it) {
            Matrix W_new = m.W_;
            ClassVector b_new = m.b_;
            double new_loss = loss;
            bool accepted = false;
            for (int halvings = 0; halvings < 60; ++halvings) {
                for (std::size_t t = 0; t < W_new.data.size(); ++t) W_new.data[t] = m.W_.data[t] - step * gW.data[t];
                for (std::size_t k = 0; k < kNumStages; ++k) b_new[k] = m.b_[k] - step * gb[k];
                new_loss = objective(W_new, b_new, nullptr, nullptr);
                if (new_loss <= loss) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            m.W_ = std::move(W_new);
            m.b_ = b_new;
            m.iterations_ = it + 1;
            const double delta = loss - new_loss;
            loss = objective(m.W_, m.b_, &gW, &gb);
            m.loss_trace_.push_back(loss);
            if (delta < params.tolerance) break;
        }
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["n_features"] = W_.rows;
        j["l2"] = l2_;
        j["iterations"] = iterations_;
        j["weights"] = W_.data;
        j["bias"] = b_;
        j["feature_mean"] = mean_;
        j["feature_scale"] = scale_;
        return j;
    }

    static LogRegModel from_json(const nlohmann::json& j) {
        LogRegModel m(j.at("n_features").get<std::size_t>());
        m.l2_ = j.at("l2").get<double>();
        m.iterations_ = j.at("iterations").get<int>();
        m.W_.data = j.at("weights").get<std::vector<double>>();
        m.b_ = j.at("bias").get<ClassVector>();
        m.mean_ = j.at("feature_mean").get<std::vector<double>>();
        m.scale_ = j.at("feature_scale").get<std::vector<double>>();
        if (m.W_.data.size() != m.W_.rows * kNumStages || m.mean_.size() != m.W_.rows || m.scale_.size() != m.W_.rows)
            throw FormatError("logistic regression arrays have inconsistent sizes", 0);
        return m;
    }

private:
    Matrix W_;
    ClassVector b_{};
    std::vector<double> mean_, scale_;
    double l2_ = 0.0;
    int iterations_ = 0;
    std::vector<double> loss_trace_;
};

}  // namespace sleeper
