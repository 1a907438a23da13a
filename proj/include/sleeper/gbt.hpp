#pragma once

// Gradient-boosted trees for multiclass log-loss: per round and per class, a
// shallow regression tree fitted to the negative softmax gradient, with a
// backtracking step so the training loss never increases.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleeper/logreg.hpp"
#include "sleeper/matrix.hpp"
#include "sleeper/tree.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

struct GbtParams {
    int n_trees = 100;  // boosting rounds; each round adds one tree per class
    double learning_rate = 0.1;
    int max_depth = 3;
    std::size_t min_leaf = 1;
};

class GbtModel {
public:
    GbtModel() = default;

    const ClassVector& prior() const { return prior_; }
    const std::vector<std::array<RegressionTree, kNumStages>>& rounds() const { return rounds_; }
    const std::vector<double>& loss_trace() const { return loss_trace_; }
    std::size_t n_features() const { return n_features_; }

    ClassVector scores(std::span<const double> x) const {
        if (x.size() != n_features_) throw ShapeError("feature row width does not match the model");
        ClassVector z = prior_;
        for (const auto& round : rounds_)
            for (std::size_t k = 0; k < kNumStages; ++k) z[k] += round[k].predict(x);
        return z;
    }

    ClassVector predict_proba(std::span<const double> x) const { return LogRegModel::softmax(scores(x)); }
    SleepStage predict(std::span<const double> x) const { return argmax_stage(scores(x)); }

    static GbtModel fit(const Matrix& X, std::span<const SleepStage> y, GbtParams params = {}) {
        if (X.rows == 0) throw FitError("cannot fit boosted trees on empty data");
        if (y.size() != X.rows) throw ShapeError("labels must align with feature rows");
        if (params.n_trees < 0 || params.max_depth < 1 || params.max_depth > 3)
            throw FitError("boosting needs n_trees >= 0 and tree depth in [1, 3]");
        const std::size_t N = X.rows;
        GbtModel m;
        m.n_features_ = X.cols;

        ClassVector counts{};
        for (auto s : y) counts[static_cast<std::size_t>(stage_code(s))] += 1.0;
        // Log class frequencies; absent classes get a large negative score.
        for (std::size_t k = 0; k < kNumStages; ++k)
            m.prior_[k] = counts[k] > 0 ? std::log(counts[k] / static_cast<double>(N)) : -30.0;

        std::vector<ClassVector> F(N, m.prior_);
        std::vector<int> label(N);
        for (std::size_t i = 0; i < N; ++i) label[i] = stage_code(y[i]);
        auto mean_loss = [&](const std::vector<ClassVector>& scores) {
            double s = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const auto p = LogRegModel::softmax(scores[i]);
                s -= std::log(std::max(p[label[i]], 1e-300));
            }
            return s / static_cast<double>(N);
        };
        double loss = mean_loss(F);
        m.loss_trace_.push_back(loss);

        const auto order = tree_detail::presort(X);
        const double newton_scale = static_cast<double>(kNumStages - 1) / static_cast<double>(kNumStages);
        std::vector<double> r(N), h(N);
        std::vector<ClassVector> delta(N);
        for (int t = 0; t < params.n_trees; ++t) {
            std::array<RegressionTree, kNumStages> round;
            std::vector<ClassVector> probs(N);
            for (std::size_t i = 0; i < N; ++i) probs[i] = LogRegModel::softmax(F[i]);
            for (std::size_t k = 0; k < kNumStages; ++k) {
                for (std::size_t i = 0; i < N; ++i) {
                    const double p = probs[i][k];
                    r[i] = (label[i] == static_cast<int>(k) ? 1.0 : 0.0) - p;
                    h[i] = p * (1.0 - p);
                }
                round[k] = RegressionTree::fit(X, order, r, h, params.max_depth, params.min_leaf,
                                               params.learning_rate * newton_scale);
                for (std::size_t i = 0; i < N; ++i) delta[i][k] = round[k].predict(X.row(i));
            }
            // Backtrack the whole round until the loss does not increase.
            double shrink = 1.0;
            double new_loss = loss;
            std::vector<ClassVector> trial(N);
            for (int attempt = 0; attempt < 30; ++attempt) {
                for (std::size_t i = 0; i < N; ++i)
                    for (std::size_t k = 0; k < kNumStages; ++k) trial[i][k] = F[i][k] + shrink * delta[i][k];
                new_loss = mean_loss(trial);
                if (new_loss <= loss) break;
                shrink *= 0.5;
            }
            if (new_loss > loss) {
                shrink = 0.0;
                new_loss = loss;
                trial = F;
            }
            if (shrink != 1.0)
                for (auto& tree : round)
                    for (auto& node : tree.mutable_nodes()) node.value *= shrink;
            F = std::move(trial);
            loss = new_loss;
            m.loss_trace_.push_back(loss);
            m.rounds_.push_back(std::move(round));
        }
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["n_features"] = n_features_;
        j["prior"] = prior_;
        auto rounds = nlohmann::json::array();
        for (const auto& round : rounds_) {
            auto jr = nlohmann::json::array();
            for (const auto& tree : round) jr.push_back(tree.to_json());
            rounds.push_back(jr);
        }
        j["rounds"] = rounds;
        return j;
    }

    static GbtModel from_json(const nlohmann::json& j) {
        GbtModel m;
        m.n_features_ = j.at("n_features").get<std::size_t>();
        m.prior_ = j.at("prior").get<ClassVector>();
        for (const auto& jr : j.at("rounds")) {
            if (jr.size() != kNumStages) throw FormatError("boosting round must hold one tree per class", 0);
            std::array<RegressionTree, kNumStages> round;
            for (std::size_t k = 0; k < kNumStages; ++k) round[k] = RegressionTree::from_json(jr[k]);
            m.rounds_.push_back(std::move(round));
        }
        return m;
    }

private:
    ClassVector prior_{};
    std::vector<std::array<RegressionTree, kNumStages>> rounds_;
    std::vector<double> loss_trace_;
    std::size_t n_features_ = 0;
};

}  // namespace sleeper
