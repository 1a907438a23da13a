#pragma once

// Stage model: one of the three shallow classifiers, fitted either on
// prototype similarities or directly on binary rule assignments.

#include <filesystem>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "sleeper/gbt.hpp"
#include "sleeper/io.hpp"
#include "sleeper/logreg.hpp"
#include "sleeper/tree.hpp"

namespace sleeper {

enum class ModelKind { DecisionTree, LogReg, Gbt };

// Where classifier features come from: cosine similarities to rule
// prototypes, or the raw binary rule bits.
enum class FeatureSource { Prototype, Rule };

struct ClassifierChoice {
    ModelKind model = ModelKind::DecisionTree;
    FeatureSource source = FeatureSource::Prototype;
    bool cnn_head = false;  // score with the CNN's own softmax instead

    std::string name() const {
        if (cnn_head) return "cnn";
        std::string m = model == ModelKind::DecisionTree ? "dt" : model == ModelKind::LogReg ? "lr" : "gbt";
        return source == FeatureSource::Rule ? "rule-" + m : m;
    }

    static ClassifierChoice parse(const std::string& s) {
        ClassifierChoice c;
        std::string m = s;
        if (s == "cnn") {
            c.cnn_head = true;
            return c;
        }
        if (m.rfind("rule-", 0) == 0) {
            c.source = FeatureSource::Rule;
            m = m.substr(5);
        }
        if (m == "dt")
            c.model = ModelKind::DecisionTree;
        else if (m == "lr")
            c.model = ModelKind::LogReg;
        else if (m == "gbt")
            c.model = ModelKind::Gbt;
        else
            throw ConfigError("unknown classifier '" + s + "' (expected dt, lr, gbt, rule-dt, rule-lr, rule-gbt, cnn)");
        return c;
    }
};

struct ClassifierParams {
    TreeParams tree;
    LogRegParams logreg;
    GbtParams gbt;
};

class StageModel {
public:
    using Variant = std::variant<DecisionTree, LogRegModel, GbtModel>;

    StageModel() = default;
    explicit StageModel(Variant v) : model_(std::move(v)) {}

    static StageModel fit(ModelKind kind, const Matrix& X, std::span<const SleepStage> y,
                          const ClassifierParams& params = {}) {
        switch (kind) {
            case ModelKind::DecisionTree: return StageModel(DecisionTree::fit(X, y, params.tree));
            case ModelKind::LogReg: return StageModel(LogRegModel::fit(X, y, params.logreg));
            case ModelKind::Gbt: return StageModel(GbtModel::fit(X, y, params.gbt));
        }
        throw ConfigError("unknown model kind");
    }

    ModelKind kind() const { return static_cast<ModelKind>(model_.index()); }
    const Variant& variant() const { return model_; }
    const DecisionTree* tree() const { return std::get_if<DecisionTree>(&model_); }

    ClassVector predict_proba(std::span<const double> x) const {
        return std::visit(
            [&](const auto& m) -> ClassVector {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DecisionTree>)
                    return m.predict(x).probs;
                else
                    return m.predict_proba(x);
            },
            model_);
    }

    SleepStage predict(std::span<const double> x) const {
        return std::visit(
            [&](const auto& m) -> SleepStage {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DecisionTree>)
                    return m.predict(x).stage;
                else
                    return m.predict(x);
            },
            model_);
    }

    std::string kind_name() const {
        switch (kind()) {
            case ModelKind::DecisionTree: return "decision_tree";
            case ModelKind::LogReg: return "logistic_regression";
            case ModelKind::Gbt: return "gradient_boosted_trees";
        }
        return "?";
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format"] = "sleeper.classifier";
        j["version"] = 1;
        j["kind"] = kind_name();
        j["model"] = std::visit([](const auto& m) { return m.to_json(); }, model_);
        return j;
    }

    static StageModel from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "sleeper.classifier") throw FormatError("not a classifier document", 0);
        const auto kind = j.at("kind").get<std::string>();
        const auto& jm = j.at("model");
        if (kind == "decision_tree") return StageModel(DecisionTree::from_json(jm));
        if (kind == "logistic_regression") return StageModel(LogRegModel::from_json(jm));
        if (kind == "gradient_boosted_trees") return StageModel(GbtModel::from_json(jm));
        throw FormatError("unknown classifier kind '" + kind + "'", 0);
    }

private:
    Variant model_;
};

}  // namespace sleeper
