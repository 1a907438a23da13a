#pragma once

// End-to-end pipeline: per-epoch preparation (rule features + CNN inputs),
// CNN training and embedding, rule fitting/selection, prototypes, and the
// final stage classifier; plus scoring and artifact persistence.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleeper/classifier.hpp"
#include "sleeper/cnn.hpp"
#include "sleeper/features.hpp"
#include "sleeper/metrics.hpp"
#include "sleeper/parallel.hpp"
#include "sleeper/prototypes.hpp"
#include "sleeper/rulebank.hpp"
#include "sleeper/synth.hpp"

namespace sleeper {

using Logger = std::function<void(std::string_view)>;

// What the pipeline keeps of one recording once raw samples are dropped.
struct PreparedRecording {
    std::string subject_id;
    std::vector<EpochFeatures> features;
    std::vector<std::vector<float>> inputs;  // CNN inputs (decimated, scaled)
    std::optional<std::vector<SleepStage>> labels;

    std::size_t size() const { return features.size(); }
};

inline PreparedRecording prepare_recording(const Recording& rec, const cnn::CnnConfig& cnn_cfg, int jobs = 1) {
    rec.validate();
    const cnn::CnnModel<float> shape(cnn_cfg);
    PreparedRecording out;
    out.subject_id = rec.subject_id;
    out.labels = rec.labels;
    out.features.resize(rec.epochs.size());
    out.inputs.resize(rec.epochs.size());
    parallel_for(rec.epochs.size(), jobs, [&](std::size_t i) {
        out.features[i] = features::extract_features(rec.epochs[i]);
        out.inputs[i] = shape.prepare(rec.epochs[i]);
    });
    return out;
}

// Ordered collection of prepared recordings with flat (recording-major)
// epoch views.
struct PreparedSet {
    std::vector<PreparedRecording> recordings;

    std::size_t n_epochs() const {
        std::size_t n = 0;
        for (const auto& r : recordings) n += r.size();
        return n;
    }

    std::vector<EpochFeatures> features() const {
        std::vector<EpochFeatures> out;
        out.reserve(n_epochs());
        for (const auto& r : recordings) out.insert(out.end(), r.features.begin(), r.features.end());
        return out;
    }

    bool labeled() const {
        for (const auto& r : recordings)
            if (!r.labels) return false;
        return true;
    }

    std::vector<SleepStage> labels() const {
        std::vector<SleepStage> out;
        out.reserve(n_epochs());
        for (const auto& r : recordings) {
            if (!r.labels) throw ShapeError("recording " + r.subject_id + " has no labels");
            out.insert(out.end(), r.labels->begin(), r.labels->end());
        }
        return out;
    }

    std::vector<const std::vector<float>*> inputs() const {
        std::vector<const std::vector<float>*> out;
        out.reserve(n_epochs());
        for (const auto& r : recordings)
            for (const auto& x : r.inputs) out.push_back(&x);
        return out;
    }

    PreparedSet subset(const std::vector<std::string>& subjects) const {
        PreparedSet out;
        for (const auto& r : recordings)
            if (std::find(subjects.begin(), subjects.end(), r.subject_id) != subjects.end()) out.recordings.push_back(r);
        return out;
    }
};

// Prepares `n` recordings produced by `source(i)`, in parallel across
// recordings; raw samples are released as soon as each one is prepared.
inline PreparedSet prepare_many(std::size_t n, const std::function<Recording(std::size_t)>& source,
                                const cnn::CnnConfig& cnn_cfg, int jobs = 1) {
    PreparedSet set;
    set.recordings.resize(n);
    parallel_for(n, jobs, [&](std::size_t i) { set.recordings[i] = prepare_recording(source(i), cnn_cfg); });
    return set;
}

inline PreparedSet prepare_synthetic(const synth::SynthConfig& cfg, const cnn::CnnConfig& cnn_cfg, int jobs = 1) {
    cfg.validate();
    return prepare_many(
        static_cast<std::size_t>(cfg.n_subjects),
        [&](std::size_t i) { return synth::generate_subject(cfg, static_cast<int>(i)); }, cnn_cfg, jobs);
}

inline Matrix embed_prepared(const cnn::CnnModel<float>& model, const PreparedSet& set, int jobs = 1) {
    const auto inputs = set.inputs();
    Matrix h(inputs.size(), static_cast<std::size_t>(model.embedding_dim()));
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        const auto p = cnn::forward(model, std::span<const float>(*inputs[i]));
        std::copy(p.embedding.begin(), p.embedding.end(), h.row(i).begin());
    });
    return h;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct PipelineConfig {
    cnn::CnnConfig cnn = cnn::CnnConfig::full();
    std::size_t n_rules = kDefaultSelectedRules;
    bool select = true;
    ClassifierChoice classifier;
    ClassifierParams params;
    int jobs = 1;

    void validate() const {
        cnn.validate();
        if (n_rules == 0 || n_rules > kNumRules) throw ConfigError("rule count must lie in [1, 240]");
        if (!select && n_rules != kNumRules) throw ConfigError("disabling selection keeps all 240 rules");
    }
};

// Everything upstream of rule selection: trained CNN, training embeddings,
// fitted (unselected) rule bank and the full 240-column assignment.
struct EmbeddingStage {
    cnn::CnnModel<float> cnn;
    cnn::TrainResult trace;
    Matrix H;
    RuleBank bank;
    Matrix R_full;
    std::vector<SleepStage> labels;
};

inline EmbeddingStage train_embedding_stage(const PreparedSet& train, const PipelineConfig& cfg,
                                            const Logger& log = {}) {
    cfg.validate();
    if (train.n_epochs() == 0) throw FitError("training split has no epochs");
    EmbeddingStage st;
    st.labels = train.labels();

    std::vector<cnn::TrainingBatch<float>> batches;
    for (const auto& r : train.recordings) {
        cnn::TrainingBatch<float> b;
        b.inputs = r.inputs;
        for (auto s : *r.labels) b.labels.push_back(stage_code(s));
        batches.push_back(std::move(b));
    }
    st.cnn = cnn::CnnModel<float>::initialized(cfg.cnn);
    st.trace = cnn::train(st.cnn, batches, [&](int sweep, double loss) {
        if (log) log("cnn sweep " + std::to_string(sweep + 1) + "/" + std::to_string(cfg.cnn.train_epochs) +
                     " mean loss " + std::to_string(loss));
    });
    batches.clear();

    st.H = embed_prepared(st.cnn, train, cfg.jobs);
    const auto feats = train.features();
    st.bank.fit(feats);
    st.R_full = st.bank.assign_all(feats);
    return st;
}

// Rule selection, prototypes and classifier on top of an embedding stage.
struct SleeperModel {
    cnn::CnnModel<float> cnn;
    RuleBank bank;
    PrototypeMatrix prototypes;
    ClassifierChoice choice;
    std::optional<StageModel> model;  // absent for the CNN-softmax choice
};

inline Matrix classifier_features(FeatureSource source, const Matrix& H, const Matrix& R_active,
                                  const PrototypeMatrix& protos, int jobs) {
    return source == FeatureSource::Rule ? R_active : similarity(H, protos, jobs);
}

inline SleeperModel fit_head(const EmbeddingStage& st, const PipelineConfig& cfg, const Logger& log = {}) {
    cfg.validate();
    SleeperModel m;
    m.cnn = st.cnn;
    m.bank = st.bank;
    m.choice = cfg.classifier;
    if (cfg.select) m.bank.select(st.R_full, st.labels, cfg.n_rules);
    const auto ids = m.bank.active_rules();
    const Matrix R = st.R_full.take_cols(ids);
    m.prototypes = build_prototypes(column_normalize(st.H), R, ids, cfg.jobs);
    if (log) log("prototypes: " + std::to_string(m.prototypes.dim()) + " x " + std::to_string(m.prototypes.n_prototypes()));
    if (!cfg.classifier.cnn_head) {
        const Matrix X = classifier_features(cfg.classifier.source, st.H, R, m.prototypes, cfg.jobs);
        m.model = StageModel::fit(cfg.classifier.model, X, st.labels, cfg.params);
    }
    return m;
}

inline SleeperModel train_pipeline(const PreparedSet& train, const PipelineConfig& cfg, const Logger& log = {}) {
    return fit_head(train_embedding_stage(train, cfg, log), cfg, log);
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct ScoreResult {
    std::vector<SleepStage> predicted;
    std::vector<ClassVector> probs;
    Matrix features;                     // similarities or rule bits fed to the classifier
    std::vector<std::vector<int>> paths;  // decision-tree routing, empty otherwise
};

inline ScoreResult score_features(const SleeperModel& m, const Matrix& H, std::span<const EpochFeatures> feats,
                                  int jobs = 1) {
    if (H.rows != feats.size()) throw ShapeError("embeddings and rule features must align");
    ScoreResult out;
    const std::size_t n = feats.size();
    out.predicted.resize(n);
    out.probs.resize(n);
    const Matrix R = m.bank.assign(feats);
    out.features = classifier_features(m.choice.source, H, R, m.prototypes, jobs);
    if (m.choice.cnn_head) {
        // The CNN head scores the embedding directly: z = W^T h + b.
        const auto& layout = m.cnn.layout();
        const auto& p = m.cnn.params();
        const std::size_t D = H.cols;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> z(kNumStages);
            for (std::size_t k = 0; k < kNumStages; ++k) {
                double s = p[layout.fc_b + k];
                for (std::size_t d = 0; d < D; ++d) s += static_cast<double>(p[layout.fc_w + d * kNumStages + k]) * H(i, d);
                z[k] = s;
            }
            const auto probs = cnn::CnnModel<double>::softmax(std::span<const double>(z));
            std::copy(probs.begin(), probs.end(), out.probs[i].begin());
            out.predicted[i] = argmax_stage(out.probs[i]);
        }
        return out;
    }
    const auto* tree = m.model->tree();
    if (tree) out.paths.resize(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        const auto x = out.features.row(i);
        if (tree) {
            auto p = tree->predict(x);
            out.predicted[i] = p.stage;
            out.probs[i] = p.probs;
            out.paths[i] = std::move(p.path);
        } else {
            out.probs[i] = m.model->predict_proba(x);
            out.predicted[i] = m.model->predict(x);
        }
    });
    return out;
}

inline ScoreResult score(const SleeperModel& m, const PreparedSet& set, int jobs = 1) {
    const auto feats = set.features();
    return score_features(m, embed_prepared(m.cnn, set, jobs), feats, jobs);
}

// ---------------------------------------------------------------------------
// Artifacts
// ---------------------------------------------------------------------------

namespace artifacts {
inline constexpr const char* kCnn = "cnn.bin";
inline constexpr const char* kRuleBank = "rulebank.json";
inline constexpr const char* kPrototypes = "prototypes.bin";
inline constexpr const char* kClassifier = "classifier.json";
inline constexpr const char* kSplit = "split.json";
}  // namespace artifacts

inline nlohmann::json classifier_document(const SleeperModel& m) {
    nlohmann::json j;
    if (m.model) {
        j = m.model->to_json();
    } else {
        j["format"] = "sleeper.classifier";
        j["version"] = 1;
        j["kind"] = "cnn_softmax";
    }
    j["choice"] = m.choice.name();
    return j;
}

inline void save_model(const SleeperModel& m, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    cnn::save_checkpoint(m.cnn, dir / artifacts::kCnn);
    save_rulebank(m.bank, dir / artifacts::kRuleBank);
    save_prototypes(m.prototypes, dir / artifacts::kPrototypes);
    io::detail::spit(dir / artifacts::kClassifier, classifier_document(m).dump(2) + "\n");
}

inline SleeperModel load_model(const std::filesystem::path& dir) {
    for (const char* name : {artifacts::kCnn, artifacts::kRuleBank, artifacts::kPrototypes, artifacts::kClassifier})
        if (!std::filesystem::exists(dir / name))
            throw Error("missing artifact " + (dir / name).string() + " (run `train` first)");
    SleeperModel m;
    m.cnn = cnn::load_checkpoint(dir / artifacts::kCnn);
    m.bank = load_rulebank(dir / artifacts::kRuleBank);
    m.prototypes = load_prototypes(dir / artifacts::kPrototypes);
    const auto j = nlohmann::json::parse(io::detail::slurp(dir / artifacts::kClassifier));
    m.choice = ClassifierChoice::parse(j.at("choice").get<std::string>());
    if (!m.choice.cnn_head) m.model = StageModel::from_json(j);
    if (m.prototypes.dim() != static_cast<std::size_t>(m.cnn.embedding_dim()))
        throw FormatError("prototype dimension does not match the CNN embedding", 0);
    if (m.prototypes.rule_ids != m.bank.active_rules())
        throw FormatError("prototype rule ids do not match the rule bank selection", 0);
    return m;
}

inline nlohmann::json split_json(const DatasetSplit& s) {
    return {{"seed", s.seed}, {"train", s.train}, {"test", s.test}};
}

}  // namespace sleeper
