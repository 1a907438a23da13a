#pragma once

// Expert rule bank: 240 binary rules over epoch features, percentile
// thresholds fitted on training epochs, the binary rule-assignment matrix,
// and one-way ANOVA rule selection.
//
// Rule order (fixed, 240 total):
//   Spindle  3 pairs  x 4 duration groups  (>3, >6, >12, >18 s)     12
//   SWS      3 pairs  x 4 duration groups                           12
//   Delta, Theta, Alpha, Beta   9 channels x 4 percentile groups   144
//   Amplitude                   9 channels x 4                      36
//   Kurtosis                    9 channels x 4                      36
// Within a target the groups run in order i..iv. Percentile groups are
// nested predicates "value < Pq" for q in {20, 40, 60, 80}.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleeper/features.hpp"
#include "sleeper/io.hpp"
#include "sleeper/matrix.hpp"
#include "sleeper/stats.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

enum class RuleFeature : std::uint8_t { Spindle, SWS, Delta, Theta, Alpha, Beta, Amplitude, Kurtosis };

inline constexpr std::size_t kNumRuleFeatures = 8;
inline constexpr std::size_t kGroupsPerTarget = 4;
inline constexpr std::size_t kNumRules = 240;
inline constexpr std::size_t kDefaultSelectedRules = 96;
inline constexpr std::size_t kMinFitEpochs = 5;
inline constexpr std::array<double, kGroupsPerTarget> kEventBoundsSec = {3.0, 6.0, 12.0, 18.0};
inline constexpr std::array<double, kGroupsPerTarget> kPercentiles = {20.0, 40.0, 60.0, 80.0};

constexpr std::string_view rule_feature_name(RuleFeature f) {
    switch (f) {
        case RuleFeature::Spindle: return "Spindle";
        case RuleFeature::SWS: return "SWS";
        case RuleFeature::Delta: return "Delta";
        case RuleFeature::Theta: return "Theta";
        case RuleFeature::Alpha: return "Alpha";
        case RuleFeature::Beta: return "Beta";
        case RuleFeature::Amplitude: return "Amplitude";
        case RuleFeature::Kurtosis: return "Kurtosis";
    }
    return "?";
}

constexpr bool is_event_feature(RuleFeature f) { return f == RuleFeature::Spindle || f == RuleFeature::SWS; }

// Index of a scalar (non-event) feature among the 6 scalar features.
constexpr std::size_t scalar_slot(RuleFeature f) { return static_cast<std::size_t>(f) - 2; }
inline constexpr std::size_t kNumScalarFeatures = 6;

struct RuleSpec {
    RuleFeature feature;
    // Event rules target a pair, scalar rules a single channel.
    std::optional<ChannelPair> pair;
    std::optional<ChannelId> channel;
    std::uint8_t group;  // 0..3

    std::string target_name() const {
        return pair ? std::string(pair_name(*pair)) : std::string(channel_name(*channel));
    }

    std::string group_name() const {
        if (is_event_feature(feature)) return ">" + std::to_string(static_cast<int>(kEventBoundsSec[group])) + "s";
        return "<P" + std::to_string(static_cast<int>(kPercentiles[group]));
    }

    std::string describe() const {
        return std::string(rule_feature_name(feature)) + " " + group_name() + " @ " + target_name();
    }
};

inline std::vector<RuleSpec> build_rule_specs() {
    std::vector<RuleSpec> rules;
    rules.reserve(kNumRules);
    for (auto f : {RuleFeature::Spindle, RuleFeature::SWS})
        for (auto p : kAllPairs)
            for (std::uint8_t g = 0; g < kGroupsPerTarget; ++g) rules.push_back({f, p, std::nullopt, g});
    for (auto f : {RuleFeature::Delta, RuleFeature::Theta, RuleFeature::Alpha, RuleFeature::Beta,
                   RuleFeature::Amplitude, RuleFeature::Kurtosis})
        for (auto c : kAllChannels)
            for (std::uint8_t g = 0; g < kGroupsPerTarget; ++g) rules.push_back({f, std::nullopt, c, g});
    if (rules.size() != kNumRules) throw std::logic_error("rule bank must contain exactly 240 rules");
    return rules;
}

// Raw feature value a rule inspects.
inline double rule_input(const RuleSpec& r, const EpochFeatures& f) {
    switch (r.feature) {
        case RuleFeature::Spindle: return f.spindle_sec[static_cast<std::size_t>(*r.pair)];
        case RuleFeature::SWS: return f.sws_sec[static_cast<std::size_t>(*r.pair)];
        case RuleFeature::Delta:
        case RuleFeature::Theta:
        case RuleFeature::Alpha:
        case RuleFeature::Beta:
            return f.band_power[channel_index(*r.channel)][static_cast<std::size_t>(r.feature) - 2];
        case RuleFeature::Amplitude: return f.amplitude[channel_index(*r.channel)];
        case RuleFeature::Kurtosis: return f.kurtosis[channel_index(*r.channel)];
    }
    return 0.0;
}

// thresholds[scalar feature][channel][group]
using ThresholdTable = std::array<std::array<std::array<double, kGroupsPerTarget>, kNumChannels>, kNumScalarFeatures>;

class RuleBank {
public:
    RuleBank() : rules_(build_rule_specs()) {}

    const std::vector<RuleSpec>& rules() const { return rules_; }
    bool fitted() const { return fitted_; }
    bool has_selection() const { return selected_.has_value(); }
    const ThresholdTable& thresholds() const { return thresholds_; }
    const std::vector<double>& f_scores() const { return f_scores_; }

    // Active rule ids in bank order: the selection if one exists, else all 240.
    std::vector<std::size_t> active_rules() const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < rules_.size(); ++j)
            if (!selected_ || (*selected_)[j]) out.push_back(j);
        return out;
    }

    const std::vector<bool>* selected_mask() const { return selected_ ? &*selected_ : nullptr; }

    double threshold(RuleFeature f, ChannelId c, std::size_t group) const {
        return thresholds_[scalar_slot(f)][channel_index(c)][group];
    }

    // Fits the percentile thresholds from training epochs.
    void fit(std::span<const EpochFeatures> training) {
        if (training.size() < kMinFitEpochs)
            throw FitError("rule thresholds need at least " + std::to_string(kMinFitEpochs) + " training epochs, got " +
                           std::to_string(training.size()));
        std::vector<double> values(training.size());
        for (std::size_t s = 0; s < kNumScalarFeatures; ++s) {
            const auto feature = static_cast<RuleFeature>(s + 2);
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                const RuleSpec probe{feature, std::nullopt, kAllChannels[c], 0};
                for (std::size_t i = 0; i < training.size(); ++i) values[i] = rule_input(probe, training[i]);
                std::sort(values.begin(), values.end());
                for (std::size_t g = 0; g < kGroupsPerTarget; ++g)
                    thresholds_[s][c][g] = stats::percentile_sorted(values, kPercentiles[g]);
            }
        }
        fitted_ = true;
        selected_.reset();
        f_scores_.clear();
    }

    bool evaluate(std::size_t rule, const EpochFeatures& f) const {
        const auto& r = rules_[rule];
        const double v = rule_input(r, f);
        if (is_event_feature(r.feature)) return v > kEventBoundsSec[r.group];
        return v < thresholds_[scalar_slot(r.feature)][channel_index(*r.channel)][r.group];
    }

    // N x K binary matrix over `rule_ids` (default: the active rules).
    Matrix assign(std::span<const EpochFeatures> features, std::optional<std::vector<std::size_t>> rule_ids = {}) const {
        if (!fitted_) throw StateError("rule bank must be fitted before assignment");
        const auto ids = rule_ids ? *rule_ids : active_rules();
        Matrix m(features.size(), ids.size());
        for (std::size_t i = 0; i < features.size(); ++i)
            for (std::size_t k = 0; k < ids.size(); ++k) m(i, k) = evaluate(ids[k], features[i]) ? 1.0 : 0.0;
        return m;
    }

    Matrix assign_all(std::span<const EpochFeatures> features) const {
        std::vector<std::size_t> all(kNumRules);
        std::iota(all.begin(), all.end(), 0);
        return assign(features, all);
    }

    // Selects the top-k rules by ANOVA F over a full 240-column assignment.
    void select(const Matrix& full_assignment, std::span<const SleepStage> labels, std::size_t k);

    void clear_selection() { selected_.reset(); }

    nlohmann::json to_json() const;
    static RuleBank from_json(const nlohmann::json& j);

private:
    std::vector<RuleSpec> rules_;
    ThresholdTable thresholds_{};
    bool fitted_ = false;
    std::optional<std::vector<bool>> selected_;
    std::vector<double> f_scores_;
};

// ---------------------------------------------------------------------------
// ANOVA
// ---------------------------------------------------------------------------

inline constexpr double kAnovaEpsilon = 1e-12;

// One-way ANOVA F of a binary column grouped by stage, computed from integer
// per-group counts so the result does not depend on row order.
// F = (SSB / (g - 1)) / max(SSW / (N - g), eps), g = nonempty groups.
inline double anova_f_binary(std::span<const std::size_t> group_n, std::span<const std::size_t> group_ones) {
    std::size_t n = 0, ones = 0, g = 0;
    for (std::size_t k = 0; k < group_n.size(); ++k) {
        n += group_n[k];
        ones += group_ones[k];
        if (group_n[k] > 0) ++g;
    }
    if (g < 2 || n <= g) return 0.0;
    const double grand = static_cast<double>(ones) / static_cast<double>(n);
    double ssb = 0.0, ssw = 0.0;
    for (std::size_t k = 0; k < group_n.size(); ++k) {
        if (group_n[k] == 0) continue;
        const double nk = static_cast<double>(group_n[k]);
        const double ok = static_cast<double>(group_ones[k]);
        const double mk = ok / nk;
        ssb += nk * (mk - grand) * (mk - grand);
        ssw += ok * (1.0 - mk) * (1.0 - mk) + (nk - ok) * mk * mk;
    }
    const double msb = ssb / static_cast<double>(g - 1);
    const double msw = std::max(ssw / static_cast<double>(n - g), kAnovaEpsilon);
    return msb / msw;
}

// F per column of a binary assignment matrix.
inline std::vector<double> anova_f_scores(const Matrix& assignment, std::span<const SleepStage> labels) {
    if (labels.size() != assignment.rows) throw ShapeError("labels must align with assignment rows");
    std::array<std::size_t, kNumStages> group_n{};
    for (auto s : labels) ++group_n[static_cast<std::size_t>(stage_code(s))];
    std::size_t nonempty = 0;
    for (auto n : group_n) nonempty += n > 0 ? 1 : 0;
    if (nonempty < 2) throw SelectError("ANOVA selection needs at least two distinct stages");

    std::vector<double> f(assignment.cols);
    std::vector<std::array<std::size_t, kNumStages>> ones(assignment.cols);
    for (std::size_t i = 0; i < assignment.rows; ++i) {
        const auto row = assignment.row(i);
        const auto g = static_cast<std::size_t>(stage_code(labels[i]));
        for (std::size_t j = 0; j < assignment.cols; ++j)
            if (row[j] != 0.0) ++ones[j][g];
    }
    for (std::size_t j = 0; j < assignment.cols; ++j) f[j] = anova_f_binary(group_n, ones[j]);
    return f;
}

// Indices of the k largest scores; ties go to the lower index.
inline std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(std::min(k, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline void RuleBank::select(const Matrix& full_assignment, std::span<const SleepStage> labels, std::size_t k) {
    if (!fitted_) throw StateError("rule bank must be fitted before selection");
    if (full_assignment.cols != kNumRules) throw ShapeError("selection needs the full 240-rule assignment");
    if (k == 0 || k > kNumRules) throw SelectError("k must lie in [1, 240]");
    f_scores_ = anova_f_scores(full_assignment, labels);
    std::vector<bool> mask(kNumRules, false);
    for (auto j : top_k(f_scores_, k)) mask[j] = true;
    selected_ = std::move(mask);
}

// Free-function form: returns a copy of `bank` with k rules selected.
inline RuleBank anova_select(const RuleBank& bank, const Matrix& full_assignment, std::span<const SleepStage> labels,
                             std::size_t k = kDefaultSelectedRules) {
    RuleBank out = bank;
    out.select(full_assignment, labels, k);
    return out;
}

inline RuleBank fit_thresholds(std::span<const EpochFeatures> training) {
    RuleBank bank;
    bank.fit(training);
    return bank;
}

// ---------------------------------------------------------------------------
// JSON serialization (format "sleeper.rulebank", version 1)
// ---------------------------------------------------------------------------

inline constexpr int kRuleBankFormatVersion = 1;

inline nlohmann::json RuleBank::to_json() const {
    using nlohmann::json;
    json j;
    j["format"] = "sleeper.rulebank";
    j["version"] = kRuleBankFormatVersion;
    j["fitted"] = fitted_;
    j["n_rules"] = rules_.size();
    json rules = json::array();
    for (std::size_t r = 0; r < rules_.size(); ++r) {
        const auto& spec = rules_[r];
        json jr;
        jr["id"] = r;
        jr["feature"] = std::string(rule_feature_name(spec.feature));
        jr["target"] = spec.target_name();
        jr["group"] = spec.group_name();
        if (is_event_feature(spec.feature)) {
            jr["bound_sec"] = kEventBoundsSec[spec.group];
        } else if (fitted_) {
            jr["threshold"] = threshold(spec.feature, *spec.channel, spec.group);
        }
        if (!f_scores_.empty()) jr["f_score"] = f_scores_[r];
        if (selected_) jr["selected"] = static_cast<bool>((*selected_)[r]);
        rules.push_back(jr);
    }
    j["rules"] = rules;
    if (selected_) {
        json sel = json::array();
        for (auto id : active_rules()) sel.push_back(id);
        j["selected_ids"] = sel;
    }
    return j;
}

inline RuleBank RuleBank::from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "sleeper.rulebank") throw FormatError("not a rule bank document", 0);
    if (j.value("version", 0) != kRuleBankFormatVersion) throw FormatError("unsupported rule bank version", 0);
    RuleBank bank;
    const auto& rules = j.at("rules");
    if (rules.size() != kNumRules) throw FormatError("rule bank must list 240 rules", 0);
    bank.fitted_ = j.at("fitted").get<bool>();
    bool any_f = false, any_sel = false;
    std::vector<double> f(kNumRules, 0.0);
    std::vector<bool> sel(kNumRules, false);
    for (std::size_t r = 0; r < kNumRules; ++r) {
        const auto& jr = rules[r];
        const auto& spec = bank.rules_[r];
        if (jr.at("feature").get<std::string>() != rule_feature_name(spec.feature) ||
            jr.at("target").get<std::string>() != spec.target_name() || jr.at("group").get<std::string>() != spec.group_name())
            throw FormatError("rule " + std::to_string(r) + " does not match the canonical bank order", 0);
        if (!is_event_feature(spec.feature) && bank.fitted_)
            bank.thresholds_[scalar_slot(spec.feature)][channel_index(*spec.channel)][spec.group] =
                jr.at("threshold").get<double>();
        if (jr.contains("f_score")) {
            f[r] = jr["f_score"].get<double>();
            any_f = true;
        }
        if (jr.contains("selected")) {
            sel[r] = jr["selected"].get<bool>();
            any_sel = true;
        }
    }
    if (any_f) bank.f_scores_ = std::move(f);
    if (any_sel) bank.selected_ = std::move(sel);
    return bank;
}

inline void save_rulebank(const RuleBank& bank, const std::filesystem::path& path) {
    io::detail::spit(path, bank.to_json().dump(2) + "\n");
}

inline RuleBank load_rulebank(const std::filesystem::path& path) {
    return RuleBank::from_json(nlohmann::json::parse(io::detail::slurp(path)));
}

}  // namespace sleeper
