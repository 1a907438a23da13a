#pragma once

// Evaluation metrics: confusion matrix, accuracy, per-stage sensitivity,
// Cohen's kappa and macro one-vs-rest ROC-AUC.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleeper/matrix.hpp"
#include "sleeper/tree.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

// Rows: expert label; columns: predicted stage.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kNumStages>, kNumStages> counts{};

    std::uint64_t total() const {
        std::uint64_t n = 0;
        for (const auto& r : counts)
            for (auto c : r) n += c;
        return n;
    }
    std::uint64_t row_sum(std::size_t k) const { return std::accumulate(counts[k].begin(), counts[k].end(), std::uint64_t{0}); }
    std::uint64_t col_sum(std::size_t k) const {
        std::uint64_t n = 0;
        for (const auto& r : counts) n += r[k];
        return n;
    }
    std::uint64_t trace() const {
        std::uint64_t n = 0;
        for (std::size_t k = 0; k < kNumStages; ++k) n += counts[k][k];
        return n;
    }
};

inline ConfusionMatrix confusion_matrix(std::span<const SleepStage> y_true, std::span<const SleepStage> y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeError("y_true has " + std::to_string(y_true.size()) + " labels but y_pred has " +
                         std::to_string(y_pred.size()));
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++cm.counts[static_cast<std::size_t>(stage_code(y_true[i]))][static_cast<std::size_t>(stage_code(y_pred[i]))];
    return cm;
}

// kappa = (Acc - p_e) / (1 - p_e), p_e = sum_k |true_k| |pred_k| / N^2.
// When p_e = 1 (a single stage on both sides) agreement is perfect and
// kappa is defined as 1.
inline double kappa_from_rates(double acc, double p_e) {
    if (p_e >= 1.0) return acc >= 1.0 ? 1.0 : 0.0;
    return (acc - p_e) / (1.0 - p_e);
}

inline double chance_agreement(const ConfusionMatrix& cm) {
    const double n = static_cast<double>(cm.total());
    if (n == 0.0) return std::numeric_limits<double>::quiet_NaN();
    double pe = 0.0;
    for (std::size_t k = 0; k < kNumStages; ++k)
        pe += static_cast<double>(cm.row_sum(k)) * static_cast<double>(cm.col_sum(k));
    return pe / (n * n);
}

// Kappa straight from integer counts: (N*trace - S) / (N^2 - S), S = sum_k r_k c_k.
inline double kappa_oracle_check(const ConfusionMatrix& cm) {
    const std::uint64_t n = cm.total();
    if (n == 0) throw EvalError("kappa is undefined for an empty confusion matrix");
    unsigned __int128 s = 0;
    for (std::size_t k = 0; k < kNumStages; ++k)
        s += static_cast<unsigned __int128>(cm.row_sum(k)) * cm.col_sum(k);
    const auto nn = static_cast<unsigned __int128>(n) * n;
    const auto agree = static_cast<unsigned __int128>(n) * cm.trace();
    if (nn == s) return agree == nn ? 1.0 : 0.0;
    const auto num = static_cast<long double>(agree) - static_cast<long double>(s);
    const auto den = static_cast<long double>(nn - s);
    return static_cast<double>(num / den);
}

// Area under the ROC curve of `scores` for the binary labels `positive`,
// trapezoid over distinct thresholds (tied scores form one step). Returns NaN
// when either class is absent.
inline double roc_auc_binary(std::span<const double> scores, const std::vector<char>& positive) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double P = 0, Nn = 0;
    for (char p : positive) (p ? P : Nn) += 1.0;
    if (P == 0 || Nn == 0) return std::numeric_limits<double>::quiet_NaN();
    double tp = 0, fp = 0, area = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        const double prev_tp = tp, prev_fp = fp;
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
            (positive[idx[j]] ? tp : fp) += 1.0;
            ++j;
        }
        area += (fp - prev_fp) * (tp + prev_tp) / 2.0;
        i = j;
    }
    return area / (P * Nn);
}

// Unweighted mean of one-vs-rest AUCs over stages present in y_true (and
// absent from at least one epoch).
inline double roc_auc_macro(std::span<const SleepStage> y_true, const std::vector<ClassVector>& scores) {
    if (scores.size() != y_true.size()) throw ShapeError("scores must align with labels");
    double sum = 0.0;
    int used = 0;
    std::vector<double> s(y_true.size());
    std::vector<char> pos(y_true.size());
    for (std::size_t k = 0; k < kNumStages; ++k) {
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            s[i] = scores[i][k];
            pos[i] = static_cast<std::size_t>(stage_code(y_true[i])) == k;
        }
        const double auc = roc_auc_binary(s, pos);
        if (std::isnan(auc)) continue;
        sum += auc;
        ++used;
    }
    return used ? sum / used : std::numeric_limits<double>::quiet_NaN();
}

struct EvalReport {
    std::size_t n = 0;
    double accuracy = 0.0;
    double kappa = 0.0;
    double chance_agreement = 0.0;
    std::optional<double> roc_auc_macro;
    std::array<double, kNumStages> sensitivity{};  // NaN where the stage never occurs in y_true
    ConfusionMatrix confusion;
};

inline EvalReport evaluate(std::span<const SleepStage> y_true, std::span<const SleepStage> y_pred,
                           const std::vector<ClassVector>* scores = nullptr) {
    EvalReport r;
    r.confusion = confusion_matrix(y_true, y_pred);
    r.n = y_true.size();
    const double n = static_cast<double>(r.n);
    r.accuracy = r.n ? static_cast<double>(r.confusion.trace()) / n : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < kNumStages; ++k) {
        const auto row = r.confusion.row_sum(k);
        r.sensitivity[k] = row ? static_cast<double>(r.confusion.counts[k][k]) / static_cast<double>(row)
                               : std::numeric_limits<double>::quiet_NaN();
    }
    r.chance_agreement = chance_agreement(r.confusion);
    r.kappa = r.n ? kappa_from_rates(r.accuracy, r.chance_agreement) : std::numeric_limits<double>::quiet_NaN();
    if (scores) r.roc_auc_macro = roc_auc_macro(y_true, *scores);
    return r;
}

inline std::string kappa_interpretation(double kappa) {
    if (std::isnan(kappa)) return "undefined";
    if (kappa > 0.81) return "almost perfect";
    if (kappa > 0.61) return "substantial";
    if (kappa > 0.41) return "moderate";
    if (kappa > 0.21) return "fair";
    if (kappa > 0.01) return "slight";
    return "less than chance";
}

namespace metrics_detail {
inline nlohmann::json number_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }
}  // namespace metrics_detail

inline nlohmann::json report_json(const EvalReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["accuracy"] = metrics_detail::number_or_null(r.accuracy);
    j["kappa"] = metrics_detail::number_or_null(r.kappa);
    j["kappa_interpretation"] = kappa_interpretation(r.kappa);
    j["chance_agreement"] = metrics_detail::number_or_null(r.chance_agreement);
    j["roc_auc_macro"] = r.roc_auc_macro ? metrics_detail::number_or_null(*r.roc_auc_macro) : nlohmann::json(nullptr);
    nlohmann::json sens;
    for (auto s : kAllStages)
        sens[std::string(stage_name(s))] = metrics_detail::number_or_null(r.sensitivity[stage_code(s)]);
    j["sensitivity"] = sens;
    auto cm = nlohmann::json::array();
    for (const auto& row : r.confusion.counts) cm.push_back(row);
    j["confusion"] = cm;
    j["stage_order"] = {"Wake", "N1", "N2", "N3", "REM"};
    return j;
}

inline std::string report_text(const EvalReport& r) {
    std::ostringstream os;
    char buf[128];
    os << "epochs evaluated: " << r.n << '\n';
    std::snprintf(buf, sizeof buf, "accuracy: %.4f\n", r.accuracy);
    os << buf;
    std::snprintf(buf, sizeof buf, "cohen kappa: %.4f (%s agreement)\n", r.kappa, kappa_interpretation(r.kappa).c_str());
    os << buf;
    if (r.roc_auc_macro) {
        std::snprintf(buf, sizeof buf, "macro ROC-AUC: %.4f\n", *r.roc_auc_macro);
        os << buf;
    } else {
        os << "macro ROC-AUC: n/a (no scores)\n";
    }
    os << "sensitivity:";
    for (auto s : kAllStages) {
        const double v = r.sensitivity[stage_code(s)];
        if (std::isnan(v))
            std::snprintf(buf, sizeof buf, " %s=n/a", std::string(stage_name(s)).c_str());
        else
            std::snprintf(buf, sizeof buf, " %s=%.3f", std::string(stage_name(s)).c_str(), v);
        os << buf;
    }
    os << "\nconfusion (rows expert, cols predicted):\n" << "        ";
    for (auto s : kAllStages) {
        std::snprintf(buf, sizeof buf, "%7s", std::string(stage_name(s)).c_str());
        os << buf;
    }
    os << '\n';
    for (auto s : kAllStages) {
        std::snprintf(buf, sizeof buf, "%7s ", std::string(stage_name(s)).c_str());
        os << buf;
        for (auto c : r.confusion.counts[stage_code(s)]) {
            std::snprintf(buf, sizeof buf, "%7llu", static_cast<unsigned long long>(c));
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

inline std::string confusion_csv(const ConfusionMatrix& cm) {
    std::ostringstream os;
    os << "expert\\predicted";
    for (auto s : kAllStages) os << ',' << stage_name(s);
    os << '\n';
    for (auto s : kAllStages) {
        os << stage_name(s);
        for (auto c : cm.counts[stage_code(s)]) os << ',' << c;
        os << '\n';
    }
    return os.str();
}

}  // namespace sleeper
