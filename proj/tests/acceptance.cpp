// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Time budgets are part of each criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include "sleeper/sleeper.hpp"

using namespace sleeper;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_sec, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = sec < budget_sec;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  #%-2d %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), sec, budget_sec, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

Matrix random_nonneg(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, cols);
    for (auto& v : m.data) v = u(rng) < 0.3 ? 0.0 : 3.0 * u(rng);
    return m;
}

Matrix random_binary(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = static_cast<double>(rng() & 1u);
    return m;
}

std::vector<SleepStage> random_labels(std::size_t n, std::mt19937_64& rng) {
    std::vector<SleepStage> y(n);
    for (auto& s : y) s = stage_from_code(static_cast<int>(rng() % kNumStages));
    return y;
}

EpochFeatures random_features(std::mt19937_64& rng) {
    std::lognormal_distribution<double> power(3.0, 1.0);
    std::uniform_real_distribution<double> amp(10.0, 300.0), kurt(-1.5, 8.0), dur(0.0, 30.0);
    EpochFeatures f;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        for (std::size_t b = 0; b < kNumBands; ++b) f.band_power[c][b] = power(rng);
        f.amplitude[c] = amp(rng);
        f.kurtosis[c] = kurt(rng);
    }
    for (std::size_t p = 0; p < kNumPairs; ++p) {
        f.spindle_sec[p] = dur(rng);
        f.sws_sec[p] = dur(rng);
    }
    return f;
}

Epoch zero_epoch() { return Epoch(std::vector<float>(kNumChannels * kSamplesPerEpoch, 0.0f), "acc", 0); }

void add_sine(Epoch& e, ChannelId c, double hz, double amp) {
    auto ch = e.mutable_channel(channel_index(c));
    for (std::size_t i = 0; i < ch.size(); ++i)
        ch[i] += static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / kSampleRateHz));
}

// Weak 1/f background from many random-phase sines.
void add_pink_noise(Epoch& e, ChannelId c, double rms, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> x(kSamplesPerEpoch, 0.0);
    for (int k = 1; k <= 300; ++k) {
        const double f = 0.1 * k, a = 1.0 / std::sqrt(f), ph = phase(rng);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] += a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / kSampleRateHz + ph);
    }
    double ss = 0.0;
    for (double v : x) ss += v * v;
    const double s = rms / std::sqrt(ss / static_cast<double>(x.size()));
    auto ch = e.mutable_channel(channel_index(c));
    for (std::size_t i = 0; i < x.size(); ++i) ch[i] += static_cast<float>(s * x[i]);
}

// Three 1.3 s, 13 Hz waxing-waning spindles with 0.5 s gaps from 10 s.
void add_spindles(Epoch& e, ChannelId c, double amp) {
    auto ch = e.mutable_channel(channel_index(c));
    const auto len = static_cast<std::size_t>(1.3 * kSampleRateHz);
    for (int k = 0; k < 3; ++k) {
        const auto i0 = static_cast<std::size_t>((10.0 + k * 1.8) * kSampleRateHz);
        for (std::size_t i = 0; i < len; ++i) {
            const double t = static_cast<double>(i) / kSampleRateHz;
            const double env = std::pow(std::sin(std::numbers::pi * static_cast<double>(i) / static_cast<double>(len)), 2);
            ch[i0 + i] += static_cast<float>(amp * env * std::sin(2.0 * std::numbers::pi * 13.0 * t));
        }
    }
}

double cross_entropy_at(const cnn::CnnModel<double>& m, const std::vector<double>& x, int label) {
    return cnn::CnnModel<double>::cross_entropy(label, m.forward(std::span<const double>(x)).probs);
}

}  // namespace

int main() {
    criterion(1, "default CNN flattens a 9x6000 epoch to 2496 dims", 1.0, [] {
        const auto model = cnn::CnnModel<float>::initialized(cnn::CnnConfig::full());
        auto e = zero_epoch();
        add_sine(e, ChannelId::C3, 10.0, 40.0);
        const auto p = cnn::forward(model, std::span<const float>(model.prepare(e)));
        const bool ok = model.embedding_dim() == 2496 && p.embedding.size() == 2496;
        return Outcome{ok, "embedding length " + std::to_string(p.embedding.size())};
    });

    criterion(2, "micro CNN gradients match central differences", 30.0, [] {
        auto m = cnn::CnnModel<double>::initialized(cnn::CnnConfig::micro());
        std::mt19937_64 rng(8);
        std::normal_distribution<double> noise(0.0, 0.1), unit(0.0, 1.0);
        for (auto& v : m.params()) v += noise(rng);
        std::vector<double> x(9 * 200);
        for (auto& v : x) v = unit(rng);
        double worst = 0.0;
        for (int label = 0; label < static_cast<int>(kNumStages); ++label) {
            std::vector<double> grad(m.params().size(), 0.0);
            m.backward(m.forward(std::span<const double>(x)), label, 1.0, grad);
            const double delta = 1e-3;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                auto plus = m, minus = m;
                plus.params()[i] += delta;
                minus.params()[i] -= delta;
                const double numeric = (cross_entropy_at(plus, x, label) - cross_entropy_at(minus, x, label)) / (2.0 * delta);
                const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
                worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
            }
        }
        return Outcome{worst < 1e-3, std::to_string(m.params().size()) + " params x 5 labels, max rel err " + sci(worst)};
    });

    criterion(3, "240 rules built, ANOVA keeps 96", 1.0, [] {
        std::mt19937_64 rng(3);
        std::vector<EpochFeatures> feats(500);
        for (auto& f : feats) f = random_features(rng);
        auto bank = fit_thresholds(feats);
        const auto R = bank.assign_all(feats);
        const std::size_t built = bank.rules().size();
        bank.select(R, random_labels(feats.size(), rng), kDefaultSelectedRules);
        const std::size_t kept = bank.active_rules().size();
        return Outcome{built == 240 && kept == 96 && R.cols == 240,
                       std::to_string(built) + " built, " + std::to_string(kept) + " selected"};
    });

    criterion(4, "prototypes equal brute-force per-rule sums", 5.0, [] {
        std::mt19937_64 rng(4);
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            const auto hn = column_normalize(random_nonneg(20, 2496, rng));
            const auto R = random_binary(20, 96, rng);
            const auto fast = build_prototypes(hn, R);
            for (std::size_t j = 0; j < R.cols; ++j)
                for (std::size_t d = 0; d < hn.cols; ++d) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < R.rows; ++i)
                        if (R(i, j) == 1.0) s += hn(i, d);
                    worst = std::max(worst, std::abs(fast.P(d, j) - s));
                }
        }
        return Outcome{worst < 1e-9, "5 fixtures of 20x2496, max abs diff " + sci(worst)};
    });

    criterion(5, "similarities bounded and scale invariant", 5.0, [] {
        std::mt19937_64 rng(5);
        double lo = 1.0, hi = 0.0, drift = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const auto h = random_nonneg(40, 160, rng);
            auto protos = build_prototypes(column_normalize(h), random_binary(40, 24, rng));
            const auto c = similarity(h, protos);
            for (double v : c.data) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            std::uniform_real_distribution<double> scale(1e-3, 1e3);
            for (std::size_t j = 0; j < protos.P.cols; ++j) {
                const double s = scale(rng);
                for (std::size_t d = 0; d < protos.P.rows; ++d) protos.P(d, j) *= s;
            }
            const auto c2 = similarity(h, protos);
            for (std::size_t k = 0; k < c.data.size(); ++k) drift = std::max(drift, std::abs(c2.data[k] - c.data[k]));
        }
        return Outcome{lo >= 0.0 && hi <= 1.0 + 1e-9 && drift < 1e-9,
                       "range [" + fmt(lo) + ", " + fmt(hi) + "], max change under scaling " + sci(drift)};
    });

    criterion(6, "kappa agrees with the confusion-matrix oracle", 10.0, [] {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n = 1 + rng() % 400;
            const auto t = random_labels(n, rng);
            auto p = random_labels(n, rng);
            const double keep = u(rng);
            for (std::size_t i = 0; i < n; ++i)
                if (u(rng) < keep) p[i] = t[i];
            const auto r = evaluate(t, p);
            worst = std::max(worst, std::abs(kappa_oracle_check(r.confusion) - r.kappa));
        }
        std::vector<SleepStage> y;
        for (int rep = 0; rep < 20; ++rep)
            for (auto s : kAllStages) y.push_back(s);
        const double identity = evaluate(y, y).kappa;
        std::vector<SleepStage> t, p;
        for (auto a : kAllStages)
            for (auto b : kAllStages)
                for (int rep = 0; rep < 4; ++rep) {
                    t.push_back(a);
                    p.push_back(b);
                }
        const double uniform = evaluate(t, p).kappa;
        return Outcome{worst <= 1e-12 && identity == 1.0 && std::abs(uniform) <= 1e-12,
                       "max diff " + sci(worst) + " over 1000 sets, identity " + fmt(identity) + ", uniform " +
                           fmt(uniform)};
    });

    criterion(10, "percentile and duration nesting on 10000 fixtures", 10.0, [] {
        std::mt19937_64 rng(10);
        std::vector<EpochFeatures> train(300), probe(10000);
        for (auto& f : train) f = random_features(rng);
        for (auto& f : probe) f = random_features(rng);
        const auto bank = fit_thresholds(train);
        const auto R = bank.assign_all(probe);
        std::size_t good = 0;
        for (std::size_t i = 0; i < R.rows; ++i) {
            bool ok = true;
            for (std::size_t j = 0; j < kNumRules; j += 4) {
                const bool event = is_event_feature(bank.rules()[j].feature);
                for (std::size_t g = 0; g + 1 < 4; ++g) {
                    const double a = R(i, j + g), b = R(i, j + g + 1);
                    // <P20 implies <P40 ...; >18 s implies >12 s ...
                    if (event ? b > a : a > b) ok = false;
                }
            }
            good += ok ? 1 : 0;
        }
        return Outcome{good == R.rows, std::to_string(good) + " of " + std::to_string(R.rows) + " rows consistent"};
    });

    criterion(11, "DSP oracles", 30.0, [] {
        bool ok = true;
        std::ostringstream detail;

        auto alpha = zero_epoch();
        const double A = 40.0;
        add_sine(alpha, ChannelId::C3, 10.0, A);
        double ms = 0.0;
        for (float v : alpha.channel(ChannelId::C3)) ms += static_cast<double>(v) * v;
        ms /= kSamplesPerEpoch;
        const auto bp = features::band_power(alpha)[channel_index(ChannelId::C3)];
        const double a_pow = bp[static_cast<std::size_t>(Band::Alpha)];
        const double a_err = std::abs(a_pow - ms) / ms;
        double leak = 0.0;
        for (auto b : {Band::Delta, Band::Theta, Band::Beta}) leak = std::max(leak, bp[static_cast<std::size_t>(b)] / a_pow);
        ok &= a_err < 0.05 && leak < 0.01;
        detail << "alpha err " << fmt(100.0 * a_err, 2) << "%, leak " << sci(leak);

        double sp_lo = 1e9, sp_hi = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto e = zero_epoch();
            for (auto c : {ChannelId::F3, ChannelId::F4}) {
                add_pink_noise(e, c, 5.0, seed * 10 + channel_index(c));
                add_spindles(e, c, 30.0);
            }
            const double sec = features::detect_spindles(e, ChannelPair::F3F4);
            sp_lo = std::min(sp_lo, sec);
            sp_hi = std::max(sp_hi, sec);
        }
        ok &= sp_lo >= 3.0 && sp_hi <= 4.5;
        detail << "; spindles (3.9 s built) " << fmt(sp_lo, 2) << "-" << fmt(sp_hi, 2) << " s";

        auto one_side = zero_epoch();
        add_pink_noise(one_side, ChannelId::F3, 5.0, 1);
        add_pink_noise(one_side, ChannelId::F4, 5.0, 2);
        add_spindles(one_side, ChannelId::F3, 30.0);
        const double unilateral = features::detect_spindles(one_side, ChannelPair::F3F4);
        ok &= unilateral < 0.5;
        detail << ", one-sided " << fmt(unilateral, 2) << " s";

        auto sw = zero_epoch();
        add_sine(sw, ChannelId::C3, 1.0, 100.0);
        add_sine(sw, ChannelId::C4, 1.0, 100.0);
        const double sws = features::detect_slow_waves(sw, ChannelPair::C3C4);
        auto small = zero_epoch();
        add_sine(small, ChannelId::C3, 1.0, 20.0);
        add_sine(small, ChannelId::C4, 1.0, 20.0);
        const double sws_small = features::detect_slow_waves(small, ChannelPair::C3C4);
        auto single = zero_epoch();
        add_sine(single, ChannelId::C3, 1.0, 100.0);
        const double sws_single = features::detect_slow_waves(single, ChannelPair::C3C4);
        ok &= sws >= 24.0 && sws <= 30.0 && sws_small == 0.0 && sws_single == 0.0;
        detail << "; slow waves " << fmt(sws, 2) << " s (small " << fmt(sws_small, 1) << ", one-sided "
               << fmt(sws_single, 1) << ")";
        return Outcome{ok, detail.str()};
    });

    // Criteria 7, 8, 9 and 12 share the default synthetic corpus and split.
    const auto pipeline_start = std::chrono::steady_clock::now();
    synth::SynthConfig sc;  // 100 subjects x 120 epochs, seed 7
    PipelineConfig cfg;
    cfg.cnn = cnn::CnnConfig::desk();
    cfg.cnn.seed = sc.seed;
    cfg.params.tree.max_depth = 9;
    cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::printf("corpus: %d subjects x %d epochs (seed %llu); cnn profile %s (reduced width), embedding dim %d "
                "(full profile %d)\n",
                sc.n_subjects, sc.epochs_per_subject, static_cast<unsigned long long>(sc.seed), cfg.cnn.profile.c_str(),
                cfg.cnn.flatten_dim(), cnn::CnnConfig::full().flatten_dim());
    std::fflush(stdout);

    std::optional<EmbeddingStage> stage;
    std::optional<PreparedSet> test_set;
    Matrix H_test;
    std::vector<EpochFeatures> f_test;
    std::vector<SleepStage> y_test;
    std::optional<EvalReport> proto_dt, rule_dt;
    auto run_head = [&](ClassifierChoice choice, int depth) {
        auto c = cfg;
        c.classifier = choice;
        c.params.tree.max_depth = depth;
        const auto m = fit_head(*stage, c);
        const auto r = score_features(m, H_test, f_test, cfg.jobs);
        return evaluate(y_test, r.predicted, &r.probs);
    };

    criterion(7, "end-to-end synthetic performance (prototype DT, depth 9)", 30.0 * 60.0, [&] {
        const auto all = prepare_synthetic(sc, cfg.cnn, cfg.jobs);
        std::vector<std::string> subjects;
        for (const auto& r : all.recordings) subjects.push_back(r.subject_id);
        const auto split = split_subjects(subjects, 0.1, sc.seed);
        const auto train = all.subset(split.train);
        test_set = all.subset(split.test);
        stage = train_embedding_stage(train, cfg);
        H_test = embed_prepared(stage->cnn, *test_set, cfg.jobs);
        f_test = test_set->features();
        y_test = test_set->labels();
        proto_dt = run_head(ClassifierChoice::parse("dt"), 9);
        const auto& r = *proto_dt;
        const bool ok = r.accuracy >= 0.70 && r.kappa >= 0.60 && *r.roc_auc_macro >= 0.80;
        return Outcome{ok, std::to_string(split.train.size()) + "/" + std::to_string(split.test.size()) +
                               " subjects, acc " + fmt(r.accuracy) + ", kappa " + fmt(r.kappa) + ", macro AUC " +
                               fmt(*r.roc_auc_macro)};
    });

    criterion(8, "prototype DT beats rule DT by >= 2 AUC points", 5.0 * 60.0, [&] {
        if (!proto_dt) return Outcome{false, "pipeline did not run"};
        rule_dt = run_head(ClassifierChoice::parse("rule-dt"), 9);
        const double gap = 100.0 * (*proto_dt->roc_auc_macro - *rule_dt->roc_auc_macro);
        return Outcome{gap >= 2.0, "prototype AUC " + fmt(*proto_dt->roc_auc_macro) + ", rule AUC " +
                                       fmt(*rule_dt->roc_auc_macro) + ", gap " + fmt(gap, 2) + " points"};
    });

    criterion(9, "depth 9 within 0.02 AUC of depth 12", 10.0 * 60.0, [&] {
        if (!proto_dt) return Outcome{false, "pipeline did not run"};
        const auto d12 = run_head(ClassifierChoice::parse("dt"), 12);
        const double a9 = *proto_dt->roc_auc_macro, a12 = *d12.roc_auc_macro;
        return Outcome{a9 >= a12 - 0.02, "AUC depth 9 " + fmt(a9) + ", depth 12 " + fmt(a12)};
    });

    std::printf("pipeline time for criteria 7-9: %.1f s\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - pipeline_start).count());

    criterion(12, "retraining with the same seed is byte-identical", 30.0 * 60.0, [&] {
        if (!stage) return Outcome{false, "pipeline did not run"};
        synth::SynthConfig sc2 = sc;
        const auto all = prepare_synthetic(sc2, cfg.cnn, cfg.jobs);
        std::vector<std::string> subjects;
        for (const auto& r : all.recordings) subjects.push_back(r.subject_id);
        const auto train = all.subset(split_subjects(subjects, 0.1, sc2.seed).train);
        auto c = cfg;
        c.classifier = ClassifierChoice::parse("dt");
        const auto again = train_pipeline(train, c);
        const auto first = fit_head(*stage, c);
        const bool cnn_same = cnn::encode_checkpoint(first.cnn) == cnn::encode_checkpoint(again.cnn);
        const bool bank_same = first.bank.to_json().dump(2) == again.bank.to_json().dump(2);
        const bool protos_same = encode_prototypes(first.prototypes) == encode_prototypes(again.prototypes);
        const bool clf_same = classifier_document(first).dump(2) == classifier_document(again).dump(2);
        return Outcome{cnn_same && bank_same && protos_same && clf_same,
                       std::string("checkpoint ") + (cnn_same ? "identical" : "differs") + ", rule bank " +
                           (bank_same ? "identical" : "differs") + ", prototypes " +
                           (protos_same ? "identical" : "differs") + ", classifier " +
                           (clf_same ? "identical" : "differs")};
    });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
