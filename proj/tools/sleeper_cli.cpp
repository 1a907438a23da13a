// sleeper: command-line driver for the interpretable sleep-staging pipeline.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sleeper/sleeper.hpp"

namespace fs = std::filesystem;
using namespace sleeper;
using nlohmann::json;

namespace {

struct StageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runs one pipeline stage, tagging any failure with the stage name.
template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure("[" + name + "] " + e.what());
    }
}

void log_line(std::string_view msg) { std::cerr << msg << '\n'; }

struct Options {
    std::string config;
    std::string data;
    std::string out;
    std::string model;
    std::string input;
    std::string profile = "full";
    std::string classifier = "dt";
    std::size_t rules = kDefaultSelectedRules;
    bool no_select = false;
    int depth = 9;
    std::size_t min_leaf = 5;
    std::uint64_t seed = 7;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    double test_fraction = 0.1;
    int cnn_epochs = -1;
    double lr = -1.0;
    bool dump_features = false;
    int subjects = 100, epochs = 120;
    double noise = 5.0;
    std::vector<int> depths = {1, 2, 3, 5, 7, 9, 12, 15};
    std::vector<int> ks = {12, 24, 48, 96, 144, 192, 240};
    int epoch_index = -1;
};

// Fills options the user did not pass on the command line from the JSON
// config file, then the seed from SLEEPER_SEED.
void apply_config(CLI::App& app, Options& o) {
    auto given = [&](const char* flag) { return app.count(flag) > 0; };
    bool seed_set = given("--seed");
    if (!o.config.empty()) {
        const json j = json::parse(io::detail::slurp(o.config));
        auto take = [&](const char* key, const char* flag, auto& field) {
            if (j.contains(key) && !given(flag)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        take("data", "--data", o.data);
        take("out", "--out", o.out);
        take("model", "--model", o.model);
        take("profile", "--profile", o.profile);
        take("classifier", "--classifier", o.classifier);
        take("rules", "--rules", o.rules);
        take("no_select", "--no-select", o.no_select);
        take("depth", "--depth", o.depth);
        take("min_leaf", "--min-leaf", o.min_leaf);
        take("jobs", "--jobs", o.jobs);
        take("test_fraction", "--test-fraction", o.test_fraction);
        take("cnn_epochs", "--cnn-epochs", o.cnn_epochs);
        take("lr", "--lr", o.lr);
        take("dump_features", "--dump-features", o.dump_features);
        take("subjects", "--subjects", o.subjects);
        take("epochs", "--epochs", o.epochs);
        take("noise", "--noise", o.noise);
        take("depths", "--depths", o.depths);
        take("ks", "--ks", o.ks);
        if (j.contains("seed") && !seed_set) {
            o.seed = j.at("seed").get<std::uint64_t>();
            seed_set = true;
        }
    }
    if (!seed_set) {
        if (const char* env = std::getenv("SLEEPER_SEED")) {
            try {
                o.seed = std::stoull(env);
            } catch (const std::exception&) {
                throw ConfigError(std::string("SLEEPER_SEED is not an integer: ") + env);
            }
        }
    }
}

PipelineConfig pipeline_config(const Options& o) {
    PipelineConfig cfg;
    if (o.profile == "full")
        cfg.cnn = cnn::CnnConfig::full();
    else if (o.profile == "desk")
        cfg.cnn = cnn::CnnConfig::desk();
    else
        throw ConfigError("unknown CNN profile '" + o.profile + "' (expected full or desk)");
    if (o.cnn_epochs >= 0) cfg.cnn.train_epochs = o.cnn_epochs;
    if (o.lr > 0) cfg.cnn.lr = o.lr;
    cfg.cnn.seed = o.seed;
    cfg.n_rules = o.no_select ? kNumRules : o.rules;
    if (o.no_select && o.rules != kNumRules && o.rules != kDefaultSelectedRules)
        throw ConfigError("--no-select keeps all 240 rules; drop --rules or pass --rules 240");
    cfg.select = !o.no_select;
    cfg.classifier = ClassifierChoice::parse(o.classifier);
    if (o.depth < 0) throw ConfigError("--depth must be nonnegative");
    cfg.params.tree.max_depth = o.depth;
    cfg.params.tree.min_leaf = o.min_leaf;
    cfg.jobs = std::max(1, o.jobs);
    cfg.validate();
    return cfg;
}

std::vector<fs::path> require_recordings(const std::string& dir) {
    if (dir.empty()) throw ConfigError("--data is required");
    if (!fs::exists(dir)) throw ConfigError("data path does not exist: " + dir);
    auto files = io::list_recordings(dir);
    if (files.empty()) throw ConfigError("no .psgb recordings under " + dir);
    return files;
}

PreparedSet prepare_files(const std::vector<fs::path>& files, const cnn::CnnConfig& cnn_cfg, int jobs) {
    return prepare_many(
        files.size(), [&](std::size_t i) { return io::read_recording(files[i]); }, cnn_cfg, jobs);
}

void write_text(const fs::path& path, const std::string& text) {
    io::detail::spit(path, text);
    std::cerr << "wrote " << path.string() << '\n';
}

void dump_features(const PreparedSet& set, const fs::path& path) {
    std::ostringstream os;
    os << features::features_csv_header() << '\n';
    for (const auto& r : set.recordings)
        for (std::size_t i = 0; i < r.size(); ++i) os << features::features_csv_row(r.subject_id, i, r.features[i]) << '\n';
    write_text(path, os.str());
}

// Reads the recordings under --data, splits by subject and prepares both sides.
struct SplitData {
    DatasetSplit split;
    PreparedSet train, test;
};

SplitData load_split(const Options& o, const PipelineConfig& cfg) {
    const auto files = stage("ingest", [&] { return require_recordings(o.data); });
    auto all = stage("features", [&] {
        log_line("preparing " + std::to_string(files.size()) + " recordings");
        return prepare_files(files, cfg.cnn, cfg.jobs);
    });
    SplitData d;
    std::vector<std::string> subjects;
    for (const auto& r : all.recordings) subjects.push_back(r.subject_id);
    d.split = stage("split", [&] { return split_subjects(subjects, o.test_fraction, o.seed); });
    for (auto& r : all.recordings) (d.split.is_test(r.subject_id) ? d.test : d.train).recordings.push_back(std::move(r));
    if (!d.train.labeled()) throw StageFailure("[split] training recordings must carry labels");
    log_line("split: " + std::to_string(d.split.train.size()) + " train / " + std::to_string(d.split.test.size()) +
             " test subjects");
    return d;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

// ---------------------------------------------------------------------------

int cmd_synth(const Options& o) {
    if (o.out.empty()) throw ConfigError("--out is required");
    synth::SynthConfig cfg;
    cfg.n_subjects = o.subjects;
    cfg.epochs_per_subject = o.epochs;
    cfg.seed = o.seed;
    cfg.noise_scale_uV = o.noise;
    stage("synth", [&] { cfg.validate(); });
    fs::create_directories(o.out);
    parallel_for(static_cast<std::size_t>(cfg.n_subjects), o.jobs, [&](std::size_t i) {
        const auto rec = synth::generate_subject(cfg, static_cast<int>(i));
        io::write_recording(rec, fs::path(o.out) / (rec.subject_id + ".psgb"));
        io::write_labels_csv(*rec.labels, fs::path(o.out) / (rec.subject_id + "_labels.csv"));
    });
    std::cout << "wrote " << cfg.n_subjects << " recordings x " << cfg.epochs_per_subject << " epochs to " << o.out
              << " (seed " << cfg.seed << ")\n";
    return 0;
}

int cmd_train(const Options& o) {
    if (o.out.empty()) throw ConfigError("--out is required");
    const auto cfg = pipeline_config(o);
    std::cout << "cnn profile " << cfg.cnn.profile << ", embedding dim " << cfg.cnn.flatten_dim() << '\n';
    auto data = load_split(o, cfg);
    if (o.dump_features) dump_features(data.train, fs::path(o.out) / "features_train.csv");

    const auto emb = stage("embedder", [&] { return train_embedding_stage(data.train, cfg, log_line); });
    std::cout << "loss trace:";
    for (double l : emb.trace.loss_trace) std::cout << ' ' << fmt(l);
    std::cout << '\n';
    const auto model = stage("classifier", [&] { return fit_head(emb, cfg, log_line); });

    const auto ids = model.bank.active_rules();
    std::cout << "rules: " << ids.size() << " of " << kNumRules << (cfg.select ? " selected by ANOVA" : " (no selection)")
              << '\n';
    if (cfg.select) {
        std::vector<std::size_t> order = ids;
        const auto& f = model.bank.f_scores();
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] > f[b]; });
        for (std::size_t i = 0; i < std::min<std::size_t>(5, order.size()); ++i)
            std::cout << "  top rule " << order[i] << ": " << model.bank.rules()[order[i]].describe()
                      << "  F=" << fmt(f[order[i]], 2) << '\n';
    }
    stage("artifacts", [&] {
        save_model(model, o.out);
        io::detail::spit(fs::path(o.out) / artifacts::kSplit, split_json(data.split).dump(2) + "\n");
        std::ostringstream trace;
        trace << "sweep,mean_loss\n";
        for (std::size_t i = 0; i < emb.trace.loss_trace.size(); ++i) trace << i + 1 << ',' << emb.trace.loss_trace[i] << '\n';
        io::detail::spit(fs::path(o.out) / "loss_trace.csv", trace.str());
    });
    std::cout << "classifier " << model.choice.name() << "; artifacts in " << o.out << '\n';
    return 0;
}

std::string model_dir(const Options& o) {
    if (!o.model.empty()) return o.model;
    throw ConfigError("--model is required");
}

void write_report(const EvalReport& r, const fs::path& dir, const std::string& stem) {
    write_text(dir / (stem + ".json"), report_json(r).dump(2) + "\n");
    write_text(dir / (stem + ".txt"), report_text(r));
    write_text(dir / (stem + "_confusion.csv"), confusion_csv(r.confusion));
}

int cmd_score(const Options& o) {
    const auto dir = model_dir(o);
    const auto model = stage("artifacts", [&] { return load_model(dir); });
    if (o.input.empty()) throw ConfigError("--input is required");
    const auto files = stage("ingest", [&] { return require_recordings(o.input); });
    const fs::path out = o.out.empty() ? fs::path(dir) / "scores" : fs::path(o.out);
    const auto set = stage("features", [&] { return prepare_files(files, model.cnn.config(), o.jobs); });
    const auto res = stage("score", [&] { return score(model, set, o.jobs); });
    const auto ids = model.bank.active_rules();

    std::size_t row = 0;
    for (const auto& r : set.recordings) {
        std::ostringstream os;
        os.precision(6);
        os << "epoch_index,stage,stage_code";
        for (auto s : kAllStages) os << ",p_" << stage_name(s);
        for (auto id : ids) os << ",f_" << id;
        if (!res.paths.empty()) os << ",path";
        os << '\n';
        for (std::size_t i = 0; i < r.size(); ++i, ++row) {
            os << i << ',' << stage_name(res.predicted[row]) << ',' << stage_code(res.predicted[row]);
            for (double p : res.probs[row]) os << ',' << p;
            for (double v : res.features.row(row)) os << ',' << v;
            if (!res.paths.empty()) {
                os << ',';
                for (std::size_t k = 0; k < res.paths[row].size(); ++k) os << (k ? "/" : "") << res.paths[row][k];
            }
            os << '\n';
        }
        write_text(out / (r.subject_id + "_hypnogram.csv"), os.str());
    }
    if (set.labeled()) {
        const auto y = set.labels();
        const auto rep = evaluate(y, res.predicted, &res.probs);
        write_report(rep, out, "report");
        std::cout << report_text(rep);
    } else {
        std::cout << "scored " << row << " unlabeled epochs (no report)\n";
    }
    return 0;
}

int cmd_eval(const Options& o) {
    const auto dir = model_dir(o);
    const auto model = stage("artifacts", [&] { return load_model(dir); });
    const auto files = stage("ingest", [&] { return require_recordings(o.data); });
    const auto split_path = fs::path(dir) / artifacts::kSplit;
    std::vector<fs::path> chosen = files;
    if (fs::exists(split_path)) {
        const auto sj = json::parse(io::detail::slurp(split_path));
        const auto test = sj.at("test").get<std::vector<std::string>>();
        chosen.clear();
        for (const auto& f : files)
            if (std::find(test.begin(), test.end(), f.stem().string()) != test.end()) chosen.push_back(f);
        if (chosen.empty()) throw StageFailure("[eval] none of the split's test subjects were found under " + o.data);
    }
    const auto set = stage("features", [&] { return prepare_files(chosen, model.cnn.config(), o.jobs); });
    if (!set.labeled()) throw StageFailure("[eval] evaluation needs labeled recordings");
    const auto res = stage("score", [&] { return score(model, set, o.jobs); });
    const auto rep = evaluate(set.labels(), res.predicted, &res.probs);
    write_report(rep, o.out.empty() ? fs::path(dir) : fs::path(o.out), "eval");
    std::cout << "classifier " << model.choice.name() << " on " << chosen.size() << " test recordings\n" << report_text(rep);
    return 0;
}

int cmd_sweep_depth(const Options& o) {
    if (o.depths.empty()) throw ConfigError("--depths must list at least one depth");
    for (int d : o.depths)
        if (d < 0) throw ConfigError("depths must be nonnegative");
    if (o.out.empty()) throw ConfigError("--out is required");
    auto cfg = pipeline_config(o);
    cfg.classifier = ClassifierChoice::parse("dt");
    std::cout << "cnn profile " << cfg.cnn.profile << ", embedding dim " << cfg.cnn.flatten_dim() << '\n';
    auto data = load_split(o, cfg);
    const auto emb = stage("embedder", [&] { return train_embedding_stage(data.train, cfg, log_line); });
    const auto H_test = embed_prepared(emb.cnn, data.test, cfg.jobs);
    const auto f_test = data.test.features();
    const auto y_test = data.test.labels();

    std::ostringstream csv;
    csv << "depth,roc_auc,accuracy,kappa\n";
    std::vector<double> xs, aucs;
    for (int d : o.depths) {
        cfg.params.tree.max_depth = d;
        const auto m = stage("classifier", [&] { return fit_head(emb, cfg); });
        const auto res = score_features(m, H_test, f_test, cfg.jobs);
        const auto rep = evaluate(y_test, res.predicted, &res.probs);
        csv << d << ',' << *rep.roc_auc_macro << ',' << rep.accuracy << ',' << rep.kappa << '\n';
        std::cout << "depth " << d << ": AUC " << fmt(*rep.roc_auc_macro) << "  acc " << fmt(rep.accuracy) << "  kappa "
                  << fmt(rep.kappa) << '\n';
        xs.push_back(d);
        aucs.push_back(*rep.roc_auc_macro);
    }
    write_text(fs::path(o.out) / "sweep_depth.csv", csv.str());
    write_text(fs::path(o.out) / "sweep_depth.svg",
               plot::line_chart_svg("ROC-AUC vs tree depth", "tree depth", "macro ROC-AUC", xs, {{"prototype DT", aucs}}));
    return 0;
}

int cmd_sweep_rules(const Options& o) {
    if (o.ks.empty()) throw ConfigError("--ks must list at least one rule count");
    for (int k : o.ks)
        if (k < 1 || k > static_cast<int>(kNumRules)) throw ConfigError("rule counts must lie in [1, 240]");
    if (o.out.empty()) throw ConfigError("--out is required");
    auto cfg = pipeline_config(o);
    std::cout << "cnn profile " << cfg.cnn.profile << ", embedding dim " << cfg.cnn.flatten_dim() << '\n';
    auto data = load_split(o, cfg);
    const auto emb = stage("embedder", [&] { return train_embedding_stage(data.train, cfg, log_line); });
    const auto H_test = embed_prepared(emb.cnn, data.test, cfg.jobs);
    const auto f_test = data.test.features();
    const auto y_test = data.test.labels();

    std::ostringstream csv;
    csv << "k,roc_auc_prototype,roc_auc_rule\n";
    std::vector<double> xs, proto_auc, rule_auc;
    const auto base = ClassifierChoice::parse(o.classifier);
    for (int k : o.ks) {
        cfg.n_rules = static_cast<std::size_t>(k);
        cfg.select = true;
        double aucs[2];
        for (int src = 0; src < 2; ++src) {
            cfg.classifier = base;
            cfg.classifier.cnn_head = false;
            cfg.classifier.source = src == 0 ? FeatureSource::Prototype : FeatureSource::Rule;
            const auto m = stage("classifier", [&] { return fit_head(emb, cfg); });
            const auto res = score_features(m, H_test, f_test, cfg.jobs);
            aucs[src] = *evaluate(y_test, res.predicted, &res.probs).roc_auc_macro;
        }
        csv << k << ',' << aucs[0] << ',' << aucs[1] << '\n';
        std::cout << "k " << k << ": prototype AUC " << fmt(aucs[0]) << "  rule AUC " << fmt(aucs[1]) << '\n';
        xs.push_back(k);
        proto_auc.push_back(aucs[0]);
        rule_auc.push_back(aucs[1]);
    }
    write_text(fs::path(o.out) / "sweep_rules.csv", csv.str());
    write_text(fs::path(o.out) / "sweep_rules.svg",
               plot::line_chart_svg("ROC-AUC vs number of rules", "number of rules", "macro ROC-AUC", xs,
                                    {{"prototype features", proto_auc}, {"raw rule features", rule_auc}}));
    return 0;
}

int cmd_explain(const Options& o) {
    const auto dir = model_dir(o);
    const auto model = stage("artifacts", [&] { return load_model(dir); });
    if (!model.model || !model.model->tree())
        throw ConfigError("explain needs a decision-tree classifier (trained with --classifier dt or rule-dt)");
    const auto& tree = *model.model->tree();
    const auto ids = model.prototypes.rule_ids;
    const fs::path out = o.out.empty() ? fs::path(dir) : fs::path(o.out);
    const auto text = stage("render", [&] { return render_tree_text(tree, model.bank, ids); });
    write_text(out / "tree.txt", text);
    write_text(out / "tree.dot", stage("render", [&] { return render_tree_dot(tree, model.bank, ids); }));
    if (o.input.empty()) {
        std::cout << text;
        return 0;
    }
    // Routing explanation for one epoch of one recording.
    const auto rec = stage("ingest", [&] { return io::read_recording(o.input); });
    if (o.epoch_index < 0 || static_cast<std::size_t>(o.epoch_index) >= rec.epochs.size())
        throw ConfigError("--epoch must index an epoch of the input recording");
    Recording one;
    one.subject_id = rec.subject_id;
    one.epochs.push_back(rec.epochs[static_cast<std::size_t>(o.epoch_index)]);
    one.epochs.back().set_index(0);
    PreparedSet set;
    set.recordings.push_back(prepare_recording(one, model.cnn.config()));
    const auto res = score(model, set);
    std::cout << "epoch " << o.epoch_index << " of " << rec.subject_id << " -> " << stage_name(res.predicted[0]) << '\n';
    for (int id : res.paths[0]) {
        const auto& n = tree.nodes()[id];
        if (n.is_leaf()) {
            std::cout << "  leaf " << id << ": " << format_ratios(n.class_ratios) << " majority " << stage_name(n.majority)
                      << '\n';
            break;
        }
        const double v = res.features(0, n.feature);
        std::cout << "  node " << id << ": " << model.bank.rules()[ids[n.feature]].describe() << "  value " << fmt(v, 3)
                  << (v < n.threshold ? " < " : " >= ") << format_threshold(n.threshold) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sleeper: interpretable sleep staging from expert-rule prototypes"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--config", o.config, "JSON config file (keys mirror long flag names)");
        c->add_option("--seed", o.seed, "Random seed (falls back to SLEEPER_SEED)");
        c->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
        c->add_option("--out", o.out, "Output directory");
    };
    auto pipeline_flags = [&](CLI::App* c) {
        c->add_option("--data", o.data, "Directory of .psgb recordings");
        c->add_option("--profile", o.profile, "CNN profile: full | desk");
        c->add_option("--rules", o.rules, "Number of ANOVA-selected rules");
        c->add_flag("--no-select", o.no_select, "Use all 240 rules");
        c->add_option("--classifier", o.classifier, "dt | lr | gbt | rule-dt | rule-lr | rule-gbt | cnn");
        c->add_option("--depth", o.depth, "Decision-tree max depth");
        c->add_option("--min-leaf", o.min_leaf, "Decision-tree minimum samples per leaf");
        c->add_option("--test-fraction", o.test_fraction, "Fraction of subjects held out");
        c->add_option("--cnn-epochs", o.cnn_epochs, "Override CNN training sweeps");
        c->add_option("--lr", o.lr, "Override CNN learning rate");
        c->add_flag("--dump-features", o.dump_features, "Write per-epoch rule features as CSV");
    };

    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
    common(synth_cmd);
    synth_cmd->add_option("--subjects", o.subjects, "Number of subjects");
    synth_cmd->add_option("--epochs", o.epochs, "Epochs per subject");
    synth_cmd->add_option("--noise", o.noise, "Pink-noise scale in uV");

    auto* train_cmd = app.add_subcommand("train", "Train CNN, rules, prototypes and classifier");
    common(train_cmd);
    pipeline_flags(train_cmd);

    auto* score_cmd = app.add_subcommand("score", "Score recordings with trained artifacts");
    common(score_cmd);
    score_cmd->add_option("--model", o.model, "Artifact directory from `train`");
    score_cmd->add_option("--input", o.input, "Recording file or directory");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate trained artifacts on the held-out subjects");
    common(eval_cmd);
    eval_cmd->add_option("--model", o.model, "Artifact directory from `train`");
    eval_cmd->add_option("--data", o.data, "Directory of .psgb recordings");

    auto* sweep_depth_cmd = app.add_subcommand("sweep-depth", "ROC-AUC versus decision-tree depth");
    common(sweep_depth_cmd);
    pipeline_flags(sweep_depth_cmd);
    sweep_depth_cmd->add_option("--depths", o.depths, "Depths to evaluate")->delimiter(',');

    auto* sweep_rules_cmd = app.add_subcommand("sweep-rules", "ROC-AUC versus number of selected rules");
    common(sweep_rules_cmd);
    pipeline_flags(sweep_rules_cmd);
    sweep_rules_cmd->add_option("--ks", o.ks, "Rule counts to evaluate")->delimiter(',');

    auto* explain_cmd = app.add_subcommand("explain", "Render the decision tree, optionally routing one epoch");
    common(explain_cmd);
    explain_cmd->add_option("--model", o.model, "Artifact directory from `train`");
    explain_cmd->add_option("--input", o.input, "Recording file to explain");
    explain_cmd->add_option("--epoch", o.epoch_index, "Epoch index within --input");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config(*sub, o);
        const auto t0 = std::chrono::steady_clock::now();
        int rc = 0;
        const std::string name = sub->get_name();
        if (name == "synth") rc = cmd_synth(o);
        else if (name == "train") rc = cmd_train(o);
        else if (name == "score") rc = cmd_score(o);
        else if (name == "eval") rc = cmd_eval(o);
        else if (name == "sweep-depth") rc = cmd_sweep_depth(o);
        else if (name == "sweep-rules") rc = cmd_sweep_rules(o);
        else if (name == "explain") rc = cmd_explain(o);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cerr << name << " finished in " << fmt(secs, 1) << " s\n";
        return rc;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
