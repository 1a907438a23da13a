#pragma once

// CART classification trees (Gini) and least-squares regression trees, both
// grown level by level over per-feature presorted sample orders.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sleeper/matrix.hpp"
#include "sleeper/types.hpp"

namespace sleeper {

using ClassVector = std::array<double, kNumStages>;

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

namespace tree_detail {

// For each feature, sample indices sorted by value (stable: ties keep
// sample order).
inline std::vector<std::vector<std::uint32_t>> presort(const Matrix& X) {
    std::vector<std::vector<std::uint32_t>> order(X.cols, std::vector<std::uint32_t>(X.rows));
    for (std::size_t f = 0; f < X.cols; ++f) {
        auto& o = order[f];
        std::iota(o.begin(), o.end(), 0u);
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
    }
    return order;
}

// Midpoint between two distinct sorted values such that `lo < t <= hi`.
inline double midpoint(double lo, double hi) {
    const double m = lo + (hi - lo) / 2.0;
    return m > lo ? m : hi;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();  // larger is better
};

// Level-wise best-split search. `Stats` accumulates per-sample statistics and
// scores a (left, right) partition; the best split per frontier node is the
// first (lowest feature, then lowest threshold) with the maximal score.
template <class Stats, class AddFn, class ScoreFn>
std::vector<Split> best_splits(const Matrix& X, const std::vector<std::vector<std::uint32_t>>& order,
                               const std::vector<int>& frontier_of, const std::vector<Stats>& totals,
                               std::size_t min_leaf, AddFn add, ScoreFn score) {
    const std::size_t n_nodes = totals.size();
    std::vector<Split> best(n_nodes);
    std::vector<Stats> left(n_nodes);
    std::vector<std::size_t> n_left(n_nodes);
    std::vector<double> prev(n_nodes);
    for (std::size_t f = 0; f < X.cols; ++f) {
        std::fill(left.begin(), left.end(), Stats{});
        std::fill(n_left.begin(), n_left.end(), 0);
        for (std::uint32_t i : order[f]) {
            const int node = frontier_of[i];
            if (node < 0) continue;
            const double v = X(i, f);
            const auto k = static_cast<std::size_t>(node);
            if (n_left[k] > 0 && v > prev[k] && n_left[k] >= min_leaf && totals[k].n - n_left[k] >= min_leaf) {
                const double s = score(left[k], totals[k]);
                if (s > best[k].score) best[k] = {static_cast<int>(f), midpoint(prev[k], v), s};
            }
            add(left[k], i);
            ++n_left[k];
            prev[k] = v;
        }
    }
    return best;
}

}  // namespace tree_detail

// ---------------------------------------------------------------------------
// Classification tree
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1, right = -1;
    int depth = 0;
    std::size_t n_samples = 0;
    double n_fraction = 0.0;
    ClassVector class_ratios{};
    SleepStage majority = SleepStage::Wake;

    bool is_leaf() const { return feature < 0; }
};

inline double gini(const ClassVector& counts, double n) {
    if (n <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += (c / n) * (c / n);
    return 1.0 - s;
}

inline SleepStage argmax_stage(const ClassVector& v) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[best]) best = k;
    return static_cast<SleepStage>(best);
}

struct TreeParams {
    int max_depth = 9;
    std::size_t min_leaf = 5;
};

struct TreePrediction {
    SleepStage stage;
    ClassVector probs;
    std::vector<int> path;  // node ids from root to leaf
};

class DecisionTree {
public:
    DecisionTree() = default;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeParams& params() const { return params_; }
    std::size_t n_features() const { return n_features_; }
    bool fitted() const { return !nodes_.empty(); }

    int height() const {
        int h = 0;
        for (const auto& n : nodes_) h = std::max(h, n.depth);
        return h;
    }

    static DecisionTree fit(const Matrix& X, std::span<const SleepStage> y, TreeParams params = {}) {
        if (X.rows == 0) throw FitError("cannot fit a decision tree on empty data");
        if (y.size() != X.rows) throw ShapeError("labels must align with feature rows");
        if (params.max_depth < 0) throw FitError("max_depth must be nonnegative");
        if (params.min_leaf == 0) params.min_leaf = 1;

        DecisionTree t;
        t.params_ = params;
        t.n_features_ = X.cols;
        const auto order = tree_detail::presort(X);
        const double total = static_cast<double>(X.rows);

        struct Counts {
            ClassVector c{};
            std::size_t n = 0;
        };
        auto make_node = [&](const Counts& s, int depth) {
            TreeNode node;
            node.depth = depth;
            node.n_samples = s.n;
            node.n_fraction = static_cast<double>(s.n) / total;
            for (std::size_t k = 0; k < kNumStages; ++k) node.class_ratios[k] = s.c[k] / static_cast<double>(s.n);
            node.majority = argmax_stage(s.c);
            return node;
        };

        Counts root;
        for (auto s : y) {
            root.c[static_cast<std::size_t>(stage_code(s))] += 1.0;
            ++root.n;
        }
        t.nodes_.push_back(make_node(root, 0));

        // frontier_of[i]: frontier slot of sample i, -1 once it sits in a finished leaf.
        std::vector<int> frontier_of(X.rows, 0);
        std::vector<int> frontier_nodes = {0};
        std::vector<Counts> totals = {root};

        auto add = [&](Counts& s, std::uint32_t i) {
            s.c[static_cast<std::size_t>(stage_code(y[i]))] += 1.0;
            ++s.n;
        };
        // Gini gain of the split relative to the parent.
        auto score = [&](const Counts& l, const Counts& tot) {
            Counts r;
            r.n = tot.n - l.n;
            for (std::size_t k = 0; k < kNumStages; ++k) r.c[k] = tot.c[k] - l.c[k];
            const double n = static_cast<double>(tot.n), nl = static_cast<double>(l.n), nr = static_cast<double>(r.n);
            return gini(tot.c, n) - (nl / n) * gini(l.c, nl) - (nr / n) * gini(r.c, nr);
        };

        for (int depth = 0; !frontier_nodes.empty(); ++depth) {
            // Drop nodes that cannot split further.
            for (std::size_t k = 0; k < frontier_nodes.size(); ++k) {
                const auto& node = t.nodes_[frontier_nodes[k]];
                const bool pure = *std::max_element(node.class_ratios.begin(), node.class_ratios.end()) >= 1.0;
                if (depth >= params.max_depth || pure || node.n_samples < 2 * params.min_leaf) totals[k].n = 0;
            }
            for (auto& f : frontier_of)
                if (f >= 0 && totals[f].n == 0) f = -1;

            const auto best = tree_detail::best_splits(X, order, frontier_of, totals, params.min_leaf, add, score);

            std::vector<int> next_nodes;
            std::vector<Counts> next_totals;
            std::vector<int> remap(frontier_nodes.size() * 2, -1);
            for (std::size_t k = 0; k < frontier_nodes.size(); ++k) {
                // Zero-gain splits are allowed; tiny negative values are rounding noise.
                if (best[k].feature < 0 || best[k].score < -1e-12) continue;
                const int id = frontier_nodes[k];
                t.nodes_[id].feature = best[k].feature;
                t.nodes_[id].threshold = best[k].threshold;
                remap[2 * k] = static_cast<int>(next_nodes.size());
                next_nodes.push_back(-1);
                next_totals.emplace_back();
                remap[2 * k + 1] = static_cast<int>(next_nodes.size());
                next_nodes.push_back(-1);
                next_totals.emplace_back();
            }
            for (std::size_t i = 0; i < X.rows; ++i) {
                const int k = frontier_of[i];
                if (k < 0) continue;
                const auto& node = t.nodes_[frontier_nodes[k]];
                if (node.is_leaf()) {
                    frontier_of[i] = -1;
                    continue;
                }
                const int slot = remap[2 * k + (X(i, node.feature) < node.threshold ? 0 : 1)];
                frontier_of[i] = slot;
                add(next_totals[slot], static_cast<std::uint32_t>(i));
            }
            for (std::size_t k = 0; k < frontier_nodes.size(); ++k) {
                const int id = frontier_nodes[k];
                if (t.nodes_[id].is_leaf()) continue;
                for (int side = 0; side < 2; ++side) {
                    const int slot = remap[2 * k + side];
                    const int child = static_cast<int>(t.nodes_.size());
                    t.nodes_.push_back(make_node(next_totals[slot], depth + 1));
                    (side == 0 ? t.nodes_[id].left : t.nodes_[id].right) = child;
                    next_nodes[slot] = child;
                }
            }
            frontier_nodes = std::move(next_nodes);
            totals = std::move(next_totals);
        }
        return t;
    }

    TreePrediction predict(std::span<const double> x) const {
        if (!fitted()) throw StateError("decision tree is not fitted");
        if (x.size() != n_features_) throw ShapeError("feature row width does not match the tree");
        TreePrediction out;
        int id = 0;
        out.path.push_back(id);
        while (!nodes_[id].is_leaf()) {
            const auto& n = nodes_[id];
            id = x[n.feature] < n.threshold ? n.left : n.right;
            out.path.push_back(id);
        }
        out.stage = nodes_[id].majority;
        out.probs = nodes_[id].class_ratios;
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["max_depth"] = params_.max_depth;
        j["min_leaf"] = params_.min_leaf;
        j["n_features"] = n_features_;
        auto arr = nlohmann::json::array();
        for (const auto& n : nodes_) {
            nlohmann::json jn;
            jn["feature"] = n.feature;
            jn["threshold"] = n.threshold;
            jn["left"] = n.left;
            jn["right"] = n.right;
            jn["depth"] = n.depth;
            jn["n_samples"] = n.n_samples;
            jn["n_fraction"] = n.n_fraction;
            jn["class_ratios"] = n.class_ratios;
            jn["majority"] = stage_code(n.majority);
            arr.push_back(jn);
        }
        j["nodes"] = arr;
        return j;
    }

    static DecisionTree from_json(const nlohmann::json& j) {
        DecisionTree t;
        t.params_.max_depth = j.at("max_depth").get<int>();
        t.params_.min_leaf = j.at("min_leaf").get<std::size_t>();
        t.n_features_ = j.at("n_features").get<std::size_t>();
        for (const auto& jn : j.at("nodes")) {
            TreeNode n;
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
            n.depth = jn.at("depth").get<int>();
            n.n_samples = jn.at("n_samples").get<std::size_t>();
            n.n_fraction = jn.at("n_fraction").get<double>();
            n.class_ratios = jn.at("class_ratios").get<ClassVector>();
            n.majority = stage_from_code(jn.at("majority").get<int>());
            t.nodes_.push_back(n);
        }
        const int n_nodes = static_cast<int>(t.nodes_.size());
        if (n_nodes == 0) throw FormatError("decision tree has no nodes", 0);
        for (const auto& n : t.nodes_) {
            if (n.is_leaf()) continue;
            if (n.left <= 0 || n.left >= n_nodes || n.right <= 0 || n.right >= n_nodes ||
                n.feature >= static_cast<int>(t.n_features_))
                throw FormatError("decision tree node references are out of range", 0);
        }
        return t;
    }

private:
    std::vector<TreeNode> nodes_;
    TreeParams params_;
    std::size_t n_features_ = 0;
};

// ---------------------------------------------------------------------------
// Regression tree (least squares on targets r, Newton leaf values sum(r)/sum(h))
// ---------------------------------------------------------------------------

struct RegressionNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
public:
    const std::vector<RegressionNode>& nodes() const { return nodes_; }
    std::vector<RegressionNode>& mutable_nodes() { return nodes_; }

    // `order` is the presorted sample order from tree_detail::presort(X).
    static RegressionTree fit(const Matrix& X, const std::vector<std::vector<std::uint32_t>>& order,
                              std::span<const double> r, std::span<const double> h, int max_depth,
                              std::size_t min_leaf = 1, double leaf_scale = 1.0) {
        struct Sums {
            double r = 0.0, h = 0.0;
            std::size_t n = 0;
        };
        RegressionTree t;
        auto leaf_value = [&](const Sums& s) { return leaf_scale * s.r / std::max(s.h, 1e-12); };

        Sums root;
        for (std::size_t i = 0; i < X.rows; ++i) {
            root.r += r[i];
            root.h += h[i];
            ++root.n;
        }
        t.nodes_.push_back({-1, 0.0, -1, -1, leaf_value(root)});

        std::vector<int> frontier_of(X.rows, 0);
        std::vector<int> frontier_nodes = {0};
        std::vector<Sums> totals = {root};
        auto add = [&](Sums& s, std::uint32_t i) {
            s.r += r[i];
            s.h += h[i];
            ++s.n;
        };
        // Reduction in squared error, up to the parent's constant term.
        auto score = [&](const Sums& l, const Sums& tot) {
            const double nr = static_cast<double>(tot.n - l.n), nl = static_cast<double>(l.n);
            const double rr = tot.r - l.r;
            return l.r * l.r / nl + rr * rr / nr - tot.r * tot.r / static_cast<double>(tot.n);
        };

        for (int depth = 0; !frontier_nodes.empty(); ++depth) {
            for (std::size_t k = 0; k < frontier_nodes.size(); ++k)
                if (depth >= max_depth || totals[k].n < 2 * min_leaf) totals[k].n = 0;
            for (auto& f : frontier_of)
                if (f >= 0 && totals[f].n == 0) f = -1;

            const auto best = tree_detail::best_splits(X, order, frontier_of, totals, min_leaf, add, score);
            std::vector<int> next_nodes;
            std::vector<Sums> next_totals;
            std::vector<int> remap(frontier_nodes.size() * 2, -1);
            for (std::size_t k = 0; k < frontier_nodes.size(); ++k) {
                if (best[k].feature < 0 || !(best[k].score > 1e-12)) continue;
                auto& node = t.nodes_[frontier_nodes[k]];
                node.feature = best[k].feature;
                node.threshold = best[k].threshold;
                for (int side = 0; side < 2; ++side) {
                    remap[2 * k + side] = static_cast<int>(next_nodes.size());
                    next_nodes.push_back(-1);
                    next_totals.emplace_back();
                }
            }
            for (std::size_t i = 0; i < X.rows; ++i) {
                const int k = frontier_of[i];
                if (k < 0) continue;
                const auto& node = t.nodes_[frontier_nodes[k]];
                if (node.is_leaf()) {
                    frontier_of[i] = -1;
                    continue;
                }
                const int slot = remap[2 * k + (X(i, node.feature) < node.threshold ? 0 : 1)];
                frontier_of[i] = slot;
                add(next_totals[slot], static_cast<std::uint32_t>(i));
            }
            for (std::size_t k = 0; k < frontier_nodes.size(); ++k) {
                const int id = frontier_nodes[k];
                if (t.nodes_[id].is_leaf()) continue;
                for (int side = 0; side < 2; ++side) {
                    const int slot = remap[2 * k + side];
                    const int child = static_cast<int>(t.nodes_.size());
                    t.nodes_.push_back({-1, 0.0, -1, -1, leaf_value(next_totals[slot])});
                    (side == 0 ? t.nodes_[id].left : t.nodes_[id].right) = child;
                    next_nodes[slot] = child;
                }
            }
            frontier_nodes = std::move(next_nodes);
            totals = std::move(next_totals);
        }
        return t;
    }

    double predict(std::span<const double> x) const {
        int id = 0;
        while (!nodes_[id].is_leaf()) {
            const auto& n = nodes_[id];
            id = x[n.feature] < n.threshold ? n.left : n.right;
        }
        return nodes_[id].value;
    }

    int height() const {
        std::vector<int> depth(nodes_.size(), 0);
        int h = 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            h = std::max(h, depth[i]);
            if (!nodes_[i].is_leaf()) depth[nodes_[i].left] = depth[nodes_[i].right] = depth[i] + 1;
        }
        return h;
    }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (const auto& n : nodes_) arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
        return arr;
    }

    static RegressionTree from_json(const nlohmann::json& j) {
        RegressionTree t;
        for (const auto& jn : j)
            t.nodes_.push_back({jn.at(0).get<int>(), jn.at(1).get<double>(), jn.at(2).get<int>(), jn.at(3).get<int>(),
                                jn.at(4).get<double>()});
        const int n = static_cast<int>(t.nodes_.size());
        if (n == 0) throw FormatError("regression tree has no nodes", 0);
        for (const auto& node : t.nodes_)
            if (!node.is_leaf() && (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n))
                throw FormatError("regression tree node references are out of range", 0);
        return t;
    }

private:
    std::vector<RegressionNode> nodes_;
};

}  // namespace sleeper
