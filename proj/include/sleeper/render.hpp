#pragma once

// Human-readable decision-tree rendering: every internal node shows the rule
// (feature + group), its channels, the similarity threshold, the share of
// training data, class ratios [Wake, N1, N2, N3, REM] and the majority stage;
// leaves show only the last three rows.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sleeper/rulebank.hpp"
#include "sleeper/tree.hpp"

namespace sleeper {

// Rounds ratios to 2 decimals so the printed values still sum to exactly 1
// (largest-remainder rounding in hundredths).
inline std::array<int, kNumStages> ratio_hundredths(const ClassVector& ratios) {
    std::array<int, kNumStages> out{};
    std::array<double, kNumStages> rem{};
    double total = 0.0;
    for (double r : ratios) total += r;
    int assigned = 0;
    for (std::size_t k = 0; k < kNumStages; ++k) {
        const double scaled = total > 0.0 ? ratios[k] / total * 100.0 : 0.0;
        out[k] = static_cast<int>(std::floor(scaled));
        rem[k] = scaled - out[k];
        assigned += out[k];
    }
    if (total <= 0.0) return out;
    std::array<std::size_t, kNumStages> idx{};
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t i = 0; assigned < 100; ++i, ++assigned) ++out[idx[i % kNumStages]];
    return out;
}

inline std::string format_ratios(const ClassVector& ratios) {
    const auto h = ratio_hundredths(ratios);
    std::string s = "[";
    for (std::size_t k = 0; k < kNumStages; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%d.%02d", h[k] / 100, h[k] % 100);
        s += buf;
        if (k + 1 < kNumStages) s += ", ";
    }
    return s + "]";
}

inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
    return buf;
}

inline std::string format_threshold(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", t);
    return buf;
}

// Rows describing one node. `rule_ids[f]` maps tree feature f to a bank rule.
inline std::vector<std::string> node_rows(const TreeNode& node, const RuleBank& bank,
                                          std::span<const std::size_t> rule_ids) {
    std::vector<std::string> rows;
    if (!node.is_leaf()) {
        const auto f = static_cast<std::size_t>(node.feature);
        if (f >= rule_ids.size() || rule_ids[f] >= bank.rules().size())
            throw RenderError("tree feature " + std::to_string(node.feature) + " does not map to a rule in the bank");
        const auto& rule = bank.rules()[rule_ids[f]];
        rows.push_back(std::string(rule_feature_name(rule.feature)) + " " + rule.group_name());
        rows.push_back(rule.target_name());
        rows.push_back("sim < " + format_threshold(node.threshold));
    }
    rows.push_back(format_percent(node.n_fraction));
    rows.push_back(format_ratios(node.class_ratios));
    rows.push_back(std::string(stage_name(node.majority)));
    return rows;
}

inline std::string render_tree_text(const DecisionTree& tree, const RuleBank& bank,
                                    std::span<const std::size_t> rule_ids) {
    if (!tree.fitted()) throw RenderError("cannot render an unfitted tree");
    std::ostringstream os;
    const auto& nodes = tree.nodes();
    // Depth-first, left (condition true) before right.
    std::vector<std::pair<int, std::string>> stack = {{0, ""}};
    while (!stack.empty()) {
        auto [id, edge] = stack.back();
        stack.pop_back();
        const auto& n = nodes[id];
        const std::string indent(static_cast<std::size_t>(n.depth) * 4, ' ');
        const auto rows = node_rows(n, bank, rule_ids);
        os << indent << (edge.empty() ? "" : edge + " ") << (n.is_leaf() ? "leaf " : "node ") << id << '\n';
        for (const auto& r : rows) os << indent << "  | " << r << '\n';
        if (!n.is_leaf()) {
            stack.push_back({n.right, "[no]"});
            stack.push_back({n.left, "[yes]"});
        }
    }
    return os.str();
}

inline std::string render_tree_dot(const DecisionTree& tree, const RuleBank& bank,
                                   std::span<const std::size_t> rule_ids) {
    if (!tree.fitted()) throw RenderError("cannot render an unfitted tree");
    std::ostringstream os;
    os << "digraph sleeper_tree {\n  node [shape=box, fontname=\"Helvetica\"];\n";
    const auto& nodes = tree.nodes();
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const auto rows = node_rows(nodes[id], bank, rule_ids);
        os << "  n" << id << " [label=\"";
        for (std::size_t r = 0; r < rows.size(); ++r) os << (r ? "\\n" : "") << rows[r];
        os << "\"" << (nodes[id].is_leaf() ? ", style=rounded" : "") << "];\n";
    }
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        if (nodes[id].is_leaf()) continue;
        os << "  n" << id << " -> n" << nodes[id].left << " [label=\"yes\"];\n";
        os << "  n" << id << " -> n" << nodes[id].right << " [label=\"no\"];\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace sleeper
