#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treematch/abstraction.hpp"
#include "treematch/treebank.hpp"

namespace treematch {

// A pattern node matches one token. Word: form equality. Wildcard: any
// NE-tagged token, with all nodes sharing a slot id binding the same tag
// across both sides of one embedding. SimWord: any token whose word lies
// in the given cluster.
struct PatternNode {
    enum class Kind { Word, Wildcard, SimWord };
    Kind kind = Kind::Word;
    std::string text;       // word form (Word nodes only)
    std::uint32_t id = 0;   // slot id (Wildcard) or cluster id (SimWord)
    int parent = -1;        // position in nodes, -1 for the root
};

struct SubtreeShape {
    std::vector<PatternNode> nodes;

    int size() const { return static_cast<int>(nodes.size()); }
    int root() const;
    std::vector<std::vector<int>> child_lists() const;
};

struct TreePairPattern {
    SubtreeShape left, right;
    std::string left_key, right_key; // canonical strings, filled by canonicalize_pattern

    std::string key() const { return left_key + '\t' + right_key; }
    bool has_abstraction() const;
};

// Canonical string syntax: nodes as LABEL or LABEL->(CHILD,CHILD,...) with
// children ordered canonically; labels are $k (wildcard slot), ~k (cluster),
// or an escaped word. Slots are renumbered in first-occurrence order
// scanning the left side then the right.
void canonicalize_pattern(TreePairPattern& p);

// Canonical string of one side alone, with fresh slot numbering.
std::string canonical_encode(const SubtreeShape& shape);

SubtreeShape parse_shape(const std::string& s);
// Parses and canonicalizes; validates every slot id appears on both sides.
TreePairPattern parse_pattern(const std::string& left, const std::string& right);

struct LabelConfig {
    bool entity = false;
    bool simword = false;
    const Clustering* clustering = nullptr;
};

// Pattern induced by a pair of connected token-index sets, labeled under the
// abstraction rules: with entity abstraction an NE tag present on both sides
// becomes a shared wildcard slot (tokens whose tag appears on one side only
// stay concrete words); with simword abstraction a cluster present among the
// remaining words on both sides rewrites those words to SimWord nodes.
// Images must be sorted.
TreePairPattern build_pattern(const DepTree& tx, const DepTree& ty, const std::vector<int>& left_image,
                              const std::vector<int>& right_image, const LabelConfig& cfg);

// Positions whose removal keeps the side connected: leaves, plus the root
// if it has exactly one child.
std::vector<int> pendant_positions(const SubtreeShape& shape);

// Pattern with one pendant node removed from the given side, or nullopt when
// the removal would strand a wildcard slot or a SimWord cluster on a single
// side (no such shape exists in a mined table). side 0 = left, 1 = right.
std::optional<TreePairPattern> reduce_pattern(const TreePairPattern& p, int side, int node_pos);

} // namespace treematch
