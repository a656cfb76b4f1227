#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "treematch/mining.hpp"
#include "treematch/pattern.hpp"
#include "treematch/treebank.hpp"

namespace treematch {

struct SparseFeatureVector {
    std::vector<std::uint32_t> active; // strictly increasing
    std::uint32_t dimension = 0;

    bool operator==(const SparseFeatureVector& o) const {
        return active == o.active && dimension == o.dimension;
    }
};

// True iff the pattern embeds in the tree pair: per side an injective,
// direction-preserving map of pattern edges onto tree edges with compatible
// labels, and every shared wildcard slot bound to one entity tag across both
// sides. Existential over embeddings; slot assignments are enumerated over
// the tags common to both trees.
bool pattern_matches(const TreePairPattern& p, const DepTree& tx, const DepTree& ty,
                     const Clustering* clustering);

// Lattice over a frozen table: a row is tested only after one of its in-table
// sub-patterns (one pendant node smaller, same slot structure) matched. Rows
// without any in-table sub-pattern are tested unconditionally; together with
// downward closure of matching this reproduces the brute-force result.
struct FeatureIndex {
    const PatternTable* table = nullptr;
    const Clustering* clustering = nullptr;
    std::vector<std::vector<std::uint32_t>> children;
    std::vector<std::uint32_t> roots;
};

FeatureIndex build_feature_index(const PatternTable& table, const Clustering* clustering);

SparseFeatureVector featurize(const DepTree& tx, const DepTree& ty, const FeatureIndex& index);
// Convenience form that builds a throwaway index.
SparseFeatureVector featurize(const DepTree& tx, const DepTree& ty, const PatternTable& table,
                              const Clustering* clustering);

// Feats file: one line per pair, `x|y<TAB>space-separated active indices`.
void write_feats(std::ostream& out,
                 const std::vector<std::pair<std::string, SparseFeatureVector>>& rows);
std::vector<std::pair<std::string, SparseFeatureVector>> read_feats(std::istream& in,
                                                                    std::uint32_t dimension);

std::string pair_key(const std::string& x_id, const std::string& y_id);

} // namespace treematch
