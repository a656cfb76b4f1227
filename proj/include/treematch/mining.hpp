#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "treematch/pattern.hpp"
#include "treematch/treebank.hpp"

namespace treematch {

struct MiningConfig {
    int max_size = 4;            // each pattern side grows up to max_size nodes
    int min_support_pos = 3;
    double tau = 0.6;            // score threshold
    double alpha = 1.0;          // additive smoothing
    bool entity_abstraction = false;
    bool simword_abstraction = false;
    const Clustering* clustering = nullptr;
    int threads = 1;
};

// One concrete match of a pattern: the token sets covered on each side.
// The pattern's nodes are the induced subtrees on these images, so the
// node-to-token mapping is recoverable and label/edge consistent.
struct Occurrence {
    std::uint32_t pair_id = 0;
    std::vector<int> left_image;   // sorted token indices
    std::vector<int> right_image;

    bool operator<(const Occurrence& o) const {
        if (pair_id != o.pair_id) return pair_id < o.pair_id;
        if (left_image != o.left_image) return left_image < o.left_image;
        return right_image < o.right_image;
    }
    bool operator==(const Occurrence& o) const {
        return pair_id == o.pair_id && left_image == o.left_image && right_image == o.right_image;
    }
};

// Survivors of one size cell, keyed by canonical pattern, occurrences kept
// for growth.
struct MinedPattern {
    TreePairPattern pattern;
    std::vector<Occurrence> occurrences; // sorted, unique
    std::uint32_t support_pos = 0;       // pairs counted once
    std::uint32_t support_neg = 0;
    double score = 0.0;
};

using OccurrenceIndex = std::unordered_map<std::string, MinedPattern>;

struct PatternTable {
    struct Row {
        TreePairPattern pattern;
        std::uint32_t index = 0;
        std::uint32_t support_pos = 0;
        std::uint32_t support_neg = 0;
        double score = 0.0;
    };
    std::vector<Row> rows;                               // index == position
    std::unordered_map<std::string, std::uint32_t> by_key;

    std::uint32_t dimension() const { return static_cast<std::uint32_t>(rows.size()); }
    void rebuild_key_index();
};

double discriminative_score(std::uint32_t support_pos, std::uint32_t support_neg, double alpha);

// Recomputes per-pair supports and keeps patterns with
// support_pos >= min_support_pos and score >= tau.
void discriminative_filter(OccurrenceIndex& cell, const std::vector<char>& pair_is_positive,
                           const MiningConfig& cfg);

// Grows each occurrence by one tree-adjacent token on the chosen side and
// aggregates by canonical key. side 0 = left, 1 = right.
OccurrenceIndex extend_cell(const OccurrenceIndex& cell, int side, const PairedCorpus& corpus,
                            const std::vector<const DepTree*>& xs, const std::vector<const DepTree*>& ys,
                            const MiningConfig& cfg);

// Queue-driven growth over size cells (m, n) from (1, 1), breadth first with
// a visited set; every filter step groups wildcard-eligible patterns when
// abstraction is enabled. Feature indices are assigned densely in order of
// (total size, left size, canonical key). Requires at least one positive
// pair. Deterministic for any thread count.
PatternTable mine(const PairedCorpus& corpus, const MiningConfig& cfg);

// "index<TAB>left<TAB>right<TAB>support_pos<TAB>support_neg<TAB>score"
void write_pattern_table(std::ostream& out, const PatternTable& table);
PatternTable read_pattern_table(std::istream& in);

} // namespace treematch
