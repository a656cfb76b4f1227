#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "treematch/util.hpp"

namespace treematch {

struct Token {
    int index = 0;                        // 1-based position in the sentence
    std::string form;
    int head = 0;                         // 0 = root
    std::string ne_tag;                   // empty = not a named entity
    std::optional<std::uint32_t> cluster; // absent = unclustered
};

// Single-rooted, acyclic dependency tree over contiguous token indices.
struct DepTree {
    std::string id;
    std::vector<Token> tokens;                // tokens[i] has index i+1
    std::vector<std::vector<int>> children;   // children[i] = dependents of token i+1, ascending
    int root = 0;                             // index of the root token

    const Token& token(int index) const { return tokens[static_cast<std::size_t>(index - 1)]; }
    int size() const { return static_cast<int>(tokens.size()); }
};

// Validates structure (contiguous indices, exactly one root, no cycles,
// heads in range) and fills children lists. Throws DataError.
DepTree make_dep_tree(std::string id, std::vector<Token> tokens);

struct CorpusPair {
    std::string x_id;
    std::string y_id;
    bool positive = false;
};

struct PairedCorpus {
    std::unordered_map<std::string, DepTree> trees;
    std::vector<CorpusPair> pairs;

    const DepTree& tree(const std::string& id) const;
    void add_tree(DepTree t);
    // Verifies every pair references a stored tree. Throws DataError.
    void validate() const;
};

// Blank-line separated blocks of "index<TAB>form<TAB>head[<TAB>ne_tag]".
// A "#id=NAME" comment line names the following block; unnamed blocks get
// s1, s2, ... in file order. Columns past the fourth are ignored.
std::vector<DepTree> parse_trees(std::istream& in);
void write_trees(std::ostream& out, const std::vector<DepTree>& trees);

// "x_id<TAB>y_id<TAB>label" with label pos|neg.
std::vector<CorpusPair> parse_pairs(std::istream& in);
void write_pairs(std::ostream& out, const std::vector<CorpusPair>& pairs);

// For each positive (x, y+), draws n_neg distinct y- uniformly without
// replacement from the other positives' response sides, never equal to y+.
// The draw is a partial Fisher-Yates over the lexicographically sorted
// candidate list, one mt19937_64 stream seeded with `seed`, positives in
// corpus order. Output keeps the positives in order, each followed by its
// negatives. Throws DataError when n_neg >= the candidate pool of any tweet.
PairedCorpus generate_negatives(const PairedCorpus& corpus, int n_neg, std::uint64_t seed);

} // namespace treematch
