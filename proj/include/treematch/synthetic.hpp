#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "treematch/eval.hpp"
#include "treematch/pattern.hpp"
#include "treematch/treebank.hpp"

namespace treematch {

// Planted-pattern corpus generator. Three instruments:
//   plain       - one two-node-per-side gold pattern per family; negatives
//                 and distractors never complete the tweet's pattern.
//   conjunctive - gold responses carry feature sets {A,M} or {A,B}; trap
//                 responses carry {A} and {A,B,M}. No single linear weighting
//                 of per-feature indicators ranks gold first in both group
//                 types, and the signal lives in response-side edges whose
//                 component words are scattered through every candidate.
//   entity      - gold patterns are entity-parameterized (frame word over a
//                 shared entity slot); every entity is reused at most twice
//                 and entity pools are disjoint across splits, so concrete
//                 entity patterns die in mining and only the abstracted ones
//                 carry to held-out entities. Wrong-entity distractors kill
//                 the concrete frame pair; shared-entity partners on a third
//                 of the groups temper the bare slot pattern without
//                 filtering it out.
struct SynthSpec {
    std::string mode = "plain";
    int n_patterns = 20;
    int n_pairs = 2000; // positive pairs across all splits
    int vocab = 500;
    int tree_min = 4;
    int tree_max = 8;
    int group_size = 10; // gold + distractors per rank group
    double valid_frac = 0.15;
    double test_frac = 0.15;
    std::uint64_t seed = 1;

    void validate() const;
};

SynthSpec parse_synth_spec(std::istream& in);   // JSON, unknown keys rejected
void write_synth_spec(std::ostream& out, const SynthSpec& spec);

struct SynthCorpus {
    std::vector<DepTree> trees; // creation order
    std::vector<CorpusPair> train_pairs; // mining corpus: train groups flattened
    std::vector<RankGroup> train_groups, valid_groups, test_groups;
    std::vector<TreePairPattern> gold_patterns;

    PairedCorpus to_corpus() const;
};

SynthCorpus make_synthetic(const SynthSpec& spec);

// Writes trees.tsv, train_pairs.tsv, {train,valid,test}_groups.tsv and
// gold_patterns.tsv under dir (created if missing).
void write_synth(const std::string& dir, const SynthCorpus& sc);

} // namespace treematch
