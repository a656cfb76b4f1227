#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "treematch/mining.hpp"
#include "treematch/treebank.hpp"

namespace treematch {

struct RankGroup {
    std::string tweet;
    std::vector<std::pair<std::string, bool>> candidates; // (response id, gold)
};

struct EvalReport {
    double p1 = 0.0;
    std::size_t groups = 0;
    std::size_t wins = 0;
    std::vector<char> outcomes; // per group, 1 = gold strictly first
};

using PairScorer = std::function<double(const std::string&, const std::string&)>;

// Ties lose: the gold candidate must strictly outscore every other.
EvalReport p_at_1(const PairScorer& scorer, const std::vector<RankGroup>& groups);

// idf = ln((1+N)/(1+df)) + 1 over the document set the table was built from;
// unseen words fall back to df = 0.
struct IdfTable {
    std::unordered_map<std::string, std::uint32_t> df;
    std::size_t docs = 0;

    double weight(const std::string& word) const;
};

IdfTable build_idf(const PairedCorpus& corpus, const std::vector<std::string>& doc_ids);

// Cosine of TF-IDF bags of the two token lists; 0 when either vector is zero.
double cosine_baseline(const std::vector<Token>& tx, const std::vector<Token>& ty,
                       const IdfTable& idf);

enum class AblateMode { ShallowOnly, NoAbstraction };

AblateMode parse_ablate_mode(const std::string& name);

// shallow_only keeps (1,1) rows; no_abstraction drops rows containing
// wildcard or SimWord nodes. Indices are re-densified.
PatternTable ablate(const PatternTable& table, AblateMode mode);

// Groups file: `tweet<TAB>gold<TAB>neg1,neg2,...`
std::vector<RankGroup> read_groups(std::istream& in);
void write_groups(std::ostream& out, const std::vector<RankGroup>& groups);

} // namespace treematch
