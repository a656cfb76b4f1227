#include "treematch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "treematch/util.hpp"

namespace treematch {

EvalReport p_at_1(const PairScorer& scorer, const std::vector<RankGroup>& groups) {
    if (groups.empty()) throw DataError("p_at_1: no groups");
    EvalReport rep;
    rep.groups = groups.size();
    rep.outcomes.reserve(groups.size());
    for (const RankGroup& g : groups) {
        double gold = 0.0;
        double best_other = 0.0;
        bool seen_gold = false, seen_other = false;
        for (const auto& [id, is_gold] : g.candidates) {
            double s = scorer(g.tweet, id);
            if (is_gold) {
                gold = s;
                seen_gold = true;
            } else {
                best_other = seen_other ? std::max(best_other, s) : s;
                seen_other = true;
            }
        }
        if (!seen_gold || !seen_other)
            throw DataError("p_at_1: group needs one gold and at least one other candidate");
        bool win = gold > best_other;
        rep.outcomes.push_back(win ? 1 : 0);
        if (win) ++rep.wins;
    }
    rep.p1 = static_cast<double>(rep.wins) / static_cast<double>(rep.groups);
    return rep;
}

double IdfTable::weight(const std::string& word) const {
    auto it = df.find(word);
    double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(docs)) / (1.0 + d)) + 1.0;
}

IdfTable build_idf(const PairedCorpus& corpus, const std::vector<std::string>& doc_ids) {
    IdfTable idf;
    std::set<std::string> seen;
    for (const std::string& id : doc_ids) {
        if (!seen.insert(id).second) continue;
        const DepTree& t = corpus.tree(id);
        std::set<std::string> words;
        for (const Token& tok : t.tokens) words.insert(tok.form);
        for (const std::string& w : words) ++idf.df[w];
        ++idf.docs;
    }
    return idf;
}

double cosine_baseline(const std::vector<Token>& tx, const std::vector<Token>& ty,
                       const IdfTable& idf) {
    auto bag = [&idf](const std::vector<Token>& toks) {
        std::map<std::string, double> v;
        for (const Token& t : toks) v[t.form] += 1.0;
        for (auto& [w, tf] : v) tf *= idf.weight(w);
        return v;
    };
    std::map<std::string, double> vx = bag(tx), vy = bag(ty);
    double dot = 0.0, nx = 0.0, ny = 0.0;
    for (const auto& [w, a] : vx) {
        nx += a * a;
        auto it = vy.find(w);
        if (it != vy.end()) dot += a * it->second;
    }
    for (const auto& [w, b] : vy) ny += b * b;
    if (nx == 0.0 || ny == 0.0) return 0.0;
    return dot / (std::sqrt(nx) * std::sqrt(ny));
}

AblateMode parse_ablate_mode(const std::string& name) {
    if (name == "shallow_only") return AblateMode::ShallowOnly;
    if (name == "no_abstraction") return AblateMode::NoAbstraction;
    throw ConfigError("unknown ablation mode '" + name + "'");
}

PatternTable ablate(const PatternTable& table, AblateMode mode) {
    PatternTable out;
    for (const PatternTable::Row& row : table.rows) {
        bool keep = mode == AblateMode::ShallowOnly
                        ? row.pattern.left.size() == 1 && row.pattern.right.size() == 1
                        : !row.pattern.has_abstraction();
        if (!keep) continue;
        PatternTable::Row copy = row;
        copy.index = static_cast<std::uint32_t>(out.rows.size());
        out.rows.push_back(std::move(copy));
    }
    out.rebuild_key_index();
    return out;
}

std::vector<RankGroup> read_groups(std::istream& in) {
    std::vector<RankGroup> groups;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 3)
            throw DataError("groups line " + std::to_string(line_no) + ": expected 3 columns");
        RankGroup g;
        g.tweet = cols[0];
        g.candidates.emplace_back(cols[1], true);
        std::set<std::string> seen{cols[1]};
        std::string neg;
        std::size_t start = 0;
        const std::string& negs = cols[2];
        while (start <= negs.size()) {
            std::size_t comma = negs.find(',', start);
            neg = negs.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            if (neg.empty())
                throw DataError("groups line " + std::to_string(line_no) + ": empty candidate id");
            if (!seen.insert(neg).second)
                throw DataError("groups line " + std::to_string(line_no) + ": duplicate candidate '" + neg + "'");
            g.candidates.emplace_back(neg, false);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (g.tweet.empty())
            throw DataError("groups line " + std::to_string(line_no) + ": empty tweet id");
        if (g.candidates.size() < 2)
            throw DataError("groups line " + std::to_string(line_no) + ": need at least 2 candidates");
        groups.push_back(std::move(g));
    }
    return groups;
}

void write_groups(std::ostream& out, const std::vector<RankGroup>& groups) {
    for (const RankGroup& g : groups) {
        std::string gold;
        std::vector<std::string> negs;
        for (const auto& [id, is_gold] : g.candidates) {
            if (is_gold) gold = id;
            else negs.push_back(id);
        }
        out << g.tweet << '\t' << gold << '\t';
        for (std::size_t i = 0; i < negs.size(); ++i) {
            if (i) out << ',';
            out << negs[i];
        }
        out << '\n';
    }
}

} // namespace treematch
