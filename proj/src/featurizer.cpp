#include "treematch/featurizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <ostream>
#include <set>

#include "treematch/util.hpp"

namespace treematch {

namespace {

bool label_ok(const PatternNode& n, const Token& tok, const Clustering* clustering,
              const std::vector<std::string>& binding) {
    switch (n.kind) {
        case PatternNode::Kind::Word:
            return tok.form == n.text;
        case PatternNode::Kind::SimWord: {
            auto c = cluster_of(tok, clustering);
            return c && *c == n.id;
        }
        case PatternNode::Kind::Wildcard:
            return !tok.ne_tag.empty() && tok.ne_tag == binding[n.id];
    }
    return false;
}

bool side_matches(const SubtreeShape& shape, const DepTree& tree, const Clustering* clustering,
                  const std::vector<std::string>& binding) {
    auto pchildren = shape.child_lists();
    int proot = shape.root();

    // Siblings must land on distinct children of the parent's image; that
    // already forces global injectivity because distinct child subtrees of a
    // token are disjoint.
    std::function<bool(int, int)> match_node = [&](int p, int t) -> bool {
        if (!label_ok(shape.nodes[static_cast<std::size_t>(p)], tree.token(t), clustering, binding))
            return false;
        const auto& pc = pchildren[static_cast<std::size_t>(p)];
        if (pc.empty()) return true;
        const auto& tc = tree.children[static_cast<std::size_t>(t - 1)];
        if (tc.size() < pc.size()) return false;
        std::vector<char> used(tc.size(), 0);
        std::function<bool(std::size_t)> assign = [&](std::size_t i) -> bool {
            if (i == pc.size()) return true;
            for (std::size_t j = 0; j < tc.size(); ++j) {
                if (used[j]) continue;
                if (match_node(pc[i], tc[j])) {
                    used[j] = 1;
                    if (assign(i + 1)) return true;
                    used[j] = 0;
                }
            }
            return false;
        };
        return assign(0);
    };

    for (int t = 1; t <= tree.size(); ++t)
        if (match_node(proot, t)) return true;
    return false;
}

std::uint32_t slot_count(const TreePairPattern& p) {
    std::uint32_t n = 0;
    for (const SubtreeShape* s : {&p.left, &p.right})
        for (const PatternNode& nd : s->nodes)
            if (nd.kind == PatternNode::Kind::Wildcard) n = std::max(n, nd.id + 1);
    return n;
}

} // namespace

bool pattern_matches(const TreePairPattern& p, const DepTree& tx, const DepTree& ty,
                     const Clustering* clustering) {
    std::uint32_t slots = slot_count(p);
    std::vector<std::string> binding(slots);
    if (slots == 0)
        return side_matches(p.left, tx, clustering, binding) &&
               side_matches(p.right, ty, clustering, binding);

    std::set<std::string> tags_x, tags_y;
    for (const Token& t : tx.tokens)
        if (!t.ne_tag.empty()) tags_x.insert(t.ne_tag);
    for (const Token& t : ty.tokens)
        if (!t.ne_tag.empty()) tags_y.insert(t.ne_tag);
    std::vector<std::string> tags;
    std::set_intersection(tags_x.begin(), tags_x.end(), tags_y.begin(), tags_y.end(),
                          std::back_inserter(tags));
    if (tags.empty()) return false;
    if (std::pow(static_cast<double>(tags.size()), static_cast<double>(slots)) > 1e6)
        throw DataError("pattern_matches: too many wildcard slot assignments");

    std::function<bool(std::uint32_t)> assign = [&](std::uint32_t s) -> bool {
        if (s == slots)
            return side_matches(p.left, tx, clustering, binding) &&
                   side_matches(p.right, ty, clustering, binding);
        for (const std::string& tag : tags) {
            binding[s] = tag;
            if (assign(s + 1)) return true;
        }
        return false;
    };
    return assign(0);
}

FeatureIndex build_feature_index(const PatternTable& table, const Clustering* clustering) {
    FeatureIndex fi;
    fi.table = &table;
    fi.clustering = clustering;
    fi.children.assign(table.rows.size(), {});
    for (std::uint32_t r = 0; r < table.rows.size(); ++r) {
        const TreePairPattern& pat = table.rows[r].pattern;
        bool has_parent = false;
        for (int side = 0; side < 2; ++side) {
            const SubtreeShape& s = side ? pat.right : pat.left;
            for (int pos : pendant_positions(s)) {
                auto reduced = reduce_pattern(pat, side, pos);
                if (!reduced) continue;
                auto it = table.by_key.find(reduced->key());
                if (it == table.by_key.end()) continue;
                fi.children[it->second].push_back(r);
                has_parent = true;
            }
        }
        if (!has_parent) fi.roots.push_back(r);
    }
    for (auto& ch : fi.children) {
        std::sort(ch.begin(), ch.end());
        ch.erase(std::unique(ch.begin(), ch.end()), ch.end());
    }
    return fi;
}

SparseFeatureVector featurize(const DepTree& tx, const DepTree& ty, const FeatureIndex& index) {
    const PatternTable& table = *index.table;
    SparseFeatureVector out;
    out.dimension = table.dimension();
    std::vector<char> tested(table.rows.size(), 0);
    std::deque<std::uint32_t> agenda(index.roots.begin(), index.roots.end());
    while (!agenda.empty()) {
        std::uint32_t r = agenda.front();
        agenda.pop_front();
        if (tested[r]) continue;
        tested[r] = 1;
        if (!pattern_matches(table.rows[r].pattern, tx, ty, index.clustering)) continue;
        out.active.push_back(r);
        for (std::uint32_t c : index.children[r])
            if (!tested[c]) agenda.push_back(c);
    }
    std::sort(out.active.begin(), out.active.end());
    return out;
}

SparseFeatureVector featurize(const DepTree& tx, const DepTree& ty, const PatternTable& table,
                              const Clustering* clustering) {
    return featurize(tx, ty, build_feature_index(table, clustering));
}

std::string pair_key(const std::string& x_id, const std::string& y_id) {
    for (const std::string* id : {&x_id, &y_id})
        if (id->find('|') != std::string::npos || id->find('\t') != std::string::npos)
            throw DataError("tree id '" + *id + "' may not contain '|' or tab");
    return x_id + "|" + y_id;
}

void write_feats(std::ostream& out,
                 const std::vector<std::pair<std::string, SparseFeatureVector>>& rows) {
    for (const auto& [id, vec] : rows) {
        out << id << '\t';
        for (std::size_t i = 0; i < vec.active.size(); ++i) {
            if (i) out << ' ';
            out << vec.active[i];
        }
        out << '\n';
    }
}

std::vector<std::pair<std::string, SparseFeatureVector>> read_feats(std::istream& in,
                                                                    std::uint32_t dimension) {
    std::vector<std::pair<std::string, SparseFeatureVector>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 2)
            throw DataError("feats line " + std::to_string(line_no) + ": expected 2 columns");
        SparseFeatureVector vec;
        vec.dimension = dimension;
        for (const std::string& tok : split_spaces(cols[1])) {
            std::uint32_t idx = 0;
            try {
                idx = static_cast<std::uint32_t>(std::stoul(tok));
            } catch (const std::exception&) {
                throw DataError("feats line " + std::to_string(line_no) + ": bad index '" + tok + "'");
            }
            if (idx >= dimension)
                throw DataError("feats line " + std::to_string(line_no) + ": index out of range");
            if (!vec.active.empty() && idx <= vec.active.back())
                throw DataError("feats line " + std::to_string(line_no) + ": indices must increase");
            vec.active.push_back(idx);
        }
        rows.emplace_back(cols[0], std::move(vec));
    }
    return rows;
}

} // namespace treematch
