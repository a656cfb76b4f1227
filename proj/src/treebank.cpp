#include "treematch/treebank.hpp"

#include <algorithm>
#include <set>

namespace treematch {

namespace {

int parse_int(const std::string& s, const std::string& what, const std::string& where) {
    if (s.empty()) throw DataError(where + ": empty " + what);
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        throw DataError(where + ": bad " + what + " '" + s + "'");
    }
    if (pos != s.size()) throw DataError(where + ": bad " + what + " '" + s + "'");
    return v;
}

} // namespace

DepTree make_dep_tree(std::string id, std::vector<Token> tokens) {
    DepTree t;
    t.id = std::move(id);
    t.tokens = std::move(tokens);
    const int n = static_cast<int>(t.tokens.size());
    if (n == 0) throw DataError("tree '" + t.id + "': no tokens");
    for (int i = 0; i < n; ++i) {
        const Token& tok = t.tokens[static_cast<std::size_t>(i)];
        if (tok.index != i + 1)
            throw DataError("tree '" + t.id + "': token indices must be contiguous from 1, got " +
                            std::to_string(tok.index) + " at position " + std::to_string(i + 1));
        if (tok.head < 0 || tok.head > n)
            throw DataError("tree '" + t.id + "': head " + std::to_string(tok.head) +
                            " of token " + std::to_string(tok.index) + " out of range");
        if (tok.head == tok.index)
            throw DataError("tree '" + t.id + "': token " + std::to_string(tok.index) + " is its own head");
    }
    t.children.assign(static_cast<std::size_t>(n), {});
    int root = 0;
    for (const Token& tok : t.tokens) {
        if (tok.head == 0) {
            if (root != 0)
                throw DataError("tree '" + t.id + "': multiple roots (" + std::to_string(root) +
                                " and " + std::to_string(tok.index) + ")");
            root = tok.index;
        } else {
            t.children[static_cast<std::size_t>(tok.head - 1)].push_back(tok.index);
        }
    }
    // With every head in [1, n] and no self-heads, the head links must
    // close a cycle somewhere, so the two diagnoses coincide.
    if (root == 0) throw DataError("tree '" + t.id + "': no root token, head links form a cycle");
    t.root = root;
    // Reachability from the root rules out cycles among non-root tokens.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{root};
    int reached = 0;
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        if (seen[static_cast<std::size_t>(cur - 1)]) continue;
        seen[static_cast<std::size_t>(cur - 1)] = 1;
        ++reached;
        for (int c : t.children[static_cast<std::size_t>(cur - 1)]) stack.push_back(c);
    }
    if (reached != n)
        throw DataError("tree '" + t.id + "': cycle detected, only " + std::to_string(reached) +
                        " of " + std::to_string(n) + " tokens reachable from root");
    return t;
}

const DepTree& PairedCorpus::tree(const std::string& id) const {
    auto it = trees.find(id);
    if (it == trees.end()) throw DataError("unknown tree id '" + id + "'");
    return it->second;
}

void PairedCorpus::add_tree(DepTree t) {
    std::string id = t.id;
    if (!trees.emplace(id, std::move(t)).second)
        throw DataError("duplicate tree id '" + id + "'");
}

void PairedCorpus::validate() const {
    for (const CorpusPair& p : pairs) {
        if (!trees.count(p.x_id)) throw DataError("pair references unknown tree id '" + p.x_id + "'");
        if (!trees.count(p.y_id)) throw DataError("pair references unknown tree id '" + p.y_id + "'");
    }
}

std::vector<DepTree> parse_trees(std::istream& in) {
    std::vector<DepTree> out;
    std::vector<Token> block;
    std::string block_id;
    int line_no = 0;
    int anon = 0;
    auto flush = [&]() {
        if (block.empty()) {
            block_id.clear();
            return;
        }
        std::string id = block_id.empty() ? "s" + std::to_string(++anon) : block_id;
        out.push_back(make_dep_tree(id, std::move(block)));
        block.clear();
        block_id.clear();
    };
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') {
            if (line.rfind("#id=", 0) == 0) block_id = line.substr(4);
            continue;
        }
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() < 3)
            throw DataError("line " + std::to_string(line_no) + ": expected at least 3 tab-separated columns");
        const std::string where = "line " + std::to_string(line_no);
        Token tok;
        tok.index = parse_int(cols[0], "token index", where);
        tok.form = cols[1];
        if (tok.form.empty()) throw DataError(where + ": empty form");
        tok.head = parse_int(cols[2], "head", where);
        if (cols.size() >= 4) tok.ne_tag = cols[3];
        block.push_back(std::move(tok));
    }
    flush();
    return out;
}

void write_trees(std::ostream& out, const std::vector<DepTree>& trees) {
    bool first = true;
    for (const DepTree& t : trees) {
        if (!first) out << "\n";
        first = false;
        out << "#id=" << t.id << "\n";
        for (const Token& tok : t.tokens) {
            out << tok.index << '\t' << tok.form << '\t' << tok.head;
            if (!tok.ne_tag.empty()) out << '\t' << tok.ne_tag;
            out << "\n";
        }
    }
}

std::vector<CorpusPair> parse_pairs(std::istream& in) {
    std::vector<CorpusPair> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 3)
            throw DataError("pairs line " + std::to_string(line_no) + ": expected 3 columns");
        CorpusPair p;
        p.x_id = cols[0];
        p.y_id = cols[1];
        if (cols[2] == "pos") p.positive = true;
        else if (cols[2] == "neg") p.positive = false;
        else throw DataError("pairs line " + std::to_string(line_no) + ": label must be pos or neg, got '" + cols[2] + "'");
        if (p.x_id.empty() || p.y_id.empty())
            throw DataError("pairs line " + std::to_string(line_no) + ": empty id");
        out.push_back(std::move(p));
    }
    return out;
}

void write_pairs(std::ostream& out, const std::vector<CorpusPair>& pairs) {
    for (const CorpusPair& p : pairs)
        out << p.x_id << '\t' << p.y_id << '\t' << (p.positive ? "pos" : "neg") << "\n";
}

PairedCorpus generate_negatives(const PairedCorpus& corpus, int n_neg, std::uint64_t seed) {
    if (n_neg < 1) throw DataError("generate_negatives: n_neg must be >= 1");
    std::vector<const CorpusPair*> positives;
    for (const CorpusPair& p : corpus.pairs)
        if (p.positive) positives.push_back(&p);
    if (positives.empty()) throw DataError("generate_negatives: corpus has no positive pairs");

    PairedCorpus out;
    out.trees = corpus.trees;
    std::mt19937_64 rng(seed);
    for (const CorpusPair* pos : positives) {
        std::set<std::string> pool_set;
        for (const CorpusPair* other : positives) {
            if (other == pos) continue;
            if (other->y_id != pos->y_id) pool_set.insert(other->y_id);
        }
        if (static_cast<std::size_t>(n_neg) >= pool_set.size())
            throw DataError("generate_negatives: tweet '" + pos->x_id + "' has only " +
                            std::to_string(pool_set.size()) + " distinct foreign responses, need more than " +
                            std::to_string(n_neg));
        std::vector<std::string> pool(pool_set.begin(), pool_set.end());
        out.pairs.push_back(*pos);
        for (int k = 0; k < n_neg; ++k) {
            std::size_t j = static_cast<std::size_t>(k) +
                            static_cast<std::size_t>(bounded_uniform(rng, pool.size() - static_cast<std::size_t>(k)));
            std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
            out.pairs.push_back({pos->x_id, pool[static_cast<std::size_t>(k)], false});
        }
    }
    return out;
}

} // namespace treematch
