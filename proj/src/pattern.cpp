#include "treematch/pattern.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "treematch/util.hpp"

namespace treematch {

int SubtreeShape::root() const {
    for (int i = 0; i < size(); ++i)
        if (nodes[static_cast<std::size_t>(i)].parent < 0) return i;
    throw DataError("pattern side has no root");
}

std::vector<std::vector<int>> SubtreeShape::child_lists() const {
    std::vector<std::vector<int>> ch(nodes.size());
    for (int i = 0; i < size(); ++i) {
        int p = nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0) ch[static_cast<std::size_t>(p)].push_back(i);
    }
    return ch;
}

bool TreePairPattern::has_abstraction() const {
    auto any = [](const SubtreeShape& s) {
        for (const PatternNode& n : s.nodes)
            if (n.kind != PatternNode::Kind::Word) return true;
        return false;
    };
    return any(left) || any(right);
}

namespace {

std::string escape_body(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '\\' || c == '(' || c == ')' || c == ',') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string blind_label(const PatternNode& n) {
    switch (n.kind) {
        case PatternNode::Kind::Wildcard:
            return "$";
        case PatternNode::Kind::SimWord:
            return "~" + std::to_string(n.id);
        case PatternNode::Kind::Word:
            break;
    }
    std::string body = escape_body(n.text);
    if (!body.empty() && (body[0] == '$' || body[0] == '~'))
        body.insert(body.begin(), '\\');
    return body;
}

struct SideCtx {
    SubtreeShape* shape = nullptr;
    int root = -1;
    std::vector<std::string> blind;
    std::vector<char> has_slot;
    // Per node, children partitioned into runs of equal slot-blind strings;
    // order within a run is settled by the minimization pass below.
    std::vector<std::vector<std::vector<int>>> groups;
};

void build_ctx(SideCtx& c) {
    SubtreeShape& s = *c.shape;
    std::vector<std::vector<int>> children(s.nodes.size());
    c.root = -1;
    for (int i = 0; i < s.size(); ++i) {
        int p = s.nodes[static_cast<std::size_t>(i)].parent;
        if (p >= 0) children[static_cast<std::size_t>(p)].push_back(i);
        else c.root = i;
    }
    if (c.root < 0) throw DataError("pattern side has no root");
    c.blind.assign(s.nodes.size(), "");
    c.has_slot.assign(s.nodes.size(), 0);
    c.groups.assign(s.nodes.size(), {});

    std::function<void(int)> rec = [&](int n) {
        auto& ch = children[static_cast<std::size_t>(n)];
        bool slot = s.nodes[static_cast<std::size_t>(n)].kind == PatternNode::Kind::Wildcard;
        for (int child : ch) {
            rec(child);
            if (c.has_slot[static_cast<std::size_t>(child)]) slot = true;
        }
        c.has_slot[static_cast<std::size_t>(n)] = slot ? 1 : 0;
        std::sort(ch.begin(), ch.end(), [&](int a, int b) {
            const std::string& ba = c.blind[static_cast<std::size_t>(a)];
            const std::string& bb = c.blind[static_cast<std::size_t>(b)];
            if (ba != bb) return ba < bb;
            return a < b;
        });
        std::string out = blind_label(s.nodes[static_cast<std::size_t>(n)]);
        if (!ch.empty()) {
            out += "->(";
            for (std::size_t i = 0; i < ch.size(); ++i) {
                if (i) out.push_back(',');
                out += c.blind[static_cast<std::size_t>(ch[i])];
            }
            out.push_back(')');
        }
        c.blind[static_cast<std::size_t>(n)] = out;
        auto& gs = c.groups[static_cast<std::size_t>(n)];
        std::size_t i = 0;
        while (i < ch.size()) {
            std::size_t j = i + 1;
            while (j < ch.size() &&
                   c.blind[static_cast<std::size_t>(ch[j])] == c.blind[static_cast<std::size_t>(ch[i])])
                ++j;
            gs.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(i), ch.begin() + static_cast<std::ptrdiff_t>(j));
            i = j;
        }
    };
    rec(c.root);
}

std::string serialize_node(const SideCtx& c, int n, std::map<std::uint32_t, std::uint32_t>& slots) {
    const PatternNode& nd = c.shape->nodes[static_cast<std::size_t>(n)];
    std::string out;
    if (nd.kind == PatternNode::Kind::Wildcard) {
        auto [it, inserted] = slots.emplace(nd.id, static_cast<std::uint32_t>(slots.size()));
        (void)inserted;
        out = "$" + std::to_string(it->second);
    } else {
        out = blind_label(nd);
    }
    const auto& gs = c.groups[static_cast<std::size_t>(n)];
    if (gs.empty()) return out;
    out += "->(";
    bool first = true;
    for (const auto& g : gs) {
        for (int child : g) {
            if (!first) out.push_back(',');
            first = false;
            out += serialize_node(c, child, slots);
        }
    }
    out.push_back(')');
    return out;
}

// Canonical strings of one or two sides with joint wildcard renumbering.
// Tie runs of children whose subtrees contain slots are explored over all
// permutations, keeping the lexicographically smallest serialization. Slot
// ids in the shapes are rewritten to the winning numbering.
std::vector<std::string> canonical_core(std::vector<SubtreeShape*> sides) {
    std::vector<SideCtx> ctx(sides.size());
    for (std::size_t i = 0; i < sides.size(); ++i) {
        ctx[i].shape = sides[i];
        build_ctx(ctx[i]);
    }

    std::vector<std::vector<int>*> permutable;
    std::size_t combos = 1;
    for (SideCtx& c : ctx) {
        for (auto& ngroups : c.groups) {
            for (auto& g : ngroups) {
                if (g.size() < 2) continue;
                bool slotted = false;
                for (int m : g)
                    if (c.has_slot[static_cast<std::size_t>(m)]) slotted = true;
                if (!slotted) continue;
                permutable.push_back(&g);
                for (std::size_t f = 2; f <= g.size(); ++f) combos *= f;
            }
        }
    }
    if (combos > 10000)
        throw DataError("canonicalize: pattern has too many symmetric orderings");

    std::vector<std::string> best;
    std::map<std::uint32_t, std::uint32_t> best_slots;
    std::function<void(std::size_t)> walk = [&](std::size_t idx) {
        if (idx == permutable.size()) {
            std::map<std::uint32_t, std::uint32_t> slots;
            std::vector<std::string> cand;
            cand.reserve(ctx.size());
            for (SideCtx& c : ctx) cand.push_back(serialize_node(c, c.root, slots));
            if (best.empty() || cand < best) {
                best = std::move(cand);
                best_slots = std::move(slots);
            }
            return;
        }
        std::vector<int>& g = *permutable[idx];
        std::vector<int> base = g;
        std::sort(base.begin(), base.end());
        do {
            g = base;
            walk(idx + 1);
        } while (std::next_permutation(base.begin(), base.end()));
        std::sort(g.begin(), g.end());
    };
    walk(0);

    for (SubtreeShape* s : sides)
        for (PatternNode& n : s->nodes)
            if (n.kind == PatternNode::Kind::Wildcard) n.id = best_slots.at(n.id);
    return best;
}

} // namespace

void canonicalize_pattern(TreePairPattern& p) {
    if (p.left.nodes.empty() || p.right.nodes.empty())
        throw DataError("pattern sides must be non-empty");
    auto keys = canonical_core({&p.left, &p.right});
    p.left_key = std::move(keys[0]);
    p.right_key = std::move(keys[1]);
}

std::string canonical_encode(const SubtreeShape& shape) {
    SubtreeShape copy = shape;
    return canonical_core({&copy})[0];
}

namespace {

std::uint32_t parse_uint_strict(const std::string& s, const std::string& what) {
    if (s.empty()) throw DataError("pattern: empty " + what);
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw DataError("pattern: bad " + what + " '" + s + "'");
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
        if (v > 0xffffffffull) throw DataError("pattern: " + what + " out of range");
    }
    return static_cast<std::uint32_t>(v);
}

struct ShapeParser {
    const std::string& s;
    std::size_t pos = 0;

    explicit ShapeParser(const std::string& str) : s(str) {}

    void parse_node(SubtreeShape& out, int parent) {
        std::string value;
        bool first_escaped = false;
        bool any = false;
        while (pos < s.size()) {
            char c = s[pos];
            if (c == '\\') {
                if (pos + 1 >= s.size()) throw DataError("pattern: dangling escape");
                if (!any) first_escaped = true;
                value.push_back(s[pos + 1]);
                pos += 2;
                any = true;
                continue;
            }
            if (c == '(' || c == ')' || c == ',') break;
            value.push_back(c);
            ++pos;
            any = true;
        }
        bool has_children = pos < s.size() && s[pos] == '(';
        if (has_children) {
            if (value.size() < 2 || value.compare(value.size() - 2, 2, "->") != 0)
                throw DataError("pattern: '(' must follow '->'");
            value.resize(value.size() - 2);
        }
        if (value.empty()) throw DataError("pattern: empty node label");

        PatternNode n;
        n.parent = parent;
        if (!first_escaped && value[0] == '$') {
            n.kind = PatternNode::Kind::Wildcard;
            n.id = parse_uint_strict(value.substr(1), "wildcard slot");
        } else if (!first_escaped && value[0] == '~') {
            n.kind = PatternNode::Kind::SimWord;
            n.id = parse_uint_strict(value.substr(1), "cluster id");
        } else {
            n.kind = PatternNode::Kind::Word;
            n.text = value;
        }
        int me = static_cast<int>(out.nodes.size());
        out.nodes.push_back(std::move(n));
        if (!has_children) return;
        ++pos; // '('
        while (true) {
            parse_node(out, me);
            if (pos >= s.size()) throw DataError("pattern: unterminated child list");
            if (s[pos] == ',') {
                ++pos;
                continue;
            }
            if (s[pos] == ')') {
                ++pos;
                break;
            }
            throw DataError("pattern: expected ',' or ')'");
        }
    }
};

} // namespace

SubtreeShape parse_shape(const std::string& s) {
    SubtreeShape shape;
    ShapeParser p(s);
    p.parse_node(shape, -1);
    if (p.pos != s.size()) throw DataError("pattern: trailing characters in '" + s + "'");
    return shape;
}

TreePairPattern parse_pattern(const std::string& left, const std::string& right) {
    TreePairPattern p;
    p.left = parse_shape(left);
    p.right = parse_shape(right);
    std::set<std::uint32_t> ls, rs;
    for (const PatternNode& n : p.left.nodes)
        if (n.kind == PatternNode::Kind::Wildcard) ls.insert(n.id);
    for (const PatternNode& n : p.right.nodes)
        if (n.kind == PatternNode::Kind::Wildcard) rs.insert(n.id);
    if (ls != rs) throw DataError("pattern: wildcard slots must appear on both sides");
    canonicalize_pattern(p);
    return p;
}

namespace {

SubtreeShape build_side(const DepTree& t, const std::vector<int>& image,
                        std::vector<const Token*>& toks_out) {
    if (image.empty()) throw DataError("build_pattern: empty image");
    std::unordered_map<int, int> pos_of;
    for (std::size_t i = 0; i < image.size(); ++i) pos_of[image[i]] = static_cast<int>(i);
    SubtreeShape s;
    int roots = 0;
    for (int idx : image) {
        const Token& tok = t.token(idx);
        PatternNode n;
        auto it = pos_of.find(tok.head);
        n.parent = it == pos_of.end() ? -1 : it->second;
        if (n.parent < 0) ++roots;
        n.kind = PatternNode::Kind::Word;
        n.text = tok.form;
        s.nodes.push_back(std::move(n));
        toks_out.push_back(&tok);
    }
    if (roots != 1) throw DataError("build_pattern: image is not a connected subtree");
    return s;
}

} // namespace

TreePairPattern build_pattern(const DepTree& tx, const DepTree& ty, const std::vector<int>& left_image,
                              const std::vector<int>& right_image, const LabelConfig& cfg) {
    std::vector<const Token*> ltoks, rtoks;
    TreePairPattern p;
    p.left = build_side(tx, left_image, ltoks);
    p.right = build_side(ty, right_image, rtoks);

    if (cfg.entity) {
        std::set<std::string> lt, rt;
        for (const Token* t : ltoks)
            if (!t->ne_tag.empty()) lt.insert(t->ne_tag);
        for (const Token* t : rtoks)
            if (!t->ne_tag.empty()) rt.insert(t->ne_tag);
        std::map<std::string, std::uint32_t> slot;
        for (const std::string& tag : lt)
            if (rt.count(tag)) slot.emplace(tag, static_cast<std::uint32_t>(slot.size()));
        auto rewrite = [&](SubtreeShape& s, const std::vector<const Token*>& toks) {
            for (std::size_t i = 0; i < s.nodes.size(); ++i) {
                PatternNode& n = s.nodes[i];
                if (toks[i]->ne_tag.empty()) continue;
                auto it = slot.find(toks[i]->ne_tag);
                if (it == slot.end()) continue;
                n.kind = PatternNode::Kind::Wildcard;
                n.id = it->second;
                n.text.clear();
            }
        };
        rewrite(p.left, ltoks);
        rewrite(p.right, rtoks);
    }

    if (cfg.simword) {
        auto side_clusters = [&](const SubtreeShape& s, const std::vector<const Token*>& toks) {
            std::set<std::uint32_t> out;
            for (std::size_t i = 0; i < s.nodes.size(); ++i) {
                if (s.nodes[i].kind != PatternNode::Kind::Word) continue;
                if (auto c = cluster_of(*toks[i], cfg.clustering)) out.insert(*c);
            }
            return out;
        };
        std::set<std::uint32_t> lc = side_clusters(p.left, ltoks);
        std::set<std::uint32_t> rc = side_clusters(p.right, rtoks);
        auto rewrite = [&](SubtreeShape& s, const std::vector<const Token*>& toks,
                           const std::set<std::uint32_t>& other) {
            for (std::size_t i = 0; i < s.nodes.size(); ++i) {
                PatternNode& n = s.nodes[i];
                if (n.kind != PatternNode::Kind::Word) continue;
                auto c = cluster_of(*toks[i], cfg.clustering);
                if (!c || !other.count(*c)) continue;
                n.kind = PatternNode::Kind::SimWord;
                n.id = *c;
                n.text.clear();
            }
        };
        rewrite(p.left, ltoks, rc);
        rewrite(p.right, rtoks, lc);
    }

    canonicalize_pattern(p);
    return p;
}

std::vector<int> pendant_positions(const SubtreeShape& shape) {
    auto ch = shape.child_lists();
    std::vector<int> out;
    for (int i = 0; i < shape.size(); ++i) {
        const auto& kids = ch[static_cast<std::size_t>(i)];
        bool is_root = shape.nodes[static_cast<std::size_t>(i)].parent < 0;
        if (kids.empty() && !is_root) out.push_back(i);
        else if (is_root && kids.size() == 1) out.push_back(i);
    }
    return out;
}

std::optional<TreePairPattern> reduce_pattern(const TreePairPattern& p, int side, int node_pos) {
    const SubtreeShape& s = side ? p.right : p.left;
    if (s.size() < 2) return std::nullopt;
    auto pend = pendant_positions(s);
    if (std::find(pend.begin(), pend.end(), node_pos) == pend.end()) return std::nullopt;

    const PatternNode& victim = s.nodes[static_cast<std::size_t>(node_pos)];
    auto count_on_side = [&](PatternNode::Kind kind, std::uint32_t id) {
        int c = 0;
        for (const PatternNode& n : s.nodes)
            if (n.kind == kind && n.id == id) ++c;
        return c;
    };
    if (victim.kind == PatternNode::Kind::Wildcard && count_on_side(victim.kind, victim.id) == 1)
        return std::nullopt;
    if (victim.kind == PatternNode::Kind::SimWord && count_on_side(victim.kind, victim.id) == 1)
        return std::nullopt;

    TreePairPattern out = p;
    SubtreeShape& target = side ? out.right : out.left;
    SubtreeShape reduced;
    std::vector<int> remap(target.nodes.size(), -1);
    int next = 0;
    for (int i = 0; i < target.size(); ++i) {
        if (i == node_pos) continue;
        remap[static_cast<std::size_t>(i)] = next++;
    }
    for (int i = 0; i < target.size(); ++i) {
        if (i == node_pos) continue;
        PatternNode n = target.nodes[static_cast<std::size_t>(i)];
        if (n.parent == node_pos) n.parent = -1; // removed root had one child
        else if (n.parent >= 0) n.parent = remap[static_cast<std::size_t>(n.parent)];
        reduced.nodes.push_back(std::move(n));
    }
    target = std::move(reduced);
    canonicalize_pattern(out);
    return out;
}

} // namespace treematch
