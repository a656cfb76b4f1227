#include "treematch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "treematch/util.hpp"

namespace treematch {

void SynthSpec::validate() const {
    if (mode != "plain" && mode != "conjunctive" && mode != "entity")
        throw ConfigError("synthetic spec: unknown mode '" + mode + "'");
    if (n_patterns < 2) throw ConfigError("synthetic spec: n_patterns must be >= 2");
    if (n_pairs < 0) throw ConfigError("synthetic spec: n_pairs must be >= 0");
    if (tree_min < 2 || tree_max < tree_min)
        throw ConfigError("synthetic spec: need 2 <= tree_min <= tree_max");
    int min_group = mode == "conjunctive" ? 4 : 2;
    if (group_size < min_group)
        throw ConfigError("synthetic spec: group_size too small for mode " + mode);
    if (valid_frac < 0.0 || test_frac < 0.0 || valid_frac + test_frac > 0.9)
        throw ConfigError("synthetic spec: split fractions out of range");
    int words_per_family = mode == "plain" ? 4 : mode == "conjunctive" ? 8 : 2;
    if (vocab < words_per_family * n_patterns + 10)
        throw ConfigError("synthetic spec: vocab too small for the signal words");
}

namespace {

std::string pad_id(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%06d", prefix, i);
    return buf;
}

std::string vocab_word(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%05d", i);
    return buf;
}

std::string entity_word(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "e%05d", i);
    return buf;
}

struct ReqToken {
    std::string form;
    std::string tag;
};

struct TreePlan {
    std::vector<ReqToken> tokens;
    std::vector<std::pair<int, int>> edges;     // (head, dep) among required slots
    std::vector<std::pair<int, int>> forbidden; // (child, parent) attachments to avoid
};

// Places the required tokens with their edges, hangs remaining pieces and
// filler tokens on uniformly drawn attachment points, then permutes token
// positions. Attachments respect the forbidden list so no unplanned signal
// edge can form.
DepTree build_tree(const std::string& id, const TreePlan& plan, int want_size,
                   const std::vector<std::string>& fillers, std::mt19937_64& rng) {
    int n_req = static_cast<int>(plan.tokens.size());
    int total = std::max(want_size, n_req);

    std::vector<int> par_req(static_cast<std::size_t>(n_req), -1);
    for (auto [h, d] : plan.edges) {
        if (h == d || h < 0 || d < 0 || h >= n_req || d >= n_req || par_req[static_cast<std::size_t>(d)] >= 0)
            throw ConfigError("synthetic: malformed tree plan");
        par_req[static_cast<std::size_t>(d)] = h;
    }
    auto piece_root = [&](int v) {
        while (par_req[static_cast<std::size_t>(v)] >= 0) v = par_req[static_cast<std::size_t>(v)];
        return v;
    };

    std::vector<int> parent(static_cast<std::size_t>(total), -1);
    std::vector<char> attached(static_cast<std::size_t>(total), 0);
    std::vector<int> attach_order;
    int anchor = piece_root(0);
    for (int v = 0; v < n_req; ++v) {
        if (piece_root(v) != anchor) continue;
        attached[static_cast<std::size_t>(v)] = 1;
        attach_order.push_back(v);
        parent[static_cast<std::size_t>(v)] = par_req[static_cast<std::size_t>(v)];
    }

    auto forbidden_pair = [&](int child, int par) {
        for (auto [c, p] : plan.forbidden)
            if (c == child && p == par) return true;
        return false;
    };

    std::vector<std::string> filler_forms;
    for (int slot = n_req; slot < total; ++slot) {
        filler_forms.push_back(fillers[bounded_uniform(rng, fillers.size())]);
        parent[static_cast<std::size_t>(slot)] =
            attach_order[bounded_uniform(rng, attach_order.size())];
        attach_order.push_back(slot);
    }

    for (int v = 0; v < n_req; ++v) {
        if (attached[static_cast<std::size_t>(v)] || par_req[static_cast<std::size_t>(v)] >= 0) continue;
        std::vector<int> cands;
        for (int p : attach_order)
            if (!forbidden_pair(v, p)) cands.push_back(p);
        if (cands.empty()) throw ConfigError("synthetic: no legal attachment point");
        parent[static_cast<std::size_t>(v)] = cands[bounded_uniform(rng, cands.size())];
        for (int w = v; w < n_req; ++w) {
            if (attached[static_cast<std::size_t>(w)] || piece_root(w) != v) continue;
            attached[static_cast<std::size_t>(w)] = 1;
            attach_order.push_back(w);
            if (w != v) parent[static_cast<std::size_t>(w)] = par_req[static_cast<std::size_t>(w)];
        }
    }

    std::vector<int> slots(static_cast<std::size_t>(total));
    std::iota(slots.begin(), slots.end(), 0);
    seeded_shuffle(slots, rng);
    std::vector<int> pos_of(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) pos_of[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] = i;

    std::vector<Token> toks(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        int slot = slots[static_cast<std::size_t>(i)];
        Token& t = toks[static_cast<std::size_t>(i)];
        t.index = i + 1;
        if (slot < n_req) {
            t.form = plan.tokens[static_cast<std::size_t>(slot)].form;
            t.ne_tag = plan.tokens[static_cast<std::size_t>(slot)].tag;
        } else {
            t.form = filler_forms[static_cast<std::size_t>(slot - n_req)];
        }
        int par = parent[static_cast<std::size_t>(slot)];
        t.head = par < 0 ? 0 : pos_of[static_cast<std::size_t>(par)] + 1;
    }
    return make_dep_tree(id, std::move(toks));
}

int draw_size(const SynthSpec& spec, std::mt19937_64& rng) {
    return spec.tree_min +
           static_cast<int>(bounded_uniform(rng, static_cast<std::uint64_t>(spec.tree_max - spec.tree_min + 1)));
}

// k distinct elements via partial Fisher-Yates over a copy of the pool.
std::vector<int> draw_distinct(std::vector<int> pool, std::size_t k, std::mt19937_64& rng) {
    if (pool.size() < k) throw ConfigError("synthetic: candidate pool too small for group size");
    for (std::size_t m = 0; m < k; ++m) {
        std::size_t j = m + static_cast<std::size_t>(bounded_uniform(rng, pool.size() - m));
        std::swap(pool[m], pool[j]);
    }
    pool.resize(k);
    return pool;
}

struct Splits {
    int n_train = 0, n_valid = 0, n_test = 0;

    int split_of(int i) const { return i < n_train ? 0 : i < n_train + n_valid ? 1 : 2; }
    int offset(int split) const { return split == 0 ? 0 : split == 1 ? n_train : n_train + n_valid; }
    int count(int split) const { return split == 0 ? n_train : split == 1 ? n_valid : n_test; }
};

} // namespace

PairedCorpus SynthCorpus::to_corpus() const {
    PairedCorpus c;
    for (const DepTree& t : trees) c.add_tree(t);
    c.pairs = train_pairs;
    c.validate();
    return c;
}

SynthCorpus make_synthetic(const SynthSpec& spec) {
    spec.validate();
    SynthCorpus sc;

    int n = spec.n_pairs;
    bool conjunctive = spec.mode == "conjunctive";
    bool entity = spec.mode == "entity";
    int words_per_family = spec.mode == "plain" ? 4 : conjunctive ? 8 : 2;

    std::vector<std::string> fillers;
    for (int w = words_per_family * spec.n_patterns; w < spec.vocab; ++w)
        fillers.push_back(vocab_word(w));

    auto family_word = [&](int f, int k) { return vocab_word(f * words_per_family + k); };

    for (int f = 0; f < spec.n_patterns; ++f) {
        if (conjunctive) {
            for (int feat = 0; feat < 3; ++feat)
                sc.gold_patterns.push_back(
                    parse_pattern(family_word(f, 0) + "->(" + family_word(f, 1) + ")",
                                  family_word(f, 2 + 2 * feat) + "->(" + family_word(f, 3 + 2 * feat) + ")"));
        } else if (entity) {
            sc.gold_patterns.push_back(
                parse_pattern(family_word(f, 0) + "->($0)", family_word(f, 1) + "->($0)"));
        } else {
            sc.gold_patterns.push_back(
                parse_pattern(family_word(f, 0) + "->(" + family_word(f, 1) + ")",
                              family_word(f, 2) + "->(" + family_word(f, 3) + ")"));
        }
    }
    if (n == 0) return sc;

    Splits sp;
    sp.n_valid = static_cast<int>(std::lround(spec.valid_frac * n));
    sp.n_test = static_cast<int>(std::lround(spec.test_frac * n));
    sp.n_train = n - sp.n_valid - sp.n_test;
    if (sp.n_train < 1) throw ConfigError("synthetic spec: no training positives left after splits");

    std::mt19937_64 tree_rng(stage_seed(spec.seed, "trees"));
    std::mt19937_64 group_rng(stage_seed(spec.seed, "groups"));

    // Entity pools are disjoint across splits; inside a split, consecutive
    // positives share one entity, so any concrete entity pattern has support
    // at most 2 while the families of the two sharers always differ.
    auto entity_index = [&](int i) {
        int split = sp.split_of(i);
        int pos = i - sp.offset(split);
        int base = 0;
        for (int s = 0; s < split; ++s) base += (sp.count(s) + 1) / 2;
        return base + pos / 2;
    };

    for (int i = 0; i < n; ++i) {
        int f = i % spec.n_patterns;
        TreePlan tweet, gold;
        if (conjunctive) {
            tweet.tokens = {{family_word(f, 0), ""}, {family_word(f, 1), ""}};
            tweet.edges = {{0, 1}};
            for (int k = 2; k < 8; ++k) gold.tokens.push_back({family_word(f, k), ""});
            bool type_b = (i / spec.n_patterns) % 2 == 1; // {A,B} golds vs {A,M} golds
            // Any component under any other component is forbidden, so the
            // only edges between the six signal words are the wired ones.
            for (int c = 0; c < 6; ++c)
                for (int p = 0; p < 6; ++p)
                    if (c != p) gold.forbidden.push_back({c, p});
            TreePlan trap1 = gold, trap3 = gold;
            auto wire = [](TreePlan& plan, bool a, bool b, bool m) {
                const std::pair<int, int> feats[3] = {{0, 1}, {2, 3}, {4, 5}};
                const bool on[3] = {a, b, m};
                for (int k = 0; k < 3; ++k)
                    if (on[k]) plan.edges.push_back(feats[k]);
            };
            wire(gold, true, type_b, !type_b);
            wire(trap1, true, false, false);
            wire(trap3, true, true, true);
            // At least two filler attachment points so the forbidden list can
            // never strand a component piece.
            auto resp_size = [&] { return std::max(draw_size(spec, tree_rng), 8); };
            sc.trees.push_back(build_tree(pad_id("t", i), tweet, draw_size(spec, tree_rng), fillers, tree_rng));
            sc.trees.push_back(build_tree(pad_id("r", i), gold, resp_size(), fillers, tree_rng));
            sc.trees.push_back(build_tree(pad_id("u", i), trap1, resp_size(), fillers, tree_rng));
            sc.trees.push_back(build_tree(pad_id("v", i), trap3, resp_size(), fillers, tree_rng));
        } else if (entity) {
            std::string ent = entity_word(entity_index(i));
            tweet.tokens = {{family_word(f, 0), ""}, {ent, ent}};
            tweet.edges = {{0, 1}};
            gold.tokens = {{family_word(f, 1), ""}, {ent, ent}};
            gold.edges = {{0, 1}};
            sc.trees.push_back(build_tree(pad_id("t", i), tweet, draw_size(spec, tree_rng), fillers, tree_rng));
            sc.trees.push_back(build_tree(pad_id("r", i), gold, draw_size(spec, tree_rng), fillers, tree_rng));
        } else {
            tweet.tokens = {{family_word(f, 0), ""}, {family_word(f, 1), ""}};
            tweet.edges = {{0, 1}};
            gold.tokens = {{family_word(f, 2), ""}, {family_word(f, 3), ""}};
            gold.edges = {{0, 1}};
            sc.trees.push_back(build_tree(pad_id("t", i), tweet, draw_size(spec, tree_rng), fillers, tree_rng));
            sc.trees.push_back(build_tree(pad_id("r", i), gold, draw_size(spec, tree_rng), fillers, tree_rng));
        }
    }

    auto build_groups = [&](int split) {
        std::vector<RankGroup> groups;
        int off = sp.offset(split), cnt = sp.count(split);
        for (int i = off; i < off + cnt; ++i) {
            int f = i % spec.n_patterns;
            RankGroup g;
            g.tweet = pad_id("t", i);
            g.candidates.emplace_back(pad_id("r", i), true);
            std::size_t want = static_cast<std::size_t>(spec.group_size - 1);
            std::vector<int> foreign_pool;
            if (conjunctive) {
                g.candidates.emplace_back(pad_id("u", i), false);
                g.candidates.emplace_back(pad_id("v", i), false);
                want -= 2;
                for (int j = off; j < off + cnt; ++j)
                    if (j % spec.n_patterns != f) foreign_pool.push_back(j);
            } else if (entity) {
                std::vector<int> same_family;
                for (int j = off; j < off + cnt; ++j)
                    if (j != i && j % spec.n_patterns == f) same_family.push_back(j);
                if (same_family.empty())
                    throw ConfigError("synthetic: entity mode needs two positives per family per split");
                int hard = same_family[bounded_uniform(group_rng, same_family.size())];
                g.candidates.emplace_back(pad_id("r", hard), false);
                want -= 1;
                // Only every third entity pair contributes its shared-entity
                // partner as a distractor: enough of them keep the bare
                // entity-slot pattern from reaching full confidence, few
                // enough that it survives mining and can grow into the
                // planted frame patterns.
                int pos = i - off;
                int partner = (pos ^ 1) + off;
                if ((pos / 2) % 3 == 0 && partner < off + cnt && want > 0) {
                    g.candidates.emplace_back(pad_id("r", partner), false);
                    want -= 1;
                }
                for (int j = off; j < off + cnt; ++j) {
                    if (j % spec.n_patterns == f) continue;
                    if ((j - off) / 2 == pos / 2) continue; // shares the entity; handled above
                    foreign_pool.push_back(j);
                }
            } else {
                for (int j = off; j < off + cnt; ++j)
                    if (j % spec.n_patterns != f) foreign_pool.push_back(j);
            }
            for (int j : draw_distinct(foreign_pool, want, group_rng))
                g.candidates.emplace_back(pad_id("r", j), false);
            groups.push_back(std::move(g));
        }
        return groups;
    };

    sc.train_groups = build_groups(0);
    if (sp.n_valid > 0) sc.valid_groups = build_groups(1);
    if (sp.n_test > 0) sc.test_groups = build_groups(2);

    for (const RankGroup& g : sc.train_groups)
        for (const auto& [id, is_gold] : g.candidates)
            sc.train_pairs.push_back({g.tweet, id, is_gold});

    return sc;
}

SynthSpec parse_synth_spec(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("synthetic spec: ") + e.what());
    }
    SynthSpec spec;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "mode") spec.mode = value.get<std::string>();
            else if (key == "n_patterns") spec.n_patterns = value.get<int>();
            else if (key == "n_pairs") spec.n_pairs = value.get<int>();
            else if (key == "vocab") spec.vocab = value.get<int>();
            else if (key == "tree_min") spec.tree_min = value.get<int>();
            else if (key == "tree_max") spec.tree_max = value.get<int>();
            else if (key == "group_size") spec.group_size = value.get<int>();
            else if (key == "valid_frac") spec.valid_frac = value.get<double>();
            else if (key == "test_frac") spec.test_frac = value.get<double>();
            else if (key == "seed") spec.seed = value.get<std::uint64_t>();
            else throw ConfigError("synthetic spec: unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("synthetic spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

void write_synth_spec(std::ostream& out, const SynthSpec& spec) {
    nlohmann::json j;
    j["mode"] = spec.mode;
    j["n_patterns"] = spec.n_patterns;
    j["n_pairs"] = spec.n_pairs;
    j["vocab"] = spec.vocab;
    j["tree_min"] = spec.tree_min;
    j["tree_max"] = spec.tree_max;
    j["group_size"] = spec.group_size;
    j["valid_frac"] = spec.valid_frac;
    j["test_frac"] = spec.test_frac;
    j["seed"] = spec.seed;
    out << j.dump() << "\n";
}

void write_synth(const std::string& dir, const SynthCorpus& sc) {
    std::filesystem::create_directories(dir);
    auto open = [&dir](const char* name) {
        std::ofstream out(std::filesystem::path(dir) / name);
        if (!out) throw DataError(std::string("cannot write ") + name + " under " + dir);
        return out;
    };
    {
        auto out = open("trees.tsv");
        write_trees(out, sc.trees);
    }
    {
        auto out = open("train_pairs.tsv");
        write_pairs(out, sc.train_pairs);
    }
    {
        auto out = open("train_groups.tsv");
        write_groups(out, sc.train_groups);
    }
    {
        auto out = open("valid_groups.tsv");
        write_groups(out, sc.valid_groups);
    }
    {
        auto out = open("test_groups.tsv");
        write_groups(out, sc.test_groups);
    }
    {
        auto out = open("gold_patterns.tsv");
        for (const TreePairPattern& p : sc.gold_patterns)
            out << p.left_key << '\t' << p.right_key << '\n';
    }
}

} // namespace treematch
