#include "doctest.h"

#include "treematch/featurizer.hpp"
#include "treematch/mining.hpp"
#include "treematch/util.hpp"

#include "support/oracle.hpp"

#include <algorithm>
#include <sstream>

using namespace treematch;

namespace {

DepTree chain(const std::string& id, const std::vector<std::string>& forms,
              const std::vector<std::string>& tags = {}) {
    std::vector<Token> toks;
    for (std::size_t i = 0; i < forms.size(); ++i) {
        Token t{static_cast<int>(i) + 1, forms[i], static_cast<int>(i), "", std::nullopt};
        if (i < tags.size()) t.ne_tag = tags[i];
        toks.push_back(std::move(t));
    }
    return make_dep_tree(id, toks);
}

PatternTable table_from(const std::vector<std::pair<std::string, std::string>>& sides) {
    PatternTable t;
    for (std::size_t i = 0; i < sides.size(); ++i) {
        PatternTable::Row row;
        row.pattern = parse_pattern(sides[i].first, sides[i].second);
        row.index = static_cast<std::uint32_t>(i);
        row.support_pos = 3;
        t.rows.push_back(std::move(row));
    }
    t.rebuild_key_index();
    return t;
}

} // namespace

TEST_CASE("pattern_matches embeds both sides with edge direction") {
    TreePairPattern p = parse_pattern("work->(weekend)", "rest");
    DepTree x = chain("x", {"work", "weekend"});
    DepTree y = chain("y", {"rest", "well"});
    CHECK(pattern_matches(p, x, y, nullptr));

    // Same words, but weekend no longer hangs off work.
    std::vector<Token> toks{Token{1, "head", 0, "", std::nullopt},
                            Token{2, "work", 1, "", std::nullopt},
                            Token{3, "weekend", 1, "", std::nullopt}};
    DepTree broken = make_dep_tree("b", toks);
    CHECK_FALSE(pattern_matches(p, broken, y, nullptr));

    // Reversed direction does not count.
    DepTree reversed = chain("r", {"weekend", "work"});
    CHECK_FALSE(pattern_matches(p, reversed, y, nullptr));

    // Missing vocabulary on one side.
    DepTree other = chain("o", {"sunny", "day"});
    CHECK_FALSE(pattern_matches(p, x, other, nullptr));
    CHECK_FALSE(pattern_matches(p, other, y, nullptr));
}

TEST_CASE("wildcard slots bind one entity across both sides") {
    TreePairPattern p = parse_pattern("win->($0)", "congratulations->($0)");
    DepTree lina_x = chain("lx", {"win", "LiNa"}, {"", "li_na"});
    DepTree lina_y = chain("ly", {"congratulations", "LiNa"}, {"", "li_na"});
    DepTree nadal_y = chain("ny", {"congratulations", "Nadal"}, {"", "nadal"});
    CHECK(pattern_matches(p, lina_x, lina_y, nullptr));
    // LiNa on the left, Nadal on the right: inconsistent binding.
    CHECK_FALSE(pattern_matches(p, lina_x, nadal_y, nullptr));

    // An untagged token never fills a slot.
    DepTree untagged_y = chain("uy", {"congratulations", "LiNa"});
    CHECK_FALSE(pattern_matches(p, lina_x, untagged_y, nullptr));

    // A second tagged token rescues the embedding existentially.
    std::vector<Token> two{Token{1, "congratulations", 0, "", std::nullopt},
                           Token{2, "Nadal", 1, "nadal", std::nullopt},
                           Token{3, "LiNa", 1, "li_na", std::nullopt}};
    DepTree both_y = make_dep_tree("by", two);
    CHECK(pattern_matches(p, lina_x, both_y, nullptr));
}

TEST_CASE("word nodes match tagged tokens by form") {
    TreePairPattern p = parse_pattern("win->(LiNa)", "great");
    DepTree x = chain("x", {"win", "LiNa"}, {"", "li_na"});
    DepTree y = chain("y", {"great"});
    CHECK(pattern_matches(p, x, y, nullptr));
}

TEST_CASE("SimWord nodes match any token of the cluster") {
    Clustering cl;
    cl.k = 13;
    cl.assignment = {{"good", 12}, {"fine", 12}, {"great", 12}, {"bad", 3}};
    TreePairPattern p = parse_pattern("~12", "~12");
    DepTree x = chain("x", {"good", "day"});
    DepTree y = chain("y", {"fine"});
    DepTree z = chain("z", {"bad"});
    CHECK(pattern_matches(p, x, y, &cl));
    CHECK(pattern_matches(p, x, x, &cl));
    CHECK_FALSE(pattern_matches(p, x, z, &cl));
    CHECK_FALSE(pattern_matches(p, x, y, nullptr)); // no clustering available
}

TEST_CASE("embeddings are injective per side") {
    // Two pattern nodes may not share one token.
    TreePairPattern p = parse_pattern("a->(b,b)", "c");
    DepTree single = chain("x", {"a", "b"});
    DepTree y = chain("y", {"c"});
    CHECK_FALSE(pattern_matches(p, single, y, nullptr));
    std::vector<Token> toks{Token{1, "a", 0, "", std::nullopt},
                            Token{2, "b", 1, "", std::nullopt},
                            Token{3, "b", 1, "", std::nullopt}};
    DepTree twin = make_dep_tree("t", toks);
    CHECK(pattern_matches(p, twin, y, nullptr));
}

TEST_CASE("featurize reports the active table rows in index order") {
    PatternTable t = table_from({{"work->(weekend)", "rest"}, {"work", "rest"}, {"nope", "rest"}});
    DepTree x = chain("x", {"work", "weekend"});
    DepTree y = chain("y", {"rest"});
    SparseFeatureVector v = featurize(x, y, t, nullptr);
    CHECK(v.dimension == 3);
    CHECK(v.active == std::vector<std::uint32_t>{0, 1});

    // Feature indices follow the table, not match order.
    PatternTable empty;
    SparseFeatureVector e = featurize(x, y, empty, nullptr);
    CHECK(e.dimension == 0);
    CHECK(e.active.empty());

    DepTree foreign_x = chain("fx", {"sunny"});
    DepTree foreign_y = chain("fy", {"sky"});
    SparseFeatureVector f = featurize(foreign_x, foreign_y, t, nullptr);
    CHECK(f.active.empty());
}

TEST_CASE("prebuilt index and throwaway path agree") {
    PatternTable t = table_from({{"work->(weekend)", "rest"}, {"work", "rest"}});
    FeatureIndex idx = build_feature_index(t, nullptr);
    DepTree x = chain("x", {"work", "weekend"});
    DepTree y = chain("y", {"rest"});
    CHECK(featurize(x, y, idx) == featurize(x, y, t, nullptr));
}

TEST_CASE("featurize equals brute force over mined tables") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 12; ++trial) {
        bool with_tags = trial % 2 == 1;
        PairedCorpus c = oracle::random_corpus(8, 5, 8, 5, rng, with_tags ? 0.3 : 0.0);
        MiningConfig cfg;
        cfg.max_size = 3;
        cfg.min_support_pos = 1;
        cfg.tau = 0.0;
        cfg.entity_abstraction = with_tags;
        PatternTable t = mine(c, cfg);
        FeatureIndex idx = build_feature_index(t, nullptr);
        for (const CorpusPair& pr : c.pairs) {
            const DepTree& tx = c.tree(pr.x_id);
            const DepTree& ty = c.tree(pr.y_id);
            SparseFeatureVector fast = featurize(tx, ty, idx);
            std::vector<std::uint32_t> brute;
            for (const auto& row : t.rows)
                if (oracle::matches_reference(row.pattern, tx, ty, nullptr))
                    brute.push_back(row.index);
            CHECK(fast.active == brute);
            CHECK(std::is_sorted(fast.active.begin(), fast.active.end()));
            // Spot-check agreement of the two matchers row by row.
            for (const auto& row : t.rows) {
                bool lib = pattern_matches(row.pattern, tx, ty, nullptr);
                bool ref = oracle::matches_reference(row.pattern, tx, ty, nullptr);
                CHECK(lib == ref);
            }
        }
    }
}

TEST_CASE("featurize equals brute force with clusters in play") {
    std::mt19937_64 rng(515);
    Clustering cl;
    cl.k = 3;
    for (int w = 0; w < 5; ++w) cl.assignment["w" + std::to_string(w)] = static_cast<std::uint32_t>(w % 3);
    for (int trial = 0; trial < 6; ++trial) {
        PairedCorpus c = oracle::random_corpus(6, 4, 6, 5, rng, 0.2);
        MiningConfig cfg;
        cfg.max_size = 2;
        cfg.min_support_pos = 1;
        cfg.tau = 0.0;
        cfg.entity_abstraction = true;
        cfg.simword_abstraction = true;
        cfg.clustering = &cl;
        PatternTable t = mine(c, cfg);
        FeatureIndex idx = build_feature_index(t, &cl);
        for (const CorpusPair& pr : c.pairs) {
            const DepTree& tx = c.tree(pr.x_id);
            const DepTree& ty = c.tree(pr.y_id);
            SparseFeatureVector fast = featurize(tx, ty, idx);
            std::vector<std::uint32_t> brute;
            for (const auto& row : t.rows)
                if (oracle::matches_reference(row.pattern, tx, ty, &cl))
                    brute.push_back(row.index);
            CHECK(fast.active == brute);
        }
    }
}

TEST_CASE("active patterns close downward over the table") {
    std::mt19937_64 rng(626);
    for (int trial = 0; trial < 8; ++trial) {
        PairedCorpus c = oracle::random_corpus(8, 5, 8, 5, rng, 0.25);
        MiningConfig cfg;
        cfg.max_size = 3;
        cfg.min_support_pos = 1;
        cfg.tau = 0.0;
        cfg.entity_abstraction = true;
        PatternTable t = mine(c, cfg);
        FeatureIndex idx = build_feature_index(t, nullptr);
        for (const CorpusPair& pr : c.pairs) {
            const DepTree& tx = c.tree(pr.x_id);
            const DepTree& ty = c.tree(pr.y_id);
            SparseFeatureVector v = featurize(tx, ty, idx);
            std::vector<char> active(t.dimension(), 0);
            for (std::uint32_t a : v.active) active[a] = 1;
            for (std::uint32_t a : v.active) {
                const TreePairPattern& p = t.rows[a].pattern;
                for (int side = 0; side < 2; ++side) {
                    const SubtreeShape& s = side ? p.right : p.left;
                    for (int pos : pendant_positions(s)) {
                        auto red = reduce_pattern(p, side, pos);
                        if (!red) continue;
                        auto it = t.by_key.find(red->key());
                        if (it == t.by_key.end()) continue;
                        CHECK(active[it->second] == 1);
                    }
                }
            }
        }
    }
}

TEST_CASE("feats files round-trip and validate") {
    std::vector<std::pair<std::string, SparseFeatureVector>> rows;
    rows.push_back({pair_key("x1", "y1"), SparseFeatureVector{{0, 2, 5}, 6}});
    rows.push_back({pair_key("x2", "y2"), SparseFeatureVector{{}, 6}});
    std::ostringstream out;
    write_feats(out, rows);
    CHECK(out.str() == "x1|y1\t0 2 5\nx2|y2\t\n");

    std::istringstream in(out.str());
    auto back = read_feats(in, 6);
    REQUIRE(back.size() == 2);
    CHECK(back[0].first == "x1|y1");
    CHECK(back[0].second == rows[0].second);
    CHECK(back[1].second.active.empty());

    std::istringstream out_of_range("a|b\t0 7\n");
    CHECK_THROWS_AS(read_feats(out_of_range, 6), DataError);
    std::istringstream unsorted("a|b\t3 1\n");
    CHECK_THROWS_AS(read_feats(unsorted, 6), DataError);
    std::istringstream duplicate("a|b\t2 2\n");
    CHECK_THROWS_AS(read_feats(duplicate, 6), DataError);
    std::istringstream garbage("a|b\tx\n");
    CHECK_THROWS_AS(read_feats(garbage, 6), DataError);
    std::istringstream one_col("a|b\n");
    CHECK_THROWS_AS(read_feats(one_col, 6), DataError);
}

TEST_CASE("pair keys refuse separator characters") {
    CHECK(pair_key("x1", "y1") == "x1|y1");
    CHECK_THROWS_AS(pair_key("x|1", "y"), DataError);
    CHECK_THROWS_AS(pair_key("x", "y\t1"), DataError);
}
