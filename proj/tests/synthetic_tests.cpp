#include "doctest.h"

#include "treematch/featurizer.hpp"
#include "treematch/mining.hpp"
#include "treematch/synthetic.hpp"
#include "treematch/util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

using namespace treematch;

namespace {

std::string word(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%05d", i);
    return buf;
}

int id_num(const std::string& id) { return std::stoi(id.substr(1)); }

std::unordered_map<std::string, const DepTree*> tree_map(const SynthCorpus& sc) {
    std::unordered_map<std::string, const DepTree*> m;
    for (const DepTree& t : sc.trees) m[t.id] = &t;
    return m;
}

std::set<std::string> forms_of(const DepTree& t) {
    std::set<std::string> f;
    for (const Token& tok : t.tokens) f.insert(tok.form);
    return f;
}

std::string digest(const SynthCorpus& sc) {
    std::stringstream out;
    write_trees(out, sc.trees);
    write_pairs(out, sc.train_pairs);
    write_groups(out, sc.train_groups);
    write_groups(out, sc.valid_groups);
    write_groups(out, sc.test_groups);
    for (const TreePairPattern& p : sc.gold_patterns) out << p.key() << '\n';
    return out.str();
}

std::vector<const RankGroup*> all_groups(const SynthCorpus& sc) {
    std::vector<const RankGroup*> gs;
    for (const auto* split : {&sc.train_groups, &sc.valid_groups, &sc.test_groups})
        for (const RankGroup& g : *split) gs.push_back(&g);
    return gs;
}

} // namespace

TEST_CASE("synthetic specs validate their knobs") {
    SynthSpec ok;
    ok.n_patterns = 4;
    ok.n_pairs = 40;
    ok.vocab = 60;
    CHECK_NOTHROW(ok.validate());

    SynthSpec bad = ok;
    bad.mode = "sneaky";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.n_patterns = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.n_pairs = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.tree_min = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.tree_min = 9; // above tree_max
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.group_size = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.mode = "conjunctive";
    bad.vocab = 500;
    bad.group_size = 3; // conjunctive groups carry two traps plus the gold
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.valid_frac = 0.8;
    bad.test_frac = 0.2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.test_frac = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ok;
    bad.vocab = 4 * 4 + 9; // one short of the signal words + filler floor
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("synthetic spec files round-trip and reject junk") {
    SynthSpec spec;
    spec.mode = "entity";
    spec.n_patterns = 7;
    spec.n_pairs = 66;
    spec.vocab = 120;
    spec.tree_min = 3;
    spec.tree_max = 5;
    spec.group_size = 4;
    spec.valid_frac = 0.2;
    spec.test_frac = 0.1;
    spec.seed = 99;

    std::stringstream ss;
    write_synth_spec(ss, spec);
    SynthSpec back = parse_synth_spec(ss);
    CHECK(back.mode == "entity");
    CHECK(back.n_patterns == 7);
    CHECK(back.n_pairs == 66);
    CHECK(back.vocab == 120);
    CHECK(back.tree_min == 3);
    CHECK(back.tree_max == 5);
    CHECK(back.group_size == 4);
    CHECK(back.valid_frac == 0.2);
    CHECK(back.test_frac == 0.1);
    CHECK(back.seed == 99);

    std::stringstream partial(R"({"mode":"plain","n_patterns":3,"vocab":60})");
    SynthSpec defaults = parse_synth_spec(partial);
    CHECK(defaults.n_pairs == 2000);
    CHECK(defaults.group_size == 10);
    CHECK(defaults.seed == 1);

    auto parse_from = [](const std::string& text) {
        std::stringstream in(text);
        return parse_synth_spec(in);
    };
    CHECK_THROWS_AS(parse_from("{nope"), DataError);
    CHECK_THROWS_AS(parse_from(R"({"n_pairs":"many"})"), DataError);
    CHECK_THROWS_AS(parse_from(R"({"mood":"plain"})"), ConfigError);
    CHECK_THROWS_AS(parse_from(R"({"mode":"plain","n_patterns":1})"), ConfigError);
}

TEST_CASE("plain corpora plant their patterns and nothing else") {
    SynthSpec spec;
    spec.mode = "plain";
    spec.n_patterns = 4;
    spec.n_pairs = 80;
    spec.vocab = 60;
    spec.tree_min = 4;
    spec.tree_max = 6;
    spec.group_size = 4;
    spec.seed = 3;

    SynthCorpus sc = make_synthetic(spec);
    REQUIRE(sc.gold_patterns.size() == 4);
    CHECK(sc.gold_patterns[0].key() == "w00000->(w00001)\tw00002->(w00003)");
    CHECK(sc.gold_patterns[3].key() == "w00012->(w00013)\tw00014->(w00015)");

    CHECK(sc.trees.size() == 160); // tweet + response per positive
    CHECK(sc.train_groups.size() == 56);
    CHECK(sc.valid_groups.size() == 12);
    CHECK(sc.test_groups.size() == 12);

    for (const DepTree& t : sc.trees) {
        CHECK(t.tokens.size() >= 4);
        CHECK(t.tokens.size() <= 6);
    }

    REQUIRE(sc.train_pairs.size() == 56 * 4);
    std::size_t at = 0;
    for (const RankGroup& g : sc.train_groups)
        for (const auto& [id, is_gold] : g.candidates) {
            CHECK(sc.train_pairs[at].x_id == g.tweet);
            CHECK(sc.train_pairs[at].y_id == id);
            CHECK(sc.train_pairs[at].positive == is_gold);
            ++at;
        }

    auto trees = tree_map(sc);
    for (const RankGroup* g : all_groups(sc)) {
        REQUIRE(g->candidates.size() == 4);
        CHECK(g->candidates[0].second);
        int i = id_num(g->tweet);
        int f = i % 4;
        const DepTree& tweet = *trees.at(g->tweet);
        CHECK(pattern_matches(sc.gold_patterns[f], tweet, *trees.at(g->candidates[0].first),
                              nullptr));
        for (std::size_t c = 1; c < g->candidates.size(); ++c) {
            CHECK_FALSE(g->candidates[c].second);
            const DepTree& resp = *trees.at(g->candidates[c].first);
            for (const TreePairPattern& p : sc.gold_patterns)
                CHECK_FALSE(pattern_matches(p, tweet, resp, nullptr));
        }
    }

    CHECK(digest(make_synthetic(spec)) == digest(sc));
    SynthSpec reseeded = spec;
    reseeded.seed = 4;
    CHECK(digest(make_synthetic(reseeded)) != digest(sc));
}

TEST_CASE("mining recovers every planted plain pattern") {
    SynthSpec spec;
    spec.mode = "plain";
    spec.n_patterns = 4;
    spec.n_pairs = 80;
    spec.vocab = 60;
    spec.tree_min = 4;
    spec.tree_max = 6;
    spec.group_size = 4;
    spec.seed = 17;

    SynthCorpus sc = make_synthetic(spec);
    PairedCorpus corpus = sc.to_corpus();

    MiningConfig cfg;
    cfg.max_size = 2;
    cfg.min_support_pos = 2;
    cfg.tau = 0.6;
    PatternTable t = mine(corpus, cfg);
    for (const TreePairPattern& p : sc.gold_patterns) {
        REQUIRE(t.by_key.count(p.key()) == 1);
        const PatternTable::Row& row = t.rows[t.by_key.at(p.key())];
        CHECK(row.support_pos >= 2);
        CHECK(row.support_neg == 0);
    }
}

TEST_CASE("zero pairs still publishes the gold pattern list") {
    SynthSpec spec;
    spec.n_patterns = 5;
    spec.n_pairs = 0;
    spec.vocab = 60;
    SynthCorpus sc = make_synthetic(spec);
    CHECK(sc.gold_patterns.size() == 5);
    CHECK(sc.trees.empty());
    CHECK(sc.train_pairs.empty());
    CHECK(sc.train_groups.empty());
    CHECK(sc.valid_groups.empty());
    CHECK(sc.test_groups.empty());
}

TEST_CASE("conjunctive groups wire exactly the planted feature sets") {
    SynthSpec spec;
    spec.mode = "conjunctive";
    spec.n_patterns = 3;
    spec.n_pairs = 60;
    spec.vocab = 50;
    spec.tree_min = 4;
    spec.tree_max = 7;
    spec.group_size = 6;
    spec.seed = 5;

    SynthCorpus sc = make_synthetic(spec);
    REQUIRE(sc.gold_patterns.size() == 9); // three feature patterns per family
    CHECK(sc.gold_patterns[0].key() == "w00000->(w00001)\tw00002->(w00003)");
    CHECK(sc.gold_patterns[1].key() == "w00000->(w00001)\tw00004->(w00005)");
    CHECK(sc.gold_patterns[2].key() == "w00000->(w00001)\tw00006->(w00007)");

    CHECK(sc.train_groups.size() == 42);
    CHECK(sc.valid_groups.size() == 9);
    CHECK(sc.test_groups.size() == 9);

    auto trees = tree_map(sc);
    auto match_set = [&](const DepTree& tweet, const DepTree& resp, int f) {
        std::set<int> feats;
        for (int feat = 0; feat < 3; ++feat)
            if (pattern_matches(sc.gold_patterns[static_cast<std::size_t>(3 * f + feat)], tweet,
                                resp, nullptr))
                feats.insert(feat);
        return feats;
    };

    for (const RankGroup* g : all_groups(sc)) {
        REQUIRE(g->candidates.size() == 6);
        int i = id_num(g->tweet);
        int f = i % 3;
        bool type_b = (i / 3) % 2 == 1;
        const DepTree& tweet = *trees.at(g->tweet);

        CHECK(g->candidates[0].first[0] == 'r');
        CHECK(g->candidates[1].first == "u" + g->tweet.substr(1));
        CHECK(g->candidates[2].first == "v" + g->tweet.substr(1));

        // Gold carries the base feature plus exactly one companion; the traps
        // carry one and three. Counting features cannot rank gold first in
        // both group types, which is the whole point of this mode.
        CHECK(match_set(tweet, *trees.at(g->candidates[0].first), f) ==
              std::set<int>{0, type_b ? 1 : 2});
        CHECK(match_set(tweet, *trees.at(g->candidates[1].first), f) == std::set<int>{0});
        CHECK(match_set(tweet, *trees.at(g->candidates[2].first), f) == std::set<int>{0, 1, 2});

        std::set<std::string> components;
        for (int k = 2; k < 8; ++k) components.insert(word(8 * f + k));
        for (std::size_t c = 0; c < 3; ++c) {
            const DepTree& resp = *trees.at(g->candidates[c].first);
            CHECK(resp.tokens.size() == 8);
            std::set<std::string> forms = forms_of(resp);
            for (const std::string& w : components) CHECK(forms.count(w) == 1);
        }
        for (std::size_t c = 3; c < g->candidates.size(); ++c) {
            const DepTree& resp = *trees.at(g->candidates[c].first);
            for (const TreePairPattern& p : sc.gold_patterns)
                CHECK_FALSE(pattern_matches(p, tweet, resp, nullptr));
        }
        CHECK(tweet.tokens.size() >= 4);
        CHECK(tweet.tokens.size() <= 7);
    }
}

TEST_CASE("entity corpora keep splits apart and entities scarce") {
    SynthSpec spec;
    spec.mode = "entity";
    spec.n_patterns = 4;
    spec.n_pairs = 120;
    spec.vocab = 40;
    spec.tree_min = 4;
    spec.tree_max = 6;
    spec.group_size = 6;
    spec.seed = 9;

    SynthCorpus sc = make_synthetic(spec);
    REQUIRE(sc.gold_patterns.size() == 4);
    CHECK(sc.gold_patterns[0].key() == "w00000->($0)\tw00001->($0)");

    CHECK(sc.train_groups.size() == 84);
    CHECK(sc.valid_groups.size() == 18);
    CHECK(sc.test_groups.size() == 18);

    auto trees = tree_map(sc);
    auto tag_of = [](const DepTree& t) {
        std::string tag;
        int tagged = 0;
        for (const Token& tok : t.tokens)
            if (!tok.ne_tag.empty()) {
                ++tagged;
                tag = tok.ne_tag;
                CHECK(tok.form == tok.ne_tag);
            }
        CHECK(tagged == 1);
        return tag;
    };

    const std::vector<RankGroup>* splits[3] = {&sc.train_groups, &sc.valid_groups,
                                               &sc.test_groups};
    std::set<std::string> split_tags[3];
    std::unordered_map<std::string, std::set<int>> users; // entity -> positive ids
    for (int s = 0; s < 3; ++s) {
        for (const RankGroup& g : *splits[s]) {
            REQUIRE(g.candidates.size() == 6);
            int i = id_num(g.tweet);
            int f = i % 4;
            const DepTree& tweet = *trees.at(g.tweet);
            const DepTree& gold = *trees.at(g.candidates[0].first);

            std::string tag = tag_of(tweet);
            CHECK(tag_of(gold) == tag);
            split_tags[s].insert(tag);
            users[tag].insert(i);

            CHECK(pattern_matches(sc.gold_patterns[static_cast<std::size_t>(f)], tweet, gold,
                                  nullptr));
            // The hard distractor answers the right frame about the wrong
            // entity.
            int hard = id_num(g.candidates[1].first);
            CHECK(hard % 4 == f);
            CHECK(hard != i);
            CHECK(tag_of(*trees.at(g.candidates[1].first)) != tag);
            for (std::size_t c = 1; c < g.candidates.size(); ++c) {
                const DepTree& resp = *trees.at(g.candidates[c].first);
                for (const TreePairPattern& p : sc.gold_patterns)
                    CHECK_FALSE(pattern_matches(p, tweet, resp, nullptr));
            }
        }
    }
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            for (const std::string& tag : split_tags[a]) CHECK(split_tags[b].count(tag) == 0);
    for (const auto& [tag, ids] : users) CHECK(ids.size() <= 2);
}

TEST_CASE("written synth directories are byte-for-byte the public writers") {
    SynthSpec spec;
    spec.mode = "plain";
    spec.n_patterns = 4;
    spec.n_pairs = 40;
    spec.vocab = 60;
    spec.group_size = 4;
    spec.seed = 21;
    SynthCorpus sc = make_synthetic(spec);

    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "treematch_synth_test";
    fs::remove_all(dir);
    write_synth(dir.string(), sc);

    auto slurp = [&dir](const char* name) {
        std::ifstream in(dir / name);
        REQUIRE(in);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::stringstream expect;
    write_trees(expect, sc.trees);
    CHECK(slurp("trees.tsv") == expect.str());

    expect.str("");
    write_pairs(expect, sc.train_pairs);
    CHECK(slurp("train_pairs.tsv") == expect.str());

    const char* names[3] = {"train_groups.tsv", "valid_groups.tsv", "test_groups.tsv"};
    const std::vector<RankGroup>* splits[3] = {&sc.train_groups, &sc.valid_groups,
                                               &sc.test_groups};
    for (int s = 0; s < 3; ++s) {
        expect.str("");
        write_groups(expect, *splits[s]);
        CHECK(slurp(names[s]) == expect.str());
    }

    expect.str("");
    for (const TreePairPattern& p : sc.gold_patterns)
        expect << p.left_key << '\t' << p.right_key << '\n';
    CHECK(slurp("gold_patterns.tsv") == expect.str());

    fs::remove_all(dir);
}
