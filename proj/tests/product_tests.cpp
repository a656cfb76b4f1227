#include "doctest.h"

#include "treematch/product.hpp"
#include "treematch/util.hpp"

#include "support/oracle.hpp"

#include <algorithm>
#include <set>

using namespace treematch;

namespace {

DepTree chain(const std::string& id, const std::vector<std::string>& forms) {
    std::vector<Token> toks;
    for (std::size_t i = 0; i < forms.size(); ++i)
        toks.push_back(Token{static_cast<int>(i) + 1, forms[i], static_cast<int>(i), "", std::nullopt});
    return make_dep_tree(id, toks);
}

bool subgraph_connected(const ProductGraph& pg, std::uint64_t sub) {
    int start = -1;
    for (int v = 0; v < static_cast<int>(pg.vertices.size()); ++v)
        if (sub & (1ull << v)) { start = v; break; }
    if (start < 0) return false;
    std::uint64_t seen = 1ull << start;
    std::vector<int> stack{start};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : pg.neighbors[static_cast<std::size_t>(v)]) {
            std::uint64_t bit = 1ull << w;
            if ((sub & bit) && !(seen & bit)) {
                seen |= bit;
                stack.push_back(w);
            }
        }
    }
    return seen == sub;
}

bool tokens_connected(const DepTree& t, const std::vector<int>& image) {
    std::set<int> in(image.begin(), image.end());
    if (in.empty()) return false;
    std::set<int> seen{*in.begin()};
    std::vector<int> stack{*in.begin()};
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        std::vector<int> adj = t.children[static_cast<std::size_t>(cur - 1)];
        if (t.token(cur).head != 0) adj.push_back(t.token(cur).head);
        for (int nb : adj)
            if (in.count(nb) && !seen.count(nb)) {
                seen.insert(nb);
                stack.push_back(nb);
            }
    }
    return seen.size() == in.size();
}

} // namespace

TEST_CASE("product of single-token trees is one vertex with no edge") {
    DepTree x = chain("x", {"hello"});
    DepTree y = chain("y", {"hi"});
    ProductGraph pg = build_product(x, y, nullptr);
    CHECK(pg.vertices.size() == 1);
    CHECK(pg.edges.empty());
    CHECK(pg.vertices[0].label.kind == VertexLabel::Kind::Concrete);
    CHECK(pg.vertices[0].label.wx == "hello");
    CHECK(pg.vertices[0].label.wy == "hi");
}

TEST_CASE("product of two single-edge trees has four vertices and one edge") {
    DepTree x = chain("x", {"a", "b"});
    DepTree y = chain("y", {"c", "d"});
    ProductGraph pg = build_product(x, y, nullptr);
    CHECK(pg.vertices.size() == 4);
    REQUIRE(pg.edges.size() == 1);
    CHECK(pg.edges[0].first == pg.vertex_at(1, 1));   // (a,c)
    CHECK(pg.edges[0].second == pg.vertex_at(2, 2));  // (b,d)
}

TEST_CASE("three-node by two-node product has six vertices and two edges") {
    // Two x edges times one y edge.
    std::vector<Token> toks{Token{1, "a", 0, "", std::nullopt},
                            Token{2, "b", 1, "", std::nullopt},
                            Token{3, "c", 1, "", std::nullopt}};
    DepTree x = make_dep_tree("x", toks);
    DepTree y = chain("y", {"c", "d"});
    ProductGraph pg = build_product(x, y, nullptr);
    CHECK(pg.vertices.size() == 6);
    CHECK(pg.edges.size() == 2);
}

TEST_CASE("vertex and edge counts multiply on random tree pairs") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
        DepTree x = oracle::random_tree("x", 1 + static_cast<int>(bounded_uniform(rng, 7)), 6, rng);
        DepTree y = oracle::random_tree("y", 1 + static_cast<int>(bounded_uniform(rng, 7)), 6, rng);
        ProductGraph pg = build_product(x, y, nullptr);
        CHECK(pg.vertices.size() ==
              static_cast<std::size_t>(x.size()) * static_cast<std::size_t>(y.size()));
        CHECK(pg.edges.size() ==
              static_cast<std::size_t>(x.size() - 1) * static_cast<std::size_t>(y.size() - 1));
    }
}

TEST_CASE("product vertices pick up abstraction labels") {
    std::vector<Token> xt{Token{1, "win", 0, "", std::nullopt}, Token{2, "LiNa", 1, "li_na", std::nullopt}};
    std::vector<Token> yt{Token{1, "congratulations", 0, "", std::nullopt}, Token{2, "LiNa", 1, "li_na", std::nullopt}};
    ProductGraph pg = build_product(make_dep_tree("x", xt), make_dep_tree("y", yt), nullptr);
    CHECK(pg.vertices[static_cast<std::size_t>(pg.vertex_at(2, 2))].label.kind == VertexLabel::Kind::SameEntity);
    CHECK(pg.vertices[static_cast<std::size_t>(pg.vertex_at(1, 1))].label.kind == VertexLabel::Kind::Concrete);
}

TEST_CASE("connected-subgraph enumeration on the 2x2 product") {
    DepTree x = chain("x", {"a", "b"});
    DepTree y = chain("y", {"c", "d"});
    ProductGraph pg = build_product(x, y, nullptr);

    // Vertices: 0=(a,c) 1=(a,d) 2=(b,c) 3=(b,d); single edge 0 -> 3.
    auto subs = enumerate_connected_subgraphs(pg, 2);
    std::vector<std::uint64_t> expected{1, 2, 4, 8, 9};
    CHECK(subs == expected);

    auto singles = enumerate_connected_subgraphs(pg, 1);
    CHECK(singles == std::vector<std::uint64_t>{1, 2, 4, 8});

    CHECK(enumerate_connected_subgraphs(pg, 0).empty());
}

TEST_CASE("enumeration refuses graphs beyond the vertex cap") {
    DepTree x = chain("x", {"a", "b", "c"});
    DepTree y = chain("y", {"d", "e", "f"});
    ProductGraph pg = build_product(x, y, nullptr); // 9 vertices
    CHECK_THROWS_AS(enumerate_connected_subgraphs(pg, 2, 8), DataError);
    CHECK_NOTHROW(enumerate_connected_subgraphs(pg, 2, 9));

    std::mt19937_64 rng(2);
    DepTree big_x = oracle::random_tree("bx", 9, 20, rng);
    DepTree big_y = oracle::random_tree("by", 8, 20, rng);
    ProductGraph big = build_product(big_x, big_y, nullptr); // 72 > default cap 64
    CHECK_THROWS_AS(enumerate_connected_subgraphs(big, 1), DataError);
}

TEST_CASE("enumeration lists each connected subset exactly once") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        DepTree x = oracle::random_tree("x", 1 + static_cast<int>(bounded_uniform(rng, 4)), 5, rng);
        DepTree y = oracle::random_tree("y", 1 + static_cast<int>(bounded_uniform(rng, 4)), 5, rng);
        ProductGraph pg = build_product(x, y, nullptr);
        if (pg.vertices.size() > 16) continue;
        auto subs = enumerate_connected_subgraphs(pg, 3);

        // Brute force over all subsets of size <= 3.
        std::vector<std::uint64_t> brute;
        std::uint64_t full = (pg.vertices.size() == 64) ? ~0ull : ((1ull << pg.vertices.size()) - 1);
        for (std::uint64_t mask = 1; mask <= full; ++mask) {
            if (__builtin_popcountll(mask) > 3) continue;
            if (subgraph_connected(pg, mask)) brute.push_back(mask);
        }
        CHECK(subs == brute);
    }
}

TEST_CASE("factorize returns the two Steiner subtrees") {
    DepTree x = chain("x", {"a", "b", "c"});
    DepTree y = chain("y", {"d", "e", "f"});
    ProductGraph pg = build_product(x, y, nullptr);

    // Singleton (2,2).
    auto single = factorize(x, y, pg, 1ull << pg.vertex_at(2, 2));
    CHECK(single.first == std::vector<int>{2});
    CHECK(single.second == std::vector<int>{2});

    // The pair {(1,1),(2,2)} projects to {1,2} on each side.
    std::uint64_t pair_mask = (1ull << pg.vertex_at(1, 1)) | (1ull << pg.vertex_at(2, 2));
    auto pair = factorize(x, y, pg, pair_mask);
    CHECK(pair.first == std::vector<int>{1, 2});
    CHECK(pair.second == std::vector<int>{1, 2});

    // {(1,1),(3,3)} is connected through (2,2); both sides must pull in the
    // middle token to stay a subtree.
    std::uint64_t far_mask = (1ull << pg.vertex_at(1, 1)) | (1ull << pg.vertex_at(2, 2)) |
                             (1ull << pg.vertex_at(3, 3));
    auto far = factorize(x, y, pg, far_mask);
    CHECK(far.first == std::vector<int>{1, 2, 3});
    CHECK(far.second == std::vector<int>{1, 2, 3});

    CHECK_THROWS_AS(factorize(x, y, pg, 0), DataError);
    std::uint64_t disconnected = (1ull << pg.vertex_at(1, 1)) | (1ull << pg.vertex_at(3, 3));
    CHECK_THROWS_AS(factorize(x, y, pg, disconnected), DataError);
}

TEST_CASE("every connected product subgraph factors into covering subtrees") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        DepTree x = oracle::random_tree("x", 1 + static_cast<int>(bounded_uniform(rng, 6)), 8, rng);
        DepTree y = oracle::random_tree("y", 1 + static_cast<int>(bounded_uniform(rng, 6)), 8, rng);
        ProductGraph pg = build_product(x, y, nullptr);
        if (pg.vertices.size() > 36) continue;
        for (std::uint64_t sub : enumerate_connected_subgraphs(pg, 3)) {
            auto [xs, ys] = factorize(x, y, pg, sub);
            CHECK(tokens_connected(x, xs));
            CHECK(tokens_connected(y, ys));
            CHECK(std::is_sorted(xs.begin(), xs.end()));
            CHECK(std::is_sorted(ys.begin(), ys.end()));
            // The factor pair covers every vertex of the subgraph.
            for (int v = 0; v < static_cast<int>(pg.vertices.size()); ++v) {
                if (!(sub & (1ull << v))) continue;
                const ProductVertex& pv = pg.vertices[static_cast<std::size_t>(v)];
                CHECK(std::binary_search(xs.begin(), xs.end(), pv.x_index));
                CHECK(std::binary_search(ys.begin(), ys.end(), pv.y_index));
            }
        }
    }
}

TEST_CASE("dot export names all vertices and edges") {
    DepTree x = chain("x", {"a", "b"});
    DepTree y = chain("y", {"c", "d"});
    std::string dot = to_dot(build_product(x, y, nullptr));
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("(a,c)") != std::string::npos);
    CHECK(dot.find("v0 -> v3") != std::string::npos);
}
