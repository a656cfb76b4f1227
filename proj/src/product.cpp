#include "treematch/product.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace treematch {

ProductGraph build_product(const DepTree& tx, const DepTree& ty, const Clustering* clustering) {
    ProductGraph pg;
    pg.nx = tx.size();
    pg.ny = ty.size();
    pg.vertices.reserve(static_cast<std::size_t>(pg.nx) * static_cast<std::size_t>(pg.ny));
    for (int xi = 1; xi <= pg.nx; ++xi)
        for (int yi = 1; yi <= pg.ny; ++yi)
            pg.vertices.push_back({xi, yi, abstract_vertex(tx.token(xi), ty.token(yi), clustering)});

    pg.neighbors.assign(pg.vertices.size(), {});
    for (int xi = 1; xi <= pg.nx; ++xi) {
        for (int xc : tx.children[static_cast<std::size_t>(xi - 1)]) {
            for (int yi = 1; yi <= pg.ny; ++yi) {
                for (int yc : ty.children[static_cast<std::size_t>(yi - 1)]) {
                    int from = pg.vertex_at(xi, yi);
                    int to = pg.vertex_at(xc, yc);
                    pg.edges.emplace_back(from, to);
                    pg.neighbors[static_cast<std::size_t>(from)].push_back(to);
                    pg.neighbors[static_cast<std::size_t>(to)].push_back(from);
                }
            }
        }
    }
    for (auto& adj : pg.neighbors) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    return pg;
}

namespace {

// Exclusive-neighborhood extension: each connected subset is produced exactly
// once by only ever adding neighbors with id greater than the root vertex
// that are not adjacent to (or member of) the current subset already.
void extend_subgraph(const ProductGraph& pg, int root, std::uint64_t sub, std::uint64_t banned,
                     std::vector<int>& frontier, int max_vertices, std::vector<std::uint64_t>& out) {
    out.push_back(sub);
    if (__builtin_popcountll(sub) >= max_vertices) return;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
        int v = frontier[i];
        std::uint64_t next = sub | (1ull << v);
        std::uint64_t next_banned = banned;
        std::vector<int> next_frontier;
        for (std::size_t j = i + 1; j < frontier.size(); ++j) next_frontier.push_back(frontier[j]);
        for (int w : pg.neighbors[static_cast<std::size_t>(v)]) {
            if (w <= root) continue;
            std::uint64_t bit = 1ull << w;
            if ((next_banned & bit) || (next & bit)) continue;
            next_banned |= bit;
            next_frontier.push_back(w);
        }
        extend_subgraph(pg, root, next, next_banned, next_frontier, max_vertices, out);
        banned |= (1ull << v);
    }
}

} // namespace

std::vector<std::uint64_t> enumerate_connected_subgraphs(const ProductGraph& pg, int max_vertices, int cap) {
    const int n = static_cast<int>(pg.vertices.size());
    if (cap > 64) cap = 64;
    if (n > cap)
        throw DataError("enumerate_connected_subgraphs: graph has " + std::to_string(n) +
                        " vertices, cap is " + std::to_string(cap));
    if (max_vertices < 1) return {};
    std::vector<std::uint64_t> out;
    for (int root = 0; root < n; ++root) {
        std::uint64_t sub = 1ull << root;
        std::uint64_t banned = sub;
        std::vector<int> frontier;
        for (int w : pg.neighbors[static_cast<std::size_t>(root)]) {
            if (w <= root) continue;
            std::uint64_t bit = 1ull << w;
            if (banned & bit) continue;
            banned |= bit;
            frontier.push_back(w);
        }
        extend_subgraph(pg, root, sub, banned, frontier, max_vertices, out);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

bool weakly_connected(const ProductGraph& pg, std::uint64_t sub) {
    if (sub == 0) return false;
    int start = __builtin_ctzll(sub);
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

// Union of pairwise paths between the members of `nodes` in the tree.
std::vector<int> steiner_subtree(const DepTree& t, const std::set<int>& nodes) {
    std::vector<int> depth(static_cast<std::size_t>(t.size()) + 1, 0);
    std::vector<int> order;
    order.push_back(t.root);
    for (std::size_t i = 0; i < order.size(); ++i) {
        int cur = order[i];
        for (int c : t.children[static_cast<std::size_t>(cur - 1)]) {
            depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(cur)] + 1;
            order.push_back(c);
        }
    }
    std::set<int> result(nodes);
    for (int a : nodes) {
        for (int b : nodes) {
            if (a >= b) continue;
            int u = a, v = b;
            while (u != v) {
                if (depth[static_cast<std::size_t>(u)] >= depth[static_cast<std::size_t>(v)]) {
                    result.insert(u);
                    u = t.token(u).head;
                } else {
                    result.insert(v);
                    v = t.token(v).head;
                }
            }
            result.insert(u);
        }
    }
    return {result.begin(), result.end()};
}

} // namespace

std::pair<std::vector<int>, std::vector<int>> factorize(const DepTree& tx, const DepTree& ty,
                                                        const ProductGraph& pg, std::uint64_t subgraph) {
    if (subgraph == 0) throw DataError("factorize: empty subgraph");
    if (!weakly_connected(pg, subgraph)) throw DataError("factorize: subgraph is not connected");
    std::set<int> xs, ys;
    for (int v = 0; v < static_cast<int>(pg.vertices.size()); ++v) {
        if (!(subgraph & (1ull << v))) continue;
        xs.insert(pg.vertices[static_cast<std::size_t>(v)].x_index);
        ys.insert(pg.vertices[static_cast<std::size_t>(v)].y_index);
    }
    return {steiner_subtree(tx, xs), steiner_subtree(ty, ys)};
}

std::string to_dot(const ProductGraph& pg) {
    std::ostringstream os;
    os << "digraph product {\n";
    for (std::size_t v = 0; v < pg.vertices.size(); ++v) {
        const ProductVertex& pv = pg.vertices[v];
        os << "  v" << v << " [label=\"(" << pv.x_index << "," << pv.y_index << ") "
           << pv.label.to_string() << "\"];\n";
    }
    for (const auto& [a, b] : pg.edges) os << "  v" << a << " -> v" << b << ";\n";
    os << "}\n";
    return os.str();
}

} // namespace treematch
