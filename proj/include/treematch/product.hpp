#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treematch/abstraction.hpp"
#include "treematch/treebank.hpp"

namespace treematch {

struct ProductVertex {
    int x_index = 0; // token index in the first tree
    int y_index = 0; // token index in the second tree
    VertexLabel label;
};

// Direct product of two dependency trees: one vertex per token pair, one
// directed edge per co-directed (head -> dependent) edge pair.
struct ProductGraph {
    int nx = 0, ny = 0;
    std::vector<ProductVertex> vertices;            // x-major: v = (x-1)*ny + (y-1)
    std::vector<std::pair<int, int>> edges;         // directed, vertex positions
    std::vector<std::vector<int>> neighbors;        // undirected adjacency for connectivity

    int vertex_at(int x_index, int y_index) const { return (x_index - 1) * ny + (y_index - 1); }
};

ProductGraph build_product(const DepTree& tx, const DepTree& ty, const Clustering* clustering);

// All vertex subsets of size <= max_vertices inducing a weakly connected
// subgraph, as bitmasks, each enumerated once, sorted ascending. Refuses
// graphs with more than `cap` vertices.
std::vector<std::uint64_t> enumerate_connected_subgraphs(const ProductGraph& pg, int max_vertices, int cap = 64);

// Minimal subtrees of the two sides whose product covers the given connected
// subgraph: the union of pairwise paths between the projected token sets.
// Returns sorted token indices per side. Throws DataError on disconnected
// input.
std::pair<std::vector<int>, std::vector<int>> factorize(const DepTree& tx, const DepTree& ty,
                                                        const ProductGraph& pg, std::uint64_t subgraph);

std::string to_dot(const ProductGraph& pg);

} // namespace treematch
