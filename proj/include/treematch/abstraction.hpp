#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "treematch/treebank.hpp"

namespace treematch {

struct EmbeddingTable {
    std::vector<std::string> words;             // lexicographically sorted, unique
    std::vector<std::vector<double>> vectors;   // aligned with words
    std::size_t dim = 0;

    std::size_t size() const { return words.size(); }
};

// "word v1 v2 ... vd", single-space separated, one word per line.
EmbeddingTable parse_embeddings(std::istream& in);

struct Clustering {
    std::unordered_map<std::string, std::uint32_t> assignment; // word -> cluster id in [0, k)
    std::uint32_t k = 0;
    std::vector<std::vector<double>> centroids;  // empty when loaded from file
    std::vector<double> objective_trace;         // SSE after each assignment pass

    std::optional<std::uint32_t> cluster_of(const std::string& word) const {
        auto it = assignment.find(word);
        if (it == assignment.end()) return std::nullopt;
        return it->second;
    }
};

// Lloyd iterations over the embedding table with seeded k-means++ style
// initialization. Assignment ties go to the lowest centroid id; clusters that
// empty out are re-seeded with the point farthest from its centroid. Stops
// when no assignment changes or after max_iters. Deterministic given seed.
Clustering kmeans_cluster(const EmbeddingTable& emb, std::uint32_t k, int max_iters, std::uint64_t seed);

// "word<TAB>cluster_id"
Clustering parse_clusters(std::istream& in);
void write_clusters(std::ostream& out, const Clustering& c);

// Cluster id for a token: an explicit clustering takes precedence, otherwise
// the token's own annotation.
std::optional<std::uint32_t> cluster_of(const Token& tok, const Clustering* clustering);

struct VertexLabel {
    enum class Kind { Concrete, SameEntity, SimWord };
    Kind kind = Kind::Concrete;
    std::string wx, wy;        // concrete payload
    std::uint32_t cluster = 0; // SimWord payload

    bool operator==(const VertexLabel& o) const {
        return kind == o.kind && wx == o.wx && wy == o.wy && cluster == o.cluster;
    }
    std::string to_string() const;
};

// Label priority: SameEntity when both tokens carry the same non-empty NE
// tag, then SimWord_k when both words share cluster k, else the concrete
// word pair.
VertexLabel abstract_vertex(const Token& x, const Token& y, const Clustering* clustering);

} // namespace treematch
