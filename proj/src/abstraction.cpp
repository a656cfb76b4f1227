#include "treematch/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "treematch/util.hpp"

namespace treematch {

EmbeddingTable parse_embeddings(std::istream& in) {
    std::map<std::string, std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split_spaces(line);
        if (cols.size() < 2)
            throw DataError("embeddings line " + std::to_string(line_no) + ": expected word and at least one value");
        std::vector<double> vec;
        vec.reserve(cols.size() - 1);
        for (std::size_t i = 1; i < cols.size(); ++i) {
            try {
                vec.push_back(std::stod(cols[i]));
            } catch (const std::exception&) {
                throw DataError("embeddings line " + std::to_string(line_no) + ": bad value '" + cols[i] + "'");
            }
        }
        if (dim == 0) dim = vec.size();
        else if (vec.size() != dim)
            throw DataError("embeddings line " + std::to_string(line_no) + ": dimension " +
                            std::to_string(vec.size()) + " differs from " + std::to_string(dim));
        if (!rows.emplace(cols[0], std::move(vec)).second)
            throw DataError("embeddings line " + std::to_string(line_no) + ": duplicate word '" + cols[0] + "'");
    }
    EmbeddingTable t;
    t.dim = dim;
    for (auto& [w, v] : rows) {
        t.words.push_back(w);
        t.vectors.push_back(std::move(v));
    }
    return t;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

Clustering kmeans_cluster(const EmbeddingTable& emb, std::uint32_t k, int max_iters, std::uint64_t seed) {
    const std::size_t n = emb.size();
    if (n == 0) throw DataError("kmeans: empty embedding table");
    if (k < 1) throw DataError("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > n)
        throw DataError("kmeans: k=" + std::to_string(k) + " exceeds vocabulary size " + std::to_string(n));
    if (max_iters < 1) throw DataError("kmeans: max_iters must be >= 1");

    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    centroids.push_back(emb.vectors[static_cast<std::size_t>(bounded_uniform(rng, n))]);
    std::vector<double> dmin(n);
    for (std::size_t i = 0; i < n; ++i) dmin[i] = sq_dist(emb.vectors[i], centroids[0]);
    while (centroids.size() < k) {
        double total = 0.0;
        for (double d : dmin) total += d;
        std::size_t pick = 0;
        if (total > 0.0) {
            double u = unit_uniform(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += dmin[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All remaining points coincide with a centroid; k <= n still
            // needs distinct slots, so walk to an unused point.
            pick = static_cast<std::size_t>(bounded_uniform(rng, n));
        }
        centroids.push_back(emb.vectors[pick]);
        for (std::size_t i = 0; i < n; ++i)
            dmin[i] = std::min(dmin[i], sq_dist(emb.vectors[i], centroids.back()));
    }

    std::vector<std::uint32_t> assign(n, 0);
    Clustering result;
    result.k = k;
    for (int iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t best_c = 0;
            for (std::uint32_t c = 0; c < k; ++c) {
                double d = sq_dist(emb.vectors[i], centroids[c]);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            if (assign[i] != best_c) {
                assign[i] = best_c;
                changed = true;
            }
            sse += best;
        }
        result.objective_trace.push_back(sse);
        if (!changed && iter > 0) break;

        std::vector<std::vector<double>> sums(k, std::vector<double>(emb.dim, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t d = 0; d < emb.dim; ++d) sums[assign[i]][d] += emb.vectors[i][d];
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t d = 0; d < emb.dim; ++d)
                centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            if (counts[c] != 0) continue;
            // Re-seed an empty cluster with the point farthest from its
            // current centroid; ties go to the lowest point index.
            double far_d = -1.0;
            std::size_t far_i = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = sq_dist(emb.vectors[i], centroids[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far_i = i;
                }
            }
            centroids[c] = emb.vectors[far_i];
        }
    }

    for (std::size_t i = 0; i < n; ++i) result.assignment[emb.words[i]] = assign[i];
    result.centroids = std::move(centroids);
    return result;
}

Clustering parse_clusters(std::istream& in) {
    Clustering c;
    std::string line;
    int line_no = 0;
    std::uint32_t max_id = 0;
    bool any = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 2)
            throw DataError("clusters line " + std::to_string(line_no) + ": expected 2 columns");
        std::uint32_t id = 0;
        try {
            unsigned long v = std::stoul(cols[1]);
            id = static_cast<std::uint32_t>(v);
        } catch (const std::exception&) {
            throw DataError("clusters line " + std::to_string(line_no) + ": bad cluster id '" + cols[1] + "'");
        }
        if (!c.assignment.emplace(cols[0], id).second)
            throw DataError("clusters line " + std::to_string(line_no) + ": duplicate word '" + cols[0] + "'");
        max_id = std::max(max_id, id);
        any = true;
    }
    c.k = any ? max_id + 1 : 0;
    return c;
}

void write_clusters(std::ostream& out, const Clustering& c) {
    std::map<std::string, std::uint32_t> sorted(c.assignment.begin(), c.assignment.end());
    for (const auto& [w, id] : sorted) out << w << '\t' << id << "\n";
}

std::optional<std::uint32_t> cluster_of(const Token& tok, const Clustering* clustering) {
    if (clustering) return clustering->cluster_of(tok.form);
    return tok.cluster;
}

std::string VertexLabel::to_string() const {
    switch (kind) {
        case Kind::SameEntity: return "SameEntity";
        case Kind::SimWord: return "SimWord_" + std::to_string(cluster);
        case Kind::Concrete: break;
    }
    return "(" + wx + "," + wy + ")";
}

VertexLabel abstract_vertex(const Token& x, const Token& y, const Clustering* clustering) {
    VertexLabel l;
    if (!x.ne_tag.empty() && x.ne_tag == y.ne_tag) {
        l.kind = VertexLabel::Kind::SameEntity;
        return l;
    }
    auto cx = cluster_of(x, clustering);
    auto cy = cluster_of(y, clustering);
    if (cx && cy && *cx == *cy) {
        l.kind = VertexLabel::Kind::SimWord;
        l.cluster = *cx;
        return l;
    }
    l.kind = VertexLabel::Kind::Concrete;
    l.wx = x.form;
    l.wy = y.form;
    return l;
}

} // namespace treematch
