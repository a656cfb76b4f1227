#include "treematch/net.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "treematch/util.hpp"

namespace treematch {

void Architecture::validate() const {
    if (h1 < 1 || h2 < 1 || h3 < 1) throw ConfigError("architecture: hidden sizes must be >= 1");
    if (density < 1 || density > h1)
        throw ConfigError("architecture: density must lie in [1, h1]");
    if (connect.size() != input_dim)
        throw ConfigError("architecture: connectivity list count != input_dim");
    for (const auto& units : connect) {
        if (units.size() != density)
            throw ConfigError("architecture: an input does not have exactly density targets");
        for (std::size_t k = 0; k < units.size(); ++k) {
            if (units[k] >= h1) throw ConfigError("architecture: unit id out of range");
            if (k && units[k] <= units[k - 1])
                throw ConfigError("architecture: connectivity lists must be sorted and distinct");
        }
    }
}

std::vector<std::uint32_t> Architecture::unit_degrees() const {
    std::vector<std::uint32_t> deg(h1, 0);
    for (const auto& units : connect)
        for (std::uint32_t u : units) ++deg[u];
    return deg;
}

Architecture learn_architecture(const PatternTable& table, std::uint32_t h1, std::uint32_t density,
                                std::uint64_t seed) {
    if (density < 1) throw ConfigError("learn_architecture: density must be >= 1");
    if (density > h1) throw ConfigError("learn_architecture: density exceeds h1");
    std::uint32_t v = table.dimension();

    Architecture arch;
    arch.input_dim = v;
    arch.h1 = h1;
    arch.density = density;
    arch.connect.assign(v, {});

    std::vector<std::uint32_t> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(splitmix64(seed));
    seeded_shuffle(order, rng);
    auto freq = [&table](std::uint32_t i) {
        return static_cast<std::uint64_t>(table.rows[i].support_pos) + table.rows[i].support_neg;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return freq(a) > freq(b); });

    std::vector<std::uint64_t> load(h1, 0);
    std::vector<std::uint32_t> buf(h1);
    for (std::uint32_t i : order) {
        std::iota(buf.begin(), buf.end(), 0);
        std::partial_sort(buf.begin(), buf.begin() + density, buf.end(),
                          [&load](std::uint32_t a, std::uint32_t b) {
                              if (load[a] != load[b]) return load[a] < load[b];
                              return a < b;
                          });
        auto& units = arch.connect[i];
        units.assign(buf.begin(), buf.begin() + density);
        std::sort(units.begin(), units.end());
        for (std::uint32_t u : units) load[u] += freq(i);
    }
    arch.validate();
    return arch;
}

void write_architecture(std::ostream& out, const Architecture& arch) {
    nlohmann::json j;
    j["format"] = 1;
    j["input_dim"] = arch.input_dim;
    j["h1"] = arch.h1;
    j["h2"] = arch.h2;
    j["h3"] = arch.h3;
    j["density"] = arch.density;
    j["connect"] = arch.connect;
    out << j.dump() << "\n";
}

Architecture read_architecture(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("architecture file: ") + e.what());
    }
    try {
        if (j.at("format").get<int>() != 1) throw DataError("architecture file: unknown format");
        Architecture arch;
        arch.input_dim = j.at("input_dim").get<std::uint32_t>();
        arch.h1 = j.at("h1").get<std::uint32_t>();
        arch.h2 = j.at("h2").get<std::uint32_t>();
        arch.h3 = j.at("h3").get<std::uint32_t>();
        arch.density = j.at("density").get<std::uint32_t>();
        arch.connect = j.at("connect").get<std::vector<std::vector<std::uint32_t>>>();
        arch.validate();
        return arch;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("architecture file: ") + e.what());
    } catch (const ConfigError& e) {
        // A malformed layout inside a file is bad data, not bad usage.
        throw DataError(std::string("architecture file: ") + e.what());
    }
}

namespace {

double glorot(std::mt19937_64& rng, double fan_in, double fan_out) {
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    return (2.0 * unit_uniform(rng) - 1.0) * limit;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    std::mt19937_64 rng(splitmix64(seed));
    ModelParams p;
    std::vector<std::uint32_t> deg = arch.unit_degrees();
    p.w1.resize(static_cast<std::size_t>(arch.input_dim) * arch.density);
    for (std::uint32_t i = 0; i < arch.input_dim; ++i)
        for (std::uint32_t k = 0; k < arch.density; ++k) {
            std::uint32_t u = arch.connect[i][k];
            p.w1[static_cast<std::size_t>(i) * arch.density + k] = glorot(rng, deg[u], arch.h2);
        }
    p.b1.assign(arch.h1, 0.0);
    p.w2.resize(static_cast<std::size_t>(arch.h2) * arch.h1);
    for (double& w : p.w2) w = glorot(rng, arch.h1, arch.h2);
    p.b2.assign(arch.h2, 0.0);
    p.w3.resize(static_cast<std::size_t>(arch.h3) * arch.h2);
    for (double& w : p.w3) w = glorot(rng, arch.h2, arch.h3);
    p.b3.assign(arch.h3, 0.0);
    p.w4.resize(arch.h3);
    for (double& w : p.w4) w = glorot(rng, arch.h3, 1.0);
    p.b4 = 0.0;
    return p;
}

DropoutMasks draw_masks(const Architecture& arch, double rate, std::mt19937_64& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
    DropoutMasks m;
    double keep_scale = 1.0 / (1.0 - rate);
    auto fill = [&](std::vector<double>& v, std::uint32_t n) {
        v.resize(n);
        for (std::uint32_t i = 0; i < n; ++i)
            v[i] = unit_uniform(rng) >= rate ? keep_scale : 0.0;
    };
    fill(m.m1, arch.h1);
    fill(m.m2, arch.h2);
    fill(m.m3, arch.h3);
    return m;
}

namespace {

// Accumulation runs in ascending index order everywhere so the sparse path
// and a dense reference produce bit-identical sums.
void forward_into(const ModelParams& p, const Architecture& arch, const SparseFeatureVector& x,
                  const DropoutMasks* masks, Activations& a) {
    if (x.dimension != arch.input_dim)
        throw ConfigError("forward: feature dimension does not match architecture");
    a.a1 = p.b1;
    for (std::uint32_t i : x.active)
        for (std::uint32_t k = 0; k < arch.density; ++k)
            a.a1[arch.connect[i][k]] += p.w1[static_cast<std::size_t>(i) * arch.density + k];
    a.s1.resize(arch.h1);
    for (std::uint32_t u = 0; u < arch.h1; ++u) {
        a.s1[u] = sigmoid(a.a1[u]);
        if (masks) a.s1[u] *= masks->m1[u];
    }
    a.a2 = p.b2;
    for (std::uint32_t j = 0; j < arch.h2; ++j)
        for (std::uint32_t u = 0; u < arch.h1; ++u)
            a.a2[j] += p.w2[static_cast<std::size_t>(j) * arch.h1 + u] * a.s1[u];
    a.s2.resize(arch.h2);
    for (std::uint32_t j = 0; j < arch.h2; ++j) {
        a.s2[j] = sigmoid(a.a2[j]);
        if (masks) a.s2[j] *= masks->m2[j];
    }
    a.a3 = p.b3;
    for (std::uint32_t t = 0; t < arch.h3; ++t)
        for (std::uint32_t j = 0; j < arch.h2; ++j)
            a.a3[t] += p.w3[static_cast<std::size_t>(t) * arch.h2 + j] * a.s2[j];
    a.s3.resize(arch.h3);
    for (std::uint32_t t = 0; t < arch.h3; ++t) {
        a.s3[t] = sigmoid(a.a3[t]);
        if (masks) a.s3[t] *= masks->m3[t];
    }
    a.score = p.b4;
    for (std::uint32_t t = 0; t < arch.h3; ++t) a.score += p.w4[t] * a.s3[t];
}

void backward_into(const ModelParams& p, const Architecture& arch, const SparseFeatureVector& x,
                   const Activations& a, const DropoutMasks* masks, double gscore, GradAccum& acc) {
    std::vector<double> ga3(arch.h3);
    for (std::uint32_t t = 0; t < arch.h3; ++t) {
        acc.gw4[t] += gscore * a.s3[t];
        double s = sigmoid(a.a3[t]);
        double dh = s * (1.0 - s);
        if (masks) dh *= masks->m3[t];
        ga3[t] = gscore * p.w4[t] * dh;
    }
    acc.gb4 += gscore;

    std::vector<double> gs2(arch.h2, 0.0);
    for (std::uint32_t t = 0; t < arch.h3; ++t) {
        acc.gb3[t] += ga3[t];
        for (std::uint32_t j = 0; j < arch.h2; ++j) {
            acc.gw3[static_cast<std::size_t>(t) * arch.h2 + j] += ga3[t] * a.s2[j];
            gs2[j] += p.w3[static_cast<std::size_t>(t) * arch.h2 + j] * ga3[t];
        }
    }

    std::vector<double> ga2(arch.h2);
    for (std::uint32_t j = 0; j < arch.h2; ++j) {
        double s = sigmoid(a.a2[j]);
        double dh = s * (1.0 - s);
        if (masks) dh *= masks->m2[j];
        ga2[j] = gs2[j] * dh;
    }

    std::vector<double> gs1(arch.h1, 0.0);
    for (std::uint32_t j = 0; j < arch.h2; ++j) {
        acc.gb2[j] += ga2[j];
        for (std::uint32_t u = 0; u < arch.h1; ++u) {
            acc.gw2[static_cast<std::size_t>(j) * arch.h1 + u] += ga2[j] * a.s1[u];
            gs1[u] += p.w2[static_cast<std::size_t>(j) * arch.h1 + u] * ga2[j];
        }
    }

    std::vector<double> ga1(arch.h1);
    for (std::uint32_t u = 0; u < arch.h1; ++u) {
        double s = sigmoid(a.a1[u]);
        double dh = s * (1.0 - s);
        if (masks) dh *= masks->m1[u];
        ga1[u] = gs1[u] * dh;
        acc.gb1[u] += ga1[u];
    }

    for (std::uint32_t i : x.active) {
        auto [it, inserted] = acc.gw1.try_emplace(i, std::vector<double>(arch.density, 0.0));
        for (std::uint32_t k = 0; k < arch.density; ++k)
            it->second[k] += ga1[arch.connect[i][k]];
    }
}

} // namespace

double forward(const ModelParams& p, const Architecture& arch, const SparseFeatureVector& x,
               const DropoutMasks* masks, Activations* acts) {
    Activations local;
    Activations& a = acts ? *acts : local;
    forward_into(p, arch, x, masks, a);
    return a.score;
}

GradAccum make_accum(const Architecture& arch) {
    GradAccum acc;
    acc.gb1.assign(arch.h1, 0.0);
    acc.gw2.assign(static_cast<std::size_t>(arch.h2) * arch.h1, 0.0);
    acc.gb2.assign(arch.h2, 0.0);
    acc.gw3.assign(static_cast<std::size_t>(arch.h3) * arch.h2, 0.0);
    acc.gb3.assign(arch.h3, 0.0);
    acc.gw4.assign(arch.h3, 0.0);
    return acc;
}

double backward_pair(const ModelParams& p, const Architecture& arch, const SparseFeatureVector& pos,
                     const SparseFeatureVector& neg, double margin, const DropoutMasks* pos_masks,
                     const DropoutMasks* neg_masks, GradAccum& acc) {
    Activations ap, an;
    forward_into(p, arch, pos, pos_masks, ap);
    forward_into(p, arch, neg, neg_masks, an);
    acc.pairs += 1;
    double loss = margin + an.score - ap.score;
    if (loss <= 0.0) return 0.0;
    acc.loss += loss;
    backward_into(p, arch, pos, ap, pos_masks, -1.0, acc);
    backward_into(p, arch, neg, an, neg_masks, 1.0, acc);
    return loss;
}

namespace {

// w -= lr * (g / n) + lr * l2 * w for weights; biases skip the L2 term.
void apply_batch(ModelParams& p, const Architecture& arch, const GradAccum& acc, double lr,
                 double l2, std::size_t n) {
    if (n == 0) return;
    double scale = lr / static_cast<double>(n);
    for (const auto& [i, row] : acc.gw1)
        for (std::uint32_t k = 0; k < arch.density; ++k) {
            double& w = p.w1[static_cast<std::size_t>(i) * arch.density + k];
            w -= scale * row[k] + lr * l2 * w;
        }
    for (std::uint32_t u = 0; u < arch.h1; ++u) p.b1[u] -= scale * acc.gb1[u];
    for (std::size_t i = 0; i < p.w2.size(); ++i) p.w2[i] -= scale * acc.gw2[i] + lr * l2 * p.w2[i];
    for (std::uint32_t j = 0; j < arch.h2; ++j) p.b2[j] -= scale * acc.gb2[j];
    for (std::size_t i = 0; i < p.w3.size(); ++i) p.w3[i] -= scale * acc.gw3[i] + lr * l2 * p.w3[i];
    for (std::uint32_t t = 0; t < arch.h3; ++t) p.b3[t] -= scale * acc.gb3[t];
    for (std::uint32_t t = 0; t < arch.h3; ++t) p.w4[t] -= scale * acc.gw4[t] + lr * l2 * p.w4[t];
    p.b4 -= scale * acc.gb4;
}

double triple_p1_deep(const ModelParams& p, const Architecture& arch,
                      const std::vector<TrainTriple>& triples) {
    std::size_t wins = 0;
    for (const TrainTriple& t : triples)
        if (forward(p, arch, t.pos, nullptr, nullptr) > forward(p, arch, t.neg, nullptr, nullptr))
            ++wins;
    return static_cast<double>(wins) / static_cast<double>(triples.size());
}

void check_train_inputs(const std::vector<TrainTriple>& triples,
                        const std::vector<TrainTriple>& validation, const TrainConfig& cfg) {
    if (triples.empty()) throw ConfigError("train: empty training set");
    if (validation.empty()) throw ConfigError("train: empty validation set");
    if (cfg.margin <= 0.0) throw ConfigError("train: margin must be positive");
    if (cfg.batch < 1) throw ConfigError("train: batch size must be >= 1");
    if (cfg.max_epochs < 1) throw ConfigError("train: max_epochs must be >= 1");
    if (cfg.patience < 1) throw ConfigError("train: patience must be >= 1");
}

} // namespace

TrainResult train(const std::vector<TrainTriple>& triples, const Architecture& arch,
                  const TrainConfig& cfg, const std::vector<TrainTriple>& validation) {
    check_train_inputs(triples, validation, cfg);
    arch.validate();

    TrainResult res;
    res.params = init_params(arch, stage_seed(cfg.seed, "init"));
    std::mt19937_64 drop_rng(stage_seed(cfg.seed, "dropout"));
    std::uint64_t shuffle_base = stage_seed(cfg.seed, "shuffle");

    ModelParams best = res.params;
    double best_p = -1.0;
    int patience_left = cfg.patience;

    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        res.epochs_run = epoch;
        std::mt19937_64 srng(splitmix64(shuffle_base ^ static_cast<std::uint64_t>(epoch)));
        seeded_shuffle(order, srng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            GradAccum acc = make_accum(arch);
            for (std::size_t idx = start; idx < end; ++idx) {
                const TrainTriple& t = triples[order[idx]];
                if (cfg.dropout > 0.0) {
                    DropoutMasks pm = draw_masks(arch, cfg.dropout, drop_rng);
                    DropoutMasks nm = draw_masks(arch, cfg.dropout, drop_rng);
                    backward_pair(res.params, arch, t.pos, t.neg, cfg.margin, &pm, &nm, acc);
                } else {
                    backward_pair(res.params, arch, t.pos, t.neg, cfg.margin, nullptr, nullptr, acc);
                }
            }
            apply_batch(res.params, arch, acc, cfg.lr, cfg.l2, acc.pairs);
        }
        double p = triple_p1_deep(res.params, arch, validation);
        if (p > best_p) {
            best_p = p;
            best = res.params;
            patience_left = cfg.patience;
        } else if (--patience_left == 0) {
            break;
        }
    }
    res.params = std::move(best);
    res.best_valid_p1 = best_p;
    return res;
}

double linear_score(const LinearParams& p, const SparseFeatureVector& x) {
    if (x.dimension != p.w.size()) throw ConfigError("linear_score: dimension mismatch");
    double s = p.b;
    for (std::uint32_t i : x.active) s += p.w[i];
    return s;
}

LinearTrainResult train_linear(const std::vector<TrainTriple>& triples, std::uint32_t input_dim,
                               const TrainConfig& cfg, const std::vector<TrainTriple>& validation) {
    check_train_inputs(triples, validation, cfg);

    LinearTrainResult res;
    res.params.w.assign(input_dim, 0.0);
    res.params.b = 0.0;
    std::uint64_t shuffle_base = stage_seed(cfg.seed, "shuffle");

    LinearParams best = res.params;
    double best_p = -1.0;
    int patience_left = cfg.patience;

    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        res.epochs_run = epoch;
        std::mt19937_64 srng(splitmix64(shuffle_base ^ static_cast<std::uint64_t>(epoch)));
        seeded_shuffle(order, srng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
            std::map<std::uint32_t, double> gw;
            std::size_t n = 0;
            // The bias gradient cancels between the two passes of a triple,
            // so only weights move.
            for (std::size_t idx = start; idx < end; ++idx) {
                const TrainTriple& t = triples[order[idx]];
                ++n;
                double loss = cfg.margin + linear_score(res.params, t.neg) - linear_score(res.params, t.pos);
                if (loss <= 0.0) continue;
                for (std::uint32_t i : t.pos.active) gw[i] -= 1.0;
                for (std::uint32_t i : t.neg.active) gw[i] += 1.0;
            }
            double scale = cfg.lr / static_cast<double>(n);
            for (const auto& [i, g] : gw) {
                double& w = res.params.w[i];
                w -= scale * g + cfg.lr * cfg.l2 * w;
            }
        }
        std::size_t wins = 0;
        for (const TrainTriple& t : validation)
            if (linear_score(res.params, t.pos) > linear_score(res.params, t.neg)) ++wins;
        double p = static_cast<double>(wins) / static_cast<double>(validation.size());
        if (p > best_p) {
            best_p = p;
            best = res.params;
            patience_left = cfg.patience;
        } else if (--patience_left == 0) {
            break;
        }
    }
    res.params = std::move(best);
    res.best_valid_p1 = best_p;
    return res;
}

double Model::score(const SparseFeatureVector& x) const {
    if (kind == "deep") return forward(params, arch, x, nullptr, nullptr);
    if (kind == "linear") return linear_score(linear, x);
    throw ConfigError("model: unknown kind '" + kind + "'");
}

void write_model(std::ostream& out, const Model& m) {
    nlohmann::json j;
    j["format"] = 1;
    j["kind"] = m.kind;
    if (m.kind == "deep") {
        j["arch"] = {{"input_dim", m.arch.input_dim}, {"h1", m.arch.h1},      {"h2", m.arch.h2},
                     {"h3", m.arch.h3},               {"density", m.arch.density},
                     {"connect", m.arch.connect}};
        j["params"] = {{"w1", m.params.w1}, {"b1", m.params.b1}, {"w2", m.params.w2},
                       {"b2", m.params.b2}, {"w3", m.params.w3}, {"b3", m.params.b3},
                       {"w4", m.params.w4}, {"b4", m.params.b4}};
    } else if (m.kind == "linear") {
        j["input_dim"] = m.linear_dim;
        j["w"] = m.linear.w;
        j["b"] = m.linear.b;
    } else {
        throw ConfigError("write_model: unknown kind '" + m.kind + "'");
    }
    out << j.dump() << "\n";
}

Model read_model(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    try {
        if (j.at("format").get<int>() != 1) throw DataError("model file: unknown format");
        Model m;
        m.kind = j.at("kind").get<std::string>();
        if (m.kind == "deep") {
            const auto& ja = j.at("arch");
            m.arch.input_dim = ja.at("input_dim").get<std::uint32_t>();
            m.arch.h1 = ja.at("h1").get<std::uint32_t>();
            m.arch.h2 = ja.at("h2").get<std::uint32_t>();
            m.arch.h3 = ja.at("h3").get<std::uint32_t>();
            m.arch.density = ja.at("density").get<std::uint32_t>();
            m.arch.connect = ja.at("connect").get<std::vector<std::vector<std::uint32_t>>>();
            m.arch.validate();
            const auto& jp = j.at("params");
            m.params.w1 = jp.at("w1").get<std::vector<double>>();
            m.params.b1 = jp.at("b1").get<std::vector<double>>();
            m.params.w2 = jp.at("w2").get<std::vector<double>>();
            m.params.b2 = jp.at("b2").get<std::vector<double>>();
            m.params.w3 = jp.at("w3").get<std::vector<double>>();
            m.params.b3 = jp.at("b3").get<std::vector<double>>();
            m.params.w4 = jp.at("w4").get<std::vector<double>>();
            m.params.b4 = jp.at("b4").get<double>();
            if (m.params.w1.size() != static_cast<std::size_t>(m.arch.input_dim) * m.arch.density ||
                m.params.b1.size() != m.arch.h1 ||
                m.params.w2.size() != static_cast<std::size_t>(m.arch.h2) * m.arch.h1 ||
                m.params.b2.size() != m.arch.h2 ||
                m.params.w3.size() != static_cast<std::size_t>(m.arch.h3) * m.arch.h2 ||
                m.params.b3.size() != m.arch.h3 || m.params.w4.size() != m.arch.h3)
                throw DataError("model file: parameter shapes do not match architecture");
        } else if (m.kind == "linear") {
            m.linear_dim = j.at("input_dim").get<std::uint32_t>();
            m.linear.w = j.at("w").get<std::vector<double>>();
            m.linear.b = j.at("b").get<double>();
            if (m.linear.w.size() != m.linear_dim)
                throw DataError("model file: weight count does not match input_dim");
        } else {
            throw DataError("model file: unknown kind '" + m.kind + "'");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
}

} // namespace treematch
