// Command-line front end over the treematch library. Every subcommand reads
// and writes plain files; machine-readable output goes only to --out paths,
// logs go to stderr. Exit codes: 0 ok, 1 usage/config error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "treematch/abstraction.hpp"
#include "treematch/config.hpp"
#include "treematch/eval.hpp"
#include "treematch/featurizer.hpp"
#include "treematch/mining.hpp"
#include "treematch/net.hpp"
#include "treematch/pattern.hpp"
#include "treematch/synthetic.hpp"
#include "treematch/treebank.hpp"
#include "treematch/util.hpp"

namespace {

using namespace treematch;

constexpr const char* kVersion =
    "treematch 1.0.0 (file formats: trees 1, pairs 1, patterns 1, feats 1, "
    "arch 1, model 1, report 1)";

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    return out;
}

PairedCorpus load_trees(const std::string& path) {
    auto in = open_in(path);
    PairedCorpus corpus;
    for (DepTree& t : parse_trees(in)) corpus.add_tree(std::move(t));
    return corpus;
}

std::vector<CorpusPair> load_pairs(const std::string& path) {
    auto in = open_in(path);
    return parse_pairs(in);
}

PatternTable load_table(const std::string& path) {
    auto in = open_in(path);
    return read_pattern_table(in);
}

std::vector<RankGroup> load_groups(const std::string& path) {
    auto in = open_in(path);
    return read_groups(in);
}

// Applies the mining abstraction switches named in a comma list.
void apply_abstraction(MiningConfig& cfg, const std::string& spec) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "entity") cfg.entity_abstraction = true;
        else if (item == "simword") cfg.simword_abstraction = true;
        else throw ConfigError("unknown abstraction '" + item + "' (expected entity or simword)");
    }
}

// Featurizes the listed pairs in input order, first occurrence wins on
// duplicates. Chunked across threads; output is order-deterministic.
std::vector<std::pair<std::string, SparseFeatureVector>>
featurize_pairs(const PairedCorpus& corpus, const std::vector<std::pair<std::string, std::string>>& ids,
                const FeatureIndex& index, int threads) {
    std::vector<std::pair<std::string, std::string>> todo;
    std::unordered_set<std::string> seen;
    for (const auto& [x, y] : ids) {
        if (!seen.insert(pair_key(x, y)).second) continue;
        corpus.tree(x);
        corpus.tree(y);
        todo.push_back({x, y});
    }
    std::vector<SparseFeatureVector> out(todo.size());
    parallel_chunks(todo.size(), threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            out[i] = featurize(corpus.tree(todo[i].first), corpus.tree(todo[i].second), index);
    });
    std::vector<std::pair<std::string, SparseFeatureVector>> rows;
    rows.reserve(todo.size());
    for (std::size_t i = 0; i < todo.size(); ++i)
        rows.push_back({pair_key(todo[i].first, todo[i].second), std::move(out[i])});
    return rows;
}

std::vector<std::pair<std::string, std::string>> group_pair_ids(const std::vector<RankGroup>& groups) {
    std::vector<std::pair<std::string, std::string>> ids;
    for (const RankGroup& g : groups)
        for (const auto& [resp, gold] : g.candidates) {
            (void)gold;
            ids.push_back({g.tweet, resp});
        }
    return ids;
}

std::unordered_map<std::string, SparseFeatureVector>
load_feats_map(const std::string& path, std::uint32_t dimension) {
    auto in = open_in(path);
    std::unordered_map<std::string, SparseFeatureVector> map;
    for (auto& [key, vec] : read_feats(in, dimension)) {
        if (!map.emplace(key, std::move(vec)).second)
            throw DataError("feats file '" + path + "': duplicate pair id '" + key + "'");
    }
    return map;
}

std::vector<TrainTriple> triples_from_groups(const std::vector<RankGroup>& groups,
                                             const std::unordered_map<std::string, SparseFeatureVector>& feats) {
    auto lookup = [&feats](const std::string& tweet, const std::string& resp) -> const SparseFeatureVector& {
        auto it = feats.find(pair_key(tweet, resp));
        if (it == feats.end())
            throw DataError("no feature row for pair '" + tweet + "' / '" + resp + "'");
        return it->second;
    };
    std::vector<TrainTriple> triples;
    for (const RankGroup& g : groups) {
        const std::string* gold = nullptr;
        for (const auto& [resp, is_gold] : g.candidates)
            if (is_gold) gold = &resp;
        const SparseFeatureVector& pos = lookup(g.tweet, *gold);
        for (const auto& [resp, is_gold] : g.candidates)
            if (!is_gold) triples.push_back({pos, lookup(g.tweet, resp)});
    }
    return triples;
}

struct Cli {
    RunConfig rc;
    std::function<int()> action;
};

void log_seed(const char* stage, std::uint64_t root, std::uint64_t value) {
    std::cerr << "[seed] stage=" << stage << " root=" << root << " value=" << value << "\n";
}

void log_config(const RunConfig& rc) {
    std::cerr << "[config]\n";
    print_run_config(std::cerr, rc);
}

void add_config_flag(CLI::App* cmd, std::string& sink) {
    cmd->add_option("--config", sink, "key=value config file; flags override file values");
}

int run_parse_check(const RunConfig&, const std::string& trees_path, const std::string& pairs_path) {
    PairedCorpus corpus = load_trees(trees_path);
    std::cerr << "trees: " << corpus.trees.size() << "\n";
    if (!pairs_path.empty()) {
        corpus.pairs = load_pairs(pairs_path);
        corpus.validate();
        std::size_t pos = 0;
        for (const CorpusPair& p : corpus.pairs) pos += p.positive ? 1 : 0;
        std::cerr << "pairs: " << corpus.pairs.size() << " (" << pos << " positive)\n";
    }
    return 0;
}

int run_cluster(const RunConfig& rc, const std::string& emb_path, const std::string& out_path) {
    log_config(rc);
    auto in = open_in(emb_path);
    EmbeddingTable emb = parse_embeddings(in);
    if (rc.kmeans_k < 1) throw ConfigError("cluster: kmeans_k must be >= 1");
    std::uint64_t s = stage_seed(rc.seed, "cluster");
    log_seed("cluster", rc.seed, s);
    Clustering c = kmeans_cluster(emb, static_cast<std::uint32_t>(rc.kmeans_k), rc.kmeans_iters, s);
    auto out = open_out(out_path);
    write_clusters(out, c);
    std::cerr << "clustered " << emb.size() << " words into " << c.k << " clusters\n";
    return 0;
}

int run_mine(const RunConfig& rc, const std::string& trees_path, const std::string& pairs_path,
             const std::string& clusters_path, int gen_neg, const std::string& out_path) {
    log_config(rc);
    PairedCorpus corpus = load_trees(trees_path);
    corpus.pairs = load_pairs(pairs_path);
    corpus.validate();
    if (gen_neg > 0) {
        std::uint64_t s = stage_seed(rc.seed, "negatives");
        log_seed("negatives", rc.seed, s);
        corpus = generate_negatives(corpus, gen_neg, s);
        std::cerr << "sampled " << gen_neg << " negatives per positive: " << corpus.pairs.size()
                  << " pairs\n";
    }
    MiningConfig cfg;
    cfg.max_size = rc.max_size;
    cfg.min_support_pos = rc.min_support;
    cfg.tau = rc.tau;
    cfg.alpha = rc.alpha;
    cfg.threads = rc.threads;
    apply_abstraction(cfg, rc.abstraction);
    Clustering clusters;
    if (!clusters_path.empty()) {
        auto in = open_in(clusters_path);
        clusters = parse_clusters(in);
        cfg.clustering = &clusters;
    }
    PatternTable table = mine(corpus, cfg);
    auto out = open_out(out_path);
    write_pattern_table(out, table);
    std::cerr << "mined " << table.rows.size() << " patterns from " << corpus.pairs.size()
              << " pairs\n";
    return 0;
}

int run_featurize(const RunConfig& rc, const std::string& trees_path, const std::string& patterns_path,
                  const std::string& pairs_path, const std::string& groups_path,
                  const std::string& clusters_path, const std::string& ablate_mode,
                  const std::string& out_path) {
    log_config(rc);
    if (pairs_path.empty() == groups_path.empty())
        throw ConfigError("featurize: exactly one of --pairs or --groups is required");
    PairedCorpus corpus = load_trees(trees_path);
    PatternTable table = load_table(patterns_path);
    if (!ablate_mode.empty()) table = ablate(table, parse_ablate_mode(ablate_mode));
    Clustering clusters;
    const Clustering* cl = nullptr;
    if (!clusters_path.empty()) {
        auto in = open_in(clusters_path);
        clusters = parse_clusters(in);
        cl = &clusters;
    }
    std::vector<std::pair<std::string, std::string>> ids;
    if (!pairs_path.empty()) {
        for (const CorpusPair& p : load_pairs(pairs_path)) ids.push_back({p.x_id, p.y_id});
    } else {
        ids = group_pair_ids(load_groups(groups_path));
    }
    FeatureIndex index = build_feature_index(table, cl);
    auto rows = featurize_pairs(corpus, ids, index, rc.threads);
    auto out = open_out(out_path);
    write_feats(out, rows);
    std::cerr << "featurized " << rows.size() << " pairs over " << table.dimension()
              << " patterns\n";
    return 0;
}

int run_arch(const RunConfig& rc, const std::string& patterns_path, const std::string& out_path) {
    log_config(rc);
    PatternTable table = load_table(patterns_path);
    if (rc.h1 < 1 || rc.h2 < 1 || rc.h3 < 1 || rc.density < 1)
        throw ConfigError("arch: h1, h2, h3 and density must be >= 1");
    std::uint64_t s = stage_seed(rc.seed, "arch");
    log_seed("arch", rc.seed, s);
    Architecture arch = learn_architecture(table, static_cast<std::uint32_t>(rc.h1),
                                           static_cast<std::uint32_t>(rc.density), s);
    arch.h2 = static_cast<std::uint32_t>(rc.h2);
    arch.h3 = static_cast<std::uint32_t>(rc.h3);
    arch.validate();
    auto out = open_out(out_path);
    write_architecture(out, arch);
    std::cerr << "architecture: " << arch.input_dim << " inputs -> " << arch.h1 << "-" << arch.h2
              << "-" << arch.h3 << "-1, density " << arch.density << "\n";
    return 0;
}

int run_train(const RunConfig& rc, const std::string& arch_path, const std::string& patterns_path,
              const std::string& feats_path, const std::string& groups_path,
              const std::string& valid_feats_path, const std::string& valid_groups_path,
              bool linear, const std::string& out_path) {
    log_config(rc);
    Architecture arch;
    std::uint32_t dim = 0;
    if (linear) {
        if (patterns_path.empty())
            throw ConfigError("train --linear needs --patterns for the input dimension");
        dim = load_table(patterns_path).dimension();
    } else {
        if (arch_path.empty()) throw ConfigError("train needs --arch (or --linear with --patterns)");
        auto in = open_in(arch_path);
        arch = read_architecture(in);
        dim = arch.input_dim;
    }
    auto feats = load_feats_map(feats_path, dim);
    auto triples = triples_from_groups(load_groups(groups_path), feats);
    auto valid_feats = load_feats_map(valid_feats_path, dim);
    auto valid = triples_from_groups(load_groups(valid_groups_path), valid_feats);

    TrainConfig tc;
    tc.margin = rc.margin;
    tc.lr = rc.lr;
    tc.batch = rc.batch;
    tc.dropout = rc.dropout;
    tc.l2 = rc.l2;
    tc.max_epochs = rc.epochs;
    tc.patience = rc.patience;
    tc.seed = stage_seed(rc.seed, "train");
    log_seed("train", rc.seed, tc.seed);
    std::cerr << "training on " << triples.size() << " triples, validating on " << valid.size()
              << "\n";

    Model model;
    if (linear) {
        LinearTrainResult r = train_linear(triples, dim, tc, valid);
        model.kind = "linear";
        model.linear = std::move(r.params);
        model.linear_dim = dim;
        std::cerr << "linear model: best validation P@1 " << format_double(r.best_valid_p1)
                  << " after " << r.epochs_run << " epochs\n";
    } else {
        TrainResult r = train(triples, arch, tc, valid);
        model.kind = "deep";
        model.arch = std::move(arch);
        model.params = std::move(r.params);
        std::cerr << "deep model: best validation P@1 " << format_double(r.best_valid_p1)
                  << " after " << r.epochs_run << " epochs\n";
    }
    auto out = open_out(out_path);
    write_model(out, model);
    return 0;
}

int run_eval(const RunConfig& rc, const std::string& trees_path, const std::string& groups_path,
             const std::string& patterns_path, const std::vector<std::string>& model_paths,
             bool cosine, const std::string& clusters_path, const std::string& ablate_mode,
             const std::string& report_path) {
    log_config(rc);
    if (model_paths.empty() && !cosine)
        throw ConfigError("eval: give at least one --model or --cosine");
    if (!model_paths.empty() && patterns_path.empty())
        throw ConfigError("eval: --model needs --patterns to featurize the candidates");
    PairedCorpus corpus = load_trees(trees_path);
    std::vector<RankGroup> groups = load_groups(groups_path);

    std::unordered_map<std::string, SparseFeatureVector> feats;
    if (!model_paths.empty()) {
        PatternTable table = load_table(patterns_path);
        if (!ablate_mode.empty()) table = ablate(table, parse_ablate_mode(ablate_mode));
        Clustering clusters;
        const Clustering* cl = nullptr;
        if (!clusters_path.empty()) {
            auto in = open_in(clusters_path);
            clusters = parse_clusters(in);
            cl = &clusters;
        }
        FeatureIndex index = build_feature_index(table, cl);
        for (auto& [key, vec] : featurize_pairs(corpus, group_pair_ids(groups), index, rc.threads))
            feats.emplace(key, std::move(vec));
    }

    nlohmann::json rows = nlohmann::json::array();
    auto add_row = [&rows, &groups](const std::string& name, const PairScorer& scorer) {
        EvalReport rep = p_at_1(scorer, groups);
        nlohmann::json row;
        row["name"] = name;
        row["p1"] = rep.p1;
        row["wins"] = rep.wins;
        rows.push_back(row);
        std::cerr << name << ": P@1 " << format_double(rep.p1) << " (" << rep.wins << "/"
                  << rep.groups << ")\n";
    };

    for (const std::string& path : model_paths) {
        auto in = open_in(path);
        Model model = read_model(in);
        std::uint32_t dim = feats.empty() ? 0 : feats.begin()->second.dimension;
        if (model.input_dim() != dim)
            throw ConfigError("eval: model '" + path + "' expects " +
                              std::to_string(model.input_dim()) + " features, table has " +
                              std::to_string(dim));
        std::string name = std::filesystem::path(path).stem().string();
        add_row(name, [&model, &feats](const std::string& x, const std::string& y) {
            return model.score(feats.at(pair_key(x, y)));
        });
    }
    if (cosine) {
        std::vector<std::string> doc_ids;
        for (const auto& [id, tree] : corpus.trees) doc_ids.push_back(id);
        IdfTable idf = build_idf(corpus, doc_ids);
        add_row("cossim", [&corpus, &idf](const std::string& x, const std::string& y) {
            return cosine_baseline(corpus.tree(x).tokens, corpus.tree(y).tokens, idf);
        });
    }

    nlohmann::json report;
    report["format"] = 1;
    report["groups"] = groups.size();
    report["models"] = rows;
    auto out = open_out(report_path);
    out << report.dump(2) << "\n";
    return 0;
}

int run_synth(const std::string& spec_path, const std::string& out_dir) {
    SynthSpec spec;
    {
        auto in = open_in(spec_path);
        spec = parse_synth_spec(in);
    }
    SynthCorpus sc = make_synthetic(spec);
    write_synth(out_dir, sc);
    std::cerr << "synth mode=" << spec.mode << ": " << sc.trees.size() << " trees, "
              << sc.train_pairs.size() << " train pairs, groups " << sc.train_groups.size() << "/"
              << sc.valid_groups.size() << "/" << sc.test_groups.size() << "\n";
    return 0;
}

// The config file must be loaded before CLI11 binds flag values over it, so
// --config is located by a pre-scan of argv.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return "";
}

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    try {
        std::string config_path = find_config_arg(argc, argv);
        if (!config_path.empty()) cli.rc = load_run_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    RunConfig& rc = cli.rc;

    CLI::App app{"mines tree matching patterns from paired texts and trains a ranking model"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_sink;

    {
        auto* cmd = app.add_subcommand("parse-check", "validate a trees file (and optionally a pairs file)");
        auto trees = std::make_shared<std::string>();
        auto pairs = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--trees", *trees, "trees file")->required();
        cmd->add_option("--pairs", *pairs, "pairs file to validate against the trees");
        cmd->callback([&rc, trees, pairs, &cli] {
            cli.action = [&rc, trees, pairs] { return run_parse_check(rc, *trees, *pairs); };
        });
    }
    {
        auto* cmd = app.add_subcommand("cluster", "k-means word clusters from embeddings");
        auto emb = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--embeddings", *emb, "embeddings file (word v1 v2 ...)")->required();
        cmd->add_option("--k", rc.kmeans_k, "number of clusters");
        cmd->add_option("--iters", rc.kmeans_iters, "max k-means iterations");
        cmd->add_option("--seed", rc.seed, "root seed");
        cmd->add_option("--out", *out, "clusters file to write")->required();
        cmd->callback([&rc, emb, out, &cli] {
            cli.action = [&rc, emb, out] { return run_cluster(rc, *emb, *out); };
        });
    }
    {
        auto* cmd = app.add_subcommand("mine", "mine discriminative matching patterns");
        auto trees = std::make_shared<std::string>();
        auto pairs = std::make_shared<std::string>();
        auto clusters = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto gen_neg = std::make_shared<int>(0);
        add_config_flag(cmd, config_sink);
        cmd->add_option("--trees", *trees, "trees file")->required();
        cmd->add_option("--pairs", *pairs, "pairs file (pos/neg labels)")->required();
        cmd->add_option("--max-size", rc.max_size, "max nodes per pattern side");
        cmd->add_option("--min-support", rc.min_support, "min positive pairs per pattern");
        cmd->add_option("--tau", rc.tau, "discriminative score threshold");
        cmd->add_option("--alpha", rc.alpha, "score smoothing");
        cmd->add_option("--abstraction", rc.abstraction, "comma list: entity,simword");
        cmd->add_option("--clusters", *clusters, "word clusters file (for simword)");
        cmd->add_option("--gen-neg", *gen_neg,
                        "sample N negatives per positive first (replaces existing negatives)");
        cmd->add_option("--threads", rc.threads, "worker threads");
        cmd->add_option("--seed", rc.seed, "root seed (used by --gen-neg)");
        cmd->add_option("--out", *out, "pattern table to write")->required();
        cmd->callback([&rc, trees, pairs, clusters, gen_neg, out, &cli] {
            cli.action = [&rc, trees, pairs, clusters, gen_neg, out] {
                return run_mine(rc, *trees, *pairs, *clusters, *gen_neg, *out);
            };
        });
    }
    {
        auto* cmd = app.add_subcommand("featurize", "binary pattern features for text pairs");
        auto trees = std::make_shared<std::string>();
        auto patterns = std::make_shared<std::string>();
        auto pairs = std::make_shared<std::string>();
        auto groups = std::make_shared<std::string>();
        auto clusters = std::make_shared<std::string>();
        auto ablate_mode = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--trees", *trees, "trees file")->required();
        cmd->add_option("--patterns", *patterns, "pattern table")->required();
        cmd->add_option("--pairs", *pairs, "pairs file naming the pairs to featurize");
        cmd->add_option("--groups", *groups, "groups file naming (tweet, candidate) pairs");
        cmd->add_option("--clusters", *clusters, "word clusters file");
        cmd->add_option("--ablate", *ablate_mode, "shallow_only or no_abstraction");
        cmd->add_option("--threads", rc.threads, "worker threads");
        cmd->add_option("--out", *out, "feats file to write")->required();
        cmd->callback([&rc, trees, patterns, pairs, groups, clusters, ablate_mode, out, &cli] {
            cli.action = [&rc, trees, patterns, pairs, groups, clusters, ablate_mode, out] {
                return run_featurize(rc, *trees, *patterns, *pairs, *groups, *clusters, *ablate_mode,
                                     *out);
            };
        });
    }
    {
        auto* cmd = app.add_subcommand("arch", "learn the sparse input connectivity");
        auto patterns = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--patterns", *patterns, "pattern table")->required();
        cmd->add_option("--h1", rc.h1, "first hidden layer width");
        cmd->add_option("--h2", rc.h2, "second hidden layer width");
        cmd->add_option("--h3", rc.h3, "third hidden layer width");
        cmd->add_option("--density", rc.density, "units each input connects to");
        cmd->add_option("--seed", rc.seed, "root seed");
        cmd->add_option("--out", *out, "architecture file to write")->required();
        cmd->callback([&rc, patterns, out, &cli] {
            cli.action = [&rc, patterns, out] { return run_arch(rc, *patterns, *out); };
        });
    }
    {
        auto* cmd = app.add_subcommand("train", "train the ranking model on contrastive triples");
        auto arch = std::make_shared<std::string>();
        auto patterns = std::make_shared<std::string>();
        auto feats = std::make_shared<std::string>();
        auto groups = std::make_shared<std::string>();
        auto valid_feats = std::make_shared<std::string>();
        auto valid_groups = std::make_shared<std::string>();
        auto linear = std::make_shared<bool>(false);
        auto out = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--arch", *arch, "architecture file (deep model)");
        cmd->add_option("--patterns", *patterns, "pattern table (input dimension for --linear)");
        cmd->add_option("--feats", *feats, "training feats file")->required();
        cmd->add_option("--groups", *groups, "training groups file")->required();
        cmd->add_option("--valid-feats", *valid_feats, "validation feats file")->required();
        cmd->add_option("--valid-groups", *valid_groups, "validation groups file")->required();
        cmd->add_flag("--linear", *linear, "train the linear model instead of the deep one");
        cmd->add_option("--margin", rc.margin, "hinge margin");
        cmd->add_option("--lr", rc.lr, "learning rate");
        cmd->add_option("--dropout", rc.dropout, "hidden dropout rate");
        cmd->add_option("--l2", rc.l2, "L2 penalty");
        cmd->add_option("--batch", rc.batch, "mini-batch size");
        cmd->add_option("--epochs", rc.epochs, "max epochs");
        cmd->add_option("--patience", rc.patience, "early stopping patience");
        cmd->add_option("--seed", rc.seed, "root seed");
        cmd->add_option("--out", *out, "model file to write")->required();
        cmd->callback([&rc, arch, patterns, feats, groups, valid_feats, valid_groups, linear, out, &cli] {
            cli.action = [&rc, arch, patterns, feats, groups, valid_feats, valid_groups, linear, out] {
                return run_train(rc, *arch, *patterns, *feats, *groups, *valid_feats, *valid_groups,
                                 *linear, *out);
            };
        });
    }
    {
        auto* cmd = app.add_subcommand("eval", "P@1 over rank groups for models and baselines");
        auto trees = std::make_shared<std::string>();
        auto groups = std::make_shared<std::string>();
        auto patterns = std::make_shared<std::string>();
        auto models = std::make_shared<std::vector<std::string>>();
        auto cosine = std::make_shared<bool>(false);
        auto clusters = std::make_shared<std::string>();
        auto ablate_mode = std::make_shared<std::string>();
        auto report = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--trees", *trees, "trees file")->required();
        cmd->add_option("--groups", *groups, "groups file to rank")->required();
        cmd->add_option("--patterns", *patterns, "pattern table (to featurize for --model)");
        cmd->add_option("--model", *models, "model file; repeat for several models");
        cmd->add_flag("--cosine", *cosine, "add the TF-IDF cosine baseline");
        cmd->add_option("--clusters", *clusters, "word clusters file");
        cmd->add_option("--ablate", *ablate_mode, "shallow_only or no_abstraction");
        cmd->add_option("--threads", rc.threads, "worker threads");
        cmd->add_option("--report", *report, "report JSON to write")->required();
        cmd->callback([&rc, trees, groups, patterns, models, cosine, clusters, ablate_mode, report, &cli] {
            cli.action = [&rc, trees, groups, patterns, models, cosine, clusters, ablate_mode, report] {
                return run_eval(rc, *trees, *groups, *patterns, *models, *cosine, *clusters,
                                *ablate_mode, *report);
            };
        });
    }
    {
        auto* cmd = app.add_subcommand("synth", "generate a planted-pattern corpus");
        auto spec = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>();
        add_config_flag(cmd, config_sink);
        cmd->add_option("--spec", *spec, "generator spec JSON")->required();
        cmd->add_option("--out-dir", *out_dir, "directory for the generated files")->required();
        cmd->callback([spec, out_dir, &cli] {
            cli.action = [spec, out_dir] { return run_synth(*spec, *out_dir); };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        return cli.action ? cli.action() : 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
