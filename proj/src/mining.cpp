#include "treematch/mining.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "treematch/util.hpp"

namespace treematch {

void PatternTable::rebuild_key_index() {
    by_key.clear();
    for (std::uint32_t i = 0; i < rows.size(); ++i) {
        if (!by_key.emplace(rows[i].pattern.key(), i).second)
            throw DataError("pattern table: duplicate pattern '" + rows[i].pattern.key() + "'");
    }
}

double discriminative_score(std::uint32_t support_pos, std::uint32_t support_neg, double alpha) {
    return (static_cast<double>(support_pos) + alpha) /
           (static_cast<double>(support_pos) + static_cast<double>(support_neg) + 2.0 * alpha);
}

namespace {

void count_supports(MinedPattern& mp, const std::vector<char>& pair_is_positive, double alpha) {
    mp.support_pos = 0;
    mp.support_neg = 0;
    std::uint32_t prev = std::numeric_limits<std::uint32_t>::max();
    for (const Occurrence& o : mp.occurrences) {
        if (o.pair_id == prev) continue;
        prev = o.pair_id;
        if (pair_is_positive[o.pair_id]) ++mp.support_pos;
        else ++mp.support_neg;
    }
    mp.score = discriminative_score(mp.support_pos, mp.support_neg, alpha);
}

// Sorts and dedups occurrence lists and rebuilds each pattern from its first
// occurrence, so cell contents do not depend on merge order or thread count.
void finalize_cell(OccurrenceIndex& cell, const std::vector<const DepTree*>& xs,
                   const std::vector<const DepTree*>& ys, const LabelConfig& lcfg) {
    for (auto& [key, mp] : cell) {
        std::sort(mp.occurrences.begin(), mp.occurrences.end());
        mp.occurrences.erase(std::unique(mp.occurrences.begin(), mp.occurrences.end()), mp.occurrences.end());
        const Occurrence& first = mp.occurrences.front();
        mp.pattern = build_pattern(*xs[first.pair_id], *ys[first.pair_id], first.left_image,
                                   first.right_image, lcfg);
        if (mp.pattern.key() != key)
            throw DataError("mining: occurrence does not reproduce its pattern key");
    }
}

void merge_locals(OccurrenceIndex& into, std::vector<OccurrenceIndex>& locals) {
    for (OccurrenceIndex& local : locals) {
        for (auto& [key, mp] : local) {
            auto [it, inserted] = into.try_emplace(key);
            auto& occs = it->second.occurrences;
            if (inserted) {
                occs = std::move(mp.occurrences);
            } else {
                occs.insert(occs.end(), mp.occurrences.begin(), mp.occurrences.end());
            }
        }
        local.clear();
    }
}

bool image_contains(const std::vector<int>& image, int token) {
    return std::binary_search(image.begin(), image.end(), token);
}

std::vector<int> image_with(const std::vector<int>& image, int token) {
    std::vector<int> out;
    out.reserve(image.size() + 1);
    auto pos = std::lower_bound(image.begin(), image.end(), token);
    out.insert(out.end(), image.begin(), pos);
    out.push_back(token);
    out.insert(out.end(), pos, image.end());
    return out;
}

} // namespace

void discriminative_filter(OccurrenceIndex& cell, const std::vector<char>& pair_is_positive,
                           const MiningConfig& cfg) {
    for (auto it = cell.begin(); it != cell.end();) {
        count_supports(it->second, pair_is_positive, cfg.alpha);
        bool keep = it->second.support_pos >= static_cast<std::uint32_t>(cfg.min_support_pos) &&
                    it->second.score >= cfg.tau;
        if (keep) ++it;
        else it = cell.erase(it);
    }
}

OccurrenceIndex extend_cell(const OccurrenceIndex& cell, int side, const PairedCorpus& corpus,
                            const std::vector<const DepTree*>& xs, const std::vector<const DepTree*>& ys,
                            const MiningConfig& cfg) {
    (void)corpus;
    std::vector<const MinedPattern*> src;
    src.reserve(cell.size());
    for (const auto& [key, mp] : cell) src.push_back(&mp);
    std::sort(src.begin(), src.end(),
              [](const MinedPattern* a, const MinedPattern* b) { return a->pattern.key() < b->pattern.key(); });

    LabelConfig lcfg{cfg.entity_abstraction, cfg.simword_abstraction, cfg.clustering};
    int workers = std::max(1, cfg.threads);
    std::vector<OccurrenceIndex> locals(static_cast<std::size_t>(workers));
    parallel_chunks(src.size(), workers, [&](std::size_t w, std::size_t b, std::size_t e) {
        OccurrenceIndex& out = locals[w];
        for (std::size_t si = b; si < e; ++si) {
            for (const Occurrence& occ : src[si]->occurrences) {
                const DepTree& tx = *xs[occ.pair_id];
                const DepTree& ty = *ys[occ.pair_id];
                const DepTree& tree = side ? ty : tx;
                const std::vector<int>& img = side ? occ.right_image : occ.left_image;
                std::vector<int> cands;
                for (int tok : img) {
                    int head = tree.token(tok).head;
                    if (head > 0 && !image_contains(img, head)) cands.push_back(head);
                    for (int c : tree.children[static_cast<std::size_t>(tok - 1)])
                        if (!image_contains(img, c)) cands.push_back(c);
                }
                std::sort(cands.begin(), cands.end());
                cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
                for (int cand : cands) {
                    Occurrence grown;
                    grown.pair_id = occ.pair_id;
                    grown.left_image = side ? occ.left_image : image_with(occ.left_image, cand);
                    grown.right_image = side ? image_with(occ.right_image, cand) : occ.right_image;
                    TreePairPattern p = build_pattern(tx, ty, grown.left_image, grown.right_image, lcfg);
                    out[p.key()].occurrences.push_back(std::move(grown));
                }
            }
        }
    });

    OccurrenceIndex merged;
    merge_locals(merged, locals);
    finalize_cell(merged, xs, ys, lcfg);
    return merged;
}

PatternTable mine(const PairedCorpus& corpus, const MiningConfig& cfg) {
    corpus.validate();
    if (cfg.max_size < 1) throw DataError("mine: max_size must be >= 1");
    if (cfg.min_support_pos < 0) throw DataError("mine: min_support_pos must be >= 0");
    std::size_t n_pairs = corpus.pairs.size();
    std::vector<char> pair_is_positive(n_pairs, 0);
    std::vector<const DepTree*> xs(n_pairs), ys(n_pairs);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const CorpusPair& p = corpus.pairs[i];
        pair_is_positive[i] = p.positive ? 1 : 0;
        if (p.positive) ++positives;
        xs[i] = &corpus.tree(p.x_id);
        ys[i] = &corpus.tree(p.y_id);
    }
    if (positives == 0) throw DataError("mine: corpus has no positive pairs");

    LabelConfig lcfg{cfg.entity_abstraction, cfg.simword_abstraction, cfg.clustering};
    int workers = std::max(1, cfg.threads);

    OccurrenceIndex unit;
    {
        std::vector<OccurrenceIndex> locals(static_cast<std::size_t>(workers));
        parallel_chunks(n_pairs, workers, [&](std::size_t w, std::size_t b, std::size_t e) {
            OccurrenceIndex& out = locals[w];
            for (std::size_t pid = b; pid < e; ++pid) {
                const DepTree& tx = *xs[pid];
                const DepTree& ty = *ys[pid];
                for (int xi = 1; xi <= tx.size(); ++xi) {
                    for (int yi = 1; yi <= ty.size(); ++yi) {
                        Occurrence occ{static_cast<std::uint32_t>(pid), {xi}, {yi}};
                        TreePairPattern p = build_pattern(tx, ty, occ.left_image, occ.right_image, lcfg);
                        out[p.key()].occurrences.push_back(std::move(occ));
                    }
                }
            }
        });
        merge_locals(unit, locals);
        finalize_cell(unit, xs, ys, lcfg);
    }
    discriminative_filter(unit, pair_is_positive, cfg);

    std::vector<MinedPattern> finals;
    auto harvest = [&finals](const OccurrenceIndex& cell) {
        for (const auto& [key, mp] : cell) {
            MinedPattern kept;
            kept.pattern = mp.pattern;
            kept.support_pos = mp.support_pos;
            kept.support_neg = mp.support_neg;
            kept.score = mp.score;
            finals.push_back(std::move(kept));
        }
    };
    harvest(unit);

    std::deque<std::pair<std::pair<int, int>, OccurrenceIndex>> queue;
    std::set<std::pair<int, int>> visited;
    visited.insert({1, 1});
    queue.emplace_back(std::make_pair(1, 1), std::move(unit));

    while (!queue.empty()) {
        auto [cell_size, occ_index] = std::move(queue.front());
        queue.pop_front();
        auto [m, n] = cell_size;
        for (int side = 0; side < 2; ++side) {
            int gm = m + (side == 0 ? 1 : 0);
            int gn = n + (side == 1 ? 1 : 0);
            if ((side == 0 ? gm : gn) > cfg.max_size) continue;
            if (visited.count({gm, gn})) continue;
            visited.insert({gm, gn});
            if (occ_index.empty()) continue;
            OccurrenceIndex grown = extend_cell(occ_index, side, corpus, xs, ys, cfg);
            discriminative_filter(grown, pair_is_positive, cfg);
            harvest(grown);
            if (!grown.empty()) queue.emplace_back(std::make_pair(gm, gn), std::move(grown));
        }
    }

    std::sort(finals.begin(), finals.end(), [](const MinedPattern& a, const MinedPattern& b) {
        int ta = a.pattern.left.size() + a.pattern.right.size();
        int tb = b.pattern.left.size() + b.pattern.right.size();
        if (ta != tb) return ta < tb;
        if (a.pattern.left.size() != b.pattern.left.size())
            return a.pattern.left.size() < b.pattern.left.size();
        return a.pattern.key() < b.pattern.key();
    });

    PatternTable table;
    table.rows.reserve(finals.size());
    for (std::uint32_t i = 0; i < finals.size(); ++i) {
        PatternTable::Row row;
        row.pattern = std::move(finals[i].pattern);
        row.index = i;
        row.support_pos = finals[i].support_pos;
        row.support_neg = finals[i].support_neg;
        row.score = finals[i].score;
        table.rows.push_back(std::move(row));
    }
    table.rebuild_key_index();
    return table;
}

void write_pattern_table(std::ostream& out, const PatternTable& table) {
    for (const PatternTable::Row& row : table.rows) {
        out << row.index << '\t' << row.pattern.left_key << '\t' << row.pattern.right_key << '\t'
            << row.support_pos << '\t' << row.support_neg << '\t' << format_double(row.score) << "\n";
    }
}

PatternTable read_pattern_table(std::istream& in) {
    PatternTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols = split_tabs(line);
        if (cols.size() != 6)
            throw DataError("pattern table line " + std::to_string(line_no) + ": expected 6 columns");
        PatternTable::Row row;
        try {
            row.index = static_cast<std::uint32_t>(std::stoul(cols[0]));
            row.support_pos = static_cast<std::uint32_t>(std::stoul(cols[3]));
            row.support_neg = static_cast<std::uint32_t>(std::stoul(cols[4]));
            row.score = std::stod(cols[5]);
        } catch (const std::exception&) {
            throw DataError("pattern table line " + std::to_string(line_no) + ": bad numeric field");
        }
        if (row.index != table.rows.size())
            throw DataError("pattern table line " + std::to_string(line_no) + ": indices must be dense from 0");
        row.pattern = parse_pattern(cols[1], cols[2]);
        table.rows.push_back(std::move(row));
    }
    table.rebuild_key_index();
    return table;
}

} // namespace treematch
