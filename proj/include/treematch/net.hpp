#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "treematch/featurizer.hpp"
#include "treematch/mining.hpp"

namespace treematch {

// Sparse first layer: every input feature feeds exactly `density` hidden
// units; layers beyond the first are dense.
struct Architecture {
    std::uint32_t input_dim = 0;
    std::uint32_t h1 = 100;
    std::uint32_t h2 = 40;
    std::uint32_t h3 = 10;
    std::uint32_t density = 0;
    std::vector<std::vector<std::uint32_t>> connect; // per input, sorted unit ids

    void validate() const;
    std::vector<std::uint32_t> unit_degrees() const;
};

// Greedy balanced assignment: features in decreasing frequency (equal
// frequencies settled by a seeded shuffle), each taking the density units
// with the lightest frequency-weighted load, unit ties by id. Guarantees
// max load - min load <= max single-feature frequency.
Architecture learn_architecture(const PatternTable& table, std::uint32_t h1, std::uint32_t density,
                                std::uint64_t seed);

void write_architecture(std::ostream& out, const Architecture& arch);
Architecture read_architecture(std::istream& in);

struct ModelParams {
    std::vector<double> w1; // input i's weights at [i*density, (i+1)*density)
    std::vector<double> b1;
    std::vector<double> w2; // h2 x h1 row-major
    std::vector<double> b2;
    std::vector<double> w3; // h3 x h2 row-major
    std::vector<double> b3;
    std::vector<double> w4; // h3
    double b4 = 0.0;
};

ModelParams init_params(const Architecture& arch, std::uint64_t seed);

// Multipliers per hidden unit: 0 for dropped units, 1/(1-rate) for kept.
struct DropoutMasks {
    std::vector<double> m1, m2, m3;
};

DropoutMasks draw_masks(const Architecture& arch, double rate, std::mt19937_64& rng);

struct Activations {
    std::vector<double> a1, s1, a2, s2, a3, s3; // pre-activation and masked sigmoid
    double score = 0.0;
};

double forward(const ModelParams& p, const Architecture& arch, const SparseFeatureVector& x,
               const DropoutMasks* masks, Activations* acts);

// Hinge gradient accumulator; first-layer rows exist only for inputs active
// in at least one of the contributing vectors.
struct GradAccum {
    double loss = 0.0;
    std::size_t pairs = 0;
    std::map<std::uint32_t, std::vector<double>> gw1;
    std::vector<double> gb1, gw2, gb2, gw3, gb3, gw4;
    double gb4 = 0.0;
};

GradAccum make_accum(const Architecture& arch);

// Adds the gradient of max(0, margin + s(neg) - s(pos)) to the accumulator;
// returns the loss term. Masks may be null (no dropout).
double backward_pair(const ModelParams& p, const Architecture& arch, const SparseFeatureVector& pos,
                     const SparseFeatureVector& neg, double margin, const DropoutMasks* pos_masks,
                     const DropoutMasks* neg_masks, GradAccum& acc);

struct TrainTriple {
    SparseFeatureVector pos, neg;
};

struct TrainConfig {
    double margin = 1.0;
    double lr = 0.05;
    int batch = 32;
    double dropout = 0.2;
    double l2 = 1e-5;
    int max_epochs = 100;
    int patience = 5;
    std::uint64_t seed = 1;
};

struct TrainResult {
    ModelParams params;
    double best_valid_p1 = 0.0;
    int epochs_run = 0;
};

TrainResult train(const std::vector<TrainTriple>& triples, const Architecture& arch,
                  const TrainConfig& cfg, const std::vector<TrainTriple>& validation);

struct LinearParams {
    std::vector<double> w;
    double b = 0.0;
};

double linear_score(const LinearParams& p, const SparseFeatureVector& x);

struct LinearTrainResult {
    LinearParams params;
    double best_valid_p1 = 0.0;
    int epochs_run = 0;
};

// Same loop (hinge, mini-batches, L2, validation early stopping) over a
// single linear layer; no hidden units, so no dropout.
LinearTrainResult train_linear(const std::vector<TrainTriple>& triples, std::uint32_t input_dim,
                               const TrainConfig& cfg, const std::vector<TrainTriple>& validation);

// Versioned JSON container for either model kind.
struct Model {
    std::string kind; // "deep" or "linear"
    Architecture arch;
    ModelParams params;
    LinearParams linear;
    std::uint32_t linear_dim = 0;

    std::uint32_t input_dim() const { return kind == "deep" ? arch.input_dim : linear_dim; }
    double score(const SparseFeatureVector& x) const;
};

void write_model(std::ostream& out, const Model& m);
Model read_model(std::istream& in);

} // namespace treematch
