#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace treematch {

// Flat defaults for every pipeline stage. A config file sets fields by
// key=value; command-line flags override whatever the file set.
struct RunConfig {
    // mining
    int max_size = 4;
    int min_support = 3;
    double tau = 0.6;
    double alpha = 1.0;
    std::string abstraction; // comma list drawn from {entity, simword}; empty = none
    // clustering
    int kmeans_k = 100;
    int kmeans_iters = 25;
    // architecture
    int h1 = 100;
    int h2 = 40;
    int h3 = 10;
    int density = 10;
    // training
    double margin = 1.0;
    double lr = 0.05;
    double dropout = 0.2;
    double l2 = 1e-5;
    int batch = 32;
    int epochs = 100;
    int patience = 5;
    // shared
    std::uint64_t seed = 1;
    int threads = 1;
};

// key=value per line; blank lines and lines starting with '#' are skipped;
// spaces around key and value are trimmed. Unknown keys are rejected.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

// Writes the fully resolved config, one key=value per line.
void print_run_config(std::ostream& out, const RunConfig& cfg);

} // namespace treematch
