#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace treematch {

// Raised for malformed input files and contract violations in data.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// One root seed fans out to per-stage streams through a fixed splitting rule,
// so adding a stage never perturbs the draws of another.
inline std::uint64_t stage_seed(std::uint64_t root, const std::string& stage) {
    return splitmix64(root ^ fnv1a64(stage));
}

// Unbiased draw in [0, n). Rejection sampling keeps the draw replayable from
// the documented procedure: take rng() until the value falls below the largest
// multiple of n, then reduce.
inline std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded_uniform: n must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Seeded Fisher-Yates.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(bounded_uniform(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Runs fn(worker, begin, end) over [0, n) split into contiguous chunks.
// Callers are responsible for merging worker results deterministically.
template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
    if (threads < 1) threads = 1;
    std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), n ? n : 1);
    if (t <= 1) {
        fn(0, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    std::size_t chunk = (n + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
        std::size_t b = std::min(n, w * chunk);
        std::size_t e = std::min(n, b + chunk);
        pool.emplace_back([&fn, w, b, e] { fn(w, b, e); });
    }
    for (auto& th : pool) th.join();
}

std::vector<std::string> split_tabs(const std::string& line);
std::vector<std::string> split_spaces(const std::string& line);
std::string format_double(double v);

} // namespace treematch
