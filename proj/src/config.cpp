#include "treematch/config.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "treematch/util.hpp"

namespace treematch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        int x = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs an integer, got '" + v + "'");
    }
}

double parse_num(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(x);
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs an unsigned integer, got '" + v + "'");
    }
}

} // namespace

RunConfig parse_run_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key == "max_size") cfg.max_size = parse_int(key, val);
        else if (key == "min_support") cfg.min_support = parse_int(key, val);
        else if (key == "tau") cfg.tau = parse_num(key, val);
        else if (key == "alpha") cfg.alpha = parse_num(key, val);
        else if (key == "abstraction") cfg.abstraction = val;
        else if (key == "kmeans_k") cfg.kmeans_k = parse_int(key, val);
        else if (key == "kmeans_iters") cfg.kmeans_iters = parse_int(key, val);
        else if (key == "h1") cfg.h1 = parse_int(key, val);
        else if (key == "h2") cfg.h2 = parse_int(key, val);
        else if (key == "h3") cfg.h3 = parse_int(key, val);
        else if (key == "density") cfg.density = parse_int(key, val);
        else if (key == "margin") cfg.margin = parse_num(key, val);
        else if (key == "lr") cfg.lr = parse_num(key, val);
        else if (key == "dropout") cfg.dropout = parse_num(key, val);
        else if (key == "l2") cfg.l2 = parse_num(key, val);
        else if (key == "batch") cfg.batch = parse_int(key, val);
        else if (key == "epochs") cfg.epochs = parse_int(key, val);
        else if (key == "patience") cfg.patience = parse_int(key, val);
        else if (key == "seed") cfg.seed = parse_u64(key, val);
        else if (key == "threads") cfg.threads = parse_int(key, val);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_run_config(in);
}

void print_run_config(std::ostream& out, const RunConfig& cfg) {
    out << "max_size=" << cfg.max_size << '\n'
        << "min_support=" << cfg.min_support << '\n'
        << "tau=" << format_double(cfg.tau) << '\n'
        << "alpha=" << format_double(cfg.alpha) << '\n'
        << "abstraction=" << cfg.abstraction << '\n'
        << "kmeans_k=" << cfg.kmeans_k << '\n'
        << "kmeans_iters=" << cfg.kmeans_iters << '\n'
        << "h1=" << cfg.h1 << '\n'
        << "h2=" << cfg.h2 << '\n'
        << "h3=" << cfg.h3 << '\n'
        << "density=" << cfg.density << '\n'
        << "margin=" << format_double(cfg.margin) << '\n'
        << "lr=" << format_double(cfg.lr) << '\n'
        << "dropout=" << format_double(cfg.dropout) << '\n'
        << "l2=" << format_double(cfg.l2) << '\n'
        << "batch=" << cfg.batch << '\n'
        << "epochs=" << cfg.epochs << '\n'
        << "patience=" << cfg.patience << '\n'
        << "seed=" << cfg.seed << '\n'
        << "threads=" << cfg.threads << '\n';
}

} // namespace treematch
