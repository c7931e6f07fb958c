#include "pfl/config.hpp"

#include <charconv>
#include <fstream>

#include "pfl/errors.hpp"

namespace pfl::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

const std::map<std::string, std::string>& RunConfig::defaults() {
    static const std::map<std::string, std::string> d = {
        // grid
        {"grid.nx", "128"},
        {"grid.ny", "128"},
        {"grid.dx", "1"},
        {"grid.dy", "1"},
        // solver numerics
        {"pf.dt", "0.01"},
        {"pf.steps", "20000"},
        {"pf.stride", "200"},
        {"pf.noise_amp", "0.05"},
        {"pf.barrier_a", "1"},
        {"pf.potential", "standard"},  // standard | as_written
        // sweep
        {"sweep.samples", "100"},
        {"sweep.base_seed", "42"},
        {"sweep.x0", "0.25:0.75"},
        {"sweep.mobility", "0.8:2.2"},
        {"sweep.kappa", "0.25:0.75"},
        // frame flattening
        {"flatten.channels", "1"},  // 1 | 3
        // stage-2 scaling + PCA
        {"scaler.kind", "minmax"},  // minmax | zscore
        {"pca.components", "64"},
        // autoencoder architecture
        {"ae.code", "256"},
        {"ae.hidden_layers", "0"},
        {"ae.hidden_activation", "tanh"},
        {"ae.output_activation", "auto"},  // auto: sigmoid on frames, identity on codes
        // shared training settings
        {"train.optimizer", "adam"},  // adam | sgd_momentum
        {"train.lr", "0.001"},
        {"train.batch", "32"},
        {"train.epochs", "200"},
        {"train.patience", "10"},
        {"train.min_delta", "1e-5"},
        {"train.val_fraction", "0.1"},
        {"train.momentum", "0.9"},
        {"train.seed", "7"},
        // sequence model
        {"seq.cell", "lstm"},  // lstm | gru
        {"seq.layers", "2"},
        {"seq.hidden", "500"},
        {"seq.horizon", "5"},
        {"seq.context", "0"},       // 0 resolves to T - horizon
        {"seq.subsample", "all"},   // all | even_indices
        // execution
        {"run.jobs", "0"},  // 0 = hardware concurrency
    };
    return d;
}

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    RunConfig cfg;
    cfg.load_file(path);
    return cfg;
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        set(std::string(trim(sv.substr(0, eq))), std::string(trim(sv.substr(eq + 1))));
    }
}

void RunConfig::apply_overrides(const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kv);
        set(std::string(trim(std::string_view(kv).substr(0, eq))),
            std::string(trim(std::string_view(kv).substr(eq + 1))));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (defaults().find(key) == defaults().end())
        throw ConfigError("unknown config key '" + key + "'");
    values_[key] = value;
}

const std::string& RunConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

int RunConfig::get_int(const std::string& key) const {
    const std::string& s = get(key);
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "' is not an integer: " + s);
    return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
    const std::string& s = get(key);
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "' is not an unsigned integer: " + s);
    return v;
}

double RunConfig::get_double(const std::string& key) const {
    const std::string& s = get(key);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("config key '" + key + "' is not a number: " + s);
    return v;
}

std::pair<double, double> RunConfig::get_range(const std::string& key) const {
    const std::string& s = get(key);
    auto colon = s.find(':');
    if (colon == std::string::npos)
        throw ConfigError("config key '" + key + "' must be lo:hi, got " + s);
    auto parse = [&](std::string_view part) {
        double v = 0.0;
        auto res = std::from_chars(part.data(), part.data() + part.size(), v);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
            throw ConfigError("config key '" + key + "' has a bad bound: " + std::string(part));
        return v;
    };
    std::string_view sv(s);
    return {parse(trim(sv.substr(0, colon))), parse(trim(sv.substr(colon + 1)))};
}

}  // namespace pfl::io
