#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pfl::io {

// Run configuration: a key=value text file ('#' starts a comment) overlaid
// with command-line overrides. Only keys present in the registry are
// accepted; anything else is a ConfigError (typo protection).
class RunConfig {
  public:
    // Registry of known keys and their defaults.
    static const std::map<std::string, std::string>& defaults();

    RunConfig();  // all defaults

    static RunConfig from_file(const std::filesystem::path& path);
    void load_file(const std::filesystem::path& path);
    // "key=value" strings, e.g. from repeated --set flags.
    void apply_overrides(const std::vector<std::string>& overrides);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    // "lo:hi" pair
    std::pair<double, double> get_range(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace pfl::io
