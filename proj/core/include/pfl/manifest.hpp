#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pfl::io {

// Sweep manifest: one header line
//   pfl-manifest 1 <key=value settings...>
// then one record per line:
//   sample_id,x0,mobility,kappa,seed,status
// Numeric fields use shortest round-trip decimals, so they re-parse exactly.
// sample_ids must be unique and dense from 0.
struct ManifestRecord {
    std::uint64_t sample_id = 0;
    double x0 = 0.0;
    double mobility = 0.0;
    double kappa = 0.0;
    std::uint64_t seed = 0;
    std::string status;  // "ok" or "failed"

    bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
    std::string settings;  // free-form key=value summary of the sweep
    std::vector<ManifestRecord> records;

    bool operator==(const Manifest&) const = default;
};

std::string emit_manifest(const Manifest& m);
Manifest parse_manifest(const std::string& text);

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

}  // namespace pfl::io
