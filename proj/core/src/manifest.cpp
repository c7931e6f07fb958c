#include "pfl/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pfl/container.hpp"
#include "pfl/errors.hpp"

namespace pfl::io {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <typename T>
T parse_num(std::string_view s, const char* what) {
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw FormatError(std::string("manifest: bad ") + what + " '" + std::string(s) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

}  // namespace

std::string emit_manifest(const Manifest& m) {
    std::ostringstream out;
    out << "pfl-manifest 1";
    if (!m.settings.empty()) out << " " << m.settings;
    out << "\n";
    for (const auto& r : m.records) {
        out << r.sample_id << "," << fmt_double(r.x0) << "," << fmt_double(r.mobility) << ","
            << fmt_double(r.kappa) << "," << r.seed << "," << r.status << "\n";
    }
    return out.str();
}

Manifest parse_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("manifest: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("pfl-manifest 1", 0) != 0) throw FormatError("manifest: bad header line");

    Manifest m;
    if (line.size() > 14) m.settings = line.substr(15);

    std::uint64_t expect_id = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto parts = split(line, ',');
        if (parts.size() != 6) throw FormatError("manifest: record needs 6 fields: " + line);
        ManifestRecord r;
        r.sample_id = parse_num<std::uint64_t>(parts[0], "sample_id");
        if (r.sample_id != expect_id)
            throw FormatError("manifest: sample_ids must be dense from 0");
        ++expect_id;
        r.x0 = parse_num<double>(parts[1], "x0");
        r.mobility = parse_num<double>(parts[2], "mobility");
        r.kappa = parse_num<double>(parts[3], "kappa");
        r.seed = parse_num<std::uint64_t>(parts[4], "seed");
        r.status = std::string(parts[5]);
        if (r.status != "ok" && r.status != "failed")
            throw FormatError("manifest: status must be ok or failed");
        m.records.push_back(std::move(r));
    }
    return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str());
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
    write_text_atomic(path, emit_manifest(m));
}

}  // namespace pfl::io
