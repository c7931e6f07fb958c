#include "pfl/image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "pfl/errors.hpp"

namespace pfl::io {

namespace {

unsigned char quantize(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::lround(255.0 * v));
}

std::vector<unsigned char> encode(const Field2D& frame, int channels) {
    std::string header = (channels == 1 ? "P5\n" : "P6\n");
    header += std::to_string(frame.grid.nx) + " " + std::to_string(frame.grid.ny) + "\n255\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + frame.values.size() * static_cast<std::size_t>(channels));
    for (double v : frame.values) {
        unsigned char q = quantize(v);
        for (int c = 0; c < channels; ++c) bytes.push_back(q);
    }
    return bytes;
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Field2D decode(const std::filesystem::path& path, int channels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    const std::string what = path.filename().string();

    std::string magic;
    in >> magic;
    if ((channels == 1 && magic != "P5") || (channels == 3 && magic != "P6"))
        throw FormatError(what + ": unexpected magic " + magic);
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w < 1 || h < 1) throw FormatError(what + ": bad dimensions");
    if (maxval != 255) throw FormatError(what + ": expected maxval 255");
    in.get();  // single whitespace after maxval

    Field2D frame(GridSpec{w, h, 1.0, 1.0});
    std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) *
                    static_cast<std::size_t>(channels);
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
    if (!in || static_cast<std::size_t>(in.gcount()) != n)
        throw FormatError(what + ": truncated pixel data");
    for (std::size_t i = 0; i < frame.values.size(); ++i) {
        if (channels == 1) {
            frame.values[i] = buf[i] / 255.0;
        } else {
            frame.values[i] =
                (static_cast<double>(buf[3 * i]) + buf[3 * i + 1] + buf[3 * i + 2]) / (3.0 * 255.0);
        }
    }
    return frame;
}

}  // namespace

std::vector<unsigned char> encode_pgm(const Field2D& frame) { return encode(frame, 1); }
std::vector<unsigned char> encode_ppm(const Field2D& frame) { return encode(frame, 3); }

void write_pgm(const std::filesystem::path& path, const Field2D& frame) {
    write_bytes(path, encode_pgm(frame));
}

void write_ppm(const std::filesystem::path& path, const Field2D& frame) {
    write_bytes(path, encode_ppm(frame));
}

Field2D read_pgm(const std::filesystem::path& path) { return decode(path, 1); }
Field2D read_ppm(const std::filesystem::path& path) { return decode(path, 3); }

}  // namespace pfl::io
