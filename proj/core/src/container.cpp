#include "pfl/container.hpp"

#include <bit>
#include <cstring>

#include "pfl/errors.hpp"

namespace pfl::io {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeF32 = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void write_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const std::string& what) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw FormatError(what + ": truncated header");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

void write_payload(std::ostream& out, std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
        for (float f : values) write_le(out, std::bit_cast<std::uint32_t>(f));
    }
}

std::uint64_t checked_element_count(std::span<const std::uint64_t> dims, const std::string& what) {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) {
        if (d == 0) throw FormatError(what + ": zero-sized dimension");
        if (n > UINT64_MAX / d) throw FormatError(what + ": dimension overflow");
        n *= d;
    }
    return n;
}

}  // namespace

std::uint64_t TensorData::element_count() const {
    std::uint64_t n = 1;
    for (std::uint64_t d : dims) n *= d;
    return n;
}

TensorData read_tensor(std::istream& in, const std::string& what) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw FormatError(what + ": bad magic");
    auto version = read_le<std::uint32_t>(in, what);
    if (version != kVersion) throw FormatError(what + ": unsupported version");
    auto dtype = read_le<std::uint32_t>(in, what);
    if (dtype != kDtypeF32) throw FormatError(what + ": unsupported dtype");
    auto rank = read_le<std::uint32_t>(in, what);
    if (rank == 0 || rank > 8) throw FormatError(what + ": unreasonable rank");

    TensorData t;
    t.dims.resize(rank);
    for (auto& d : t.dims) d = read_le<std::uint64_t>(in, what);
    std::uint64_t n = checked_element_count(t.dims, what);

    t.values.resize(n);
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(t.values.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in || static_cast<std::uint64_t>(in.gcount()) != n * sizeof(float))
            throw FormatError(what + ": payload shorter than dims require");
    } else {
        for (auto& f : t.values) f = std::bit_cast<float>(read_le<std::uint32_t>(in, what));
    }
    // Must be exactly at end-of-payload for standalone files; callers reading
    // concatenated tensors manage stream position themselves.
    return t;
}

TensorData read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    TensorData t = read_tensor(in, path.filename().string());
    in.peek();
    if (!in.eof()) throw FormatError(path.filename().string() + ": trailing bytes after payload");
    return t;
}

void write_tensor(std::ostream& out, std::span<const std::uint64_t> dims,
                  std::span<const float> values) {
    std::uint64_t n = checked_element_count(dims, "write_tensor");
    if (n != values.size()) throw FormatError("write_tensor: dims do not match value count");
    out.write(kMagic, 4);
    write_le(out, kVersion);
    write_le(out, kDtypeF32);
    write_le(out, static_cast<std::uint32_t>(dims.size()));
    for (std::uint64_t d : dims) write_le(out, d);
    write_payload(out, values);
}

void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> values) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        write_tensor(out, dims, values);
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_tensor_f64(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                      std::span<const double> values) {
    std::vector<float> f(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) f[i] = static_cast<float>(values[i]);
    write_tensor(path, dims, f);
}

TensorWriter::TensorWriter(const std::filesystem::path& path, std::span<const std::uint64_t> dims)
    : path_(path), tmp_(path) {
    tmp_ += ".tmp";
    expected_ = checked_element_count(dims, "TensorWriter");
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw ConfigError("cannot open " + tmp_.string() + " for writing");
    out_.write(kMagic, 4);
    write_le(out_, kVersion);
    write_le(out_, kDtypeF32);
    write_le(out_, static_cast<std::uint32_t>(dims.size()));
    for (std::uint64_t d : dims) write_le(out_, d);
}

TensorWriter::~TensorWriter() {
    if (!finished_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void TensorWriter::append(std::span<const float> values) {
    if (finished_) throw FormatError("TensorWriter: append after finish");
    write_payload(out_, values);
    written_ += values.size();
    if (written_ > expected_) throw FormatError("TensorWriter: more values than dims allow");
}

void TensorWriter::append_f64(std::span<const double> values) {
    std::vector<float> f(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) f[i] = static_cast<float>(values[i]);
    append(f);
}

void TensorWriter::finish() {
    if (finished_) return;
    if (written_ != expected_)
        throw FormatError("TensorWriter: value count does not match dims");
    out_.close();
    if (!out_) throw ConfigError("write failed: " + tmp_.string());
    std::filesystem::rename(tmp_, path_);
    finished_ = true;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw ConfigError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace pfl::io
