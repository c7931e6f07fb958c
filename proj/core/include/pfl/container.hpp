#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace pfl::io {

// Binary tensor container, all integers little-endian:
//   magic   4 bytes       'P' 'F' 'D' 'S'
//   version u32           1
//   dtype   u32           1 = 32-bit float, little-endian
//   rank    u32
//   dims    rank x u64
//   payload row-major float32 values (4 * prod(dims) bytes)
// Readers reject unknown magic/version/dtype and payloads whose byte length
// disagrees with the dims.
struct TensorData {
    std::vector<std::uint64_t> dims;
    std::vector<float> values;

    std::uint64_t element_count() const;
};

TensorData read_tensor(const std::filesystem::path& path);
TensorData read_tensor(std::istream& in, const std::string& what);

// Whole-tensor writes go through a temp file + rename.
void write_tensor(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                  std::span<const float> values);
void write_tensor(std::ostream& out, std::span<const std::uint64_t> dims,
                  std::span<const float> values);
// Convenience: rounds f64 compute values to the f32 storage dtype.
void write_tensor_f64(const std::filesystem::path& path, std::span<const std::uint64_t> dims,
                      std::span<const double> values);

// Streaming writer for containers too large to assemble in memory. Writes to
// `<path>.tmp` and renames on finish().
class TensorWriter {
  public:
    TensorWriter(const std::filesystem::path& path, std::span<const std::uint64_t> dims);
    ~TensorWriter();
    void append(std::span<const float> values);
    void append_f64(std::span<const double> values);
    void finish();

  private:
    std::filesystem::path path_, tmp_;
    std::ofstream out_;
    std::uint64_t expected_ = 0;
    std::uint64_t written_ = 0;
    bool finished_ = false;
};

// Atomic small-file text write (temp + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace pfl::io
