#pragma once

// Shared test utilities, in particular the independent oracles the unit and
// acceptance suites check the library against. Everything here is written
// from the definitions directly (double loops, Jacobi rotations, central
// differences) and must stay independent of the library implementations it
// is used to verify.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "pfl/grid.hpp"
#include "pfl/spectral.hpp"

namespace testutil {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using cd = std::complex<double>;

// ---------------------------------------------------------------------------
// Random data (seeded, engine-only draws so values are stable everywhere)

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                              double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = lo + u01(rng) * (hi - lo);
    return m;
}

inline VectorXd random_vector(Eigen::Index n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + u01(rng) * (hi - lo);
    return v;
}

inline pfl::Field2D random_field(const pfl::GridSpec& grid, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
    std::mt19937_64 rng(seed);
    pfl::Field2D f(grid);
    for (double& v : f.values) v = lo + u01(rng) * (hi - lo);
    return f;
}

// Gaussian-ish samples via sum of uniforms (Irwin-Hall, variance 1).
inline MatrixXd random_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int k = 0; k < 12; ++k) s += u01(rng);
            m(r, c) = s - 6.0;
        }
    return m;
}

// ---------------------------------------------------------------------------
// Brute-force O(N^4) DFT oracle

inline std::vector<cd> brute_force_dft2(const pfl::Field2D& f) {
    const int nx = f.grid.nx, ny = f.grid.ny;
    std::vector<cd> out(static_cast<std::size_t>(nx) * ny);
    for (int q = 0; q < ny; ++q) {
        for (int p = 0; p < nx; ++p) {
            cd acc(0.0, 0.0);
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    double ang = -2.0 * std::numbers::pi *
                                 (static_cast<double>(p) * i / nx + static_cast<double>(q) * j / ny);
                    acc += f.at(i, j) * cd(std::cos(ang), std::sin(ang));
                }
            }
            out[static_cast<std::size_t>(q) * nx + p] = acc;
        }
    }
    return out;
}

inline std::vector<cd> brute_force_idft2(const std::vector<cd>& spec, int nx, int ny) {
    std::vector<cd> out(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            cd acc(0.0, 0.0);
            for (int q = 0; q < ny; ++q) {
                for (int p = 0; p < nx; ++p) {
                    double ang = 2.0 * std::numbers::pi *
                                 (static_cast<double>(p) * i / nx + static_cast<double>(q) * j / ny);
                    acc += spec[static_cast<std::size_t>(q) * nx + p] * cd(std::cos(ang), std::sin(ang));
                }
            }
            out[static_cast<std::size_t>(j) * nx + i] = acc / static_cast<double>(nx * ny);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver oracle for symmetric matrices

struct JacobiResult {
    VectorXd eigenvalues;  // descending
    MatrixXd eigenvectors; // columns, matching order
};

inline JacobiResult jacobi_eigen_sym(MatrixXd a) {
    const Eigen::Index n = a.rows();
    MatrixXd v = MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    // sort descending by eigenvalue
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
    JacobiResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        res.eigenvalues(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        res.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Central finite differences over a model's flat parameter view

// params: vector of (pointer, size) pairs; loss: callable () -> double.
template <typename Loss>
inline std::vector<double> fd_gradient(const std::vector<std::pair<double*, long>>& params,
                                       Loss loss, double eps = 1e-5) {
    std::vector<double> grad;
    for (const auto& [data, size] : params) {
        for (long i = 0; i < size; ++i) {
            double saved = data[i];
            data[i] = saved + eps;
            double up = loss();
            data[i] = saved - eps;
            double down = loss();
            data[i] = saved;
            grad.push_back((up - down) / (2.0 * eps));
        }
    }
    return grad;
}

// Per-entry relative error with an absolute floor: central differences at
// eps=1e-5 resolve absolute values only to ~1e-11, so entries below the floor
// are compared against the floor instead of their own magnitude. Genuine
// gradient defects show up as O(1) relative error on the large entries.
inline double max_rel_error(const std::vector<double>& got, const std::vector<double>& want,
                            double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        double denom = std::max({std::abs(got[i]), std::abs(want[i]), floor});
        worst = std::max(worst, std::abs(got[i] - want[i]) / denom);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Independent reference readers (documented formats, no library code)

struct RefTensor {
    std::vector<std::uint64_t> dims;
    std::vector<float> values;
};

// Reference reader for the tensor container format; mirrors the documented
// byte layout and nothing else.
inline RefTensor reference_read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("reference reader: cannot open " + path.string());
    auto u32 = [&in]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    auto u64 = [&in]() {
        std::uint64_t v = 0;
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    };
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "PFDS") throw std::runtime_error("reference reader: bad magic");
    if (u32() != 1) throw std::runtime_error("reference reader: bad version");
    if (u32() != 1) throw std::runtime_error("reference reader: bad dtype");
    std::uint32_t rank = u32();
    RefTensor t;
    std::uint64_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        t.dims.push_back(u64());
        n *= t.dims.back();
    }
    t.values.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint32_t bits = u32();
        float f;
        std::memcpy(&f, &bits, 4);
        t.values[i] = f;
    }
    if (!in) throw std::runtime_error("reference reader: truncated payload");
    in.peek();
    if (!in.eof()) throw std::runtime_error("reference reader: trailing bytes");
    return t;
}

// Reference PGM/PPM reader (binary, maxval 255).
struct RefImage {
    int width = 0, height = 0, channels = 1;
    std::vector<unsigned char> pixels;
};

inline RefImage reference_read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("reference reader: cannot open " + path.string());
    std::string magic;
    in >> magic;
    RefImage img;
    if (magic == "P5")
        img.channels = 1;
    else if (magic == "P6")
        img.channels = 3;
    else
        throw std::runtime_error("reference reader: bad image magic");
    int maxval = 0;
    in >> img.width >> img.height >> maxval;
    if (maxval != 255) throw std::runtime_error("reference reader: expected maxval 255");
    in.get();
    std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
    img.pixels.resize(n);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(n));
    if (!in || static_cast<std::size_t>(in.gcount()) != n)
        throw std::runtime_error("reference reader: truncated pixels");
    return img;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Model files are a text header terminated by "---\n" followed by
// concatenated tensor containers; parse every embedded tensor with the same
// reference byte logic.
inline std::vector<RefTensor> reference_read_model_tensors(const std::filesystem::path& path) {
    auto bytes = read_file_bytes(path);
    const std::string sep = "\n---\n";
    auto it = std::search(bytes.begin(), bytes.end(), sep.begin(), sep.end());
    if (it == bytes.end()) throw std::runtime_error("reference reader: no header terminator");
    std::size_t offset = static_cast<std::size_t>(it - bytes.begin()) + sep.size();

    std::vector<RefTensor> tensors;
    while (offset < bytes.size()) {
        auto u32 = [&](std::size_t at) {
            return static_cast<std::uint32_t>(bytes[at]) | (static_cast<std::uint32_t>(bytes[at + 1]) << 8) |
                   (static_cast<std::uint32_t>(bytes[at + 2]) << 16) |
                   (static_cast<std::uint32_t>(bytes[at + 3]) << 24);
        };
        auto u64 = [&](std::size_t at) {
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
            return v;
        };
        if (offset + 16 > bytes.size()) throw std::runtime_error("reference reader: truncated tensor");
        if (std::string(bytes.begin() + static_cast<long>(offset),
                        bytes.begin() + static_cast<long>(offset) + 4) != "PFDS")
            throw std::runtime_error("reference reader: bad embedded magic");
        if (u32(offset + 4) != 1 || u32(offset + 8) != 1)
            throw std::runtime_error("reference reader: bad embedded version/dtype");
        std::uint32_t rank = u32(offset + 12);
        offset += 16;
        RefTensor t;
        std::uint64_t n = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            t.dims.push_back(u64(offset));
            n *= t.dims.back();
            offset += 8;
        }
        if (offset + 4 * n > bytes.size()) throw std::runtime_error("reference reader: truncated payload");
        t.values.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint32_t b = u32(offset + 4 * i);
            float f;
            std::memcpy(&f, &b, 4);
            t.values[i] = f;
        }
        offset += 4 * n;
        tensors.push_back(std::move(t));
    }
    return tensors;
}

}  // namespace testutil
