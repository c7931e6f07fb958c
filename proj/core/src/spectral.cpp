#include "pfl/spectral.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "pfl/errors.hpp"

namespace pfl::spectral {

namespace {

using cd = std::complex<double>;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Forward-direction roots of unity, exp(-2*pi*I*k/n) for k in [0, n).
// Cached per transform length; thread_local so concurrent solves never share
// mutable state.
const std::vector<cd>& roots_for(int n) {
    thread_local std::unordered_map<int, std::vector<cd>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cd> r(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        r[static_cast<std::size_t>(k)] = cd(std::cos(ang), std::sin(ang));
    }
    it = cache.emplace(n, std::move(r)).first;
    return it->second;
}

// In-place iterative radix-2 Cooley-Tukey. inverse=true conjugates the
// twiddles; no normalization either way.
void fft_pow2(cd* a, int n, bool inverse) {
    const auto& roots = roots_for(n);
    // bit-reversal permutation
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        int step = n / len;
        int half = len / 2;
        for (int i = 0; i < n; i += len) {
            for (int k = 0; k < half; ++k) {
                cd w = roots[static_cast<std::size_t>(k * step)];
                if (inverse) w = std::conj(w);
                cd u = a[i + k];
                cd v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

// Direct O(n^2) transform for even non-power-of-two lengths.
void dft_direct(const cd* in, cd* out, int n, bool inverse) {
    const auto& roots = roots_for(n);
    for (int p = 0; p < n; ++p) {
        cd acc(0.0, 0.0);
        for (int m = 0; m < n; ++m) {
            cd w = roots[static_cast<std::size_t>((static_cast<long long>(p) * m) % n)];
            if (inverse) w = std::conj(w);
            acc += in[m] * w;
        }
        out[p] = acc;
    }
}

void transform_1d(cd* line, cd* scratch, int n, bool inverse) {
    if (is_pow2(n)) {
        fft_pow2(line, n, inverse);
    } else {
        dft_direct(line, scratch, n, inverse);
        std::copy(scratch, scratch + n, line);
    }
}

// Row-column 2D transform over a row-major nx-by-ny complex buffer.
void transform_2d(std::vector<cd>& a, const GridSpec& g, bool inverse) {
    const int nx = g.nx, ny = g.ny;
    std::vector<cd> scratch(static_cast<std::size_t>(std::max(nx, ny)));
    for (int j = 0; j < ny; ++j)
        transform_1d(a.data() + static_cast<std::size_t>(j) * nx, scratch.data(), nx, inverse);
    std::vector<cd> col(static_cast<std::size_t>(ny));
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) col[static_cast<std::size_t>(j)] = a[static_cast<std::size_t>(j) * nx + i];
        transform_1d(col.data(), scratch.data(), ny, inverse);
        for (int j = 0; j < ny; ++j) a[static_cast<std::size_t>(j) * nx + i] = col[static_cast<std::size_t>(j)];
    }
}

}  // namespace

WaveTable wave_table(const GridSpec& grid) {
    grid.validate();
    WaveTable wt;
    wt.grid = grid;
    wt.k2.resize(static_cast<std::size_t>(grid.size()));
    wt.k4.resize(static_cast<std::size_t>(grid.size()));
    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j < grid.ny; ++j) {
        int fy = (j <= grid.ny / 2) ? j : j - grid.ny;
        double ky = two_pi * static_cast<double>(fy) / (grid.ny * grid.dy);
        for (int i = 0; i < grid.nx; ++i) {
            int fx = (i <= grid.nx / 2) ? i : i - grid.nx;
            double kx = two_pi * static_cast<double>(fx) / (grid.nx * grid.dx);
            double k2 = kx * kx + ky * ky;
            std::size_t idx = static_cast<std::size_t>(j) * grid.nx + i;
            wt.k2[idx] = k2;
            wt.k4[idx] = k2 * k2;
        }
    }
    return wt;
}

Spectrum2D dft2_forward(const Field2D& field) {
    field.grid.validate();
    if (field.values.size() != static_cast<std::size_t>(field.grid.size()))
        throw DimensionMismatch("dft2_forward: field length does not match grid");
    Spectrum2D spec;
    spec.grid = field.grid;
    spec.values.assign(field.values.begin(), field.values.end());
    transform_2d(spec.values, field.grid, /*inverse=*/false);
    return spec;
}

Field2D dft2_inverse(const Spectrum2D& spec, double* max_imag_residue) {
    spec.grid.validate();
    if (spec.values.size() != static_cast<std::size_t>(spec.grid.size()))
        throw DimensionMismatch("dft2_inverse: spectrum length does not match grid");
    std::vector<cd> a = spec.values;
    transform_2d(a, spec.grid, /*inverse=*/true);
    const double norm = 1.0 / static_cast<double>(spec.grid.size());
    Field2D out(spec.grid);
    double max_imag = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cd v = a[i] * norm;
        out.values[i] = v.real();
        max_imag = std::max(max_imag, std::abs(v.imag()));
    }
    if (max_imag_residue) *max_imag_residue = max_imag;
    if (max_imag > 1e-6)
        throw ImaginaryResidueTooLarge("dft2_inverse: spectrum is not conjugate-symmetric", max_imag);
    return out;
}

}  // namespace pfl::spectral
