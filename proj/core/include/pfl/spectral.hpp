#pragma once

#include <complex>
#include <vector>

#include "pfl/grid.hpp"

namespace pfl::spectral {

// Full complex 2D spectrum, row-major: values[q*nx + p] holds mode (p, q).
// Spectra of real fields satisfy S(p,q) == conj(S(-p mod nx, -q mod ny)).
struct Spectrum2D {
    GridSpec grid;
    std::vector<std::complex<double>> values;
};

// Per-mode |k|^2 and |k|^4 tables for the periodic Laplacian/biharmonic in
// Fourier space. Same row-major layout as Spectrum2D.
struct WaveTable {
    GridSpec grid;
    std::vector<double> k2;
    std::vector<double> k4;
};

// Mode (p,q) gets k2 = kx(p)^2 + ky(q)^2 with kx(p) = 2*pi*f(p)/(nx*dx),
// f(p) = p for p <= nx/2 and p - nx otherwise (same along y).
WaveTable wave_table(const GridSpec& grid);

// Unnormalized forward transform:
//   S(p,q) = sum_{i,j} X(i,j) * exp(-2*pi*I*(p*i/nx + q*j/ny))
// Power-of-two axes use an iterative radix-2 FFT; any other even size falls
// back to a direct per-axis DFT.
Spectrum2D dft2_forward(const Field2D& field);

// Normalized inverse (divides by nx*ny) returning the real part. The largest
// |imaginary| component of the inverse is written to *max_imag_residue when
// supplied. Throws ImaginaryResidueTooLarge above 1e-6: the spectrum did not
// come from a real field.
Field2D dft2_inverse(const Spectrum2D& spec, double* max_imag_residue = nullptr);

}  // namespace pfl::spectral
