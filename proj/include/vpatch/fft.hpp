#pragma once

#include <complex>
#include <vector>

namespace vpatch::fft {

using cplx = std::complex<double>;

// Multi-dimensional complex DFT on a row-major grid (last axis fastest).
// forward() returns Fourier coefficients, i.e. the sum is scaled by 1/N;
// inverse() is the plain synthesis sum. Plans are cached and shared; both
// calls are safe to use from several threads.
void forward(const std::vector<int>& dims, const cplx* in, cplx* out);
void inverse(const std::vector<int>& dims, const cplx* in, cplx* out);

std::vector<cplx> forward(const std::vector<int>& dims, const std::vector<cplx>& in);
std::vector<cplx> inverse(const std::vector<int>& dims, const std::vector<cplx>& in);

// Signed wavenumber of array slot i on an axis of n points: [-n/2, n/2-1].
inline int wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }
// Array slot of wavenumber k on an axis of n points.
inline int slot(int k, int n) { return ((k % n) + n) % n; }

}  // namespace vpatch::fft
