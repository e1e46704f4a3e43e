#pragma once

#include <vector>

#include "opuclab/cx.hpp"

namespace opuclab {

// In-place radix-2 FFT. Size must be a power of two. Forward transform
// computes X_k = sum_j a_j e^{-2 pi i jk/N}; the inverse divides by N.
// Runs at the currently active precision; twiddle factors are cached per
// (size, precision).
void fft_pow2(std::vector<Cx>& a, bool inverse);

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace opuclab
