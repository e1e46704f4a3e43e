#include "opuclab/fft.hpp"

#include <map>
#include <stdexcept>
#include <utility>

namespace opuclab {

namespace {

// Roots e^{-2 pi i k/N} for k < N/2, reused across calls of the same size.
const std::vector<Cx>& twiddles(std::size_t n) {
  thread_local std::map<std::pair<std::size_t, unsigned>, std::vector<Cx>> cache;
  unsigned digits = Real::default_precision();
  auto key = std::make_pair(n, digits);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<Cx> w(n / 2);
  Real step = -2 * pi_val() / static_cast<long>(n);
  // Compute by angle, not by repeated multiplication, to avoid error growth.
  for (std::size_t k = 0; k < n / 2; k++) w[k] = unit(step * static_cast<long>(k));
  return cache.emplace(key, std::move(w)).first->second;
}

}  // namespace

void fft_pow2(std::vector<Cx>& a, bool inverse) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");
  if (n == 1) return;

  if (inverse)
    for (auto& x : a) x.im = -x.im;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; i++) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  const std::vector<Cx>& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; k++) {
        Cx u = a[i + k];
        Cx v = a[i + k + len / 2] * w[k * stride];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }

  if (inverse) {
    Real inv_n = Real(1) / static_cast<long>(n);
    for (auto& x : a) {
      x.re *= inv_n;
      x.im = -x.im * inv_n;
    }
  }
}

}  // namespace opuclab
