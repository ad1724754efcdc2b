#pragma once

// Small self-contained FFT: iterative radix-2 for power-of-two sizes,
// Bluestein's chirp-z trick for everything else (MDCT block lengths are
// even but rarely powers of two). Double precision throughout.

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace chirppose::dsp {

using cplx = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place radix-2 Cooley-Tukey. inverse=true gives the unscaled inverse
// transform; divide by n yourself if you want the true inverse.
inline void fft_pow2(std::vector<cplx>& a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (!is_pow2(n)) throw std::invalid_argument("fft_pow2: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Arbitrary-size DFT via Bluestein. Returns the transform of `a`
// (unscaled inverse when inverse=true, same convention as fft_pow2).
inline std::vector<cplx> fft(std::vector<cplx> a, bool inverse = false) {
    const std::size_t n = a.size();
    if (n <= 1) return a;
    if (is_pow2(n)) {
        fft_pow2(a, inverse);
        return a;
    }

    // x_k = w^{k^2/2} * sum_m (a_m w^{m^2/2}) w^{-(k-m)^2/2}: a convolution,
    // evaluated with power-of-two FFTs of length >= 2n-1.
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cplx> w(n);  // w[k] = exp(sign * i*pi*k^2/n)
    for (std::size_t k = 0; k < n; ++k) {
        // Reducing k^2 mod 2n keeps the phase argument small and exact.
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = sign * kPi * static_cast<double>(k2) / static_cast<double>(n);
        w[k] = cplx(std::cos(ang), std::sin(ang));
    }

    const std::size_t m = next_pow2(2 * n - 1);
    std::vector<cplx> fa(m, cplx(0, 0)), fb(m, cplx(0, 0));
    for (std::size_t k = 0; k < n; ++k) fa[k] = a[k] * w[k];
    fb[0] = std::conj(w[0]);
    for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(w[k]);

    fft_pow2(fa, false);
    fft_pow2(fb, false);
    for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    fft_pow2(fa, true);

    std::vector<cplx> out(n);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) out[k] = fa[k] * inv_m * w[k];
    return out;
}

}  // namespace chirppose::dsp
