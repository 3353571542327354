// fft.hpp -- radix-2 FFT, just enough for long truncated convolutions.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "latticelab/errors.hpp"

namespace latticelab {

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error("fft length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

// First out_len entries of the linear convolution u*v. Falls back to the
// direct sum for short inputs where FFT padding is not worth it.
inline std::vector<double> convolve_truncated(const std::vector<double>& u, const std::vector<double>& v,
                                              std::size_t out_len) {
    std::vector<double> out(out_len, 0.0);
    if (u.empty() || v.empty() || out_len == 0) return out;
    if (out_len * std::min(u.size(), v.size()) <= (1u << 22)) {
        for (std::size_t i = 0; i < std::min(u.size(), out_len); ++i) {
            if (u[i] == 0.0) continue;
            const std::size_t jmax = std::min(v.size(), out_len - i);
            for (std::size_t j = 0; j < jmax; ++j) out[i + j] += u[i] * v[j];
        }
        return out;
    }
    const std::size_t need = std::min(u.size(), out_len) + std::min(v.size(), out_len) - 1;
    std::size_t n = 1;
    while (n < need) n <<= 1;
    std::vector<std::complex<double>> fu(n), fv(n);
    for (std::size_t i = 0; i < std::min(u.size(), out_len); ++i) fu[i] = u[i];
    for (std::size_t i = 0; i < std::min(v.size(), out_len); ++i) fv[i] = v[i];
    fft_inplace(fu, false);
    fft_inplace(fv, false);
    for (std::size_t i = 0; i < n; ++i) fu[i] *= fv[i];
    fft_inplace(fu, true);
    for (std::size_t i = 0; i < out_len; ++i) out[i] = fu[i].real();
    return out;
}

} // namespace latticelab
