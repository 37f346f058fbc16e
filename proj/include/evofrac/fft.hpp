#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace evofrac::detail {

inline bool is_power_of_two(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

/// In-place radix-2 transform, unnormalized:
///   forward:  X_k = sum_j x_j exp(-2*pi*i*j*k/n)
///   inverse:  X_j = sum_k x_k exp(+2*pi*i*j*k/n)
/// Twiddles come from a per-call table (one std::polar per distinct root), so
/// there is no incremental phase drift across stages.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("fft_radix2: length must be a power of two");
    }
    if (n == 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    std::vector<std::complex<double>> root(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        root[j] = std::polar(1.0, sign * 2.0 * std::numbers::pi * double(j) / double(n));
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t block = 0; block < n; block += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> w = root[j * stride];
                std::complex<double>& lo = a[block + j];
                std::complex<double>& hi = a[block + j + len / 2];
                const std::complex<double> t = w * hi;
                hi = lo - t;
                lo += t;
            }
        }
    }
}

}  // namespace evofrac::detail
