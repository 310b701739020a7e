#pragma once

// Reference computations written independently of the library code they
// check: bit-by-bit field extraction, exact polynomial evaluation, modular
// phase arithmetic and a dense natural-spline solve.

#include <awm/bits.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

__extension__ using i128 = __int128;
__extension__ using u128 = unsigned __int128;

inline bool bit_at(const awm::Word256 &w, unsigned i)
{
    return (w[i / 8] >> (i % 8)) & 1u;
}

/// Unsigned field read one bit at a time.
inline std::uint64_t field(const awm::Word256 &w, unsigned offset, unsigned width)
{
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i)
        if (bit_at(w, offset + i))
            v |= std::uint64_t{1} << i;
    return v;
}

/// Signed field read one bit at a time.
inline std::int64_t signed_field(const awm::Word256 &w, unsigned offset, unsigned width)
{
    i128 v = static_cast<i128>(field(w, offset, width));
    if (bit_at(w, offset + width - 1))
        v -= i128{1} << width;
    return static_cast<std::int64_t>(v);
}

/// Reduce into [-2^(bits-1), 2^(bits-1)).
inline std::int64_t wrap(i128 v, unsigned bits)
{
    i128 m = i128{1} << bits;
    v %= m;
    if (v < 0)
        v += m;
    if (v >= m / 2)
        v -= m;
    return static_cast<std::int64_t>(v);
}

/// c0 + c1 k + c2 k^2 + c3 k^3 in wide integers, wrapped to `bits`.
inline std::int64_t cubic(std::int64_t c0, std::int64_t c1, std::int64_t c2, std::int64_t c3, std::int64_t k,
                          unsigned bits = 40)
{
    i128 kk = k;
    return wrap(i128(c0) + i128(c1) * kk + i128(c2) * kk * kk + i128(c3) * kk * kk * kk, bits);
}

/// (a * b) mod 2^bits.
inline std::uint64_t mod_mul(std::uint64_t a, std::uint64_t b, unsigned bits)
{
    u128 p = u128(a) * u128(b);
    return static_cast<std::uint64_t>(bits >= 64 ? p : p % (u128{1} << bits));
}

inline std::uint64_t mod_add(std::uint64_t a, std::uint64_t b, unsigned bits)
{
    u128 s = u128(a) + u128(b);
    return static_cast<std::uint64_t>(bits >= 64 ? s : s % (u128{1} << bits));
}

/// Natural cubic spline through (t_i, v_i) by dense Gaussian elimination on
/// the full (n x n) system, evaluated at t.
struct DenseSpline {
    std::vector<double> t, v, m;

    DenseSpline(std::vector<double> times, std::vector<double> values) : t(std::move(times)), v(std::move(values))
    {
        std::size_t n = t.size();
        std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
        a[0][0] = 1.0;
        a[n - 1][n - 1] = 1.0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
            a[i][i - 1] = h0;
            a[i][i] = 2 * (h0 + h1);
            a[i][i + 1] = h1;
            a[i][n] = 6 * ((v[i + 1] - v[i]) / h1 - (v[i] - v[i - 1]) / h0);
        }
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c]))
                    piv = r;
            std::swap(a[c], a[piv]);
            for (std::size_t r = 0; r < n; ++r) {
                if (r == c)
                    continue;
                double f = a[r][c] / a[c][c];
                for (std::size_t k = c; k <= n; ++k)
                    a[r][k] -= f * a[c][k];
            }
        }
        m.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            m[i] = a[i][n] / a[i][i];
    }

    double operator()(double x) const
    {
        std::size_t i = 0;
        while (i + 2 < t.size() && x >= t[i + 1])
            ++i;
        double h = t[i + 1] - t[i];
        double a = (t[i + 1] - x) / h, b = (x - t[i]) / h;
        return a * v[i] + b * v[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    }
};

} // namespace oracle
