#pragma once

#include <array>
#include <cstdint>

namespace awm {

/// One 256-bit transfer word, stored as 32 little-endian bytes (bit 0 is the
/// LSB of byte 0).
using Word256 = std::array<std::uint8_t, 32>;

inline constexpr unsigned kWordBits = 256;

constexpr std::uint64_t low_mask(unsigned width)
{
    return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

/// Read `width` (<= 64) bits starting at bit `offset`.
constexpr std::uint64_t get_bits(const Word256 &w, unsigned offset, unsigned width)
{
    std::uint64_t v = 0;
    unsigned done = 0;
    while (done < width) {
        unsigned bit = offset + done;
        unsigned shift = bit % 8;
        unsigned take = 8 - shift;
        if (take > width - done)
            take = width - done;
        std::uint64_t chunk = (w[bit / 8] >> shift) & low_mask(take);
        v |= chunk << done;
        done += take;
    }
    return v;
}

/// Overwrite `width` (<= 64) bits starting at bit `offset`; extra high bits of
/// `value` are discarded.
constexpr void set_bits(Word256 &w, unsigned offset, unsigned width, std::uint64_t value)
{
    unsigned done = 0;
    while (done < width) {
        unsigned bit = offset + done;
        unsigned shift = bit % 8;
        unsigned take = 8 - shift;
        if (take > width - done)
            take = width - done;
        auto m = static_cast<std::uint8_t>(low_mask(take) << shift);
        auto chunk = static_cast<std::uint8_t>(((value >> done) & low_mask(take)) << shift);
        w[bit / 8] = static_cast<std::uint8_t>((w[bit / 8] & ~m) | chunk);
        done += take;
    }
}

/// Interpret the low `width` bits of `raw` as two's complement.
constexpr std::int64_t sign_extend(std::uint64_t raw, unsigned width)
{
    raw &= low_mask(width);
    if (width < 64 && (raw >> (width - 1)) & 1)
        raw |= ~low_mask(width);
    return static_cast<std::int64_t>(raw);
}

/// Reduce `v` modulo 2^width into the signed range [-2^(width-1), 2^(width-1)).
constexpr std::int64_t wrap_signed(std::int64_t v, unsigned width)
{
    return sign_extend(static_cast<std::uint64_t>(v), width);
}

constexpr bool fits_signed(std::int64_t v, unsigned width)
{
    if (width >= 64)
        return true;
    std::int64_t lim = std::int64_t{1} << (width - 1);
    return v >= -lim && v < lim;
}

constexpr bool fits_unsigned(std::uint64_t v, unsigned width)
{
    return (v & ~low_mask(width)) == 0;
}

} // namespace awm
