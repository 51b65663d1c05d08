#pragma once

#include <array>
#include <bit>
#include <cassert>
#include <cstdint>

// Word-level bit kernels. Everything here works on 64-bit words and uses
// only shifts, masks and multiplications (no hardware popcount/tzcnt).

namespace qsi {

using Word = std::uint64_t;

inline constexpr unsigned word_bits = 64;

namespace broadword {

inline constexpr Word ones_step_4 = 0x1111111111111111ULL;
inline constexpr Word ones_step_8 = 0x0101010101010101ULL;
inline constexpr Word msbs_step_8 = 0x80ULL * ones_step_8;

inline constexpr Word debruijn64 = 0x03f79d71b4cb0a89ULL;

namespace detail {

constexpr std::array<std::uint8_t, 64> make_debruijn_table()
{
    std::array<std::uint8_t, 64> table{};
    for (unsigned i = 0; i < 64; ++i) {
        table[((Word(1) << i) * debruijn64) >> 58] = static_cast<std::uint8_t>(i);
    }
    return table;
}

// lsb of every nonzero byte; entry 0 is unused
constexpr std::array<std::uint8_t, 256> make_lsb_byte_table()
{
    std::array<std::uint8_t, 256> table{};
    for (unsigned b = 1; b < 256; ++b) {
        unsigned i = 0;
        while (((b >> i) & 1) == 0) {
            ++i;
        }
        table[b] = static_cast<std::uint8_t>(i);
    }
    return table;
}

// entry (byte | rank << 8): position of the rank-th one in byte, 8 if absent
constexpr std::array<std::uint8_t, 2048> make_select_in_byte_table()
{
    std::array<std::uint8_t, 2048> table{};
    for (unsigned rank = 0; rank < 8; ++rank) {
        for (unsigned b = 0; b < 256; ++b) {
            unsigned seen = 0;
            std::uint8_t where = 8;
            for (unsigned i = 0; i < 8; ++i) {
                if ((b >> i) & 1) {
                    if (seen == rank) {
                        where = static_cast<std::uint8_t>(i);
                        break;
                    }
                    ++seen;
                }
            }
            table[b | (rank << 8)] = where;
        }
    }
    return table;
}

inline constexpr auto debruijn_table = make_debruijn_table();
inline constexpr auto lsb_byte_table = make_lsb_byte_table();
inline constexpr auto select_in_byte_table = make_select_in_byte_table();

} // namespace detail

/// Index of the lowest set bit using a de Bruijn multiplication. w must be nonzero.
constexpr unsigned lsb_debruijn(Word w)
{
    assert(w != 0);
    return detail::debruijn_table[((w & (~w + 1)) * debruijn64) >> 58];
}

/// Index of the lowest set bit. Tries an 8-bit table first (upper-bits
/// arrays are dense, so the low byte usually has a one), then falls back to
/// the de Bruijn lookup. w must be nonzero.
constexpr unsigned least_significant_bit(Word w)
{
    assert(w != 0);
    if (w & 0xFF) {
        return detail::lsb_byte_table[w & 0xFF];
    }
    return lsb_debruijn(w);
}

/// Per-byte population counts packed in a word.
constexpr Word byte_counts(Word w)
{
    w = w - ((w & 0xa * ones_step_4) >> 1);
    w = (w & 3 * ones_step_4) + ((w >> 2) & 3 * ones_step_4);
    return (w + (w >> 4)) & 0x0f * ones_step_8;
}

/// Number of set bits (sideways addition).
constexpr unsigned sideways_addition(Word w)
{
    return static_cast<unsigned>((byte_counts(w) * ones_step_8) >> 56);
}

/// Position of the (rank+1)-th set bit of w. Requires rank < sideways_addition(w).
constexpr unsigned select_in_word(Word w, unsigned rank)
{
    assert(rank < sideways_addition(w));
    const Word byte_sums = byte_counts(w) * ones_step_8;
    const Word rank_step_8 = Word(rank) * ones_step_8;
    // msb of byte j is set iff the ones in bytes 0..j are at most rank
    const Word leq = ((rank_step_8 | msbs_step_8) - byte_sums) & msbs_step_8;
    const unsigned place = sideways_addition(leq) * 8;
    const unsigned byte_rank = rank - static_cast<unsigned>(((byte_sums << 8) >> place) & 0xFF);
    return place + detail::select_in_byte_table[((w >> place) & 0xFF) | (byte_rank << 8)];
}

/// Mask with the low `width` bits set; width may be 64.
constexpr Word low_mask(unsigned width)
{
    return width >= 64 ? ~Word(0) : (Word(1) << width) - 1;
}

/// ceil(log2(x + 1)), i.e. the number of bits needed to write x.
constexpr unsigned bit_length(std::uint64_t x)
{
    return static_cast<unsigned>(std::bit_width(x));
}

} // namespace broadword
} // namespace qsi
