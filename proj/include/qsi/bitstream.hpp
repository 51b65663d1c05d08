#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "broadword.hpp"

// Bit streams over arrays of 64-bit words.
//
// Bit k of a stream lives in word k / 64 at in-word position k % 64, so the
// stream is LSB-first inside each word. Fixed-width fields are written
// LSB-first as well: bit j of the value lands at stream position start + j.
//
// Codes:
//   unary(n)          n zeroes followed by a one
//   negated unary(n)  n ones followed by a zero
//   gamma(n), n >= 1  floor(log2 n) zeroes, a one, then the floor(log2 n)
//                     bits of n below its leading one, most significant first

namespace qsi {

/// Raised when a read runs past the end of a stream.
class end_of_stream : public std::runtime_error {
public:
    end_of_stream() : std::runtime_error("read past end of bit stream") {}
};

/// Reverses the low `width` bits of v.
inline std::uint64_t reverse_low_bits(std::uint64_t v, unsigned width)
{
    std::uint64_t r = 0;
    for (unsigned i = 0; i < width; ++i) {
        r = (r << 1) | ((v >> i) & 1);
    }
    return r;
}

/// Random access to `width` bits at `offset`; width <= 64.
inline std::uint64_t read_bits(std::span<const Word> words, std::uint64_t offset, unsigned width)
{
    if (width == 0) {
        return 0;
    }
    const std::uint64_t index = offset / word_bits;
    const unsigned shift = offset % word_bits;
    std::uint64_t v = words[index] >> shift;
    if (shift + width > word_bits) {
        v |= words[index + 1] << (word_bits - shift);
    }
    return v & broadword::low_mask(width);
}

/// Number of one bits in [from, to).
inline std::uint64_t count_ones(std::span<const Word> words, std::uint64_t from, std::uint64_t to)
{
    std::uint64_t ones = 0;
    while (from < to) {
        const unsigned shift = from % word_bits;
        const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(word_bits - shift, to - from));
        ones += broadword::sideways_addition((words[from / word_bits] >> shift) & broadword::low_mask(take));
        from += take;
    }
    return ones;
}

class BitWriter {
public:
    std::uint64_t bit_length() const { return length_; }
    std::span<const Word> words() const { return words_; }
    std::vector<Word> release() &&
    {
        length_ = 0;
        return std::move(words_);
    }

    /// Appends `width` bits of v, LSB-first. Returns width.
    std::uint64_t write_fixed(std::uint64_t v, unsigned width)
    {
        if (width > word_bits) {
            throw std::invalid_argument("fixed-width field wider than 64 bits");
        }
        if (width < word_bits && (v >> width) != 0) {
            throw std::invalid_argument("value " + std::to_string(v) + " does not fit in " + std::to_string(width)
                                        + " bits");
        }
        if (width == 0) {
            return 0;
        }
        const unsigned shift = length_ % word_bits;
        if (shift == 0) {
            words_.push_back(v);
        } else {
            words_.back() |= v << shift;
            if (shift + width > word_bits) {
                words_.push_back(v >> (word_bits - shift));
            }
        }
        length_ += width;
        return width;
    }

    std::uint64_t write_zeros(std::uint64_t n)
    {
        length_ += n;
        words_.resize((length_ + word_bits - 1) / word_bits, 0);
        return n;
    }

    std::uint64_t write_ones(std::uint64_t n)
    {
        for (std::uint64_t left = n; left > 0;) {
            const unsigned take = static_cast<unsigned>(std::min<std::uint64_t>(left, word_bits));
            write_fixed(broadword::low_mask(take), take);
            left -= take;
        }
        return n;
    }

    /// Writes 0^n 1. Returns n + 1.
    std::uint64_t write_unary(std::uint64_t n)
    {
        write_zeros(n);
        write_fixed(1, 1);
        return n + 1;
    }

    /// Writes 1^n 0. Returns n + 1.
    std::uint64_t write_negated_unary(std::uint64_t n)
    {
        write_ones(n);
        write_zeros(1);
        return n + 1;
    }

    std::uint64_t write_gamma(std::uint64_t n)
    {
        if (n == 0) {
            throw std::invalid_argument("gamma code is defined for n >= 1");
        }
        const unsigned msb = broadword::bit_length(n) - 1;
        write_unary(msb);
        write_fixed(reverse_low_bits(n, msb), msb);
        return 2 * std::uint64_t(msb) + 1;
    }

private:
    std::vector<Word> words_;
    std::uint64_t length_ = 0;
};

/// Sequential reader with an implicit position. The word under the cursor is
/// cached, so consecutive reads inside a word touch memory once.
class BitReader {
public:
    BitReader() = default;

    explicit BitReader(std::span<const Word> words, std::uint64_t* fetch_counter = nullptr)
        : BitReader(words, words.size() * word_bits, fetch_counter)
    {
    }

    BitReader(std::span<const Word> words, std::uint64_t bit_length, std::uint64_t* fetch_counter = nullptr)
        : words_(words), length_(bit_length), fetch_counter_(fetch_counter)
    {
        if (bit_length > words.size() * word_bits) {
            throw std::invalid_argument("bit length exceeds word array");
        }
    }

    std::uint64_t position() const { return position_; }
    std::uint64_t bit_length() const { return length_; }
    std::uint64_t fetches() const { return fetches_; }

    void seek(std::uint64_t position)
    {
        if (position > length_) {
            throw std::out_of_range("seek to bit " + std::to_string(position) + " past stream end "
                                    + std::to_string(length_));
        }
        position_ = position;
    }

    std::uint64_t read_unary()
    {
        std::uint64_t zeros = 0;
        for (;;) {
            check_available();
            const unsigned shift = position_ % word_bits;
            const Word w = current_word() >> shift;
            if (w != 0) {
                const unsigned b = broadword::least_significant_bit(w);
                advance_checked(b + 1);
                return zeros + b;
            }
            zeros += word_bits - shift;
            position_ += word_bits - shift;
        }
    }

    std::uint64_t read_negated_unary()
    {
        std::uint64_t ones = 0;
        for (;;) {
            check_available();
            const unsigned shift = position_ % word_bits;
            const Word w = ~current_word() >> shift;
            if (w != 0) {
                const unsigned b = broadword::least_significant_bit(w);
                advance_checked(b + 1);
                return ones + b;
            }
            ones += word_bits - shift;
            position_ += word_bits - shift;
        }
    }

    std::uint64_t read_fixed(unsigned width)
    {
        if (width == 0) {
            return 0;
        }
        if (width > word_bits) {
            throw std::invalid_argument("fixed-width field wider than 64 bits");
        }
        if (length_ - position_ < width) {
            throw end_of_stream();
        }
        const unsigned shift = position_ % word_bits;
        std::uint64_t v = current_word() >> shift;
        position_ += width;
        if (shift + width > word_bits) {
            v |= current_word() << (word_bits - shift);
        }
        return v & broadword::low_mask(width);
    }

    std::uint64_t read_gamma()
    {
        const std::uint64_t msb = read_unary();
        if (msb >= word_bits) {
            throw std::runtime_error("corrupt gamma code");
        }
        const auto width = static_cast<unsigned>(msb);
        return (std::uint64_t(1) << width) | reverse_low_bits(read_fixed(width), width);
    }

    /// Equivalent to k calls to read_unary(). Eight or more reads go through
    /// a broadword search: count ones per word, then select in the last one.
    void skip_unary(std::uint64_t k) { skip_codes<false>(k); }

    /// Equivalent to k calls to read_negated_unary().
    void skip_negated_unary(std::uint64_t k) { skip_codes<true>(k); }

private:
    void check_available() const
    {
        if (position_ >= length_) {
            throw end_of_stream();
        }
    }

    void advance_checked(std::uint64_t bits)
    {
        if (position_ + bits > length_) {
            position_ = length_;
            throw end_of_stream();
        }
        position_ += bits;
    }

    Word current_word()
    {
        const std::uint64_t index = position_ / word_bits;
        if (index != cached_index_) {
            cached_index_ = index;
            cached_word_ = words_[index];
            ++fetches_;
            if (fetch_counter_ != nullptr) {
                ++*fetch_counter_;
            }
        }
        return cached_word_;
    }

    template <bool Negated>
    void skip_codes(std::uint64_t k)
    {
        if (k < 8) {
            for (; k > 0; --k) {
                if constexpr (Negated) {
                    read_negated_unary();
                } else {
                    read_unary();
                }
            }
            return;
        }
        for (;;) {
            check_available();
            const unsigned shift = position_ % word_bits;
            Word w = current_word();
            if constexpr (Negated) {
                w = ~w;
            }
            w >>= shift;
            const unsigned ones = broadword::sideways_addition(w);
            if (ones >= k) {
                advance_checked(broadword::select_in_word(w, static_cast<unsigned>(k - 1)) + 1);
                return;
            }
            k -= ones;
            position_ += word_bits - shift;
        }
    }

    std::span<const Word> words_;
    std::uint64_t length_ = 0;
    std::uint64_t position_ = 0;
    std::uint64_t cached_index_ = ~std::uint64_t(0);
    Word cached_word_ = 0;
    std::uint64_t fetches_ = 0;
    std::uint64_t* fetch_counter_ = nullptr;
};

} // namespace qsi
