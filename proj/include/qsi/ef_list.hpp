#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitstream.hpp"
#include "broadword.hpp"
#include "decode_stats.hpp"

// High bits/low bits (Elias-Fano) representation of a monotone sequence
// 0 <= x_0 <= ... <= x_{n-1} <= u.
//
// Layout, starting at the list's base offset:
//
//   [ s pointers of w bits | n lower-bit blocks of l bits | upper bits ]
//
// with l = max(0, floor(log2(u / n))). The upper bits hold, for each element,
// the gap floor(x_i / 2^l) - floor(x_{i-1} / 2^l) in unary (x_{-1} = 0), so
// they contain exactly n ones and floor(x_{n-1} / 2^l) <= 2n zeroes.
//
// Pointer k (k >= 1, stored in slot k - 1) is the upper-bits position reached
// after kq unary reads (forward pointers) or after kq negated-unary reads
// (skip pointers). Skip slots past the last zero hold 0, meaning "end of
// list". Lists with fewer than q elements carry no pointers.
//
// Strictly monotone lists may be stored reduced: element i is encoded as
// x_i - i (Monotone::strict) or x_i - i - 1 (Monotone::strict_positive, for
// prefix sums of positive integers). Reduced lists cannot skip by value.
// A reduced bound of zero means every stored value is zero and the payload
// is empty.

namespace qsi {

enum class PointerKind : std::uint8_t { none, forward, skip };
enum class Monotone : std::uint8_t { standard, strict, strict_positive };

inline constexpr std::uint64_t default_quantum = 256;

/// Amount subtracted from element i before encoding.
constexpr std::uint64_t reduction(Monotone m, std::uint64_t i)
{
    switch (m) {
    case Monotone::standard:
        return 0;
    case Monotone::strict:
        return i;
    case Monotone::strict_positive:
        return i + 1;
    }
    return 0;
}

/// l = max(0, floor(log2(u / n))), computed exactly.
constexpr unsigned lower_width_for(std::uint64_t n, std::uint64_t u)
{
    return u < n ? 0 : broadword::bit_length(u / n) - 1;
}

inline void check_quantum(std::uint64_t q)
{
    if (q < 2 || (q & (q - 1)) != 0) {
        throw std::invalid_argument("quantum must be a power of two >= 2, got " + std::to_string(q));
    }
}

/// Every parameter needed to locate and decode a list inside a bit stream.
struct EfShape {
    std::uint64_t count = 0;
    std::uint64_t bound = 0; // bound on stored (reduced) values
    unsigned lower_width = 0;
    std::uint64_t quantum = default_quantum;
    PointerKind kind = PointerKind::none;
    std::uint64_t pointer_count = 0;
    unsigned pointer_width = 0;
    Monotone monotone = Monotone::standard;
    bool degenerate = false;

    /// Shape of a list of `count` elements whose stored values are <= bound.
    static EfShape make(std::uint64_t count, std::uint64_t bound, std::uint64_t quantum, PointerKind kind,
                        Monotone monotone)
    {
        if (count == 0) {
            throw std::invalid_argument("Elias-Fano list must have at least one element");
        }
        check_quantum(quantum);
        EfShape s;
        s.count = count;
        s.bound = bound;
        s.quantum = quantum;
        s.kind = kind;
        s.monotone = monotone;
        s.degenerate = bound == 0;
        if (s.degenerate) {
            s.kind = PointerKind::none;
            return s;
        }
        s.lower_width = lower_width_for(count, bound);
        const std::uint64_t upper_max = count + (bound >> s.lower_width);
        if (kind != PointerKind::none && count >= quantum) {
            s.pointer_count = kind == PointerKind::forward ? count / quantum : upper_max / quantum;
            s.pointer_width = broadword::bit_length(upper_max);
        }
        return s;
    }

    /// Shape for a stream that records l and w explicitly because its bound
    /// is not recoverable at read time. Only forward pointers are supported.
    static EfShape from_parameters(std::uint64_t count, unsigned lower_width, unsigned pointer_width,
                                   std::uint64_t quantum, Monotone monotone)
    {
        if (count == 0) {
            throw std::invalid_argument("Elias-Fano list must have at least one element");
        }
        check_quantum(quantum);
        EfShape s;
        s.count = count;
        s.bound = 0;
        s.quantum = quantum;
        s.kind = PointerKind::forward;
        s.monotone = monotone;
        s.lower_width = lower_width;
        if (count >= quantum) {
            s.pointer_count = count / quantum;
            s.pointer_width = pointer_width;
        }
        return s;
    }

    std::uint64_t pointer_bits() const { return pointer_count * pointer_width; }
    std::uint64_t lower_bits() const { return count * lower_width; }
    /// Upper-bits length is at most n + floor(u / 2^l).
    std::uint64_t upper_bits_max() const { return degenerate ? 0 : count + (bound >> lower_width); }
};

/// Bound on stored values for a list whose original values are <= u.
inline std::uint64_t reduced_bound(std::uint64_t u, std::uint64_t n, Monotone m)
{
    const std::uint64_t shift = reduction(m, n - 1);
    if (u < shift) {
        throw std::invalid_argument("upper bound too small for a strictly monotone list");
    }
    return u - shift;
}

struct EfSizes {
    std::uint64_t pointers = 0;
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;

    std::uint64_t total() const { return pointers + lower + upper; }
    bool operator==(const EfSizes&) const = default;
};

/// Appends the list to `out` (pointers, lower bits, upper bits) and returns
/// the size of each part.
inline EfSizes write_elias_fano(BitWriter& out, std::span<const std::uint64_t> values, const EfShape& shape)
{
    const std::uint64_t n = values.size();
    if (n != shape.count) {
        throw std::invalid_argument("value count does not match list shape");
    }
    std::vector<std::uint64_t> high(n);
    std::uint64_t previous = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t shift = reduction(shape.monotone, i);
        if (i > 0 && values[i] < values[i - 1]) {
            throw std::invalid_argument("non-monotone input at index " + std::to_string(i));
        }
        if (values[i] < shift) {
            throw std::invalid_argument("input is not strictly monotone at index " + std::to_string(i));
        }
        const std::uint64_t stored = values[i] - shift;
        if (stored < previous) {
            throw std::invalid_argument("input is not strictly monotone at index " + std::to_string(i));
        }
        if (stored > shape.bound && !(shape.bound == 0 && !shape.degenerate)) {
            throw std::invalid_argument("value " + std::to_string(values[i]) + " exceeds upper bound");
        }
        previous = stored;
        high[i] = stored >> shape.lower_width;
    }
    if (shape.degenerate) {
        return {};
    }

    EfSizes sizes;
    const std::uint64_t q = shape.quantum;
    if (shape.kind == PointerKind::forward) {
        for (std::uint64_t k = 1; k <= shape.pointer_count; ++k) {
            // after kq ones we sit right after element kq - 1
            out.write_fixed(high[k * q - 1] + k * q, shape.pointer_width);
        }
    } else if (shape.kind == PointerKind::skip) {
        std::uint64_t ones_before = 0;
        for (std::uint64_t k = 1; k <= shape.pointer_count; ++k) {
            const std::uint64_t zeros = k * q;
            if (zeros > high[n - 1]) {
                out.write_fixed(0, shape.pointer_width);
                continue;
            }
            while (ones_before < n && high[ones_before] < zeros) {
                ++ones_before;
            }
            out.write_fixed(zeros + ones_before, shape.pointer_width);
        }
    }
    sizes.pointers = shape.pointer_bits();

    const Word mask = broadword::low_mask(shape.lower_width);
    for (std::uint64_t i = 0; i < n; ++i) {
        out.write_fixed((values[i] - reduction(shape.monotone, i)) & mask, shape.lower_width);
    }
    sizes.lower = shape.lower_bits();

    std::uint64_t last_high = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        sizes.upper += out.write_unary(high[i] - last_high);
        last_high = high[i];
    }
    return sizes;
}

/// A list located inside a word array.
struct EfView {
    std::span<const Word> words;
    std::uint64_t bit_length = 0;
    std::uint64_t base = 0;
    EfShape shape;

    std::uint64_t lower_offset() const { return base + shape.pointer_bits(); }
    std::uint64_t upper_offset() const { return lower_offset() + shape.lower_bits(); }

    /// Pointer k, 1 <= k <= pointer_count.
    std::uint64_t pointer(std::uint64_t k) const
    {
        return read_bits(words, base + (k - 1) * shape.pointer_width, shape.pointer_width);
    }
};

/// A decoded element and its index in the list.
struct Element {
    std::uint64_t value;
    std::uint64_t index;
    bool operator==(const Element&) const = default;
};

enum class Access : std::uint8_t { sequential, skipping };

/// Forward-moving reader over one list. `get` may also move backwards when
/// forward pointers are present (otherwise it restarts from the beginning).
class EfCursor {
public:
    EfCursor(const EfView& view, Access access = Access::sequential, DecodeStats* stats = nullptr,
             Stream stream = Stream::pointers)
        : view_(view),
          access_(access),
          stats_(stats),
          stream_(stream),
          word_reads_(stats != nullptr ? stats->stream_reads(stream) : nullptr),
          reader_(view.words, view.bit_length, word_reads_)
    {
        if (access == Access::skipping && view.shape.monotone != Monotone::standard) {
            throw std::logic_error("skipping is not available on strictly monotone (reduced) lists");
        }
        if (!view.shape.degenerate) {
            reader_.seek(view.upper_offset());
        }
    }

    std::uint64_t size() const { return view_.shape.count; }
    bool started() const { return consumed_ > 0; }
    bool exhausted() const { return ended_; }
    /// Index of the last element returned.
    std::uint64_t index() const { return consumed_ - 1; }
    /// Last element returned.
    std::uint64_t value() const { return value_; }
    /// Position in the upper-bits array, relative to its start.
    std::uint64_t upper_position() const
    {
        return view_.shape.degenerate ? 0 : reader_.position() - view_.upper_offset();
    }

    std::optional<std::uint64_t> next()
    {
        if (ended_ || consumed_ == view_.shape.count) {
            ended_ = true;
            return std::nullopt;
        }
        if (!view_.shape.degenerate) {
            high_ += reader_.read_unary();
            if (stats_ != nullptr) {
                ++stats_->unary_reads;
            }
        }
        value_ = compose(consumed_, high_);
        ++consumed_;
        if (stats_ != nullptr) {
            stats_->record_decoded(stream_);
        }
        return value_;
    }

    /// Element of index i.
    std::uint64_t get(std::uint64_t i)
    {
        const EfShape& shape = view_.shape;
        if (i >= shape.count) {
            throw std::out_of_range("index " + std::to_string(i) + " out of range for list of size "
                                    + std::to_string(shape.count));
        }
        const std::uint64_t target = i + 1;
        if (shape.degenerate) {
            ended_ = false;
            consumed_ = target;
            value_ = compose(i, 0);
            return value_;
        }
        if (target == consumed_) {
            ended_ = false;
            return value_;
        }
        // a skip that ran off the end leaves the reader past consumed_, so restart
        const bool backward = ended_ || target < consumed_;
        ended_ = false;
        const std::uint64_t q = shape.quantum;
        const std::uint64_t k = i / q;
        const bool use_pointer = shape.kind == PointerKind::forward && k >= 1 && k <= shape.pointer_count
            && (backward || (target - consumed_ >= q && k * q > consumed_));
        if (use_pointer) {
            const std::uint64_t p = view_.pointer(k);
            touch_stream();
            reader_.seek(view_.upper_offset() + p);
            consumed_ = k * q;
            if (stats_ != nullptr) {
                ++stats_->pointer_derefs;
            }
        } else if (backward) {
            reader_.seek(view_.upper_offset());
            consumed_ = 0;
        }
        const std::uint64_t reads = target - consumed_;
        reader_.skip_unary(reads);
        if (stats_ != nullptr) {
            stats_->unary_reads += reads;
            stats_->record_decoded(stream_);
        }
        consumed_ = target;
        high_ = upper_position() - consumed_;
        value_ = compose(i, high_);
        return value_;
    }

    /// Smallest element >= bound at or after the current position.
    std::optional<Element> skip_to(std::uint64_t bound)
    {
        if (access_ != Access::skipping) {
            throw std::logic_error("cursor was not opened for skipping");
        }
        if (ended_) {
            return std::nullopt;
        }
        if (consumed_ > 0 && value_ >= bound) {
            return Element{value_, consumed_ - 1};
        }
        const EfShape& shape = view_.shape;
        if (!shape.degenerate) {
            const std::uint64_t target_high = bound >> shape.lower_width;
            if (target_high > high_) {
                const std::uint64_t q = shape.quantum;
                const std::uint64_t k = target_high / q;
                // near skips scan the upper bits instead of touching a pointer
                if (shape.kind == PointerKind::skip && k >= 1 && k <= shape.pointer_count
                    && target_high - high_ >= q && k * q > high_) {
                    const std::uint64_t p = view_.pointer(k);
                    touch_stream();
                    if (stats_ != nullptr) {
                        ++stats_->pointer_derefs;
                    }
                    if (p == 0) {
                        ended_ = true;
                        return std::nullopt;
                    }
                    reader_.seek(view_.upper_offset() + p);
                    high_ = k * q;
                }
                const std::uint64_t reads = target_high - high_;
                try {
                    reader_.skip_negated_unary(reads);
                } catch (const end_of_stream&) {
                    ended_ = true;
                    return std::nullopt;
                }
                const std::uint64_t landing = upper_position();
                if (stats_ != nullptr) {
                    stats_->negated_unary_reads += reads;
                    stats_->last_skip_landing = landing;
                }
                // every one bit before us belongs to an element smaller than bound
                const std::uint64_t ones = landing - target_high;
                if (ones >= shape.count) {
                    ended_ = true;
                    return std::nullopt;
                }
                consumed_ = ones;
                high_ = target_high;
            }
        }
        while (auto v = next()) {
            if (*v >= bound) {
                return Element{*v, consumed_ - 1};
            }
        }
        return std::nullopt;
    }

private:
    std::uint64_t compose(std::uint64_t i, std::uint64_t high)
    {
        const EfShape& shape = view_.shape;
        std::uint64_t lower = 0;
        if (shape.lower_width != 0) {
            lower = read_bits(view_.words, view_.lower_offset() + i * shape.lower_width, shape.lower_width);
            touch_stream();
        }
        return ((high << shape.lower_width) | lower) + reduction(shape.monotone, i);
    }

    void touch_stream()
    {
        if (word_reads_ != nullptr) {
            ++*word_reads_;
        }
    }

    EfView view_;
    Access access_;
    DecodeStats* stats_;
    Stream stream_;
    std::uint64_t* word_reads_;
    BitReader reader_;
    std::uint64_t consumed_ = 0; // ones read so far, i.e. index of the next element
    std::uint64_t high_ = 0;     // upper bits of the current element (zeroes read so far)
    std::uint64_t value_ = 0;
    bool ended_ = false;
};

/// A standalone list that owns its bits.
class EliasFanoList {
public:
    static EliasFanoList build(std::span<const std::uint64_t> values, std::uint64_t u,
                               std::uint64_t quantum = default_quantum, PointerKind kind = PointerKind::skip,
                               Monotone monotone = Monotone::standard)
    {
        if (values.empty()) {
            throw std::invalid_argument("Elias-Fano list must have at least one element");
        }
        if (values.back() > u) {
            throw std::invalid_argument("value " + std::to_string(values.back()) + " exceeds upper bound "
                                        + std::to_string(u));
        }
        EliasFanoList list;
        list.shape_ = EfShape::make(values.size(), reduced_bound(u, values.size(), monotone), quantum, kind, monotone);
        BitWriter out;
        list.sizes_ = write_elias_fano(out, values, list.shape_);
        list.bit_length_ = out.bit_length();
        list.words_ = std::move(out).release();
        return list;
    }

    const EfShape& shape() const { return shape_; }
    std::uint64_t size() const { return shape_.count; }
    EfView view() const { return EfView{words_, bit_length_, 0, shape_}; }
    std::span<const Word> words() const { return words_; }
    std::uint64_t bit_length() const { return bit_length_; }
    EfSizes size_in_bits() const { return sizes_; }

    EfCursor cursor(Access access = Access::sequential, DecodeStats* stats = nullptr) const
    {
        return EfCursor(view(), access, stats);
    }

    std::uint64_t get(std::uint64_t i) const { return cursor().get(i); }

    std::vector<std::uint64_t> decode() const
    {
        std::vector<std::uint64_t> out;
        out.reserve(size());
        auto c = cursor();
        while (auto v = c.next()) {
            out.push_back(*v);
        }
        return out;
    }

private:
    std::vector<Word> words_;
    std::uint64_t bit_length_ = 0;
    EfShape shape_;
    EfSizes sizes_;
};

} // namespace qsi
