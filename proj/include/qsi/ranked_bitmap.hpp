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
#include "ef_list.hpp"

// Characteristic function of a strictly monotone list over [0, u): bit k is
// set iff k is in the list. It is preceded by floor(u / q) rank samples;
// sample k (1-based, stored in slot k - 1) is the number of ones strictly
// below position kq. Sample 0 is implicitly zero.

namespace qsi {

struct BitmapShape {
    std::uint64_t universe = 0;
    std::uint64_t count = 0;
    std::uint64_t quantum = default_quantum;
    std::uint64_t rank_count = 0;
    unsigned rank_width = 0;

    /// doc_count sizes the rank samples; 0 means "use the universe".
    static BitmapShape make(std::uint64_t universe, std::uint64_t count, std::uint64_t quantum,
                            std::uint64_t doc_count = 0)
    {
        check_quantum(quantum);
        if (universe == 0) {
            throw std::invalid_argument("bitmap universe must be positive");
        }
        BitmapShape s;
        s.universe = universe;
        s.count = count;
        s.quantum = quantum;
        s.rank_count = universe / quantum;
        // a sample can equal the universe, so it needs bit_length(N) bits
        s.rank_width = broadword::bit_length(doc_count == 0 ? universe : doc_count);
        return s;
    }

    std::uint64_t rank_bits() const { return rank_count * rank_width; }
    std::uint64_t total_bits() const { return rank_bits() + universe; }
};

inline void write_ranked_bitmap(BitWriter& out, std::span<const std::uint64_t> values, const BitmapShape& shape)
{
    if (values.size() != shape.count) {
        throw std::invalid_argument("value count does not match bitmap shape");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= shape.universe) {
            throw std::invalid_argument("value " + std::to_string(values[i]) + " outside bitmap universe");
        }
        if (i > 0 && values[i] <= values[i - 1]) {
            throw std::invalid_argument("bitmap input must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
    std::size_t below = 0;
    for (std::uint64_t k = 1; k <= shape.rank_count; ++k) {
        while (below < values.size() && values[below] < k * shape.quantum) {
            ++below;
        }
        out.write_fixed(below, shape.rank_width);
    }
    std::uint64_t next = 0;
    for (const auto v : values) {
        out.write_unary(v - next);
        next = v + 1;
    }
    out.write_zeros(shape.universe - next);
}

struct BitmapView {
    std::span<const Word> words;
    std::uint64_t bit_length = 0;
    std::uint64_t base = 0;
    BitmapShape shape;

    std::uint64_t bits_offset() const { return base + shape.rank_bits(); }

    /// Ones strictly below position k * q.
    std::uint64_t rank_sample(std::uint64_t k) const
    {
        if (k == 0) {
            return 0;
        }
        return read_bits(words, base + (k - 1) * shape.rank_width, shape.rank_width);
    }
};

class BitmapCursor {
public:
    BitmapCursor(const BitmapView& view, DecodeStats* stats = nullptr, Stream stream = Stream::pointers)
        : view_(view),
          stats_(stats),
          stream_(stream),
          word_reads_(stats != nullptr ? stats->stream_reads(stream) : nullptr),
          reader_(view.words, view.bit_length, word_reads_)
    {
    }

    std::uint64_t size() const { return view_.shape.count; }
    bool started() const { return consumed_ > 0; }
    bool exhausted() const { return ended_; }
    std::uint64_t index() const { return consumed_ - 1; }
    std::uint64_t value() const { return value_; }

    std::optional<std::uint64_t> next()
    {
        if (ended_ || consumed_ == view_.shape.count) {
            ended_ = true;
            return std::nullopt;
        }
        reader_.seek(view_.bits_offset() + next_bit_);
        const std::uint64_t v = next_bit_ + reader_.read_unary();
        if (stats_ != nullptr) {
            ++stats_->unary_reads;
            stats_->record_decoded(stream_);
        }
        land(v, consumed_);
        return v;
    }

    std::optional<Element> skip_to(std::uint64_t bound)
    {
        if (ended_) {
            return std::nullopt;
        }
        if (consumed_ > 0 && value_ >= bound) {
            return Element{value_, consumed_ - 1};
        }
        const BitmapShape& shape = view_.shape;
        if (bound >= shape.universe || consumed_ == shape.count) {
            ended_ = true;
            return std::nullopt;
        }
        if (bound - next_bit_ < shape.quantum) {
            // close by: count the ones we jump over instead of ranking
            consumed_ += count_ones(view_.words, view_.bits_offset() + next_bit_, view_.bits_offset() + bound);
            touch_stream();
            next_bit_ = bound;
            if (auto v = next()) {
                return Element{*v, consumed_ - 1};
            }
            return std::nullopt;
        }
        reader_.seek(view_.bits_offset() + bound);
        std::uint64_t v = 0;
        try {
            v = bound + reader_.read_unary();
        } catch (const end_of_stream&) {
            ended_ = true;
            return std::nullopt;
        }
        if (v >= shape.universe) {
            ended_ = true;
            return std::nullopt;
        }
        const std::uint64_t block = v / shape.quantum;
        const std::uint64_t rank = view_.rank_sample(block)
            + count_ones(view_.words, view_.bits_offset() + block * shape.quantum, view_.bits_offset() + v);
        touch_stream();
        if (stats_ != nullptr) {
            ++stats_->unary_reads;
            ++stats_->pointer_derefs;
            stats_->record_decoded(stream_);
        }
        land(v, rank);
        return Element{v, rank};
    }

private:
    void land(std::uint64_t v, std::uint64_t index)
    {
        value_ = v;
        consumed_ = index + 1;
        next_bit_ = v + 1;
    }

    void touch_stream()
    {
        if (word_reads_ != nullptr) {
            ++*word_reads_;
        }
    }

    BitmapView view_;
    DecodeStats* stats_;
    Stream stream_;
    std::uint64_t* word_reads_;
    BitReader reader_;
    std::uint64_t consumed_ = 0;
    std::uint64_t next_bit_ = 0;
    std::uint64_t value_ = 0;
    bool ended_ = false;
};

/// A standalone bitmap that owns its bits.
class RankedBitmap {
public:
    static RankedBitmap build(std::span<const std::uint64_t> values, std::uint64_t universe,
                              std::uint64_t quantum = default_quantum, std::uint64_t doc_count = 0)
    {
        RankedBitmap bitmap;
        bitmap.shape_ = BitmapShape::make(universe, values.size(), quantum, doc_count);
        BitWriter out;
        write_ranked_bitmap(out, values, bitmap.shape_);
        bitmap.bit_length_ = out.bit_length();
        bitmap.words_ = std::move(out).release();
        return bitmap;
    }

    const BitmapShape& shape() const { return shape_; }
    std::uint64_t size() const { return shape_.count; }
    std::uint64_t universe() const { return shape_.universe; }
    BitmapView view() const { return BitmapView{words_, bit_length_, 0, shape_}; }
    std::uint64_t size_in_bits() const { return shape_.total_bits(); }
    std::uint64_t rank_sample(std::uint64_t k) const { return view().rank_sample(k); }
    bool test(std::uint64_t position) const { return read_bits(words_, shape_.rank_bits() + position, 1) != 0; }

    BitmapCursor cursor(DecodeStats* stats = nullptr) const { return BitmapCursor(view(), stats); }

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
    BitmapShape shape_;
};

} // namespace qsi
