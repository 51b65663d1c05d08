#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "decode_stats.hpp"
#include "ef_list.hpp"
#include "index_format.hpp"
#include "ranked_bitmap.hpp"

namespace qsi {

/// Reader over one term's postings. Document pointers are decoded eagerly;
/// the counts and positions streams are opened only when count() or
/// positions() is called, so boolean queries never touch them.
class PostingCursor {
public:
    static constexpr std::uint64_t end = std::numeric_limits<std::uint64_t>::max();

    PostingCursor(const IndexSegment& seg, std::uint64_t term_id, DecodeStats* stats = nullptr,
                  bool prefix_cache = true)
        : seg_(&seg),
          term_id_(term_id),
          stats_(stats),
          prefix_cache_(prefix_cache),
          header_(read_term_header(seg, term_id, stats != nullptr ? stats->stream_reads(Stream::pointers) : nullptr)),
          docs_(open_documents())
    {
    }

    std::uint64_t term_id() const { return term_id_; }
    std::uint64_t frequency() const { return header_.frequency; }
    std::uint64_t occurrency() const { return header_.occurrency; }
    PointerRepresentation representation() const { return header_.representation; }

    /// Current document, or `end`. Only meaningful after advance()/skip_to().
    std::uint64_t document() const { return document_; }
    bool started() const { return started_; }
    /// Index of the current document inside the posting list.
    std::uint64_t index() const { return index_; }

    std::uint64_t advance()
    {
        if (document_ == end && started_) {
            return end;
        }
        started_ = true;
        const auto v = std::visit([](auto& c) { return c.next(); }, docs_);
        if (!v) {
            return document_ = end;
        }
        index_ = std::visit([](auto& c) { return c.index(); }, docs_);
        return document_ = *v;
    }

    /// Moves to the first document >= target; never moves backwards.
    std::uint64_t skip_to(std::uint64_t target)
    {
        if (document_ == end && started_) {
            return end;
        }
        if (started_ && document_ >= target) {
            return document_;
        }
        started_ = true;
        const auto e = std::visit([target](auto& c) { return c.skip_to(target); }, docs_);
        if (!e) {
            return document_ = end;
        }
        index_ = e->index;
        return document_ = e->value;
    }

    /// Occurrences of the term in the current document.
    std::uint64_t count()
    {
        require_positioned();
        if (count_index_ == index_) {
            return count_;
        }
        const std::uint64_t q = seg_->quantum();
        if (!counts_) {
            counts_.emplace(EfView{seg_->counts.span(), seg_->counts.bit_length, seg_->offsets[term_id_].counts,
                                   header_.counts(q)},
                            Access::sequential, stats_, Stream::counts);
        }
        const std::uint64_t i = index_;
        std::uint64_t before = 0;
        std::uint64_t at = 0;
        if (prefix_cache_ && i > 0 && counts_->started() && !counts_->exhausted() && counts_->index() + 1 == i) {
            before = counts_->value();
            at = *counts_->next();
        } else if (prefix_cache_) {
            before = i == 0 ? 0 : counts_->get(i - 1);
            at = i == 0 ? counts_->get(0) : *counts_->next();
        } else {
            before = i == 0 ? 0 : counts_->get(i - 1);
            at = counts_->get(i);
        }
        count_index_ = i;
        count_ = at - before;
        prefix_before_ = before;
        return count_;
    }

    /// Positions of the term in the current document, increasing.
    const std::vector<std::uint64_t>& positions()
    {
        const std::uint64_t c = count();
        if (positions_index_ == index_) {
            return positions_buffer_;
        }
        if (!positions_) {
            const auto h = read_positions_header(*seg_, term_id_, header_.occurrency,
                                                 stats_ != nullptr ? stats_->stream_reads(Stream::positions) : nullptr);
            positions_.emplace(EfView{seg_->positions.span(), seg_->positions.bit_length, h.payload_offset, h.shape},
                               Access::sequential, stats_, Stream::positions);
        }
        // positions of document i are t[s_i + j] - t[s_i - 1] - 1, where s_i
        // is the prefix count before i and t[-1] = 0
        const std::uint64_t first = prefix_before_;
        std::uint64_t base = 0;
        std::uint64_t t = 0;
        if (first == 0) {
            t = positions_->get(0);
        } else if (prefix_cache_ && positions_->started() && !positions_->exhausted()
                   && positions_->index() + 1 == first) {
            base = positions_->value();
            t = *positions_->next();
        } else {
            base = positions_->get(first - 1);
            t = prefix_cache_ ? *positions_->next() : positions_->get(first);
        }
        positions_buffer_.clear();
        positions_buffer_.push_back(t - base - 1);
        for (std::uint64_t j = 1; j < c; ++j) {
            t = prefix_cache_ ? *positions_->next() : positions_->get(first + j);
            positions_buffer_.push_back(t - base - 1);
        }
        positions_index_ = index_;
        return positions_buffer_;
    }

private:
    using DocCursor = std::variant<EfCursor, BitmapCursor>;

    DocCursor open_documents() const
    {
        if (header_.representation == PointerRepresentation::ranked_bitmap) {
            return BitmapCursor(
                BitmapView{seg_->pointers.span(), seg_->pointers.bit_length, header_.payload_offset, header_.bitmap},
                stats_, Stream::pointers);
        }
        return EfCursor(EfView{seg_->pointers.span(), seg_->pointers.bit_length, header_.payload_offset,
                               header_.documents},
                        Access::skipping, stats_, Stream::pointers);
    }

    void require_positioned() const
    {
        if (!started_ || document_ == end) {
            throw std::logic_error("posting cursor is not positioned on a document");
        }
    }

    static constexpr std::uint64_t none = std::numeric_limits<std::uint64_t>::max();

    const IndexSegment* seg_;
    std::uint64_t term_id_;
    DecodeStats* stats_;
    bool prefix_cache_;
    TermHeader header_;
    DocCursor docs_;
    std::optional<EfCursor> counts_;
    std::optional<EfCursor> positions_;

    bool started_ = false;
    std::uint64_t document_ = end;
    std::uint64_t index_ = 0;

    std::uint64_t count_index_ = none;
    std::uint64_t count_ = 0;
    std::uint64_t prefix_before_ = 0;
    std::uint64_t positions_index_ = none;
    std::vector<std::uint64_t> positions_buffer_;
};

/// Opens the postings of term `term_id`.
inline PostingCursor read_term(const IndexSegment& seg, std::uint64_t term_id, DecodeStats* stats = nullptr)
{
    return PostingCursor(seg, term_id, stats);
}

inline std::optional<PostingCursor> open_term(const IndexSegment& seg, std::string_view term,
                                              DecodeStats* stats = nullptr)
{
    const auto id = seg.find(term);
    if (!id) {
        return std::nullopt;
    }
    return PostingCursor(seg, *id, stats);
}

} // namespace qsi
