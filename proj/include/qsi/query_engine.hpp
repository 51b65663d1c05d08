#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "posting_cursor.hpp"

namespace qsi {

inline constexpr std::uint64_t default_proximity_window = 16;

enum class Intersection : std::uint8_t {
    skipping,     // skip_to the current candidate
    linear_merge, // advance one posting at a time (reference for DecodeStats comparisons)
};

/// Enumerates the documents shared by every cursor. Cursors are driven
/// rarest-first (lowest frequency; ties keep query order) and each one is
/// pushed to the current maximum candidate until they all agree.
class Conjunction {
public:
    explicit Conjunction(std::span<PostingCursor> cursors, Intersection mode = Intersection::skipping)
        : mode_(mode)
    {
        if (cursors.empty()) {
            throw std::invalid_argument("conjunction needs at least one term");
        }
        for (auto& c : cursors) {
            order_.push_back(&c);
        }
        std::stable_sort(order_.begin(), order_.end(),
                         [](const PostingCursor* a, const PostingCursor* b) { return a->frequency() < b->frequency(); });
    }

    /// Next common document, or PostingCursor::end.
    std::uint64_t next()
    {
        if (done_) {
            return PostingCursor::end;
        }
        PostingCursor& lead = *order_.front();
        std::uint64_t candidate = lead.advance();
        for (;;) {
            if (candidate == PostingCursor::end) {
                done_ = true;
                return candidate;
            }
            bool agreed = true;
            for (std::size_t k = 1; k < order_.size(); ++k) {
                const std::uint64_t d = move_to(*order_[k], candidate);
                if (d == PostingCursor::end) {
                    done_ = true;
                    return d;
                }
                if (d > candidate) {
                    candidate = move_to(lead, d);
                    agreed = false;
                    break;
                }
            }
            if (agreed) {
                return candidate;
            }
        }
    }

private:
    std::uint64_t move_to(PostingCursor& c, std::uint64_t target) const
    {
        if (mode_ == Intersection::skipping) {
            return c.skip_to(target);
        }
        std::uint64_t d = c.started() ? c.document() : c.advance();
        while (d != PostingCursor::end && d < target) {
            d = c.advance();
        }
        return d;
    }

    std::vector<PostingCursor*> order_;
    Intersection mode_;
    bool done_ = false;
};

inline std::vector<std::uint64_t> and_query(std::span<PostingCursor> cursors,
                                            Intersection mode = Intersection::skipping)
{
    std::vector<std::uint64_t> out;
    Conjunction conj(cursors, mode);
    for (std::uint64_t d = conj.next(); d != PostingCursor::end; d = conj.next()) {
        out.push_back(d);
    }
    return out;
}

/// Documents in which term j of the query occurs at p + j for some p.
inline std::vector<std::uint64_t> phrase_query(std::span<PostingCursor> cursors)
{
    std::vector<std::uint64_t> out;
    Conjunction conj(cursors);
    std::vector<std::vector<std::uint64_t>> lists(cursors.size());
    for (std::uint64_t d = conj.next(); d != PostingCursor::end; d = conj.next()) {
        for (std::size_t j = 0; j < cursors.size(); ++j) {
            lists[j] = cursors[j].positions();
        }
        const bool match = std::any_of(lists[0].begin(), lists[0].end(), [&](std::uint64_t anchor) {
            for (std::size_t j = 1; j < lists.size(); ++j) {
                if (!std::binary_search(lists[j].begin(), lists[j].end(), anchor + j)) {
                    return false;
                }
            }
            return true;
        });
        if (match) {
            out.push_back(d);
        }
    }
    return out;
}

/// True if some span of at most `window` consecutive positions holds, for
/// every distinct term, as many distinct occurrences as the term has query
/// instances. `lists[t]` are the positions of distinct term t.
inline bool covers_within(const std::vector<std::vector<std::uint64_t>>& lists,
                          const std::vector<std::uint64_t>& needed, std::uint64_t window)
{
    std::vector<std::pair<std::uint64_t, std::size_t>> events;
    for (std::size_t t = 0; t < lists.size(); ++t) {
        if (lists[t].size() < needed[t]) {
            return false;
        }
        for (const auto p : lists[t]) {
            events.emplace_back(p, t);
        }
    }
    std::sort(events.begin(), events.end());
    std::vector<std::uint64_t> have(lists.size(), 0);
    std::size_t missing = lists.size();
    std::size_t left = 0;
    for (std::size_t right = 0; right < events.size(); ++right) {
        const std::size_t t = events[right].second;
        if (++have[t] == needed[t]) {
            --missing;
        }
        while (missing == 0) {
            if (events[right].first - events[left].first + 1 <= window) {
                return true;
            }
            const std::size_t lt = events[left].second;
            if (have[lt]-- == needed[lt]) {
                ++missing;
            }
            ++left;
        }
    }
    return false;
}

/// Documents where every query term occurs, in any order, inside a span of
/// at most `window` token positions. A term repeated in the query needs that
/// many distinct occurrences.
inline std::vector<std::uint64_t> proximity_query(std::span<PostingCursor> cursors,
                                                  std::uint64_t window = default_proximity_window)
{
    if (window < cursors.size()) {
        throw std::invalid_argument("proximity window must be at least the number of query terms");
    }
    // group query instances by term
    std::map<std::uint64_t, std::size_t> group_of;
    std::vector<std::size_t> representative;
    std::vector<std::uint64_t> needed;
    for (std::size_t j = 0; j < cursors.size(); ++j) {
        const auto [it, inserted] = group_of.emplace(cursors[j].term_id(), needed.size());
        if (inserted) {
            representative.push_back(j);
            needed.push_back(0);
        }
        ++needed[it->second];
    }
    std::vector<std::uint64_t> out;
    Conjunction conj(cursors);
    std::vector<std::vector<std::uint64_t>> lists(needed.size());
    for (std::uint64_t d = conj.next(); d != PostingCursor::end; d = conj.next()) {
        for (std::size_t t = 0; t < needed.size(); ++t) {
            lists[t] = cursors[representative[t]].positions();
        }
        if (covers_within(lists, needed, window)) {
            out.push_back(d);
        }
    }
    return out;
}

} // namespace qsi
