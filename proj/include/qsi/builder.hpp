#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "index_format.hpp"

// Two-pass in-memory construction: documents are accumulated into per-term
// postings first, and encoded only once every statistic (f, g, the position
// bound) is known.

namespace qsi {

/// Everything known about one term before encoding.
struct TermPostings {
    std::vector<std::uint64_t> documents;
    std::vector<std::uint64_t> counts;
    // position lists of all documents, back to back
    std::vector<std::uint64_t> positions;

    std::uint64_t frequency() const { return documents.size(); }
    std::uint64_t occurrency() const { return positions.size(); }

    /// f + sum of each document's last position.
    std::uint64_t position_bound() const
    {
        std::uint64_t u = 0;
        std::uint64_t k = 0;
        for (const auto c : counts) {
            k += c;
            u += positions[k - 1] + 1;
        }
        return u;
    }

    /// Positions of the i-th document of the list.
    std::vector<std::uint64_t> positions_of(std::size_t i) const
    {
        std::uint64_t begin = 0;
        for (std::size_t j = 0; j < i; ++j) {
            begin += counts[j];
        }
        return {positions.begin() + begin, positions.begin() + begin + counts[i]};
    }

    bool operator==(const TermPostings&) const = default;
};

/// Splits on ASCII whitespace.
inline std::vector<std::string_view> tokenize(std::string_view text)
{
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) {
            ++i;
        }
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) {
            ++i;
        }
        if (i > start) {
            tokens.push_back(text.substr(start, i - start));
        }
    }
    return tokens;
}

class Accumulator {
public:
    using TermMap = std::map<std::string, TermPostings, std::less<>>;

    /// Adds the next document; ids are assigned sequentially from zero.
    template <typename Tokens>
    void add_document(const Tokens& tokens)
    {
        const std::uint64_t doc = documents_++;
        std::uint64_t position = 0;
        for (const auto& token : tokens) {
            const std::string_view term(token);
            auto it = terms_.find(term);
            if (it == terms_.end()) {
                it = terms_.emplace(std::string(term), TermPostings{}).first;
            }
            TermPostings& p = it->second;
            if (p.documents.empty() || p.documents.back() != doc) {
                p.documents.push_back(doc);
                p.counts.push_back(0);
            }
            ++p.counts.back();
            p.positions.push_back(position++);
            ++tokens_;
        }
    }

    void add_text(std::string_view line) { add_document(tokenize(line)); }

    std::uint64_t document_count() const { return documents_; }
    std::uint64_t token_count() const { return tokens_; }
    const TermMap& terms() const { return terms_; }

    std::uint64_t posting_count() const
    {
        std::uint64_t n = 0;
        for (const auto& [term, p] : terms_) {
            n += p.frequency();
        }
        return n;
    }

    const TermPostings* find(std::string_view term) const
    {
        const auto it = terms_.find(term);
        return it == terms_.end() ? nullptr : &it->second;
    }

private:
    TermMap terms_;
    std::uint64_t documents_ = 0;
    std::uint64_t tokens_ = 0;
};

/// Reads one document per line, whitespace-separated tokens.
inline Accumulator ingest(std::istream& in)
{
    Accumulator acc;
    for (std::string line; std::getline(in, line);) {
        acc.add_text(line);
    }
    if (in.bad()) {
        throw std::runtime_error("I/O error while reading corpus");
    }
    if (acc.document_count() == 0) {
        throw std::runtime_error("no documents");
    }
    return acc;
}

/// Encodes the accumulated postings. Terms are written in byte order.
inline IndexSegment serialize(const Accumulator& acc, std::uint64_t q = default_quantum)
{
    if (acc.document_count() == 0) {
        throw std::runtime_error("no documents");
    }
    check_quantum(q);
    IndexSegment seg;
    seg.meta = GlobalMetadata{acc.document_count(), q, acc.terms().size(), format_version};
    seg.terms.reserve(acc.terms().size());
    seg.offsets.reserve(acc.terms().size());
    BitWriter pointers;
    BitWriter counts;
    BitWriter positions;
    for (const auto& [term, p] : acc.terms()) {
        seg.terms.push_back(term);
        seg.offsets.push_back(TermOffsets{pointers.bit_length(), counts.bit_length(), positions.bit_length()});
        write_term_pointers(pointers, p.documents, p.occurrency(), acc.document_count(), q);
        write_term_counts(counts, p.counts, p.occurrency(), q);
        write_term_positions(positions, p.counts, p.positions, q);
    }
    auto finish = [](BitWriter& w) {
        StreamData s;
        s.bit_length = w.bit_length();
        s.words = std::move(w).release();
        return s;
    };
    seg.pointers = finish(pointers);
    seg.counts = finish(counts);
    seg.positions = finish(positions);
    return seg;
}

} // namespace qsi
