#pragma once

#include <array>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitstream.hpp"
#include "index_format.hpp"
#include "posting_cursor.hpp"

// Plain gap-coded posting lists, kept only as a size reference point.
//
//   gamma(n), n >= 1: floor(log n) zeroes, a one, then the floor(log n) low
//                     bits of n, most significant first.
//   delta(n), n >= 1: gamma(bit_length(n)), then the bit_length(n) - 1 low bits
//                     of n, most significant first. delta(1) = "1".
//
// A list x_0 < x_1 < ... is stored as x_0 + 1, x_1 - x_0, x_2 - x_1, ...
// There are no skip structures.

namespace qsi {

enum class GapCode : std::uint8_t { gamma, delta };

inline std::uint64_t write_delta(BitWriter& out, std::uint64_t n)
{
    if (n == 0) {
        throw std::invalid_argument("delta code is defined for n >= 1");
    }
    const unsigned width = broadword::bit_length(n);
    const std::uint64_t head = out.write_gamma(width);
    out.write_fixed(reverse_low_bits(n, width - 1), width - 1);
    return head + width - 1;
}

inline std::uint64_t read_delta(BitReader& in)
{
    const std::uint64_t width = in.read_gamma();
    if (width > word_bits) {
        throw std::runtime_error("corrupt delta code");
    }
    const auto low = static_cast<unsigned>(width - 1);
    return (std::uint64_t(1) << low) | reverse_low_bits(in.read_fixed(low), low);
}

inline std::uint64_t gamma_length(std::uint64_t n) { return 2 * std::uint64_t(broadword::bit_length(n)) - 1; }

inline std::uint64_t delta_length(std::uint64_t n)
{
    const unsigned width = broadword::bit_length(n);
    return gamma_length(width) + width - 1;
}

struct GapEncodedList {
    GapCode code = GapCode::delta;
    std::vector<Word> words;
    std::uint64_t bit_length = 0;
    std::uint64_t count = 0;

    std::vector<std::uint64_t> decode() const
    {
        std::vector<std::uint64_t> out;
        out.reserve(count);
        BitReader in(words, bit_length);
        std::uint64_t prev = 0;
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::uint64_t gap = code == GapCode::gamma ? in.read_gamma() : read_delta(in);
            prev = i == 0 ? gap - 1 : prev + gap;
            out.push_back(prev);
        }
        return out;
    }
};

inline GapEncodedList encode_gaps(std::span<const std::uint64_t> values, GapCode code)
{
    BitWriter out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0 && values[i] <= values[i - 1]) {
            throw std::invalid_argument("gap coding needs a strictly increasing list");
        }
        if (i == 0 && values[0] == std::numeric_limits<std::uint64_t>::max()) {
            throw std::invalid_argument("first value too large for gap coding");
        }
        const std::uint64_t gap = i == 0 ? values[0] + 1 : values[i] - values[i - 1];
        if (code == GapCode::gamma) {
            out.write_gamma(gap);
        } else {
            write_delta(out, gap);
        }
    }
    GapEncodedList list;
    list.code = code;
    list.count = values.size();
    list.bit_length = out.bit_length();
    list.words = std::move(out).release();
    return list;
}

/// Counts are coded directly (each c >= 1), not as gaps.
inline std::uint64_t gamma_counts_length(std::span<const std::uint64_t> counts)
{
    std::uint64_t bits = 0;
    for (const auto c : counts) {
        bits += gamma_length(c);
    }
    return bits;
}

struct ComponentSizes {
    std::string name;
    std::uint64_t elements = 0;
    std::uint64_t qs_bits = 0;       // payload plus per-term metadata
    std::uint64_t qs_pointer_bits = 0; // skip/forward pointers and rank samples
    std::uint64_t baseline_bits = 0;
    GapCode baseline_code = GapCode::delta;

    double qs_per_element() const { return elements == 0 ? 0.0 : double(qs_bits) / double(elements); }
    double baseline_per_element() const { return elements == 0 ? 0.0 : double(baseline_bits) / double(elements); }
};

struct TermSizes {
    std::string term;
    std::uint64_t frequency = 0;
    std::uint64_t occurrency = 0;
    PointerRepresentation representation = PointerRepresentation::elias_fano;
    std::array<std::uint64_t, 3> qs_bits{};
    std::array<std::uint64_t, 3> baseline_bits{};
};

struct SizeReport {
    std::uint64_t documents = 0;
    std::uint64_t terms = 0;
    std::array<ComponentSizes, 3> components;
    std::array<std::uint64_t, 3> stream_bits{}; // exact stream lengths
    std::vector<TermSizes> term_rows;
    bool has_baseline = true;

    std::uint64_t qs_total() const
    {
        return components[0].qs_bits + components[1].qs_bits + components[2].qs_bits;
    }
    std::uint64_t baseline_total() const
    {
        return components[0].baseline_bits + components[1].baseline_bits + components[2].baseline_bits;
    }
    std::uint64_t pointer_total() const
    {
        return components[0].qs_pointer_bits + components[1].qs_pointer_bits + components[2].qs_pointer_bits;
    }
    /// Share of the index taken by skip and forward pointers, in percent.
    double skip_share_percent() const
    {
        return qs_total() == 0 ? 0.0 : 100.0 * double(pointer_total()) / double(qs_total());
    }

    void write_table(std::ostream& os) const
    {
        const auto flags = os.flags();
        os << std::left << std::setw(12) << "component" << std::right << std::setw(12) << "elements"
           << std::setw(14) << "qs bits" << std::setw(14) << "qs bits/elem";
        if (has_baseline) {
            os << std::setw(14) << "gap bits/elem" << std::setw(10) << "gap code" << std::setw(10) << "qs/gap";
        }
        os << '\n' << std::fixed << std::setprecision(3);
        for (const auto& c : components) {
            os << std::left << std::setw(12) << c.name << std::right << std::setw(12) << c.elements << std::setw(14)
               << c.qs_bits << std::setw(14) << c.qs_per_element();
            if (has_baseline) {
                os << std::setw(14) << c.baseline_per_element() << std::setw(10)
                   << (c.baseline_code == GapCode::gamma ? "gamma" : "delta") << std::setw(10)
                   << (c.baseline_bits == 0 ? 0.0 : double(c.qs_bits) / double(c.baseline_bits));
            }
            os << '\n';
        }
        os << "total: " << qs_total() << " bits";
        if (has_baseline) {
            os << ", gap-coded " << baseline_total() << " bits, ratio "
               << (baseline_total() == 0 ? 0.0 : double(qs_total()) / double(baseline_total()));
        }
        os << '\n';
        os << "skip structures: " << std::setprecision(2) << skip_share_percent() << "% of the index\n";
        os.flags(flags);
    }

    void write_rows(std::ostream& os) const
    {
        os << "documents=" << documents << '\n' << "terms=" << terms << '\n';
        for (const auto& c : components) {
            os << c.name << ".elements=" << c.elements << '\n'
               << c.name << ".qs_bits=" << c.qs_bits << '\n'
               << c.name << ".qs_pointer_bits=" << c.qs_pointer_bits << '\n'
               << c.name << ".qs_bits_per_element=" << c.qs_per_element() << '\n';
            if (has_baseline) {
                os << c.name << ".gap_bits=" << c.baseline_bits << '\n'
                   << c.name << ".gap_bits_per_element=" << c.baseline_per_element() << '\n';
            }
        }
        os << "total.qs_bits=" << qs_total() << '\n';
        if (has_baseline) {
            os << "total.gap_bits=" << baseline_total() << '\n';
        }
        os << "stream_bits.pointers=" << stream_bits[0] << '\n'
           << "stream_bits.counts=" << stream_bits[1] << '\n'
           << "stream_bits.positions=" << stream_bits[2] << '\n'
           << "skip_share_percent=" << skip_share_percent() << '\n';
    }
};

/// Sizes of every component under both encodings. The quasi-succinct side is
/// taken from the stored streams, the gap side is computed from the decoded
/// postings.
inline SizeReport compare_sizes(const IndexSegment& seg, bool with_baseline = true, bool with_terms = false)
{
    SizeReport r;
    r.has_baseline = with_baseline;
    r.documents = seg.document_count();
    r.terms = seg.term_count();
    r.components[0].name = "pointers";
    r.components[1].name = "counts";
    r.components[1].baseline_code = GapCode::gamma;
    r.components[2].name = "positions";
    r.stream_bits = {seg.pointers.bit_length, seg.counts.bit_length, seg.positions.bit_length};

    std::vector<std::uint64_t> docs;
    std::vector<std::uint64_t> counts;
    for (std::uint64_t id = 0; id < seg.term_count(); ++id) {
        const TermLayout layout = describe_term(seg, id);
        const std::array<const StreamParts*, 3> parts{&layout.pointers, &layout.counts, &layout.positions};

        std::array<std::uint64_t, 3> gap{};
        if (with_baseline) {
            docs.clear();
            counts.clear();
            PostingCursor cursor(seg, id);
            for (std::uint64_t d = cursor.advance(); d != PostingCursor::end; d = cursor.advance()) {
                docs.push_back(d);
                counts.push_back(cursor.count());
                gap[2] += encode_gaps(cursor.positions(), GapCode::delta).bit_length;
            }
            gap[0] = encode_gaps(docs, GapCode::delta).bit_length;
            gap[1] = gamma_counts_length(counts);
        }

        const std::array<std::uint64_t, 3> elements{layout.frequency, layout.frequency, layout.occurrency};
        for (std::size_t k = 0; k < 3; ++k) {
            r.components[k].elements += elements[k];
            r.components[k].qs_bits += parts[k]->total();
            r.components[k].qs_pointer_bits += parts[k]->pointers;
            r.components[k].baseline_bits += gap[k];
        }
        if (with_terms) {
            TermSizes t;
            t.term = seg.terms[id];
            t.frequency = layout.frequency;
            t.occurrency = layout.occurrency;
            t.representation = layout.representation;
            for (std::size_t k = 0; k < 3; ++k) {
                t.qs_bits[k] = parts[k]->total();
                t.baseline_bits[k] = gap[k];
            }
            r.term_rows.push_back(std::move(t));
        }
    }
    return r;
}

} // namespace qsi
