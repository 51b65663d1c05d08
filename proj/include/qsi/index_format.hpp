#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bitstream.hpp"
#include "ef_list.hpp"
#include "ranked_bitmap.hpp"

// Index layout. Each component (document pointers, counts, positions) lives in
// its own bit stream; every term has a bit offset into each stream.
//
// Pointers stream, per term:
//   gamma(g), then gamma(g - f + 1) if g > 1           (g occurrency, f frequency)
//   either an Elias-Fano list of the f document ids with u = N - 1 and skip
//   pointers, or, when f + floor(N / 2^l) + f*l > N, a ranked bitmap over
//   [0, N) with floor(N / q) rank samples of bit_length(N) bits.
//
// Counts stream, per term (no metadata): the prefix sums y_i = c_0 + ... + c_i
// stored as y_i - (i + 1) with bound g - f and forward pointers. When g == f
// the payload is empty.
//
// Positions stream, per term: gamma(l + 1), then gamma(w) if g >= q, then the
// g prefix sums t_k of the per-document sequences p_0 + 1, p_1 - p_0, ...
// stored as t_k - k with bound max(1, U - g), U = f + sum of last positions,
// with forward pointers.
//
// On disk an index is a directory:
//   meta       little-endian u64: N, q, term count, version, then the exact bit
//              lengths of the pointers, counts and positions streams
//   terms      one term per line, sorted by byte value; term id = line number
//   offsets    three little-endian u64 bit offsets per term
//   pointers, counts, positions   little-endian u64 words

namespace qsi {

inline constexpr std::uint64_t format_version = 1;

class corrupt_index : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PointerRepresentation : std::uint8_t { elias_fano, ranked_bitmap };

inline PointerRepresentation choose_pointer_representation(std::uint64_t f, std::uint64_t n_docs)
{
    if (f == 0 || f > n_docs) {
        throw std::invalid_argument("frequency must lie in [1, N]");
    }
    const unsigned l = lower_width_for(f, n_docs - 1);
    const std::uint64_t ef_bits = f + (n_docs >> l) + f * l;
    return ef_bits > n_docs ? PointerRepresentation::ranked_bitmap : PointerRepresentation::elias_fano;
}

struct GlobalMetadata {
    std::uint64_t document_count = 0;
    std::uint64_t quantum = default_quantum;
    std::uint64_t term_count = 0;
    std::uint64_t version = format_version;
};

struct TermOffsets {
    std::uint64_t pointers = 0;
    std::uint64_t counts = 0;
    std::uint64_t positions = 0;
};

inline EfShape document_shape(std::uint64_t f, std::uint64_t n_docs, std::uint64_t q)
{
    return EfShape::make(f, n_docs - 1, q, PointerKind::skip, Monotone::standard);
}

inline EfShape counts_shape(std::uint64_t f, std::uint64_t g, std::uint64_t q)
{
    return EfShape::make(f, g - f, q, PointerKind::forward, Monotone::strict_positive);
}

inline PointerRepresentation write_term_pointers(BitWriter& out, std::span<const std::uint64_t> doc_ids,
                                                 std::uint64_t occurrency, std::uint64_t n_docs, std::uint64_t q)
{
    const std::uint64_t f = doc_ids.size();
    if (f == 0 || occurrency < f) {
        throw std::invalid_argument("term needs 1 <= f <= g");
    }
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
        if (doc_ids[i] >= n_docs || (i > 0 && doc_ids[i] <= doc_ids[i - 1])) {
            throw std::invalid_argument("document ids must be strictly increasing and below N");
        }
    }
    out.write_gamma(occurrency);
    if (occurrency > 1) {
        out.write_gamma(occurrency - f + 1);
    }
    const auto rep = choose_pointer_representation(f, n_docs);
    if (rep == PointerRepresentation::ranked_bitmap) {
        write_ranked_bitmap(out, doc_ids, BitmapShape::make(n_docs, f, q, n_docs));
    } else {
        write_elias_fano(out, doc_ids, document_shape(f, n_docs, q));
    }
    return rep;
}

inline std::vector<std::uint64_t> prefix_sums(std::span<const std::uint64_t> counts)
{
    std::vector<std::uint64_t> sums(counts.size());
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) {
            throw std::invalid_argument("counts must be positive");
        }
        s += counts[i];
        sums[i] = s;
    }
    return sums;
}

inline void write_term_counts(BitWriter& out, std::span<const std::uint64_t> counts, std::uint64_t occurrency,
                              std::uint64_t q)
{
    if (counts.empty()) {
        throw std::invalid_argument("a term needs at least one count");
    }
    const auto sums = prefix_sums(counts);
    if (sums.back() != occurrency) {
        throw std::invalid_argument("counts sum to " + std::to_string(sums.back()) + ", expected "
                                    + std::to_string(occurrency));
    }
    write_elias_fano(out, sums, counts_shape(counts.size(), occurrency, q));
}

/// `positions` holds every document's position list back to back; document i
/// owns counts[i] of them.
inline void write_term_positions(BitWriter& out, std::span<const std::uint64_t> counts,
                                 std::span<const std::uint64_t> positions, std::uint64_t q)
{
    std::vector<std::uint64_t> sums;
    sums.reserve(positions.size());
    std::uint64_t base = 0;
    std::size_t k = 0;
    for (const auto c : counts) {
        if (c == 0) {
            throw std::invalid_argument("empty position list");
        }
        if (k + c > positions.size()) {
            throw std::invalid_argument("counts exceed the number of positions");
        }
        for (std::uint64_t j = 0; j < c; ++j, ++k) {
            if (j > 0 && positions[k] <= positions[k - 1]) {
                throw std::invalid_argument("positions must be strictly increasing within a document");
            }
            sums.push_back(base + positions[k] + 1);
        }
        base = sums.back();
    }
    if (k != positions.size()) {
        throw std::invalid_argument("counts do not cover every position");
    }
    const std::uint64_t g = sums.size();
    // base is now f + sum of the last positions; keep the bound positive so
    // the upper bits are always present (readers cannot tell them apart)
    const auto shape = EfShape::make(g, std::max<std::uint64_t>(base - g, 1), q, PointerKind::forward,
                                     Monotone::strict_positive);
    out.write_gamma(shape.lower_width + 1);
    if (g >= q) {
        out.write_gamma(shape.pointer_width);
    }
    write_elias_fano(out, sums, shape);
}

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v)
{
    std::array<char, 8> bytes{};
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    }
    os.write(bytes.data(), bytes.size());
}

inline std::vector<std::uint64_t> read_u64_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) {
        throw corrupt_index(path.string() + ": size is not a multiple of 8 bytes");
    }
    std::vector<std::uint64_t> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t v = 0;
        for (int b = 7; b >= 0; --b) {
            v = (v << 8) | static_cast<unsigned char>(bytes[8 * i + b]);
        }
        out[i] = v;
    }
    return out;
}

inline void write_u64_file(const std::filesystem::path& path, std::span<const std::uint64_t> values)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto v : values) {
        write_u64(out, v);
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

} // namespace detail

/// One bit stream of a segment.
struct StreamData {
    std::vector<Word> words;
    std::uint64_t bit_length = 0;

    std::span<const Word> span() const { return words; }
};

/// A complete in-memory index. Immutable once built or loaded.
class IndexSegment {
public:
    GlobalMetadata meta;
    std::vector<std::string> terms;
    std::vector<TermOffsets> offsets;
    StreamData pointers;
    StreamData counts;
    StreamData positions;

    std::uint64_t document_count() const { return meta.document_count; }
    std::uint64_t quantum() const { return meta.quantum; }
    std::uint64_t term_count() const { return terms.size(); }

    std::optional<std::uint64_t> find(std::string_view term) const
    {
        const auto it = std::lower_bound(terms.begin(), terms.end(), term);
        if (it == terms.end() || *it != term) {
            return std::nullopt;
        }
        return static_cast<std::uint64_t>(it - terms.begin());
    }

    const StreamData& stream(Stream s) const
    {
        switch (s) {
        case Stream::pointers:
            return pointers;
        case Stream::counts:
            return counts;
        case Stream::positions:
            return positions;
        }
        return pointers;
    }

    /// Bit offset where term `id` ends in stream `s`.
    std::uint64_t term_end(std::uint64_t id, Stream s) const
    {
        if (id + 1 < offsets.size()) {
            const auto& o = offsets[id + 1];
            return s == Stream::pointers ? o.pointers : s == Stream::counts ? o.counts : o.positions;
        }
        return stream(s).bit_length;
    }

    std::uint64_t term_begin(std::uint64_t id, Stream s) const
    {
        const auto& o = offsets.at(id);
        return s == Stream::pointers ? o.pointers : s == Stream::counts ? o.counts : o.positions;
    }

    void save(const std::filesystem::path& dir) const
    {
        std::filesystem::create_directories(dir);
        const std::array<std::uint64_t, 7> header{meta.document_count, meta.quantum, terms.size(), meta.version,
                                                  pointers.bit_length, counts.bit_length, positions.bit_length};
        detail::write_u64_file(dir / "meta", header);
        {
            std::ofstream out(dir / "terms", std::ios::binary | std::ios::trunc);
            for (const auto& t : terms) {
                out << t << '\n';
            }
            if (!out) {
                throw std::runtime_error("write failed: " + (dir / "terms").string());
            }
        }
        std::vector<std::uint64_t> flat;
        flat.reserve(offsets.size() * 3);
        for (const auto& o : offsets) {
            flat.insert(flat.end(), {o.pointers, o.counts, o.positions});
        }
        detail::write_u64_file(dir / "offsets", flat);
        detail::write_u64_file(dir / "pointers", pointers.words);
        detail::write_u64_file(dir / "counts", counts.words);
        detail::write_u64_file(dir / "positions", positions.words);
    }

    static IndexSegment load(const std::filesystem::path& dir)
    {
        if (!std::filesystem::is_directory(dir)) {
            throw std::runtime_error("no index directory at " + dir.string());
        }
        IndexSegment seg;
        const auto header = detail::read_u64_file(dir / "meta");
        if (header.size() != 7) {
            throw corrupt_index("meta: expected 7 words, found " + std::to_string(header.size()));
        }
        seg.meta = GlobalMetadata{header[0], header[1], header[2], header[3]};
        if (seg.meta.version != format_version) {
            throw corrupt_index("unsupported index version " + std::to_string(seg.meta.version));
        }
        if (seg.meta.document_count == 0) {
            throw corrupt_index("index has no documents");
        }
        check_quantum(seg.meta.quantum);

        std::ifstream in(dir / "terms", std::ios::binary);
        if (!in) {
            throw std::runtime_error("cannot open " + (dir / "terms").string());
        }
        for (std::string line; std::getline(in, line);) {
            seg.terms.push_back(std::move(line));
        }
        if (seg.terms.size() != seg.meta.term_count || !std::is_sorted(seg.terms.begin(), seg.terms.end())) {
            throw corrupt_index("terms file does not match metadata");
        }

        const auto flat = detail::read_u64_file(dir / "offsets");
        if (flat.size() != 3 * seg.terms.size()) {
            throw corrupt_index("offsets file does not match term count");
        }
        for (std::size_t i = 0; i < seg.terms.size(); ++i) {
            seg.offsets.push_back(TermOffsets{flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]});
        }

        auto load_stream = [&](const char* name, std::uint64_t bits) {
            StreamData s{detail::read_u64_file(dir / name), bits};
            if (bits > s.words.size() * word_bits) {
                throw corrupt_index(std::string(name) + ": stream shorter than recorded length");
            }
            return s;
        };
        seg.pointers = load_stream("pointers", header[4]);
        seg.counts = load_stream("counts", header[5]);
        seg.positions = load_stream("positions", header[6]);

        for (std::size_t i = 0; i < seg.offsets.size(); ++i) {
            for (const auto s : {Stream::pointers, Stream::counts, Stream::positions}) {
                const auto begin = seg.term_begin(i, s);
                if (begin > seg.term_end(i, s) || begin > seg.stream(s).bit_length) {
                    throw corrupt_index("term offsets out of range for term " + std::to_string(i));
                }
            }
        }
        return seg;
    }
};

/// Decoded pointers-stream metadata of one term.
struct TermHeader {
    std::uint64_t frequency = 0;
    std::uint64_t occurrency = 0;
    PointerRepresentation representation = PointerRepresentation::elias_fano;
    std::uint64_t metadata_bits = 0;
    std::uint64_t payload_offset = 0;
    EfShape documents;     // valid for elias_fano
    BitmapShape bitmap;    // valid for ranked_bitmap

    EfShape counts(std::uint64_t q) const { return counts_shape(frequency, occurrency, q); }
};

inline TermHeader read_term_header(const IndexSegment& seg, std::uint64_t term_id, std::uint64_t* fetch_counter = nullptr)
{
    if (term_id >= seg.term_count()) {
        throw std::out_of_range("term id " + std::to_string(term_id) + " not in lexicon");
    }
    const std::uint64_t n_docs = seg.document_count();
    const std::uint64_t q = seg.quantum();
    TermHeader h;
    try {
        BitReader in(seg.pointers.span(), seg.pointers.bit_length, fetch_counter);
        const std::uint64_t start = seg.offsets[term_id].pointers;
        in.seek(start);
        h.occurrency = in.read_gamma();
        h.frequency = 1;
        if (h.occurrency > 1) {
            const std::uint64_t diff = in.read_gamma() - 1;
            if (diff >= h.occurrency) {
                throw corrupt_index("frequency out of range");
            }
            h.frequency = h.occurrency - diff;
        }
        h.payload_offset = in.position();
        h.metadata_bits = h.payload_offset - start;
    } catch (const corrupt_index&) {
        throw;
    } catch (const end_of_stream&) {
        throw corrupt_index("truncated metadata for term " + std::to_string(term_id));
    } catch (const std::runtime_error& e) {
        throw corrupt_index("bad metadata for term " + std::to_string(term_id) + ": " + e.what());
    }
    if (h.frequency > n_docs) {
        throw corrupt_index("frequency exceeds document count for term " + std::to_string(term_id));
    }
    h.representation = choose_pointer_representation(h.frequency, n_docs);
    if (h.representation == PointerRepresentation::ranked_bitmap) {
        h.bitmap = BitmapShape::make(n_docs, h.frequency, q, n_docs);
    } else {
        h.documents = document_shape(h.frequency, n_docs, q);
    }
    return h;
}

struct PositionsHeader {
    std::uint64_t metadata_bits = 0;
    std::uint64_t payload_offset = 0;
    EfShape shape;
};

inline PositionsHeader read_positions_header(const IndexSegment& seg, std::uint64_t term_id, std::uint64_t occurrency,
                                             std::uint64_t* fetch_counter = nullptr)
{
    const std::uint64_t q = seg.quantum();
    PositionsHeader h;
    try {
        BitReader in(seg.positions.span(), seg.positions.bit_length, fetch_counter);
        const std::uint64_t start = seg.offsets.at(term_id).positions;
        in.seek(start);
        const std::uint64_t lower_width = in.read_gamma() - 1;
        std::uint64_t pointer_width = 0;
        if (occurrency >= q) {
            pointer_width = in.read_gamma();
        }
        if (lower_width >= word_bits || pointer_width > word_bits) {
            throw corrupt_index("positions parameters out of range");
        }
        h.payload_offset = in.position();
        h.metadata_bits = h.payload_offset - start;
        h.shape = EfShape::from_parameters(occurrency, static_cast<unsigned>(lower_width),
                                           static_cast<unsigned>(pointer_width), q, Monotone::strict_positive);
    } catch (const end_of_stream&) {
        throw corrupt_index("truncated positions metadata for term " + std::to_string(term_id));
    }
    return h;
}

/// Bits taken by each part of one term in one stream. For ranked bitmaps the
/// rank samples are reported as pointers and the bitmap as upper bits.
struct StreamParts {
    std::uint64_t metadata = 0;
    std::uint64_t pointers = 0;
    std::uint64_t lower = 0;
    std::uint64_t upper = 0;

    std::uint64_t total() const { return metadata + pointers + lower + upper; }
    StreamParts& operator+=(const StreamParts& o)
    {
        metadata += o.metadata;
        pointers += o.pointers;
        lower += o.lower;
        upper += o.upper;
        return *this;
    }
};

struct TermLayout {
    std::uint64_t frequency = 0;
    std::uint64_t occurrency = 0;
    PointerRepresentation representation = PointerRepresentation::elias_fano;
    StreamParts pointers;
    StreamParts counts;
    StreamParts positions;
};

/// Splits a term's three payloads into their parts, using only metadata and
/// the term offsets (the upper bits run to the start of the next term).
inline TermLayout describe_term(const IndexSegment& seg, std::uint64_t term_id)
{
    const auto h = read_term_header(seg, term_id);
    const std::uint64_t q = seg.quantum();
    TermLayout t;
    t.frequency = h.frequency;
    t.occurrency = h.occurrency;
    t.representation = h.representation;

    const std::uint64_t pointers_len = seg.term_end(term_id, Stream::pointers) - seg.term_begin(term_id, Stream::pointers);
    t.pointers.metadata = h.metadata_bits;
    if (h.representation == PointerRepresentation::ranked_bitmap) {
        t.pointers.pointers = h.bitmap.rank_bits();
    } else {
        t.pointers.pointers = h.documents.pointer_bits();
        t.pointers.lower = h.documents.lower_bits();
    }
    t.pointers.upper = pointers_len - t.pointers.metadata - t.pointers.pointers - t.pointers.lower;

    const auto cs = h.counts(q);
    const std::uint64_t counts_len = seg.term_end(term_id, Stream::counts) - seg.term_begin(term_id, Stream::counts);
    t.counts.pointers = cs.pointer_bits();
    t.counts.lower = cs.lower_bits();
    t.counts.upper = counts_len - t.counts.pointers - t.counts.lower;

    const auto ph = read_positions_header(seg, term_id, h.occurrency);
    const std::uint64_t positions_len
        = seg.term_end(term_id, Stream::positions) - seg.term_begin(term_id, Stream::positions);
    t.positions.metadata = ph.metadata_bits;
    t.positions.pointers = ph.shape.pointer_bits();
    t.positions.lower = ph.shape.lower_bits();
    t.positions.upper = positions_len - t.positions.metadata - t.positions.pointers - t.positions.lower;
    return t;
}

} // namespace qsi
