#pragma once

#include <cstdint>
#include <ostream>

namespace qsi {

/// Which of the three index streams a reader is attached to.
enum class Stream : std::uint8_t { pointers, counts, positions };

/// Counters filled in by cursors while a query runs. All counters only grow.
struct DecodeStats {
    std::uint64_t documents_decoded = 0;
    std::uint64_t counts_decoded = 0;
    std::uint64_t positions_decoded = 0;
    std::uint64_t unary_reads = 0;
    std::uint64_t negated_unary_reads = 0;
    std::uint64_t pointer_derefs = 0;
    // words fetched from each stream
    std::uint64_t pointers_stream_reads = 0;
    std::uint64_t counts_stream_reads = 0;
    std::uint64_t positions_stream_reads = 0;
    // upper-bits position (relative to the array start) reached by the
    // negated-unary phase of the most recent skip
    std::uint64_t last_skip_landing = 0;

    std::uint64_t* stream_reads(Stream s)
    {
        switch (s) {
        case Stream::pointers:
            return &pointers_stream_reads;
        case Stream::counts:
            return &counts_stream_reads;
        case Stream::positions:
            return &positions_stream_reads;
        }
        return nullptr;
    }

    void record_decoded(Stream s, std::uint64_t n = 1)
    {
        switch (s) {
        case Stream::pointers:
            documents_decoded += n;
            break;
        case Stream::counts:
            counts_decoded += n;
            break;
        case Stream::positions:
            positions_decoded += n;
            break;
        }
    }

    DecodeStats& operator+=(const DecodeStats& o)
    {
        documents_decoded += o.documents_decoded;
        counts_decoded += o.counts_decoded;
        positions_decoded += o.positions_decoded;
        unary_reads += o.unary_reads;
        negated_unary_reads += o.negated_unary_reads;
        pointer_derefs += o.pointer_derefs;
        pointers_stream_reads += o.pointers_stream_reads;
        counts_stream_reads += o.counts_stream_reads;
        positions_stream_reads += o.positions_stream_reads;
        return *this;
    }

    /// key=value rows, one counter per line.
    void write_rows(std::ostream& os) const
    {
        os << "documents_decoded=" << documents_decoded << '\n'
           << "counts_decoded=" << counts_decoded << '\n'
           << "positions_decoded=" << positions_decoded << '\n'
           << "unary_reads=" << unary_reads << '\n'
           << "negated_unary_reads=" << negated_unary_reads << '\n'
           << "pointer_derefs=" << pointer_derefs << '\n'
           << "pointers_stream_reads=" << pointers_stream_reads << '\n'
           << "counts_stream_reads=" << counts_stream_reads << '\n'
           << "positions_stream_reads=" << positions_stream_reads << '\n';
    }
};

} // namespace qsi
