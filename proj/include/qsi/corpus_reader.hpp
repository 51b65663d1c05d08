#pragma once

#include <zlib.h>

#include <memory>
#include <stdexcept>
#include <string>

#include "builder.hpp"

namespace qsi {

/// Builds an accumulator from a corpus file, plain text or gzip (detected by
/// zlib, which passes uncompressed input through unchanged).
inline Accumulator ingest_file(const std::string& path)
{
    std::unique_ptr<gzFile_s, decltype(&gzclose)> file(gzopen(path.c_str(), "rb"), &gzclose);
    if (!file) {
        throw std::runtime_error("cannot open corpus " + path);
    }
    Accumulator acc;
    std::string line;
    char buffer[1 << 16];
    for (;;) {
        const char* got = gzgets(file.get(), buffer, sizeof buffer);
        if (got == nullptr) {
            break;
        }
        line += got;
        if (!line.empty() && line.back() == '\n') {
            line.pop_back();
            acc.add_text(line);
            line.clear();
        }
    }
    int err = Z_OK;
    const char* msg = gzerror(file.get(), &err);
    if (err != Z_OK && err != Z_STREAM_END) {
        throw std::runtime_error("error reading corpus " + path + ": " + msg);
    }
    if (!line.empty()) {
        acc.add_text(line);
    }
    if (acc.document_count() == 0) {
        throw std::runtime_error("no documents");
    }
    return acc;
}

} // namespace qsi
