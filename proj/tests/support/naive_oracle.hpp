#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zipf_corpus.hpp"

// Reference evaluators that rescan the raw token lists of every document.

namespace qsi::test_support {

inline bool naive_contains_all(const Document& doc, const std::vector<std::string>& terms)
{
    return std::all_of(terms.begin(), terms.end(),
                       [&](const std::string& t) { return std::find(doc.begin(), doc.end(), t) != doc.end(); });
}

inline bool naive_phrase(const Document& doc, const std::vector<std::string>& terms)
{
    if (terms.size() > doc.size()) {
        return false;
    }
    for (std::size_t p = 0; p + terms.size() <= doc.size(); ++p) {
        bool ok = true;
        for (std::size_t j = 0; j < terms.size() && ok; ++j) {
            ok = doc[p + j] == terms[j];
        }
        if (ok) {
            return true;
        }
    }
    return false;
}

/// Some window of `window` consecutive tokens holds each query term at least
/// as many times as it appears in the query.
inline bool naive_proximity(const Document& doc, const std::vector<std::string>& terms, std::size_t window)
{
    std::map<std::string, std::size_t> need;
    for (const auto& t : terms) {
        ++need[t];
    }
    for (std::size_t s = 0; s < doc.size(); ++s) {
        std::map<std::string, std::size_t> have;
        for (std::size_t p = s; p < doc.size() && p < s + window; ++p) {
            ++have[doc[p]];
        }
        const bool ok = std::all_of(need.begin(), need.end(), [&](const auto& kv) {
            const auto it = have.find(kv.first);
            return it != have.end() && it->second >= kv.second;
        });
        if (ok) {
            return true;
        }
    }
    return false;
}

enum class NaiveMode { conjunction, phrase, proximity };

inline std::vector<std::uint64_t> naive_query(const std::vector<Document>& docs, const std::vector<std::string>& terms,
                                              NaiveMode mode, std::size_t window = 16)
{
    std::vector<std::uint64_t> out;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        bool ok = false;
        switch (mode) {
        case NaiveMode::conjunction:
            ok = naive_contains_all(docs[d], terms);
            break;
        case NaiveMode::phrase:
            ok = naive_phrase(docs[d], terms);
            break;
        case NaiveMode::proximity:
            ok = naive_proximity(docs[d], terms, window);
            break;
        }
        if (ok) {
            out.push_back(d);
        }
    }
    return out;
}

} // namespace qsi::test_support
