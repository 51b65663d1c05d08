#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "builder.hpp"
#include "corpus_reader.hpp"
#include "decode_stats.hpp"
#include "gap_baseline.hpp"
#include "index_format.hpp"
#include "posting_cursor.hpp"
#include "query_engine.hpp"

// Command implementations behind the qsi tool. Each command writes its normal
// output to `out`, diagnostics to `err`, and returns the process exit status.

namespace qsi::cli {

enum class OutputFormat : std::uint8_t { text, rows };

enum class QueryMode : std::uint8_t { conjunction, phrase, proximity };

class query_syntax_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParsedQuery {
    QueryMode mode = QueryMode::conjunction;
    std::vector<std::string> terms;
    std::uint64_t window = default_proximity_window;

    bool operator==(const ParsedQuery&) const = default;
};

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(first, last - first + 1);
}

inline std::uint64_t parse_window(std::string_view digits)
{
    if (digits.empty() || digits.size() > 9
        || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw query_syntax_error("proximity window must be a positive integer after '~'");
    }
    const std::uint64_t w = std::stoull(std::string(digits));
    if (w == 0) {
        throw query_syntax_error("proximity window must be positive");
    }
    return w;
}

/// Mode names accepted by --mode: and, phrase, prox, prox~N.
inline std::pair<QueryMode, std::optional<std::uint64_t>> parse_mode(std::string_view name)
{
    if (name == "and") {
        return {QueryMode::conjunction, std::nullopt};
    }
    if (name == "phrase") {
        return {QueryMode::phrase, std::nullopt};
    }
    if (name == "prox") {
        return {QueryMode::proximity, std::nullopt};
    }
    if (name.starts_with("prox~")) {
        return {QueryMode::proximity, parse_window(name.substr(5))};
    }
    throw query_syntax_error("unknown query mode '" + std::string(name) + "'");
}

/// Query syntax:
///   a b c        conjunction
///   "a b c"      phrase
///   a b c ~N     proximity within a window of N positions ("a b"~N as well)
/// A --mode given on the command line must agree with any markup present.
inline ParsedQuery parse_query(std::string_view text, std::optional<std::string_view> mode = std::nullopt)
{
    ParsedQuery q;
    std::string_view body = trim(text);
    bool marked = false;

    std::optional<std::uint64_t> window;
    if (const auto tilde = body.rfind('~'); tilde != std::string_view::npos) {
        window = parse_window(body.substr(tilde + 1));
        body = trim(body.substr(0, tilde));
        q.mode = QueryMode::proximity;
        marked = true;
    }
    if (body.find('~') != std::string_view::npos) {
        throw query_syntax_error("'~' may appear only once, at the end of the query");
    }
    if (!body.empty() && body.front() == '"') {
        if (body.size() < 2 || body.back() != '"') {
            throw query_syntax_error("unterminated quote");
        }
        body = body.substr(1, body.size() - 2);
        if (!window) {
            q.mode = QueryMode::phrase;
            marked = true;
        }
    }
    if (body.find('"') != std::string_view::npos) {
        throw query_syntax_error("quotes must enclose the whole query");
    }
    for (const auto t : tokenize(body)) {
        q.terms.emplace_back(t);
    }
    if (q.terms.empty()) {
        throw query_syntax_error("empty query");
    }
    if (mode) {
        const auto [m, w] = parse_mode(*mode);
        if (marked && m != q.mode) {
            throw query_syntax_error("query markup contradicts --mode " + std::string(*mode));
        }
        if (w && window && *w != *window) {
            throw query_syntax_error("query window contradicts --mode " + std::string(*mode));
        }
        q.mode = m;
        if (w) {
            window = w;
        }
    }
    if (window) {
        q.window = *window;
    }
    if (q.mode == QueryMode::proximity && q.window < q.terms.size()) {
        throw query_syntax_error("proximity window " + std::to_string(q.window) + " is smaller than the "
                                 + std::to_string(q.terms.size()) + " query terms");
    }
    return q;
}

struct QueryResult {
    std::vector<std::uint64_t> documents;
    std::vector<std::string> missing_terms;
    DecodeStats stats;
};

/// Evaluates a parsed query. Unknown terms make the result empty.
inline QueryResult run_query(const IndexSegment& seg, const ParsedQuery& query,
                             Intersection intersection = Intersection::skipping)
{
    QueryResult r;
    std::vector<PostingCursor> cursors;
    cursors.reserve(query.terms.size());
    for (const auto& term : query.terms) {
        if (const auto id = seg.find(term)) {
            cursors.emplace_back(seg, *id, &r.stats);
        } else {
            r.missing_terms.push_back(term);
        }
    }
    if (!r.missing_terms.empty()) {
        return r;
    }
    switch (query.mode) {
    case QueryMode::conjunction:
        r.documents = and_query(cursors, intersection);
        break;
    case QueryMode::phrase:
        r.documents = phrase_query(cursors);
        break;
    case QueryMode::proximity:
        r.documents = proximity_query(cursors, query.window);
        break;
    }
    return r;
}

inline const char* mode_name(QueryMode m)
{
    switch (m) {
    case QueryMode::conjunction:
        return "and";
    case QueryMode::phrase:
        return "phrase";
    case QueryMode::proximity:
        return "prox";
    }
    return "?";
}

struct BuildOptions {
    std::string corpus;
    std::filesystem::path index;
    std::uint64_t quantum = default_quantum;
    bool force = false;
    OutputFormat format = OutputFormat::text;
};

struct QueryOptions {
    std::filesystem::path index;
    std::string query;
    std::optional<std::string> mode;
    bool stats = false;
    bool linear_merge = false;
    OutputFormat format = OutputFormat::text;
};

struct StatsOptions {
    std::filesystem::path index;
    bool compare = false;
    bool terms = false;
    OutputFormat format = OutputFormat::text;
};

struct BenchOptions {
    std::filesystem::path index;
    std::filesystem::path queries;
    std::uint64_t repetitions = 10;
    std::uint64_t warmups = 3;
    unsigned threads = 1;
    std::optional<std::string> mode;
    OutputFormat format = OutputFormat::text;
};

inline void write_field(std::ostream& os, OutputFormat f, std::string_view key, const auto& value)
{
    if (f == OutputFormat::rows) {
        os << key << '=' << value << '\n';
    } else {
        os << key << ": " << value << '\n';
    }
}

inline int cmd_build(const BuildOptions& o, std::ostream& out, std::ostream& err)
{
    try {
        check_quantum(o.quantum);
        if (std::filesystem::exists(o.index) && !o.force) {
            err << "error: " << o.index.string() << " already exists (use --force to overwrite)\n";
            return 1;
        }
        const Accumulator acc = ingest_file(o.corpus);
        const IndexSegment seg = serialize(acc, o.quantum);
        seg.save(o.index);
        write_field(out, o.format, "documents", acc.document_count());
        write_field(out, o.format, "terms", acc.terms().size());
        write_field(out, o.format, "postings", acc.posting_count());
        write_field(out, o.format, "occurrences", acc.token_count());
        write_field(out, o.format, "quantum", o.quantum);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int cmd_query(const QueryOptions& o, std::ostream& out, std::ostream& err)
{
    try {
        const ParsedQuery query = parse_query(o.query, o.mode);
        const IndexSegment seg = IndexSegment::load(o.index);
        const QueryResult r
            = run_query(seg, query, o.linear_merge ? Intersection::linear_merge : Intersection::skipping);
        for (const auto& t : r.missing_terms) {
            err << "warning: term '" << t << "' is not in the lexicon\n";
        }
        for (const auto d : r.documents) {
            if (o.format == OutputFormat::rows) {
                out << "document=" << d << '\n';
            } else {
                out << d << '\n';
            }
        }
        if (o.stats) {
            if (o.format == OutputFormat::text) {
                out << "# stats\n";
            }
            write_field(out, OutputFormat::rows, "results", r.documents.size());
            r.stats.write_rows(out);
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int cmd_stats(const StatsOptions& o, std::ostream& out, std::ostream& err)
{
    try {
        const IndexSegment seg = IndexSegment::load(o.index);
        const SizeReport report = compare_sizes(seg, o.compare, o.terms);
        constexpr std::array<const char*, 3> files{"pointers", "counts", "positions"};
        if (o.format == OutputFormat::rows) {
            report.write_rows(out);
            for (std::size_t k = 0; k < files.size(); ++k) {
                out << "file_bytes." << files[k] << '=' << std::filesystem::file_size(o.index / files[k]) << '\n';
            }
            for (const auto& t : report.term_rows) {
                out << "term=" << t.term << " f=" << t.frequency << " g=" << t.occurrency
                    << " rep=" << (t.representation == PointerRepresentation::ranked_bitmap ? "bitmap" : "ef")
                    << " qs=" << t.qs_bits[0] << ',' << t.qs_bits[1] << ',' << t.qs_bits[2];
                if (report.has_baseline) {
                    out << " gap=" << t.baseline_bits[0] << ',' << t.baseline_bits[1] << ',' << t.baseline_bits[2];
                }
                out << '\n';
            }
        } else {
            out << "documents: " << report.documents << "\nterms: " << report.terms << '\n';
            report.write_table(out);
            for (const auto& t : report.term_rows) {
                out << t.term << '\t' << t.frequency << '\t' << t.occurrency << '\t' << t.qs_bits[0] << '\t'
                    << t.qs_bits[1] << '\t' << t.qs_bits[2] << '\n';
            }
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

struct BenchModeSummary {
    QueryMode mode = QueryMode::conjunction;
    std::uint64_t queries = 0;
    std::uint64_t results = 0;
    std::vector<double> seconds; // one total per timed repetition
};

inline double mean(const std::vector<double>& xs)
{
    double s = 0;
    for (const auto x : xs) {
        s += x;
    }
    return xs.empty() ? 0.0 : s / double(xs.size());
}

/// Sample standard deviation over the mean, in percent.
inline double relative_std_dev(const std::vector<double>& xs)
{
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    double ss = 0;
    for (const auto x : xs) {
        ss += (x - m) * (x - m);
    }
    return m == 0 ? 0.0 : 100.0 * std::sqrt(ss / double(xs.size() - 1)) / m;
}

inline int cmd_bench(const BenchOptions& o, std::ostream& out, std::ostream& err)
{
    try {
        if (o.repetitions == 0) {
            throw std::invalid_argument("at least one timed repetition is needed");
        }
        const unsigned threads = std::max(1u, o.threads);
        const IndexSegment seg = IndexSegment::load(o.index);
        std::ifstream in(o.queries);
        if (!in) {
            throw std::runtime_error("cannot open query file " + o.queries.string());
        }
        std::vector<ParsedQuery> queries;
        for (std::string line; std::getline(in, line);) {
            if (trim(line).empty()) {
                continue;
            }
            queries.push_back(parse_query(line, o.mode));
        }

        // one run of the whole query set; returns per-query elapsed seconds and result counts
        std::vector<double> elapsed(queries.size());
        std::vector<std::uint64_t> counts(queries.size());
        auto run_all = [&] {
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i = next++; i < queries.size(); i = next++) {
                    const auto start = std::chrono::steady_clock::now();
                    const auto r = run_query(seg, queries[i]);
                    elapsed[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    counts[i] = r.documents.size();
                }
            };
            if (threads == 1) {
                worker();
                return;
            }
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back(worker);
            }
        };

        for (std::uint64_t w = 0; w < o.warmups; ++w) {
            run_all();
        }
        std::vector<BenchModeSummary> modes(3);
        for (std::size_t m = 0; m < modes.size(); ++m) {
            modes[m].mode = static_cast<QueryMode>(m);
        }
        std::vector<std::uint64_t> reference;
        std::vector<double> totals;
        for (std::uint64_t rep = 0; rep < o.repetitions; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            run_all();
            totals.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            if (rep == 0) {
                reference = counts;
            } else if (counts != reference) {
                throw std::logic_error("result counts differ between repetitions");
            }
            std::array<double, 3> per_mode{};
            for (std::size_t i = 0; i < queries.size(); ++i) {
                per_mode[static_cast<std::size_t>(queries[i].mode)] += elapsed[i];
            }
            for (std::size_t m = 0; m < modes.size(); ++m) {
                modes[m].seconds.push_back(per_mode[m]);
            }
        }
        for (std::size_t i = 0; i < queries.size(); ++i) {
            auto& s = modes[static_cast<std::size_t>(queries[i].mode)];
            ++s.queries;
            s.results += reference[i];
        }

        const auto flags = out.flags();
        if (o.format == OutputFormat::rows) {
            out << "queries=" << queries.size() << "\nwarmups=" << o.warmups << "\nrepetitions=" << o.repetitions
                << "\nthreads=" << threads << "\ntotal_mean_seconds=" << mean(totals)
                << "\ntotal_rsd_percent=" << relative_std_dev(totals) << '\n';
            for (const auto& s : modes) {
                if (s.queries == 0) {
                    continue;
                }
                const std::string k = mode_name(s.mode);
                out << k << ".queries=" << s.queries << '\n'
                    << k << ".results=" << s.results << '\n'
                    << k << ".mean_seconds=" << mean(s.seconds) << '\n'
                    << k << ".rsd_percent=" << relative_std_dev(s.seconds) << '\n';
            }
        } else {
            out << queries.size() << " queries, " << o.warmups << " warm-up and " << o.repetitions
                << " timed repetitions, " << threads << " thread(s)\n";
            out << std::left << std::setw(8) << "mode" << std::right << std::setw(10) << "queries" << std::setw(12)
                << "results" << std::setw(14) << "mean ms" << std::setw(10) << "rsd %" << '\n'
                << std::fixed << std::setprecision(3);
            for (const auto& s : modes) {
                if (s.queries == 0) {
                    continue;
                }
                out << std::left << std::setw(8) << mode_name(s.mode) << std::right << std::setw(10) << s.queries
                    << std::setw(12) << s.results << std::setw(14) << 1e3 * mean(s.seconds) << std::setw(10)
                    << relative_std_dev(s.seconds) << '\n';
            }
            out << std::left << std::setw(8) << "all" << std::right << std::setw(10) << queries.size()
                << std::setw(12) << "" << std::setw(14) << 1e3 * mean(totals) << std::setw(10)
                << relative_std_dev(totals) << '\n';
        }
        out.flags(flags);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

/// Parses the command line and dispatches. Usage errors return CLI11's nonzero codes.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quasi-succinct inverted index: build, query, stats, bench"};
    app.require_subcommand(1);

    const std::map<std::string, OutputFormat> formats{{"text", OutputFormat::text}, {"rows", OutputFormat::rows}};
    OutputFormat format = OutputFormat::text;
    app.add_option("--format", format, "Output format: text or key=value rows")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    BuildOptions build;
    auto* b = app.add_subcommand("build", "Build an index from a corpus (one document per line, plain or gzip)");
    b->add_option("corpus", build.corpus, "Corpus file")->required();
    b->add_option("index", build.index, "Index directory to create")->required();
    b->add_option("--q", build.quantum, "Pointer quantum, a power of two >= 2")->capture_default_str();
    b->add_flag("--force", build.force, "Overwrite an existing index directory");

    QueryOptions query;
    auto* q = app.add_subcommand("query", "Run one query and print matching document ids");
    q->footer("Syntax: 'a b' is a conjunction, '\"a b\"' a phrase, 'a b ~N' a proximity query within N "
              "positions (default window 16). A term repeated in a proximity query needs that many distinct "
              "occurrences inside the window. Unknown terms give an empty result and a warning.");
    q->add_option("index", query.index, "Index directory")->required();
    q->add_option("query", query.query, "Query string")->required();
    q->add_option("--mode", query.mode, "Force the mode: and, phrase, prox or prox~N");
    q->add_flag("--stats", query.stats, "Append decoding counters");
    q->add_flag("--linear", query.linear_merge, "Intersect by linear merge instead of skipping");

    StatsOptions stats;
    auto* s = app.add_subcommand("stats", "Report bits per element of each index component");
    s->add_option("index", stats.index, "Index directory")->required();
    s->add_flag("--compare", stats.compare, "Add gamma/delta gap-coded sizes");
    s->add_flag("--terms", stats.terms, "Add one row per term");

    BenchOptions bench;
    auto* m = app.add_subcommand("bench", "Time a query file");
    m->add_option("index", bench.index, "Index directory")->required();
    m->add_option("queries", bench.queries, "Query file, one query per line")->required();
    m->add_option("--repetitions", bench.repetitions, "Timed repetitions")->capture_default_str();
    m->add_option("--warmups", bench.warmups, "Untimed warm-up runs")->capture_default_str();
    m->add_option("--threads", bench.threads, "Worker threads")->capture_default_str()->check(CLI::Range(1u, 256u));
    m->add_option("--mode", bench.mode, "Force the mode of every query: and, phrase, prox or prox~N");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    if (b->parsed()) {
        build.format = format;
        return cmd_build(build, out, err);
    }
    if (q->parsed()) {
        query.format = format;
        return cmd_query(query, out, err);
    }
    if (s->parsed()) {
        stats.format = format;
        return cmd_stats(stats, out, err);
    }
    bench.format = format;
    return cmd_bench(bench, out, err);
}

} // namespace qsi::cli
