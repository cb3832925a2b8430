#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "codeshift/corpus.hpp"

namespace codeshift {

enum class TokenCategory {
    identifier,
    keyword,
    number,
    string_lit,
    op,
    punctuation,
    indent,
    dedent,
    newline,
    comment,
    other,
};

std::string_view token_category_name(TokenCategory c);
TokenCategory token_category_from_name(std::string_view name);

// Histogram identity is the (category, text) pair. indent/dedent/newline
// carry empty text; every other category has a non-empty lexeme.
struct Token {
    TokenCategory category = TokenCategory::other;
    std::string text;

    friend bool operator==(const Token&, const Token&) = default;
    friend auto operator<=>(const Token&, const Token&) = default;
};

struct TokenSeq {
    std::string file_id;
    std::vector<Token> tokens;

    friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

// Which tokens participate in histograms and rarity scores. Comments are
// excluded by default; structural tokens stay in (they carry zero rarity
// weight anyway once present in every file).
struct HistogramOptions {
    bool include_comments = false;
};

// Per-task token frequency statistics: one bin per distinct token identity.
struct TokenHistogram {
    std::string task_id;
    std::map<Token, std::uint64_t> counts;   // total occurrences
    std::map<Token, std::uint64_t> doc_freq; // number of files containing the token
    std::uint64_t n_files = 0;

    // Commutative, associative bin-wise sum; parallel reductions fold with
    // this and land on the same result as a sequential pass.
    void merge(const TokenHistogram& other);

    friend bool operator==(const TokenHistogram&, const TokenHistogram&) = default;
};

// Lexes Python or Java source into a full-coverage token stream. Pure
// function of (source, language). Throws LexError on unterminated
// strings/comments, illegal characters, or inconsistent indentation;
// UnsupportedLanguage for Language::other.
TokenSeq tokenize_file(const CodeFile& f);
std::vector<Token> tokenize(const std::string& source, Language language);

TokenHistogram build_histogram(std::span<const TokenSeq> seqs, const std::string& task_id,
                               const HistogramOptions& options = {});

// Sum over the distinct tokens of seq of ln(n_files / doc_freq). Zero for a
// sequence of universally shared tokens, larger the rarer the vocabulary.
// Throws UnknownToken when seq contains a token the histogram has no bin
// for (histogram/sequence mismatch).
double token_rarity(const TokenHistogram& h, const TokenSeq& seq,
                    const HistogramOptions& options = {});

// JSONL line: {"file_id": str, "tokens": [[category, text], ...]}
std::string serialize_token_seq(const TokenSeq& seq);
TokenSeq parse_token_seq(const std::string& jsonl_line);

// {"task_id", "n_files", "bins": [{"category","text","count","doc_freq"}]}
// with bins sorted by (category, text).
std::string serialize_histogram(const TokenHistogram& h);
TokenHistogram parse_histogram(const std::string& json_text);

} // namespace codeshift
