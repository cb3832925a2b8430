#include "codeshift/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"

using json = nlohmann::json;

namespace codeshift {

std::string_view token_category_name(TokenCategory c) {
    switch (c) {
    case TokenCategory::identifier: return "identifier";
    case TokenCategory::keyword: return "keyword";
    case TokenCategory::number: return "number";
    case TokenCategory::string_lit: return "string_lit";
    case TokenCategory::op: return "operator";
    case TokenCategory::punctuation: return "punctuation";
    case TokenCategory::indent: return "indent";
    case TokenCategory::dedent: return "dedent";
    case TokenCategory::newline: return "newline";
    case TokenCategory::comment: return "comment";
    case TokenCategory::other: return "other";
    }
    return "other";
}

TokenCategory token_category_from_name(std::string_view name) {
    if (name == "identifier") return TokenCategory::identifier;
    if (name == "keyword") return TokenCategory::keyword;
    if (name == "number") return TokenCategory::number;
    if (name == "string_lit") return TokenCategory::string_lit;
    if (name == "operator") return TokenCategory::op;
    if (name == "punctuation") return TokenCategory::punctuation;
    if (name == "indent") return TokenCategory::indent;
    if (name == "dedent") return TokenCategory::dedent;
    if (name == "newline") return TokenCategory::newline;
    if (name == "comment") return TokenCategory::comment;
    if (name == "other") return TokenCategory::other;
    throw Error(Errc::schema_error, "unknown token category \"" + std::string(name) + "\"");
}

namespace {

// Keyword tables mirror docs/lexer-rules.md.
const std::unordered_set<std::string_view> kPythonKeywords = {
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise",
    "return", "try", "while", "with", "yield",
};

// Reserved words, plus the three literal words that can never be identifiers.
const std::unordered_set<std::string_view> kJavaKeywords = {
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class",
    "const", "continue", "default", "do", "double", "else", "enum", "extends", "final",
    "finally", "float", "for", "goto", "if", "implements", "import", "instanceof", "int",
    "interface", "long", "native", "new", "package", "private", "protected", "public",
    "return", "short", "static", "strictfp", "super", "switch", "synchronized", "this",
    "throw", "throws", "transient", "try", "void", "volatile", "while",
    "true", "false", "null",
};

// Longest match first within each table.
const std::array<std::string_view, 4> kPythonOps3 = {"**=", "//=", ">>=", "<<="};
const std::array<std::string_view, 19> kPythonOps2 = {
    "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "+=", "-=",
    "*=", "/=", "%=", "@=", "&=", "|=", "^=", "->", ":=",
};
const std::string_view kPythonOps1 = "+-*/%@&|^~<>=";
const std::string_view kPythonPunct = "()[]{},:.;";

const std::array<std::string_view, 1> kJavaOps4 = {">>>="};
const std::array<std::string_view, 3> kJavaOps3 = {">>>", "<<=", ">>="};
const std::array<std::string_view, 18> kJavaOps2 = {
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "::",
};
const std::string_view kJavaOps1 = "+-*/%&|^~!<>=?";
const std::string_view kJavaPunct = "()[]{};,.@:";

bool is_ident_start(unsigned char c, bool java) {
    if (std::isalpha(c) || c == '_') return true;
    if (java && c == '$') return true;
    return c >= 0x80; // non-ASCII passes through as identifier material
}

bool is_ident_body(unsigned char c, bool java) {
    return is_ident_start(c, java) || std::isdigit(c);
}

struct Cursor {
    const std::string& src;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    bool eof() const { return pos >= src.size(); }
    char peek(std::size_t off = 0) const {
        return pos + off < src.size() ? src[pos + off] : '\0';
    }
    void advance() {
        if (eof()) return;
        if (src[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    void advance_n(std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) advance();
    }
    bool starts_with(std::string_view s) const {
        return src.compare(pos, s.size(), s) == 0;
    }
};

class Lexer {
  public:
    Lexer(const std::string& source, Language language)
        : cur_{source}, java_(language == Language::java) {}

    std::vector<Token> run() {
        if (java_) {
            lex_java();
        } else {
            lex_python();
        }
        return std::move(out_);
    }

  private:
    Cursor cur_;
    bool java_;
    std::vector<Token> out_;

    void emit(TokenCategory cat, std::string text) { out_.push_back({cat, std::move(text)}); }

    [[noreturn]] void fail(int line, int col, const std::string& reason) {
        throw LexError(line, col, reason);
    }
    [[noreturn]] void fail_here(const std::string& reason) { fail(cur_.line, cur_.col, reason); }

    // ---- shared scanners -------------------------------------------------

    std::string take_while_ident() {
        std::size_t start = cur_.pos;
        while (!cur_.eof() && is_ident_body(static_cast<unsigned char>(cur_.peek()), java_))
            cur_.advance();
        return cur_.src.substr(start, cur_.pos - start);
    }

    // Permissive number scan shared by both languages: radix-prefixed
    // integers, decimal floats with exponents, underscores, and the
    // language's suffix letters. Validation stops at "looks like a number".
    std::string scan_number() {
        std::size_t start = cur_.pos;
        if (cur_.peek() == '0' &&
            (cur_.peek(1) == 'x' || cur_.peek(1) == 'X' || cur_.peek(1) == 'o' ||
             cur_.peek(1) == 'O' || cur_.peek(1) == 'b' || cur_.peek(1) == 'B')) {
            cur_.advance();
            cur_.advance();
            while (!cur_.eof() && (std::isxdigit(static_cast<unsigned char>(cur_.peek())) ||
                                   cur_.peek() == '_'))
                cur_.advance();
        } else {
            while (!cur_.eof() &&
                   (std::isdigit(static_cast<unsigned char>(cur_.peek())) || cur_.peek() == '_'))
                cur_.advance();
            if (cur_.peek() == '.' && std::isdigit(static_cast<unsigned char>(cur_.peek(1)))) {
                cur_.advance();
                while (!cur_.eof() && (std::isdigit(static_cast<unsigned char>(cur_.peek())) ||
                                       cur_.peek() == '_'))
                    cur_.advance();
            } else if (cur_.peek() == '.' && !java_ &&
                       cur_.pos > start) { // python allows "1."
                cur_.advance();
            } else if (cur_.peek() == '.' && java_ && cur_.pos > start) {
                // java allows "1." too, but not "1.foo()"
                if (!is_ident_start(static_cast<unsigned char>(cur_.peek(1)), true))
                    cur_.advance();
            }
            if ((cur_.peek() == 'e' || cur_.peek() == 'E')) {
                char after = cur_.peek(1);
                char after2 = cur_.peek(2);
                if (std::isdigit(static_cast<unsigned char>(after)) ||
                    ((after == '+' || after == '-') &&
                     std::isdigit(static_cast<unsigned char>(after2)))) {
                    cur_.advance(); // e
                    if (cur_.peek() == '+' || cur_.peek() == '-') cur_.advance();
                    while (!cur_.eof() && std::isdigit(static_cast<unsigned char>(cur_.peek())))
                        cur_.advance();
                }
            }
        }
        // suffixes
        if (java_) {
            char c = cur_.peek();
            if (c == 'l' || c == 'L' || c == 'f' || c == 'F' || c == 'd' || c == 'D')
                cur_.advance();
        } else {
            if (cur_.peek() == 'j' || cur_.peek() == 'J') cur_.advance();
        }
        return cur_.src.substr(start, cur_.pos - start);
    }

    template <typename Table>
    bool try_ops(const Table& table) {
        for (std::string_view op : table) {
            if (cur_.starts_with(op)) {
                emit(TokenCategory::op, std::string(op));
                cur_.advance_n(op.size());
                return true;
            }
        }
        return false;
    }

    // ---- python ----------------------------------------------------------

    static bool is_python_string_prefix(const std::string& ident) {
        if (ident.size() > 2) return false;
        std::string low;
        for (char c : ident) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        static const std::set<std::string> prefixes = {"r", "b", "u", "f",
                                                       "br", "rb", "fr", "rf"};
        return prefixes.count(low) > 0;
    }

    void python_string(std::size_t lexeme_start, int start_line, int start_col) {
        const char quote = cur_.peek();
        cur_.advance();
        bool triple = cur_.peek() == quote && cur_.peek(1) == quote;
        if (triple) {
            cur_.advance();
            cur_.advance();
            for (;;) {
                if (cur_.eof()) fail(start_line, start_col, "unterminated string");
                if (cur_.peek() == '\\') {
                    cur_.advance();
                    cur_.advance();
                    continue;
                }
                if (cur_.peek() == quote && cur_.peek(1) == quote && cur_.peek(2) == quote) {
                    cur_.advance_n(3);
                    break;
                }
                cur_.advance();
            }
        } else {
            for (;;) {
                if (cur_.eof() || cur_.peek() == '\n')
                    fail(start_line, start_col, "unterminated string");
                if (cur_.peek() == '\\') {
                    cur_.advance();
                    cur_.advance();
                    continue;
                }
                if (cur_.peek() == quote) {
                    cur_.advance();
                    break;
                }
                cur_.advance();
            }
        }
        emit(TokenCategory::string_lit, cur_.src.substr(lexeme_start, cur_.pos - lexeme_start));
    }

    void lex_python() {
        std::vector<int> indents = {0};
        int paren_depth = 0;
        bool at_line_start = true;

        auto flush_dedents_to = [&](int col, int line) {
            while (indents.back() > col) {
                indents.pop_back();
                emit(TokenCategory::dedent, "");
            }
            if (indents.back() != col) fail(line, col + 1, "inconsistent dedent");
        };

        while (!cur_.eof()) {
            if (at_line_start && paren_depth == 0) {
                int col = 0;
                for (;;) {
                    char c = cur_.peek();
                    if (c == ' ') {
                        ++col;
                        cur_.advance();
                    } else if (c == '\t') {
                        col = (col / 8 + 1) * 8;
                        cur_.advance();
                    } else if (c == '\f') {
                        cur_.advance();
                    } else {
                        break;
                    }
                }
                char c = cur_.peek();
                if (cur_.eof()) break;
                if (c == '\n' || c == '\r' || c == '#') {
                    // Blank or comment-only line: indentation untouched.
                    if (c == '#') python_comment();
                    if (cur_.peek() == '\r') cur_.advance();
                    if (cur_.peek() == '\n') {
                        emit(TokenCategory::newline, "");
                        cur_.advance();
                    }
                    continue;
                }
                if (col > indents.back()) {
                    indents.push_back(col);
                    emit(TokenCategory::indent, "");
                } else if (col < indents.back()) {
                    flush_dedents_to(col, cur_.line);
                }
                at_line_start = false;
                continue;
            }

            const char c = cur_.peek();
            if (c == '\r') {
                cur_.advance();
                continue;
            }
            if (c == '\n') {
                if (paren_depth == 0) {
                    emit(TokenCategory::newline, "");
                    at_line_start = true;
                }
                cur_.advance();
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\f') {
                cur_.advance();
                continue;
            }
            if (c == '\\') {
                if (cur_.peek(1) == '\n' || (cur_.peek(1) == '\r' && cur_.peek(2) == '\n')) {
                    cur_.advance();
                    if (cur_.peek() == '\r') cur_.advance();
                    cur_.advance(); // explicit line join: no newline token
                    continue;
                }
                fail_here("unexpected character '\\'");
            }
            if (c == '#') {
                python_comment();
                continue;
            }
            if (c == '"' || c == '\'') {
                python_string(cur_.pos, cur_.line, cur_.col);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && std::isdigit(static_cast<unsigned char>(cur_.peek(1))))) {
                emit(TokenCategory::number, scan_number());
                continue;
            }
            if (is_ident_start(static_cast<unsigned char>(c), false)) {
                std::size_t start = cur_.pos;
                int line = cur_.line, col = cur_.col;
                std::string ident = take_while_ident();
                if ((cur_.peek() == '"' || cur_.peek() == '\'') && is_python_string_prefix(ident)) {
                    python_string(start, line, col);
                    continue;
                }
                const bool is_keyword = kPythonKeywords.count(ident) > 0;
                emit(is_keyword ? TokenCategory::keyword : TokenCategory::identifier,
                     std::move(ident));
                continue;
            }
            if (cur_.starts_with("...")) {
                emit(TokenCategory::punctuation, "...");
                cur_.advance_n(3);
                continue;
            }
            if (try_ops(kPythonOps3) || try_ops(kPythonOps2)) continue;
            if (kPythonPunct.find(c) != std::string_view::npos) {
                if (c == '(' || c == '[' || c == '{') ++paren_depth;
                if (c == ')' || c == ']' || c == '}') paren_depth = std::max(0, paren_depth - 1);
                emit(TokenCategory::punctuation, std::string(1, c));
                cur_.advance();
                continue;
            }
            if (kPythonOps1.find(c) != std::string_view::npos) {
                emit(TokenCategory::op, std::string(1, c));
                cur_.advance();
                continue;
            }
            fail_here(std::string("illegal character '") + c + "'");
        }

        while (indents.size() > 1) {
            indents.pop_back();
            emit(TokenCategory::dedent, "");
        }
    }

    void python_comment() {
        std::size_t start = cur_.pos;
        while (!cur_.eof() && cur_.peek() != '\n') cur_.advance();
        std::string text = cur_.src.substr(start, cur_.pos - start);
        while (!text.empty() && text.back() == '\r') text.pop_back();
        emit(TokenCategory::comment, std::move(text));
    }

    // ---- java ------------------------------------------------------------

    void java_string(char quote) {
        std::size_t start = cur_.pos;
        int line = cur_.line, col = cur_.col;
        cur_.advance();
        for (;;) {
            if (cur_.eof() || cur_.peek() == '\n')
                fail(line, col, quote == '"' ? "unterminated string" : "unterminated char literal");
            if (cur_.peek() == '\\') {
                cur_.advance();
                cur_.advance();
                continue;
            }
            if (cur_.peek() == quote) {
                cur_.advance();
                break;
            }
            cur_.advance();
        }
        emit(TokenCategory::string_lit, cur_.src.substr(start, cur_.pos - start));
    }

    void lex_java() {
        while (!cur_.eof()) {
            const char c = cur_.peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f') {
                cur_.advance();
                continue;
            }
            if (c == '/' && cur_.peek(1) == '/') {
                std::size_t start = cur_.pos;
                while (!cur_.eof() && cur_.peek() != '\n') cur_.advance();
                std::string text = cur_.src.substr(start, cur_.pos - start);
                while (!text.empty() && text.back() == '\r') text.pop_back();
                emit(TokenCategory::comment, std::move(text));
                continue;
            }
            if (c == '/' && cur_.peek(1) == '*') {
                std::size_t start = cur_.pos;
                int line = cur_.line, col = cur_.col;
                cur_.advance();
                cur_.advance();
                for (;;) {
                    if (cur_.eof()) fail(line, col, "unterminated comment");
                    if (cur_.peek() == '*' && cur_.peek(1) == '/') {
                        cur_.advance();
                        cur_.advance();
                        break;
                    }
                    cur_.advance();
                }
                emit(TokenCategory::comment, cur_.src.substr(start, cur_.pos - start));
                continue;
            }
            if (c == '"' || c == '\'') {
                java_string(c);
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && std::isdigit(static_cast<unsigned char>(cur_.peek(1))))) {
                emit(TokenCategory::number, scan_number());
                continue;
            }
            if (is_ident_start(static_cast<unsigned char>(c), true)) {
                std::string ident = take_while_ident();
                const bool is_keyword = kJavaKeywords.count(ident) > 0;
                emit(is_keyword ? TokenCategory::keyword : TokenCategory::identifier,
                     std::move(ident));
                continue;
            }
            if (cur_.starts_with("...")) {
                emit(TokenCategory::punctuation, "...");
                cur_.advance_n(3);
                continue;
            }
            if (try_ops(kJavaOps4) || try_ops(kJavaOps3) || try_ops(kJavaOps2)) continue;
            if (kJavaPunct.find(c) != std::string_view::npos) {
                emit(TokenCategory::punctuation, std::string(1, c));
                cur_.advance();
                continue;
            }
            if (kJavaOps1.find(c) != std::string_view::npos) {
                emit(TokenCategory::op, std::string(1, c));
                cur_.advance();
                continue;
            }
            fail_here(std::string("illegal character '") + c + "'");
        }
    }
};

} // namespace

std::vector<Token> tokenize(const std::string& source, Language language) {
    if (language != Language::python && language != Language::java)
        throw Error(Errc::unsupported_language, std::string(language_name(language)));
    return Lexer(source, language).run();
}

TokenSeq tokenize_file(const CodeFile& f) {
    TokenSeq seq;
    seq.file_id = f.file_id;
    try {
        seq.tokens = tokenize(f.source, f.language);
    } catch (const LexError& e) {
        throw LexError(e.line(), e.col(), f.file_id + ": " + e.what());
    }
    return seq;
}

namespace {

bool histogram_token_included(const Token& t, const HistogramOptions& options) {
    return options.include_comments || t.category != TokenCategory::comment;
}

} // namespace

void TokenHistogram::merge(const TokenHistogram& other) {
    for (const auto& [tok, c] : other.counts) counts[tok] += c;
    for (const auto& [tok, c] : other.doc_freq) doc_freq[tok] += c;
    n_files += other.n_files;
}

TokenHistogram build_histogram(std::span<const TokenSeq> seqs, const std::string& task_id,
                               const HistogramOptions& options) {
    TokenHistogram h;
    h.task_id = task_id;
    h.n_files = seqs.size();
    for (const auto& seq : seqs) {
        std::set<Token> seen;
        for (const auto& tok : seq.tokens) {
            if (!histogram_token_included(tok, options)) continue;
            h.counts[tok] += 1;
            seen.insert(tok);
        }
        for (const auto& tok : seen) h.doc_freq[tok] += 1;
    }
    return h;
}

double token_rarity(const TokenHistogram& h, const TokenSeq& seq,
                    const HistogramOptions& options) {
    std::set<Token> distinct;
    for (const auto& tok : seq.tokens) {
        if (histogram_token_included(tok, options)) distinct.insert(tok);
    }
    double score = 0.0;
    for (const auto& tok : distinct) {
        auto it = h.doc_freq.find(tok);
        if (it == h.doc_freq.end())
            throw Error(Errc::unknown_token, "(" + std::string(token_category_name(tok.category)) +
                                                 ", \"" + tok.text + "\") not in histogram for task " +
                                                 h.task_id);
        score += std::log(static_cast<double>(h.n_files) / static_cast<double>(it->second));
    }
    return score;
}

std::string serialize_token_seq(const TokenSeq& seq) {
    json obj;
    obj["file_id"] = seq.file_id;
    json toks = json::array();
    for (const auto& t : seq.tokens)
        toks.push_back(json::array({std::string(token_category_name(t.category)), t.text}));
    obj["tokens"] = std::move(toks);
    return obj.dump();
}

TokenSeq parse_token_seq(const std::string& jsonl_line) {
    TokenSeq seq;
    try {
        json obj = json::parse(jsonl_line);
        seq.file_id = obj.at("file_id").get<std::string>();
        for (const auto& t : obj.at("tokens")) {
            if (!t.is_array() || t.size() != 2)
                throw Error(Errc::schema_error, "token entry is not a [category, text] pair");
            seq.tokens.push_back(
                {token_category_from_name(t[0].get<std::string>()), t[1].get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("token seq: ") + e.what());
    }
    return seq;
}

std::string serialize_histogram(const TokenHistogram& h) {
    json obj;
    obj["task_id"] = h.task_id;
    obj["n_files"] = h.n_files;

    std::vector<const Token*> order;
    order.reserve(h.counts.size());
    for (const auto& [tok, cnt] : h.counts) order.push_back(&tok);
    std::sort(order.begin(), order.end(), [](const Token* a, const Token* b) {
        auto an = token_category_name(a->category), bn = token_category_name(b->category);
        return an != bn ? an < bn : a->text < b->text;
    });

    json bins = json::array();
    for (const Token* tok : order) {
        json bin;
        bin["category"] = std::string(token_category_name(tok->category));
        bin["text"] = tok->text;
        bin["count"] = h.counts.at(*tok);
        bin["doc_freq"] = h.doc_freq.at(*tok);
        bins.push_back(std::move(bin));
    }
    obj["bins"] = std::move(bins);
    return obj.dump();
}

TokenHistogram parse_histogram(const std::string& json_text) {
    TokenHistogram h;
    try {
        json obj = json::parse(json_text);
        h.task_id = obj.at("task_id").get<std::string>();
        h.n_files = obj.at("n_files").get<std::uint64_t>();
        for (const auto& bin : obj.at("bins")) {
            Token tok{token_category_from_name(bin.at("category").get<std::string>()),
                      bin.at("text").get<std::string>()};
            h.counts[tok] = bin.at("count").get<std::uint64_t>();
            h.doc_freq[tok] = bin.at("doc_freq").get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("histogram: ") + e.what());
    }
    return h;
}

} // namespace codeshift
