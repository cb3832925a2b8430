#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codeshift {

// Every failure the library reports, one code per contract violation.
// Codes in the `data` group map to CLI exit 4, the rest to exit 3.
enum class Errc {
    // corpus
    missing_file,
    duplicate_id,
    invalid_encoding,
    empty_task,
    // lexer
    lex_error,
    unsupported_language,
    unknown_token,
    // cst
    parse_error,
    sexpr_syntax,
    empty_tree,
    too_few_files,
    // splitgen
    insufficient_files,
    insufficient_tasks,
    insufficient_programmers,
    missing_timestamps,
    histogram_mismatch,
    matrix_mismatch,
    // refmodel
    empty_training,
    degenerate_labels,
    non_finite,
    dimension_mismatch,
    empty_outliers,
    // detect
    non_finite_logits,
    non_positive_temperature,
    singular_covariance,
    class_too_small,
    missing_record,
    schema_error,
    // eval
    key_mismatch,
    empty_input,
    one_class_only,
    // io / config
    io_error,
    config_error,
};

std::string_view errc_name(Errc c);

// True for failures caused by the input data itself (lexing/parsing/decoding),
// as opposed to infeasible configurations or misuse.
bool errc_is_data_error(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

// Lexical failure with a source position.
class LexError : public Error {
  public:
    LexError(int line, int col, std::string reason)
        : Error(Errc::lex_error,
                "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + reason),
          line_(line), col_(col) {}

    int line() const noexcept { return line_; }
    int col() const noexcept { return col_; }

  private:
    int line_;
    int col_;
};

// Structural failure while building a tree from a token stream.
class ParseError : public Error {
  public:
    ParseError(std::size_t position, std::string reason)
        : Error(Errc::parse_error, "token " + std::to_string(position) + ": " + reason),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

  private:
    std::size_t position_;
};

} // namespace codeshift
