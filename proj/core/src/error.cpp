#include "codeshift/error.hpp"

namespace codeshift {

std::string_view errc_name(Errc c) {
    switch (c) {
    case Errc::missing_file: return "MissingFile";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::invalid_encoding: return "InvalidEncoding";
    case Errc::empty_task: return "EmptyTask";
    case Errc::lex_error: return "LexError";
    case Errc::unsupported_language: return "UnsupportedLanguage";
    case Errc::unknown_token: return "UnknownToken";
    case Errc::parse_error: return "ParseError";
    case Errc::sexpr_syntax: return "SyntaxError";
    case Errc::empty_tree: return "EmptyTree";
    case Errc::too_few_files: return "TooFewFiles";
    case Errc::insufficient_files: return "InsufficientFiles";
    case Errc::insufficient_tasks: return "InsufficientTasks";
    case Errc::insufficient_programmers: return "InsufficientProgrammers";
    case Errc::missing_timestamps: return "MissingTimestamps";
    case Errc::histogram_mismatch: return "HistogramMismatch";
    case Errc::matrix_mismatch: return "MatrixMismatch";
    case Errc::empty_training: return "EmptyTraining";
    case Errc::degenerate_labels: return "DegenerateLabels";
    case Errc::non_finite: return "NonFinite";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_outliers: return "EmptyOutliers";
    case Errc::non_finite_logits: return "NonFiniteLogits";
    case Errc::non_positive_temperature: return "NonPositiveTemperature";
    case Errc::singular_covariance: return "SingularCovariance";
    case Errc::class_too_small: return "ClassTooSmall";
    case Errc::missing_record: return "MissingRecord";
    case Errc::schema_error: return "SchemaError";
    case Errc::key_mismatch: return "KeyMismatch";
    case Errc::empty_input: return "EmptyInput";
    case Errc::one_class_only: return "OneClassOnly";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    }
    return "UnknownError";
}

bool errc_is_data_error(Errc c) {
    switch (c) {
    case Errc::invalid_encoding:
    case Errc::lex_error:
    case Errc::parse_error:
    case Errc::sexpr_syntax:
    case Errc::schema_error:
        return true;
    default:
        return false;
    }
}

} // namespace codeshift
