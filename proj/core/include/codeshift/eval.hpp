#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codeshift/detect.hpp"

namespace codeshift {

// One row of the per-shift results table. AUCs and accuracies are
// percentages; delta = id_accuracy - ood_accuracy (positive = drop).
// A detector that could not run is absent from `auc` and listed in
// `missing` instead of silently vanishing from the average.
struct EvalReport {
    std::string corpus_id;
    ShiftType shift = ShiftType::random;
    std::map<Detector, double> auc; // percent
    std::vector<Detector> missing;
    double average_auc = 0.0; // percent, over present detectors
    double id_accuracy = 0.0;
    double ood_accuracy = 0.0;
    double delta = 0.0;
};

// 100 * correct / total. Throws KeyMismatch when the key sets differ,
// EmptyInput on empty maps.
double accuracy(const std::map<std::string, std::string>& predictions,
                const std::map<std::string, std::string>& truth);

// Rank-based (Mann-Whitney) AUC with midrank tie handling: the probability
// that a random ID record outscores a random OOD record, ties at half
// credit. Equals the trapezoidal area under the ROC curve.
// Throws OneClassOnly unless both classes are present.
double auc_roc(std::span<const ScoreRecord> scores);

// Assembles one table row from per-partition predictions and per-detector
// score sets. Detectors mapped to std::nullopt are reported as missing and
// excluded from the average.
EvalReport degradation_report(
    const std::string& corpus_id, const SplitManifest& split,
    const std::map<std::string, std::string>& id_predictions,
    const std::map<std::string, std::string>& id_truth,
    const std::map<std::string, std::string>& ood_predictions,
    const std::map<std::string, std::string>& ood_truth,
    const std::map<Detector, std::optional<std::vector<ScoreRecord>>>& score_sets);

// {"corpus_id","shift","auc":{"msp","odin","mahalanobis","oe","average"},
//  "id_accuracy","ood_accuracy","delta"}; missing detectors serialize as
// null plus an "auc_missing" list.
std::string serialize_report(const EvalReport& r);
EvalReport parse_report(const std::string& json_text);

// Table rendering in the paper's column order: detectors, average, ID test,
// OOD test with the delta in parentheses. Markdown uses up/down arrows; CSV
// uses a signed ood-minus-id delta column.
std::string reports_to_markdown(std::span<const EvalReport> rows);
std::string reports_to_csv(std::span<const EvalReport> rows);

} // namespace codeshift
