#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "codeshift/refmodel.hpp"
#include "codeshift/splitgen.hpp"

namespace codeshift {

enum class Detector { msp, odin, mahalanobis, oe };

std::string_view detector_name(Detector d);
Detector detector_from_name(std::string_view name);

// Scores follow one convention everywhere: higher means more
// in-distribution. msp/odin/oe live in (0, 1]; mahalanobis is <= 0.
struct ScoreRecord {
    std::string file_id;
    Detector detector = Detector::msp;
    double score = 0.0;
    bool is_ood = false;
};

// Class-conditional Gaussians with one tied covariance. The fit stores the
// Cholesky factor of (Sigma + eps*I), which also certifies positive
// definiteness.
struct MahalanobisStats {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> means; // per class, length D
    std::vector<std::vector<double>> chol;  // lower triangular factor of Sigma + eps*I
    double epsilon = 0.0;
    std::size_t dim = 0;
};

// Maximum softmax probability, computed with max subtraction.
// Throws NonFiniteLogits.
double msp_score(std::span<const double> logits);

// MSP on temperature-scaled logits. T = 1 runs the identical code path as
// msp_score. Throws NonPositiveTemperature, NonFiniteLogits.
double odin_score(std::span<const double> logits, double temperature);

// MSP on logits of an OE-trained model; the scoring rule itself is MSP.
double oe_score(std::span<const double> logits_from_oe_model);

// Pooled within-class covariance (divide by N - C), regularized as
// Sigma + eps*I. Pass epsilon <= 0 to use the scale-aware default
// 1e-6 * trace(Sigma)/D (floored to keep a zero-scatter fit nonsingular).
// Throws ClassTooSmall, SingularCovariance, DimensionMismatch.
MahalanobisStats fit_mahalanobis(const std::vector<std::pair<std::string, std::vector<double>>>&
                                     labeled_features,
                                 double epsilon = 0.0);

// max over classes of -(x-mu)' (Sigma+eps I)^-1 (x-mu); 0 iff x is a class
// mean. Throws DimensionMismatch.
double mahalanobis_score(const MahalanobisStats& stats, std::span<const double> x);

struct DetectorParams {
    double temperature = 1000.0; // odin
    double epsilon = 0.0;        // mahalanobis; <= 0 selects the default
};

// One record per id_test/ood_test file of the split, is_ood taken from the
// manifest. logits_lines feeds msp/odin/oe; mahalanobis instead consumes
// features_lines for the test files plus train_features_lines for fitting,
// with class labels looked up from label_by_file.
// Throws MissingRecord, SchemaError.
std::vector<ScoreRecord> score_split(const SplitManifest& split, Detector detector,
                                     std::span<const std::string> logits_lines,
                                     std::span<const std::string> features_lines,
                                     std::span<const std::string> train_features_lines,
                                     const std::map<std::string, std::string>& label_by_file,
                                     const DetectorParams& params = {});

// JSONL: {"file_id", "detector", "score", "is_ood"}
std::string serialize_score_record(const ScoreRecord& r);
ScoreRecord parse_score_record(const std::string& line);

} // namespace codeshift
