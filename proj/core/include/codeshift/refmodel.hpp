#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "codeshift/lexer.hpp"

namespace codeshift {

// Token-identity -> dense index map built from training-partition files
// only. Unknown tokens at inference map to the reserved OOV slot at index
// size().
class Vocabulary {
  public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<Token> sorted_tokens);

    std::size_t size() const { return tokens_.size(); } // V, OOV excluded
    std::size_t oov_index() const { return tokens_.size(); }
    std::size_t index_of(const Token& t) const; // oov_index() when absent
    const std::vector<Token>& tokens() const { return tokens_; }

    friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

  private:
    std::vector<Token> tokens_; // sorted
    std::map<Token, std::size_t> index_;
};

// Token counts, length V+1 (last slot is OOV).
struct BagVector {
    std::vector<double> values;

    double sum() const;
    void l2_normalize(); // no-op on the zero vector
};

struct TrainHyper {
    int epochs = 300;
    double lr = 0.5;
    double l2 = 1e-4; // weight decay on W (not the bias)
    std::uint64_t seed = 0;
    double oe_lambda = 0.5;
};

// Multinomial logistic regression: logits = W x + b. Deterministic
// full-batch training from a zero init (the objective is convex, so no
// random init is needed; the seed is recorded for provenance).
struct SoftmaxModel {
    std::vector<std::string> classes;    // sorted ID label space
    std::size_t vocab_size = 0;          // V (inputs have V+1 entries)
    std::vector<std::vector<double>> weights; // C x (V+1)
    std::vector<double> bias;                 // C
    TrainHyper hyper;
    bool l2_normalized_inputs = false;
    bool outlier_exposed = false;

    std::size_t n_classes() const { return classes.size(); }
};

struct LabeledBag {
    std::string file_id;
    std::string label;
    BagVector bag;
};

// Throws EmptyTraining.
Vocabulary build_vocab(std::span<const TokenSeq> train_seqs);

BagVector vectorize(const TokenSeq& seq, const Vocabulary& v);

// Mean cross-entropy + (l2/2)*||W||^2, minimized by full-batch gradient
// descent for exactly hyper.epochs steps. Throws DegenerateLabels with
// fewer than 2 classes, NonFinite if the loss leaves the reals.
SoftmaxModel train_softmax(std::span<const LabeledBag> train, const TrainHyper& hyper,
                           const std::vector<std::string>& class_order = {});

// Adds hyper.oe_lambda * mean over outliers of CE(uniform, softmax(Wx+b)).
// Throws EmptyOutliers on an empty outlier set.
SoftmaxModel train_softmax_oe(std::span<const LabeledBag> train,
                              std::span<const BagVector> outliers, const TrainHyper& hyper,
                              const std::vector<std::string>& class_order = {});

// W x + b. Throws DimensionMismatch unless x.values.size() == V+1.
std::vector<double> predict_logits(const SoftmaxModel& model, const BagVector& x);

// The model's only internal representation is its logit layer; external
// deep models substitute real penultimate activations via the features
// JSONL contract.
std::vector<double> extract_features(const SoftmaxModel& model, const BagVector& x);

std::vector<double> softmax(std::span<const double> logits);

// Objective values, exposed for gradient checking and the loss-monotonicity
// property.
double ce_objective(const SoftmaxModel& model, std::span<const LabeledBag> train);
double oe_objective(const SoftmaxModel& model, std::span<const LabeledBag> train,
                    std::span<const BagVector> outliers);

// {"classes", "vocab_size", "W", "b", "meta"}
std::string serialize_model(const SoftmaxModel& model);
SoftmaxModel parse_model(const std::string& json_text);

// {"size", "tokens": [[category, text], ...]} in index order.
std::string serialize_vocab(const Vocabulary& v);
Vocabulary parse_vocab(const std::string& json_text);

// JSONL contracts consumed by the detectors.
std::string serialize_logits_line(const std::string& file_id, const std::string& label,
                                  std::span<const double> logits);
std::string serialize_features_line(const std::string& file_id, std::span<const double> features);

struct LogitsRecord {
    std::string file_id;
    std::string label;
    std::vector<double> logits;
};
struct FeaturesRecord {
    std::string file_id;
    std::vector<double> features;
};

LogitsRecord parse_logits_line(const std::string& line);
FeaturesRecord parse_features_line(const std::string& line);

} // namespace codeshift
