#include "codeshift/refmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"

using json = nlohmann::json;

namespace codeshift {

Vocabulary::Vocabulary(std::vector<Token> sorted_tokens) : tokens_(std::move(sorted_tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = i;
}

std::size_t Vocabulary::index_of(const Token& t) const {
    auto it = index_.find(t);
    return it == index_.end() ? oov_index() : it->second;
}

double BagVector::sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

void BagVector::l2_normalize() {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    if (sq <= 0.0) return;
    const double norm = std::sqrt(sq);
    for (double& v : values) v /= norm;
}

Vocabulary build_vocab(std::span<const TokenSeq> train_seqs) {
    if (train_seqs.empty()) throw Error(Errc::empty_training, "no training sequences");
    std::set<Token> identities;
    for (const auto& seq : train_seqs)
        for (const auto& tok : seq.tokens) identities.insert(tok);
    return Vocabulary(std::vector<Token>(identities.begin(), identities.end()));
}

BagVector vectorize(const TokenSeq& seq, const Vocabulary& v) {
    BagVector bag;
    bag.values.assign(v.size() + 1, 0.0);
    for (const auto& tok : seq.tokens) bag.values[v.index_of(tok)] += 1.0;
    return bag;
}

std::vector<double> softmax(std::span<const double> logits) {
    double max = -std::numeric_limits<double>::infinity();
    for (double l : logits) max = std::max(max, l);
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - max);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

namespace {

struct Problem {
    std::vector<std::string> classes;
    std::vector<std::size_t> labels; // class index per train sample
    std::size_t dim = 0;
};

Problem setup_problem(std::span<const LabeledBag> train, const std::vector<std::string>& class_order) {
    if (train.empty()) throw Error(Errc::empty_training, "no training vectors");

    Problem prob;
    if (class_order.empty()) {
        std::set<std::string> labels;
        for (const auto& ex : train) labels.insert(ex.label);
        prob.classes.assign(labels.begin(), labels.end());
    } else {
        prob.classes = class_order;
        if (!std::is_sorted(prob.classes.begin(), prob.classes.end()))
            std::sort(prob.classes.begin(), prob.classes.end());
    }
    if (prob.classes.size() < 2)
        throw Error(Errc::degenerate_labels,
                    "need >= 2 classes, got " + std::to_string(prob.classes.size()));

    prob.dim = train.front().bag.values.size();
    prob.labels.reserve(train.size());
    for (const auto& ex : train) {
        if (ex.bag.values.size() != prob.dim)
            throw Error(Errc::dimension_mismatch, "bag vector length differs within training set");
        auto it = std::lower_bound(prob.classes.begin(), prob.classes.end(), ex.label);
        if (it == prob.classes.end() || *it != ex.label)
            throw Error(Errc::degenerate_labels, "label \"" + ex.label + "\" not in class order");
        prob.labels.push_back(static_cast<std::size_t>(it - prob.classes.begin()));
    }
    return prob;
}

double objective_and_gradient(const SoftmaxModel& model, std::span<const LabeledBag> train,
                              const std::vector<std::size_t>& labels,
                              std::span<const BagVector> outliers, double oe_lambda,
                              std::vector<std::vector<double>>* grad_w,
                              std::vector<double>* grad_b) {
    const std::size_t C = model.n_classes();
    const std::size_t D = model.vocab_size + 1;
    const double n_inv = 1.0 / static_cast<double>(train.size());

    if (grad_w) {
        grad_w->assign(C, std::vector<double>(D, 0.0));
        grad_b->assign(C, 0.0);
    }

    double loss = 0.0;
    std::vector<double> logits(C);
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& x = train[i].bag.values;
        for (std::size_t c = 0; c < C; ++c) {
            double dot = model.bias[c];
            const auto& w = model.weights[c];
            for (std::size_t d = 0; d < D; ++d) dot += w[d] * x[d];
            logits[c] = dot;
        }
        std::vector<double> p = softmax(logits);
        loss -= n_inv * std::log(std::max(p[labels[i]], 1e-300));
        if (grad_w) {
            for (std::size_t c = 0; c < C; ++c) {
                const double delta = n_inv * (p[c] - (c == labels[i] ? 1.0 : 0.0));
                if (delta == 0.0) continue;
                auto& gw = (*grad_w)[c];
                for (std::size_t d = 0; d < D; ++d) gw[d] += delta * x[d];
                (*grad_b)[c] += delta;
            }
        }
    }

    if (!outliers.empty() && oe_lambda != 0.0) {
        const double m_inv = oe_lambda / static_cast<double>(outliers.size());
        const double u = 1.0 / static_cast<double>(C);
        for (const auto& bag : outliers) {
            const auto& x = bag.values;
            if (x.size() != D)
                throw Error(Errc::dimension_mismatch, "outlier vector length mismatch");
            for (std::size_t c = 0; c < C; ++c) {
                double dot = model.bias[c];
                const auto& w = model.weights[c];
                for (std::size_t d = 0; d < D; ++d) dot += w[d] * x[d];
                logits[c] = dot;
            }
            std::vector<double> p = softmax(logits);
            for (std::size_t c = 0; c < C; ++c)
                loss -= m_inv * u * std::log(std::max(p[c], 1e-300));
            if (grad_w) {
                for (std::size_t c = 0; c < C; ++c) {
                    const double delta = m_inv * (p[c] - u);
                    auto& gw = (*grad_w)[c];
                    for (std::size_t d = 0; d < D; ++d) gw[d] += delta * x[d];
                    (*grad_b)[c] += delta;
                }
            }
        }
    }

    const double l2 = model.hyper.l2;
    if (l2 != 0.0) {
        double sq = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const auto& w = model.weights[c];
            for (std::size_t d = 0; d < D; ++d) {
                sq += w[d] * w[d];
                if (grad_w) (*grad_w)[c][d] += l2 * w[d];
            }
        }
        loss += 0.5 * l2 * sq;
    }
    return loss;
}

SoftmaxModel train_impl(std::span<const LabeledBag> train, std::span<const BagVector> outliers,
                        const TrainHyper& hyper, const std::vector<std::string>& class_order,
                        bool outlier_exposed) {
    Problem prob = setup_problem(train, class_order);

    SoftmaxModel model;
    model.classes = std::move(prob.classes);
    model.vocab_size = prob.dim - 1;
    model.weights.assign(model.n_classes(), std::vector<double>(prob.dim, 0.0));
    model.bias.assign(model.n_classes(), 0.0);
    model.hyper = hyper;
    model.outlier_exposed = outlier_exposed;

    const double lambda = outlier_exposed ? hyper.oe_lambda : 0.0;
    std::vector<std::vector<double>> grad_w;
    std::vector<double> grad_b;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        const double loss = objective_and_gradient(model, train, prob.labels, outliers, lambda,
                                                   &grad_w, &grad_b);
        if (!std::isfinite(loss))
            throw Error(Errc::non_finite,
                        "loss diverged at epoch " + std::to_string(epoch) + "; lower the lr");
        for (std::size_t c = 0; c < model.n_classes(); ++c) {
            auto& w = model.weights[c];
            const auto& gw = grad_w[c];
            for (std::size_t d = 0; d < w.size(); ++d) w[d] -= hyper.lr * gw[d];
            model.bias[c] -= hyper.lr * grad_b[c];
        }
    }
    const double final_loss =
        objective_and_gradient(model, train, prob.labels, outliers, lambda, nullptr, nullptr);
    if (!std::isfinite(final_loss))
        throw Error(Errc::non_finite, "final loss is not finite; lower the lr");
    return model;
}

} // namespace

SoftmaxModel train_softmax(std::span<const LabeledBag> train, const TrainHyper& hyper,
                           const std::vector<std::string>& class_order) {
    return train_impl(train, {}, hyper, class_order, false);
}

SoftmaxModel train_softmax_oe(std::span<const LabeledBag> train,
                              std::span<const BagVector> outliers, const TrainHyper& hyper,
                              const std::vector<std::string>& class_order) {
    if (outliers.empty()) throw Error(Errc::empty_outliers, "outlier set is empty");
    return train_impl(train, outliers, hyper, class_order, true);
}

std::vector<double> predict_logits(const SoftmaxModel& model, const BagVector& x) {
    const std::size_t D = model.vocab_size + 1;
    if (x.values.size() != D)
        throw Error(Errc::dimension_mismatch, "input has " + std::to_string(x.values.size()) +
                                                  " entries, model expects " + std::to_string(D));
    std::vector<double> logits(model.n_classes());
    for (std::size_t c = 0; c < model.n_classes(); ++c) {
        double dot = model.bias[c];
        const auto& w = model.weights[c];
        for (std::size_t d = 0; d < D; ++d) dot += w[d] * x.values[d];
        logits[c] = dot;
    }
    return logits;
}

std::vector<double> extract_features(const SoftmaxModel& model, const BagVector& x) {
    return predict_logits(model, x);
}

double ce_objective(const SoftmaxModel& model, std::span<const LabeledBag> train) {
    Problem prob = setup_problem(train, model.classes);
    return objective_and_gradient(model, train, prob.labels, {}, 0.0, nullptr, nullptr);
}

double oe_objective(const SoftmaxModel& model, std::span<const LabeledBag> train,
                    std::span<const BagVector> outliers) {
    Problem prob = setup_problem(train, model.classes);
    return objective_and_gradient(model, train, prob.labels, outliers, model.hyper.oe_lambda,
                                  nullptr, nullptr);
}

// ---- serialization -----------------------------------------------------------

std::string serialize_model(const SoftmaxModel& model) {
    json meta;
    meta["epochs"] = model.hyper.epochs;
    meta["lr"] = model.hyper.lr;
    meta["l2"] = model.hyper.l2;
    meta["seed"] = model.hyper.seed;
    meta["oe_lambda"] = model.hyper.oe_lambda;
    meta["l2_normalized_inputs"] = model.l2_normalized_inputs;
    meta["outlier_exposed"] = model.outlier_exposed;

    json obj;
    obj["classes"] = model.classes;
    obj["vocab_size"] = model.vocab_size;
    obj["W"] = model.weights;
    obj["b"] = model.bias;
    obj["meta"] = std::move(meta);
    return obj.dump() + "\n";
}

SoftmaxModel parse_model(const std::string& json_text) {
    SoftmaxModel model;
    try {
        json obj = json::parse(json_text);
        model.classes = obj.at("classes").get<std::vector<std::string>>();
        model.vocab_size = obj.at("vocab_size").get<std::size_t>();
        model.weights = obj.at("W").get<std::vector<std::vector<double>>>();
        model.bias = obj.at("b").get<std::vector<double>>();
        const json& meta = obj.at("meta");
        model.hyper.epochs = meta.at("epochs").get<int>();
        model.hyper.lr = meta.at("lr").get<double>();
        model.hyper.l2 = meta.at("l2").get<double>();
        model.hyper.seed = meta.at("seed").get<std::uint64_t>();
        model.hyper.oe_lambda = meta.at("oe_lambda").get<double>();
        model.l2_normalized_inputs = meta.at("l2_normalized_inputs").get<bool>();
        model.outlier_exposed = meta.at("outlier_exposed").get<bool>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("model: ") + e.what());
    }
    if (model.weights.size() != model.classes.size() || model.bias.size() != model.classes.size())
        throw Error(Errc::schema_error, "model: W/b dimensions do not match classes");
    for (const auto& row : model.weights)
        if (row.size() != model.vocab_size + 1)
            throw Error(Errc::schema_error, "model: W row length does not match vocab_size+1");
    return model;
}

std::string serialize_vocab(const Vocabulary& v) {
    json toks = json::array();
    for (const auto& t : v.tokens())
        toks.push_back(json::array({std::string(token_category_name(t.category)), t.text}));
    json obj;
    obj["size"] = v.size();
    obj["tokens"] = std::move(toks);
    return obj.dump() + "\n";
}

Vocabulary parse_vocab(const std::string& json_text) {
    try {
        json obj = json::parse(json_text);
        std::vector<Token> tokens;
        for (const auto& t : obj.at("tokens")) {
            if (!t.is_array() || t.size() != 2)
                throw Error(Errc::schema_error, "vocab entry is not a [category, text] pair");
            tokens.push_back(
                {token_category_from_name(t[0].get<std::string>()), t[1].get<std::string>()});
        }
        if (obj.at("size").get<std::size_t>() != tokens.size())
            throw Error(Errc::schema_error, "vocab: size does not match token list");
        if (!std::is_sorted(tokens.begin(), tokens.end()))
            throw Error(Errc::schema_error, "vocab: tokens not in sorted order");
        return Vocabulary(std::move(tokens));
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("vocab: ") + e.what());
    }
}

std::string serialize_logits_line(const std::string& file_id, const std::string& label,
                                  std::span<const double> logits) {
    json obj;
    obj["file_id"] = file_id;
    obj["label"] = label;
    obj["logits"] = std::vector<double>(logits.begin(), logits.end());
    return obj.dump();
}

std::string serialize_features_line(const std::string& file_id, std::span<const double> features) {
    json obj;
    obj["file_id"] = file_id;
    obj["features"] = std::vector<double>(features.begin(), features.end());
    return obj.dump();
}

LogitsRecord parse_logits_line(const std::string& line) {
    LogitsRecord rec;
    try {
        json obj = json::parse(line);
        rec.file_id = obj.at("file_id").get<std::string>();
        rec.label = obj.at("label").get<std::string>();
        rec.logits = obj.at("logits").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("logits line: ") + e.what());
    }
    return rec;
}

FeaturesRecord parse_features_line(const std::string& line) {
    FeaturesRecord rec;
    try {
        json obj = json::parse(line);
        rec.file_id = obj.at("file_id").get<std::string>();
        rec.features = obj.at("features").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("features line: ") + e.what());
    }
    return rec;
}

} // namespace codeshift
