#include "codeshift/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"

using json = nlohmann::json;

namespace codeshift {

std::string_view detector_name(Detector d) {
    switch (d) {
    case Detector::msp: return "msp";
    case Detector::odin: return "odin";
    case Detector::mahalanobis: return "mahalanobis";
    case Detector::oe: return "oe";
    }
    return "msp";
}

Detector detector_from_name(std::string_view name) {
    if (name == "msp") return Detector::msp;
    if (name == "odin") return Detector::odin;
    if (name == "mahalanobis") return Detector::mahalanobis;
    if (name == "oe") return Detector::oe;
    throw Error(Errc::config_error, "unknown detector \"" + std::string(name) + "\"");
}

double odin_score(std::span<const double> logits, double temperature) {
    if (temperature <= 0.0)
        throw Error(Errc::non_positive_temperature, std::to_string(temperature));
    if (logits.empty()) throw Error(Errc::non_finite_logits, "empty logit vector");
    for (double l : logits)
        if (!std::isfinite(l)) throw Error(Errc::non_finite_logits, "non-finite logit");

    double max = logits[0] / temperature;
    std::vector<double> scaled(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        scaled[i] = logits[i] / temperature;
        max = std::max(max, scaled[i]);
    }
    double sum = 0.0;
    double top = 0.0;
    for (double s : scaled) {
        const double e = std::exp(s - max);
        sum += e;
        top = std::max(top, e);
    }
    return top / sum;
}

double msp_score(std::span<const double> logits) { return odin_score(logits, 1.0); }

double oe_score(std::span<const double> logits_from_oe_model) {
    return msp_score(logits_from_oe_model);
}

namespace {

// Lower-triangular Cholesky; returns false when the matrix is not positive
// definite.
bool cholesky(const std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& l) {
    const std::size_t n = a.size();
    l.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i][j];
            for (std::size_t k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum)) return false;
                l[i][j] = std::sqrt(sum);
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    return true;
}

// Solves L y = v by forward substitution and returns ||y||^2, which equals
// v' (L L')^-1 v.
double quad_form_inv(const std::vector<std::vector<double>>& l, std::span<const double> v) {
    const std::size_t n = l.size();
    std::vector<double> y(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = v[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i][k] * y[k];
        y[i] = sum / l[i][i];
        sq += y[i] * y[i];
    }
    return sq;
}

} // namespace

MahalanobisStats fit_mahalanobis(
    const std::vector<std::pair<std::string, std::vector<double>>>& labeled_features,
    double epsilon) {
    std::map<std::string, std::vector<const std::vector<double>*>> by_class;
    std::size_t dim = 0;
    for (const auto& [label, feat] : labeled_features) {
        if (dim == 0) dim = feat.size();
        if (feat.size() != dim || dim == 0)
            throw Error(Errc::dimension_mismatch, "feature vectors must share a nonzero dim");
        by_class[label].push_back(&feat);
    }
    if (by_class.empty()) throw Error(Errc::class_too_small, "no feature vectors");

    MahalanobisStats stats;
    stats.dim = dim;

    std::size_t total = 0;
    for (const auto& [label, feats] : by_class) {
        if (feats.size() < 2)
            throw Error(Errc::class_too_small,
                        "class \"" + label + "\" has " + std::to_string(feats.size()) +
                            " feature vector(s), need >= 2");
        total += feats.size();
        stats.classes.push_back(label);
        std::vector<double> mu(dim, 0.0);
        for (const auto* f : feats)
            for (std::size_t d = 0; d < dim; ++d) mu[d] += (*f)[d];
        for (double& v : mu) v /= static_cast<double>(feats.size());
        stats.means.push_back(std::move(mu));
    }

    // Pooled within-class scatter over N - C degrees of freedom.
    std::vector<std::vector<double>> sigma(dim, std::vector<double>(dim, 0.0));
    std::size_t class_idx = 0;
    for (const auto& [label, feats] : by_class) {
        const auto& mu = stats.means[class_idx++];
        for (const auto* f : feats) {
            for (std::size_t i = 0; i < dim; ++i) {
                const double di = (*f)[i] - mu[i];
                for (std::size_t j = 0; j <= i; ++j) {
                    sigma[i][j] += di * ((*f)[j] - mu[j]);
                }
            }
        }
    }
    const double dof = static_cast<double>(total - by_class.size());
    if (dof <= 0.0) throw Error(Errc::class_too_small, "no residual degrees of freedom");
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            sigma[i][j] /= dof;
            sigma[j][i] = sigma[i][j];
        }

    double eps = epsilon;
    if (eps <= 0.0) {
        double trace = 0.0;
        for (std::size_t i = 0; i < dim; ++i) trace += sigma[i][i];
        eps = 1e-6 * trace / static_cast<double>(dim);
        if (eps <= 0.0) eps = 1e-12; // zero-scatter fit still factorizes
    }
    stats.epsilon = eps;
    for (std::size_t i = 0; i < dim; ++i) sigma[i][i] += eps;

    if (!cholesky(sigma, stats.chol))
        throw Error(Errc::singular_covariance,
                    "covariance not positive definite at epsilon=" + std::to_string(eps));
    return stats;
}

double mahalanobis_score(const MahalanobisStats& stats, std::span<const double> x) {
    if (x.size() != stats.dim)
        throw Error(Errc::dimension_mismatch, "feature has " + std::to_string(x.size()) +
                                                  " entries, fit expects " +
                                                  std::to_string(stats.dim));
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> centered(stats.dim);
    for (std::size_t c = 0; c < stats.classes.size(); ++c) {
        for (std::size_t d = 0; d < stats.dim; ++d) centered[d] = x[d] - stats.means[c][d];
        best = std::max(best, -quad_form_inv(stats.chol, centered));
    }
    return best;
}

// ---- split scoring -----------------------------------------------------------

namespace {

std::map<std::string, LogitsRecord> index_logits(std::span<const std::string> lines) {
    std::map<std::string, LogitsRecord> by_id;
    for (const auto& line : lines) {
        if (line.empty()) continue;
        LogitsRecord rec = parse_logits_line(line);
        by_id[rec.file_id] = std::move(rec);
    }
    return by_id;
}

std::map<std::string, FeaturesRecord> index_features(std::span<const std::string> lines) {
    std::map<std::string, FeaturesRecord> by_id;
    for (const auto& line : lines) {
        if (line.empty()) continue;
        FeaturesRecord rec = parse_features_line(line);
        by_id[rec.file_id] = std::move(rec);
    }
    return by_id;
}

} // namespace

std::vector<ScoreRecord> score_split(const SplitManifest& split, Detector detector,
                                     std::span<const std::string> logits_lines,
                                     std::span<const std::string> features_lines,
                                     std::span<const std::string> train_features_lines,
                                     const std::map<std::string, std::string>& label_by_file,
                                     const DetectorParams& params) {
    std::vector<ScoreRecord> records;

    if (detector == Detector::mahalanobis) {
        auto test_feats = index_features(features_lines);
        auto train_feats = index_features(train_features_lines);

        std::vector<std::pair<std::string, std::vector<double>>> labeled;
        for (const auto& [id, part] : split.assignments) {
            if (part != Partition::train) continue;
            auto it = train_feats.find(id);
            if (it == train_feats.end())
                throw Error(Errc::missing_record, "no training features for file " + id);
            auto lab = label_by_file.find(id);
            if (lab == label_by_file.end())
                throw Error(Errc::missing_record, "no label for training file " + id);
            labeled.emplace_back(lab->second, it->second.features);
        }
        MahalanobisStats stats = fit_mahalanobis(labeled, params.epsilon);

        for (const auto& [id, part] : split.assignments) {
            if (part != Partition::id_test && part != Partition::ood_test) continue;
            auto it = test_feats.find(id);
            if (it == test_feats.end())
                throw Error(Errc::missing_record, "no features for file " + id);
            records.push_back({id, detector, mahalanobis_score(stats, it->second.features),
                               part == Partition::ood_test});
        }
        return records;
    }

    auto logits = index_logits(logits_lines);
    for (const auto& [id, part] : split.assignments) {
        if (part != Partition::id_test && part != Partition::ood_test) continue;
        auto it = logits.find(id);
        if (it == logits.end()) throw Error(Errc::missing_record, "no logits for file " + id);
        double score = 0.0;
        switch (detector) {
        case Detector::msp: score = msp_score(it->second.logits); break;
        case Detector::odin: score = odin_score(it->second.logits, params.temperature); break;
        case Detector::oe: score = oe_score(it->second.logits); break;
        case Detector::mahalanobis: break; // handled above
        }
        records.push_back({id, detector, score, part == Partition::ood_test});
    }
    return records;
}

std::string serialize_score_record(const ScoreRecord& r) {
    json obj;
    obj["file_id"] = r.file_id;
    obj["detector"] = std::string(detector_name(r.detector));
    obj["score"] = r.score;
    obj["is_ood"] = r.is_ood;
    return obj.dump();
}

ScoreRecord parse_score_record(const std::string& line) {
    ScoreRecord r;
    try {
        json obj = json::parse(line);
        r.file_id = obj.at("file_id").get<std::string>();
        r.detector = detector_from_name(obj.at("detector").get<std::string>());
        r.score = obj.at("score").get<double>();
        r.is_ood = obj.at("is_ood").get<bool>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("score record: ") + e.what());
    }
    return r;
}

} // namespace codeshift
