#include "codeshift/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "codeshift/error.hpp"

using json = nlohmann::json;

namespace codeshift {

double accuracy(const std::map<std::string, std::string>& predictions,
                const std::map<std::string, std::string>& truth) {
    if (predictions.empty() || truth.empty()) throw Error(Errc::empty_input, "no records");
    if (predictions.size() != truth.size())
        throw Error(Errc::key_mismatch, "prediction/truth key sets differ in size");
    std::size_t correct = 0;
    for (const auto& [id, pred] : predictions) {
        auto it = truth.find(id);
        if (it == truth.end()) throw Error(Errc::key_mismatch, "no truth for file " + id);
        if (it->second == pred) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double auc_roc(std::span<const ScoreRecord> scores) {
    std::size_t n_id = 0, n_ood = 0;
    for (const auto& r : scores) (r.is_ood ? n_ood : n_id)++;
    if (n_id == 0 || n_ood == 0)
        throw Error(Errc::one_class_only, "need both ID and OOD records");

    // Midranks over the pooled sample, then the Mann-Whitney statistic.
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].score < scores[b].score;
    });

    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]].score == scores[order[i]].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = midrank;
        i = j + 1;
    }

    double rank_sum_id = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k)
        if (!scores[k].is_ood) rank_sum_id += rank[k];

    const double n1 = static_cast<double>(n_id);
    const double u = rank_sum_id - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * static_cast<double>(n_ood));
}

EvalReport degradation_report(
    const std::string& corpus_id, const SplitManifest& split,
    const std::map<std::string, std::string>& id_predictions,
    const std::map<std::string, std::string>& id_truth,
    const std::map<std::string, std::string>& ood_predictions,
    const std::map<std::string, std::string>& ood_truth,
    const std::map<Detector, std::optional<std::vector<ScoreRecord>>>& score_sets) {
    EvalReport r;
    r.corpus_id = corpus_id;
    r.shift = split.shift;
    r.id_accuracy = accuracy(id_predictions, id_truth);
    r.ood_accuracy = accuracy(ood_predictions, ood_truth);
    r.delta = r.id_accuracy - r.ood_accuracy;

    double sum = 0.0;
    std::size_t present = 0;
    for (const auto& [det, records] : score_sets) {
        if (!records.has_value()) {
            r.missing.push_back(det);
            continue;
        }
        const double pct = 100.0 * auc_roc(*records);
        r.auc[det] = pct;
        sum += pct;
        ++present;
    }
    r.average_auc = present == 0 ? 0.0 : sum / static_cast<double>(present);
    return r;
}

// ---- rendering -----------------------------------------------------------------

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

const Detector kDetectorOrder[] = {Detector::msp, Detector::odin, Detector::mahalanobis,
                                   Detector::oe};

// Printed table headers; ODIN runs without the input-perturbation step here,
// so the tables say so.
std::string_view detector_display_name(Detector d) {
    switch (d) {
    case Detector::msp: return "MSP";
    case Detector::odin: return "ODIN-T";
    case Detector::mahalanobis: return "Mahalanobis";
    case Detector::oe: return "OE";
    }
    return "MSP";
}

std::string shift_display_name(ShiftType s) {
    std::string name(shift_name(s));
    if (s == ShiftType::cst) return "CST";
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
}

} // namespace

std::string serialize_report(const EvalReport& r) {
    json auc = json::object();
    for (Detector d : kDetectorOrder) {
        auto it = r.auc.find(d);
        if (it != r.auc.end())
            auc[std::string(detector_name(d))] = it->second;
        else
            auc[std::string(detector_name(d))] = nullptr;
    }
    auc["average"] = r.average_auc;

    json obj;
    obj["corpus_id"] = r.corpus_id;
    obj["shift"] = std::string(shift_name(r.shift));
    obj["auc"] = std::move(auc);
    if (!r.missing.empty()) {
        json miss = json::array();
        for (Detector d : r.missing) miss.push_back(std::string(detector_name(d)));
        obj["auc_missing"] = std::move(miss);
    }
    obj["id_accuracy"] = r.id_accuracy;
    obj["ood_accuracy"] = r.ood_accuracy;
    obj["delta"] = r.delta;
    return obj.dump(2) + "\n";
}

EvalReport parse_report(const std::string& json_text) {
    EvalReport r;
    try {
        json obj = json::parse(json_text);
        r.corpus_id = obj.at("corpus_id").get<std::string>();
        r.shift = shift_from_name(obj.at("shift").get<std::string>());
        const json& auc = obj.at("auc");
        for (Detector d : kDetectorOrder) {
            const std::string key(detector_name(d));
            if (auc.contains(key) && !auc.at(key).is_null()) r.auc[d] = auc.at(key).get<double>();
        }
        r.average_auc = auc.at("average").get<double>();
        if (obj.contains("auc_missing"))
            for (const auto& name : obj.at("auc_missing"))
                r.missing.push_back(detector_from_name(name.get<std::string>()));
        r.id_accuracy = obj.at("id_accuracy").get<double>();
        r.ood_accuracy = obj.at("ood_accuracy").get<double>();
        r.delta = obj.at("delta").get<double>();
    } catch (const json::exception& e) {
        throw Error(Errc::schema_error, std::string("report: ") + e.what());
    }
    return r;
}

std::string reports_to_markdown(std::span<const EvalReport> rows) {
    std::string out = "| Shift type |";
    for (Detector d : kDetectorOrder) out += ' ' + std::string(detector_display_name(d)) + " |";
    out += " Average | ID test | OOD test |\n";
    out += "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + shift_display_name(r.shift) + " |";
        for (Detector d : kDetectorOrder) {
            auto it = r.auc.find(d);
            out += ' ';
            out += (it != r.auc.end()) ? fmt2(it->second) : std::string("n/a");
            out += " |";
        }
        out += ' ' + fmt2(r.average_auc) + " |";
        out += ' ' + fmt2(r.id_accuracy) + " |";
        const double drop = r.delta;
        out += ' ' + fmt2(r.ood_accuracy) + " (" + fmt2(std::fabs(drop)) +
               (drop >= 0 ? " ↓" : " ↑") + ") |\n";
    }
    return out;
}

std::string reports_to_csv(std::span<const EvalReport> rows) {
    std::string out = "shift,msp,odin_t,mahalanobis,oe,average,id_test,ood_test,delta\n";
    for (const auto& r : rows) {
        out += std::string(shift_name(r.shift));
        for (Detector d : kDetectorOrder) {
            auto it = r.auc.find(d);
            out += ',';
            out += (it != r.auc.end()) ? fmt2(it->second) : std::string("n/a");
        }
        out += ',' + fmt2(r.average_auc);
        out += ',' + fmt2(r.id_accuracy);
        out += ',' + fmt2(r.ood_accuracy);
        // Signed as ood - id: "-" marks a drop, "+" a gain.
        const double signed_delta = -r.delta;
        out += ',';
        out += (signed_delta >= 0 ? "+" : "-") + fmt2(std::fabs(signed_delta));
        out += '\n';
    }
    return out;
}

} // namespace codeshift
