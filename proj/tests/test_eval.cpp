#include <doctest.h>

#include <cmath>

#include "codeshift/error.hpp"
#include "codeshift/eval.hpp"
#include "codeshift/rng.hpp"
#include "support/oracles.hpp"

using namespace codeshift;

namespace {

std::vector<ScoreRecord> records_of(const std::vector<double>& id_scores,
                                    const std::vector<double>& ood_scores) {
    std::vector<ScoreRecord> out;
    int k = 0;
    for (double s : id_scores) out.push_back({"id" + std::to_string(k++), Detector::msp, s, false});
    for (double s : ood_scores) out.push_back({"o" + std::to_string(k++), Detector::msp, s, true});
    return out;
}

std::vector<ScoreRecord> random_records(Rng& rng, std::size_t n, bool with_ties) {
    std::vector<ScoreRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        double s = with_ties ? static_cast<double>(rng.bounded(8)) / 8.0
                             : static_cast<double>(rng.bounded(100000)) / 12345.0;
        out.push_back({"f" + std::to_string(i), Detector::msp, s, rng.bounded(2) == 1});
    }
    // Guarantee both classes.
    out.push_back({"idx", Detector::msp, 0.5, false});
    out.push_back({"oox", Detector::msp, 0.5, true});
    return out;
}

} // namespace

TEST_CASE("accuracy basics") {
    std::map<std::string, std::string> truth{{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "y"}};
    std::map<std::string, std::string> preds{{"a", "x"}, {"b", "x"}, {"c", "y"}, {"d", "x"}};
    CHECK(accuracy(preds, truth) == 75.0);
    CHECK(accuracy(truth, truth) == 100.0);
}

TEST_CASE("accuracy with labels outside the prediction space is zero") {
    // Mirrors the task shift: every truth label is outside the ID space.
    std::map<std::string, std::string> truth{{"a", "ood1"}, {"b", "ood2"}};
    std::map<std::string, std::string> preds{{"a", "id1"}, {"b", "id1"}};
    CHECK(accuracy(preds, truth) == 0.0);
}

TEST_CASE("accuracy error paths") {
    std::map<std::string, std::string> empty;
    std::map<std::string, std::string> one{{"a", "x"}};
    std::map<std::string, std::string> other{{"b", "x"}};
    CHECK_THROWS_WITH_AS(accuracy(empty, empty), doctest::Contains("EmptyInput"), Error);
    CHECK_THROWS_WITH_AS(accuracy(one, other), doctest::Contains("KeyMismatch"), Error);
}

TEST_CASE("auc on separated and identical score sets") {
    CHECK(auc_roc(records_of({0.9, 0.8}, {0.2, 0.1})) == 1.0);
    CHECK(auc_roc(records_of({0.2, 0.1}, {0.9, 0.8})) == 0.0);
    CHECK(auc_roc(records_of({0.4, 0.6}, {0.4, 0.6})) == 0.5);
}

TEST_CASE("auc hand example 3/4") {
    // Pairs: 0.9>0.5, 0.9>0.1, 0.3<0.5, 0.3>0.1.
    CHECK(auc_roc(records_of({0.9, 0.3}, {0.5, 0.1})) == 0.75);
}

TEST_CASE("auc requires both classes") {
    CHECK_THROWS_WITH_AS(auc_roc(records_of({0.9}, {})), doctest::Contains("OneClassOnly"),
                         Error);
}

TEST_CASE("auc matches the all-pairs oracle on randomized instances with ties") {
    Rng rng(777);
    for (int it = 0; it < 300; ++it) {
        auto recs = random_records(rng, 2 + rng.bounded(198), it % 2 == 0);
        CHECK(auc_roc(recs) == doctest::Approx(oracle::auc_pairs(recs)).epsilon(1e-12));
    }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
    Rng rng(31);
    for (int it = 0; it < 50; ++it) {
        auto recs = random_records(rng, 60, true);
        const double base = auc_roc(recs);
        auto linear = recs;
        for (auto& r : linear) r.score = 2.0 * r.score + 1.0;
        auto cubic = recs;
        for (auto& r : cubic) r.score = r.score * r.score * r.score;
        CHECK(auc_roc(linear) == doctest::Approx(base).epsilon(1e-12));
        CHECK(auc_roc(cubic) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("auc flips when the labels flip") {
    Rng rng(32);
    for (int it = 0; it < 50; ++it) {
        auto recs = random_records(rng, 40, true);
        auto flipped = recs;
        for (auto& r : flipped) r.is_ood = !r.is_ood;
        CHECK(auc_roc(flipped) == doctest::Approx(1.0 - auc_roc(recs)).epsilon(1e-12));
    }
}

namespace {

// 100 ID and 100 OOD records arranged so that exactly `wins` of the 10000
// (ID, OOD) pairs have the ID record scoring higher. AUC = wins/10000.
std::vector<ScoreRecord> records_with_wins(int wins) {
    std::vector<ScoreRecord> out;
    for (int j = 0; j < 100; ++j)
        out.push_back({"o" + std::to_string(j), Detector::msp, static_cast<double>(j), true});
    int remaining = wins;
    for (int i = 0; i < 100; ++i) {
        const int w = std::min(remaining, 100);
        remaining -= w;
        out.push_back({"i" + std::to_string(i), Detector::msp, w - 0.5, false});
    }
    return out;
}

} // namespace

TEST_CASE("detector average of the four-detector row prints 71.10") {
    SplitManifest split;
    split.shift = ShiftType::task;

    std::map<std::string, std::string> id_truth{{"a", "x"}};
    std::map<std::string, std::string> id_preds{{"a", "x"}};
    std::map<std::string, std::string> ood_truth{{"c", "z"}};
    std::map<std::string, std::string> ood_preds{{"c", "x"}};

    std::map<Detector, std::optional<std::vector<ScoreRecord>>> scores;
    scores[Detector::msp] = records_with_wins(9133);         // 91.33
    scores[Detector::odin] = records_with_wins(6142);        // 61.42
    scores[Detector::mahalanobis] = records_with_wins(7054); // 70.54
    scores[Detector::oe] = records_with_wins(6111);          // 61.11

    auto r = degradation_report("x", split, id_preds, id_truth, ood_preds, ood_truth, scores);
    CHECK(r.auc.at(Detector::msp) == doctest::Approx(91.33).epsilon(1e-12));
    CHECK(r.auc.at(Detector::odin) == doctest::Approx(61.42).epsilon(1e-12));
    CHECK(r.auc.at(Detector::mahalanobis) == doctest::Approx(70.54).epsilon(1e-12));
    CHECK(r.auc.at(Detector::oe) == doctest::Approx(61.11).epsilon(1e-12));

    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", r.average_auc);
    CHECK(std::string(buf) == "71.10");

    auto md = reports_to_markdown(std::vector<EvalReport>{r});
    CHECK(md.find("71.10") != std::string::npos);
}

TEST_CASE("degradation_report assembles a table row") {
    SplitManifest split;
    split.shift = ShiftType::random;

    std::map<std::string, std::string> id_truth{{"a", "x"}, {"b", "y"}};
    std::map<std::string, std::string> id_preds{{"a", "x"}, {"b", "y"}};
    std::map<std::string, std::string> ood_truth{{"c", "x"}, {"d", "y"}};
    std::map<std::string, std::string> ood_preds{{"c", "x"}, {"d", "x"}};

    std::map<Detector, std::optional<std::vector<ScoreRecord>>> scores;
    scores[Detector::msp] = records_of({0.9, 0.8}, {0.2, 0.1});        // AUC 100
    scores[Detector::odin] = records_of({0.4, 0.6}, {0.4, 0.6});       // AUC 50
    scores[Detector::mahalanobis] = std::nullopt;                      // failed fit
    scores[Detector::oe] = records_of({0.9, 0.3}, {0.5, 0.1});         // AUC 75

    auto r = degradation_report("demo", split, id_preds, id_truth, ood_preds, ood_truth, scores);
    CHECK(r.id_accuracy == 100.0);
    CHECK(r.ood_accuracy == 50.0);
    CHECK(r.delta == 50.0);
    CHECK(r.auc.at(Detector::msp) == 100.0);
    CHECK(r.average_auc == doctest::Approx(75.0).epsilon(1e-12));
    REQUIRE(r.missing.size() == 1);
    CHECK(r.missing[0] == Detector::mahalanobis);

    SUBCASE("json round-trip preserves the row") {
        auto r2 = parse_report(serialize_report(r));
        CHECK(r2.id_accuracy == r.id_accuracy);
        CHECK(r2.ood_accuracy == r.ood_accuracy);
        CHECK(r2.delta == r.delta);
        CHECK(r2.auc == r.auc);
        CHECK(r2.missing == r.missing);
        CHECK(r2.average_auc == r.average_auc);
    }

    SUBCASE("markdown keeps 2-decimal values and flags the gap") {
        std::vector<EvalReport> rows{r};
        auto md = reports_to_markdown(rows);
        CHECK(md.find("100.00") != std::string::npos);
        CHECK(md.find("n/a") != std::string::npos);
        CHECK(md.find("50.00 (50.00 ↓)") != std::string::npos);

        auto csv = reports_to_csv(rows);
        CHECK(csv.find("random,100.00,50.00,n/a,75.00,75.00,100.00,50.00,-50.00") !=
              std::string::npos);
    }
}

TEST_CASE("markdown/csv round-trip keeps 2-decimal values stable") {
    EvalReport r;
    r.corpus_id = "demo";
    r.shift = ShiftType::token;
    r.auc[Detector::msp] = 82.824999;
    r.auc[Detector::odin] = 71.16;
    r.auc[Detector::mahalanobis] = 56.70;
    r.auc[Detector::oe] = 52.61;
    r.average_auc = (r.auc[Detector::msp] + 71.16 + 56.70 + 52.61) / 4.0;
    r.id_accuracy = 97.50;
    r.ood_accuracy = 61.04;
    r.delta = r.id_accuracy - r.ood_accuracy;

    std::vector<EvalReport> rows{r};
    auto md = reports_to_markdown(rows);
    CHECK(md.find("82.82") != std::string::npos);
    CHECK(md.find("61.04 (36.46 ↓)") != std::string::npos);

    // The JSON report keeps full precision.
    auto r2 = parse_report(serialize_report(r));
    CHECK(r2.auc.at(Detector::msp) == 82.824999);
}
