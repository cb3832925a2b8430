#include <doctest.h>

#include <cmath>

#include "codeshift/detect.hpp"
#include "codeshift/error.hpp"
#include "codeshift/rng.hpp"
#include "support/oracles.hpp"

using namespace codeshift;

TEST_CASE("msp of uniform logits is 1/C") {
    CHECK(msp_score(std::vector<double>{0, 0, 0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(msp_score(std::vector<double>{4.2, 4.2}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("msp of a dominant logit") {
    const double expect = std::exp(10.0) / (std::exp(10.0) + 2.0);
    CHECK(msp_score(std::vector<double>{10, 0, 0}) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(msp_score(std::vector<double>{10, 0, 0}) == doctest::Approx(0.999909).epsilon(1e-6));
}

TEST_CASE("msp is shift invariant") {
    Rng rng(3);
    for (int it = 0; it < 100; ++it) {
        std::vector<double> logits;
        for (int i = 0; i < 5; ++i)
            logits.push_back(static_cast<double>(rng.bounded(1000)) / 100.0 - 5.0);
        const double base = msp_score(logits);
        std::vector<double> shifted = logits;
        for (double& l : shifted) l += 123.25;
        CHECK(msp_score(shifted) == doctest::Approx(base).epsilon(1e-12));
        CHECK(base >= 1.0 / 5.0);
        CHECK(base <= 1.0);
    }
}

TEST_CASE("msp rejects bad logits") {
    CHECK_THROWS_AS(msp_score(std::vector<double>{}), Error);
    CHECK_THROWS_AS(msp_score(std::vector<double>{1.0, std::nan("")}), Error);
    CHECK_THROWS_AS(msp_score(std::vector<double>{1.0, INFINITY}), Error);
}

TEST_CASE("odin at T=1 equals msp bitwise") {
    Rng rng(11);
    for (int it = 0; it < 100; ++it) {
        std::vector<double> logits;
        for (int i = 0; i < 4; ++i)
            logits.push_back(static_cast<double>(rng.bounded(2000)) / 61.0 - 16.0);
        CHECK(odin_score(logits, 1.0) == msp_score(logits));
    }
}

TEST_CASE("odin temperature scaling") {
    // softmax([1,0]) max = e/(e+1).
    const double expect = std::exp(1.0) / (std::exp(1.0) + 1.0);
    CHECK(odin_score(std::vector<double>{2, 0}, 2.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(odin_score(std::vector<double>{2, 0}, 2.0) == doctest::Approx(0.731059).epsilon(1e-6));
}

TEST_CASE("odin approaches 1/C as T grows") {
    const double score = odin_score(std::vector<double>{5, 0, 0}, 1e9);
    CHECK(std::fabs(score - 1.0 / 3.0) < 1e-6);
}

TEST_CASE("odin rejects non-positive temperatures") {
    CHECK_THROWS_AS(odin_score(std::vector<double>{1, 0}, 0.0), Error);
    CHECK_THROWS_AS(odin_score(std::vector<double>{1, 0}, -2.0), Error);
}

TEST_CASE("oe scoring is msp on the supplied logits") {
    CHECK(oe_score(std::vector<double>{0, 0}) == 0.5);
    Rng rng(5);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> logits{static_cast<double>(rng.bounded(100)) / 10.0,
                                   static_cast<double>(rng.bounded(100)) / 10.0, 0.25};
        CHECK(oe_score(logits) == msp_score(logits));
    }
}

// ---- mahalanobis ------------------------------------------------------------

TEST_CASE("fit: single class hand example") {
    std::vector<std::pair<std::string, std::vector<double>>> feats{
        {"c", {0.0, 0.0}},
        {"c", {2.0, 2.0}},
    };
    // Scatter [[2,2],[2,2]] over N-C = 1 dof.
    auto stats = fit_mahalanobis(feats, 0.0);
    CHECK(stats.means[0] == std::vector<double>{1.0, 1.0});
    // Verify via the quadratic form along the (1,-1) direction, where the
    // regularized inverse is ~1/eps: the fit must be usable, not singular.
    CHECK(stats.dim == 2);
    CHECK(stats.epsilon > 0.0);
}

TEST_CASE("fit succeeds on zero scatter via regularization") {
    std::vector<std::pair<std::string, std::vector<double>>> feats{
        {"c", {1.0, 2.0}},
        {"c", {1.0, 2.0}},
        {"c", {1.0, 2.0}},
    };
    auto stats = fit_mahalanobis(feats, 0.0);
    CHECK(stats.epsilon > 0.0);
    CHECK(mahalanobis_score(stats, std::vector<double>{1.0, 2.0}) == 0.0);
}

TEST_CASE("fit pools within-class scatter across classes") {
    // Two classes with identical within-class scatter; pooled must equal it.
    std::vector<std::pair<std::string, std::vector<double>>> feats{
        {"a", {0.0}}, {"a", {2.0}}, // scatter 2, mean 1
        {"b", {10.0}}, {"b", {12.0}}, // scatter 2, mean 11
    };
    auto stats = fit_mahalanobis(feats, 1e-12);
    // Pooled sigma = (2+2)/(4-2) = 2; chol = sqrt(2).
    CHECK(stats.chol[0][0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("fit rejects undersized classes") {
    std::vector<std::pair<std::string, std::vector<double>>> feats{{"a", {0.0}}};
    CHECK_THROWS_WITH_AS(fit_mahalanobis(feats), doctest::Contains("ClassTooSmall"), Error);
}

TEST_CASE("identity covariance reduces the score to negative squared euclidean") {
    // Unit within-class variance in both coordinates -> Sigma ~ I.
    std::vector<std::pair<std::string, std::vector<double>>> feats{
        {"c", {1.0, 1.0}}, {"c", {-1.0, 1.0}}, {"c", {1.0, -1.0}}, {"c", {-1.0, -1.0}},
        {"c", {1.0, 0.0}}, {"c", {-1.0, 0.0}}, {"c", {0.0, 1.0}},  {"c", {0.0, -1.0}},
    };
    // mean (0,0); scatter: sum x^2 = 6, sum y^2 = 6, cross 0; dof 7.
    auto stats = fit_mahalanobis(feats, 1e-15);
    const double sigma = 6.0 / 7.0;
    const double score = mahalanobis_score(stats, std::vector<double>{3.0, 4.0});
    CHECK(score == doctest::Approx(-25.0 / sigma).epsilon(1e-9));
}

TEST_CASE("score picks the nearest class mean") {
    // Two tight clusters around (0,0) and (10,0) with near-identity scatter.
    std::vector<std::pair<std::string, std::vector<double>>> feats;
    for (double dx : {-1.0, 1.0})
        for (double dy : {-1.0, 1.0}) {
            feats.push_back({"a", {dx, dy}});
            feats.push_back({"b", {10.0 + dx, dy}});
        }
    auto stats = fit_mahalanobis(feats, 1e-15);
    // Sigma is diagonal with 8/6 per axis.
    const double s2 = 8.0 / 6.0;
    const double got = mahalanobis_score(stats, std::vector<double>{1.0, 0.0});
    CHECK(got == doctest::Approx(std::max(-1.0 / s2, -81.0 / s2)).epsilon(1e-9));
    CHECK(got <= 0.0);
    CHECK(mahalanobis_score(stats, std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("mahalanobis matches the adjugate-inverse oracle on random instances") {
    Rng rng(2024);
    for (int it = 0; it < 200; ++it) {
        const std::size_t dims = 1 + rng.bounded(3);
        const std::size_t n = 4 + rng.bounded(7); // up to 10 per class
        std::vector<std::pair<std::string, std::vector<double>>> feats;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v;
            for (std::size_t d = 0; d < dims; ++d)
                v.push_back(static_cast<double>(rng.bounded(200)) / 20.0 - 5.0);
            feats.push_back({"c", std::move(v)});
        }
        auto stats = fit_mahalanobis(feats, 1e-3);

        // Rebuild Sigma + eps I the slow way for the oracle.
        std::vector<double> mu(dims, 0.0);
        for (const auto& [l, v] : feats)
            for (std::size_t d = 0; d < dims; ++d) mu[d] += v[d] / static_cast<double>(n);
        std::vector<std::vector<double>> sigma(dims, std::vector<double>(dims, 0.0));
        for (const auto& [l, v] : feats)
            for (std::size_t i = 0; i < dims; ++i)
                for (std::size_t j = 0; j < dims; ++j)
                    sigma[i][j] += (v[i] - mu[i]) * (v[j] - mu[j]) / static_cast<double>(n - 1);
        for (std::size_t d = 0; d < dims; ++d) sigma[d][d] += 1e-3;

        std::vector<double> x;
        for (std::size_t d = 0; d < dims; ++d)
            x.push_back(static_cast<double>(rng.bounded(200)) / 20.0 - 5.0);

        const double fast = mahalanobis_score(stats, x);
        const double slow = oracle::mahalanobis_adjugate(sigma, mu, x);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("dimension mismatches are rejected") {
    std::vector<std::pair<std::string, std::vector<double>>> feats{
        {"a", {0.0, 0.0}}, {"a", {1.0, 1.0}}, {"b", {5.0, 5.0}}, {"b", {6.0, 6.0}},
    };
    auto stats = fit_mahalanobis(feats, 1e-6);
    CHECK_THROWS_AS(mahalanobis_score(stats, std::vector<double>{1.0}), Error);
    feats.push_back({"c", {1.0}});
    CHECK_THROWS_AS(fit_mahalanobis(feats), Error);
}

// ---- score_split -------------------------------------------------------------

namespace {

SplitManifest tiny_split() {
    SplitManifest s;
    s.shift = ShiftType::random;
    for (int i = 0; i < 5; ++i)
        s.assignments["id" + std::to_string(i)] = Partition::id_test;
    for (int i = 0; i < 5; ++i)
        s.assignments["ood" + std::to_string(i)] = Partition::ood_test;
    s.assignments["tr0"] = Partition::train;
    s.assignments["tr1"] = Partition::train;
    s.assignments["tr2"] = Partition::train;
    s.assignments["tr3"] = Partition::train;
    return s;
}

} // namespace

TEST_CASE("score_split emits one record per test file with ground truth flags") {
    auto split = tiny_split();
    std::vector<std::string> logits;
    for (const auto& [id, part] : split.assignments)
        logits.push_back(serialize_logits_line(id, "t", std::vector<double>{1.0, 0.0}));

    auto records = score_split(split, Detector::msp, logits, {}, {}, {});
    CHECK(records.size() == 10);
    int ood = 0;
    for (const auto& r : records) {
        ood += r.is_ood;
        CHECK(r.file_id.substr(0, 2) != "tr"); // train files are never scored
    }
    CHECK(ood == 5);
}

TEST_CASE("score_split reports missing logits") {
    auto split = tiny_split();
    std::vector<std::string> logits{serialize_logits_line("id0", "t", std::vector<double>{1, 0})};
    CHECK_THROWS_WITH_AS(score_split(split, Detector::msp, logits, {}, {}, {}),
                         doctest::Contains("MissingRecord"), Error);
}

TEST_CASE("score_split rejects malformed lines") {
    auto split = tiny_split();
    std::vector<std::string> logits{"{\"file_id\": 3}"};
    CHECK_THROWS_WITH_AS(score_split(split, Detector::msp, logits, {}, {}, {}),
                         doctest::Contains("SchemaError"), Error);
}

TEST_CASE("score_split drives mahalanobis from feature files") {
    auto split = tiny_split();
    std::map<std::string, std::string> labels;
    std::vector<std::string> train_feats, test_feats;
    int k = 0;
    for (const auto& [id, part] : split.assignments) {
        if (part == Partition::train) {
            labels[id] = (k++ % 2) ? "a" : "b";
            train_feats.push_back(serialize_features_line(
                id, std::vector<double>{static_cast<double>(k), 1.0 + k}));
        } else {
            test_feats.push_back(serialize_features_line(id, std::vector<double>{0.5, 1.5}));
        }
    }
    auto records = score_split(split, Detector::mahalanobis, {}, test_feats, train_feats, labels);
    CHECK(records.size() == 10);
    for (const auto& r : records) CHECK(r.score <= 0.0);
}

TEST_CASE("score records round-trip") {
    ScoreRecord r{"f1", Detector::odin, 0.75, true};
    CHECK(parse_score_record(serialize_score_record(r)).file_id == "f1");
    CHECK(parse_score_record(serialize_score_record(r)).score == 0.75);
    CHECK(parse_score_record(serialize_score_record(r)).is_ood == true);
}
