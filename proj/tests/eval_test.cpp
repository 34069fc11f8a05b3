#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "test_support.hpp"

using namespace ggls;

TEST_CASE("accuracy is the exact-match fraction") {
    Eigen::VectorXi a(4), b(4);
    a << 1, 2, 2, 3;
    b << 1, 2, 3, 3;
    CHECK(accuracy(a, a) == 1.0);
    CHECK(accuracy(a, b) == 0.75);

    Eigen::VectorXi c(2), d(2);
    c << 1, 1;
    d << 2, 2;
    CHECK(accuracy(c, d) == 0.0);

    Eigen::VectorXi e(3);
    CHECK_THROWS_AS(accuracy(a, e), DataFormatError);

    SECTION("permuting both vectors identically leaves it unchanged") {
        Xoshiro256 rng(91);
        const Eigen::VectorXi p = test_support::random_labels(rng, 12, 3);
        const Eigen::VectorXi t = test_support::random_labels(rng, 12, 3);
        std::vector<int> perm(12);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = 11; i > 0; --i)
            std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
        Eigen::VectorXi p2(12), t2(12);
        for (int i = 0; i < 12; ++i) {
            p2[i] = p[perm[i]];
            t2[i] = t[perm[i]];
        }
        CHECK(accuracy(p, t) == accuracy(p2, t2));
    }
}

TEST_CASE("build_report assembles the confusion matrix") {
    Eigen::VectorXi pred(5), truth(5);
    pred << 1, 2, 2, 3, 1;
    truth << 1, 2, 3, 3, 2;
    const EvalReport r = build_report(pred, truth, 3, GglsConfig{});
    CHECK(r.confusion.sum() == 5);
    CHECK(r.accuracy == Catch::Approx(3.0 / 5.0));
    CHECK(r.accuracy ==
          Catch::Approx(static_cast<double>(r.confusion.trace()) / r.confusion.sum()));
    for (int c = 0; c < 3; ++c) {
        const int support = static_cast<int>((truth.array() == c + 1).count());
        CHECK(r.confusion.row(c).sum() == support);
    }
}

TEST_CASE("baseline_1nn classifies from normalized source features") {
    SECTION("a target identical to the source scores 1.0") {
        const DomainDataset src_only = generate_synthetic(test_support::acceptance_spec(3));
        DomainDataset ds = src_only;
        ds.target_features = ds.source_features;
        ds.target_labels = ds.source_labels;
        CHECK(baseline_1nn(ds).accuracy == 1.0);
    }
    SECTION("a sample nearest to a wrong-class source point is counted wrong") {
        DomainDataset ds;
        ds.class_count = 2;
        ds.source_features.resize(1, 2);
        ds.source_features << 0.0, 1.0;
        ds.source_labels.resize(2);
        ds.source_labels << 1, 2;
        ds.target_features.resize(1, 1);
        ds.target_features << 0.9; // nearest source has label 2
        Eigen::VectorXi truth(1);
        truth << 1;
        ds.target_labels = truth;
        CHECK(baseline_1nn(ds).accuracy == 0.0);
    }
    SECTION("missing truth labels are an error") {
        DomainDataset ds = generate_synthetic(test_support::acceptance_spec(3));
        ds.target_labels.reset();
        CHECK_THROWS_AS(baseline_1nn(ds), EvalError);
    }
}

TEST_CASE("ablation_suite runs the five named variants") {
    const DomainDataset ds = generate_synthetic(test_support::acceptance_spec(7));
    const auto reports = ablation_suite(ds, test_support::acceptance_config());

    REQUIRE(reports.size() == 5);
    CHECK(reports[0].first == "GGLS");
    CHECK(reports[1].first == "GGLS-noLS");
    CHECK(reports[2].first == "GGLS-noMFL");
    CHECK(reports[3].first == "GGLS-noLSMFL");
    CHECK(reports[4].first == "GGLS-noLSMFLKF");

    SECTION("config echoes carry the distinct ablation flags") {
        CHECK_FALSE(reports[0].second.config.no_landmark);
        CHECK(reports[1].second.config.no_landmark);
        CHECK_FALSE(reports[1].second.config.no_manifold);
        CHECK(reports[2].second.config.no_manifold);
        CHECK(reports[3].second.config.no_landmark);
        CHECK(reports[3].second.config.no_manifold);
        CHECK_FALSE(reports[3].second.config.no_kernel);
        CHECK(reports[4].second.config.no_kernel);
    }
    SECTION("accuracies are valid and recomputable from the predictions") {
        for (const auto& [name, report] : reports) {
            CHECK(report.accuracy >= 0.0);
            CHECK(report.accuracy <= 1.0);
            CHECK(report.accuracy == accuracy(report.predictions, *ds.target_labels));
            CHECK(report.confusion.sum() == ds.target_count());
        }
    }
    SECTION("truth labels are required") {
        DomainDataset unlabeled = ds;
        unlabeled.target_labels.reset();
        CHECK_THROWS_AS(ablation_suite(unlabeled, test_support::acceptance_config()),
                        EvalError);
    }
}
