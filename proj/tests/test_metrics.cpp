#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "midorf/metrics.hpp"

using namespace midorf;

TEST_CASE("pearson correlation basics") {
    std::vector<double> a{1, 2, 3, 4};
    CHECK(pearson_corr(a, a) == doctest::Approx(1.0));
    std::vector<double> neg{-1, -2, -3, -4};
    CHECK(pearson_corr(a, neg) == doctest::Approx(-1.0));
    // direct evaluation of the formula for this pair gives 0.96476
    std::vector<double> b{2, 4, 5, 9};
    CHECK(pearson_corr(a, b) == doctest::Approx(0.9647638212377322).epsilon(1e-6));
    std::vector<double> constant{3, 3, 3, 3};
    CHECK_THROWS_AS(pearson_corr(a, constant), MetricsError);
    CHECK(pearson_corr(a, b) == pearson_corr(b, a));
}

TEST_CASE("icc(3,1) properties") {
    testing::Rng rng(223);
    std::vector<double> x(50), shifted(50), noisy(50);
    for (int i = 0; i < 50; ++i) {
        x[static_cast<size_t>(i)] = rng.normal(2.0);
        shifted[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + 3.7;
        noisy[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + 0.1 * rng.normal();
    }
    CHECK(icc_consistency(x, x) == doctest::Approx(1.0));
    // consistency ICC ignores a constant additive bias entirely
    CHECK(icc_consistency(x, shifted) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(icc_consistency(x, noisy) > 0.98);

    std::vector<double> c(10, 2.0);
    CHECK_THROWS_AS(icc_consistency(c, c), MetricsError);

    // independent long sequences have near-zero ICC
    std::vector<double> u(1000), v(1000);
    for (int i = 0; i < 1000; ++i) {
        u[static_cast<size_t>(i)] = rng.normal();
        v[static_cast<size_t>(i)] = rng.normal();
    }
    CHECK(std::abs(icc_consistency(u, v)) < 0.1);
}

TEST_CASE("mae, accuracy and macro F1 hand values") {
    std::vector<double> same{1, 2, 3};
    CHECK(mean_absolute_error(same, same) == 0.0);
    std::vector<double> off{2, 3, 4};
    CHECK(mean_absolute_error(off, same) == doctest::Approx(1.0));
    CHECK(mean_absolute_error(off, same) == mean_absolute_error(same, off));

    std::vector<Level> truth{1, 1, 2, 3};
    std::vector<Level> pred{1, 2, 2, 3};
    CHECK(accuracy(pred, truth) == doctest::Approx(0.75));
    // per-class F1 = [2/3, 2/3, 1] -> macro 0.7778
    CHECK(f1_macro(pred, truth, 3) == doctest::Approx(0.7777777778).epsilon(1e-4));
    CHECK(accuracy(truth, truth) == 1.0);
    CHECK(f1_macro(truth, truth, 3) == 1.0);
}

TEST_CASE("macro F1 excludes classes absent from both sides") {
    std::vector<Level> truth{1, 1, 2};
    std::vector<Level> pred{1, 1, 2};
    // class 3 (and any higher) has no support anywhere: excluded
    CHECK(f1_macro(pred, truth, 5) == doctest::Approx(1.0));
    // a class predicted but never true drags the mean down
    std::vector<Level> wild{1, 3, 2};
    CHECK(f1_macro(wild, truth, 5) < 1.0);
}

TEST_CASE("evaluate joins by id and pools frames") {
    testing::Rng rng(227);
    Dataset ds = testing::random_dataset(rng, 5, 4, 2, 3, true);
    std::vector<BagPrediction> preds;
    for (const Bag& bag : ds.bags) {
        BagPrediction p;
        p.id = bag.id;
        p.bag_pred = bag.bag_label;
        p.frame_preds = bag.instance_labels;
        preds.push_back(std::move(p));
    }

    SUBCASE("perfect predictions score perfectly") {
        const MetricsReport r = evaluate(preds, ds);
        CHECK(r.has_frame);
        CHECK(*r.frame_corr == doctest::Approx(1.0));
        CHECK(*r.frame_icc == doctest::Approx(1.0));
        CHECK(r.frame_mae == 0.0);
        CHECK(r.seq_acc == 1.0);
        CHECK(r.seq_f1 == 1.0);
        CHECK(r.frames > 0);
        CHECK(r.sequences == 5);
    }
    SUBCASE("shuffled prediction order changes nothing") {
        std::vector<BagPrediction> shuffled = preds;
        std::reverse(shuffled.begin(), shuffled.end());
        const MetricsReport a = evaluate(preds, ds);
        const MetricsReport b = evaluate(shuffled, ds);
        CHECK(a.seq_acc == b.seq_acc);
        CHECK(a.frame_mae == b.frame_mae);
        CHECK(*a.frame_corr == doctest::Approx(*b.frame_corr));
    }
    SUBCASE("constant predictor reports error flags but finite MAE") {
        for (auto& p : preds) {
            p.bag_pred = 2;
            std::fill(p.frame_preds.begin(), p.frame_preds.end(), 2);
        }
        const MetricsReport r = evaluate(preds, ds);
        CHECK(!r.frame_corr.has_value());
        CHECK(!r.frame_icc.has_value());
        CHECK(std::isfinite(r.frame_mae));
        CHECK(!r.flags.empty());
    }
    SUBCASE("missing id is an error naming the id") {
        preds[0].id = "nonexistent";
        CHECK_THROWS_WITH_AS(evaluate(preds, ds),
                             doctest::Contains("nonexistent"), DataError);
    }
    SUBCASE("frame block is omitted without instance labels") {
        Dataset bare = training_view(ds);
        const MetricsReport r = evaluate(preds, bare);
        CHECK(!r.has_frame);
        CHECK(!r.flags.empty());
    }
}
