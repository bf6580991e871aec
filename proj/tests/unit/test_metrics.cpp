#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "l3guard/errors.hpp"
#include "l3guard/metrics.hpp"
#include "l3guard/rng.hpp"

using namespace l3guard;

namespace {

// Independent restatement of the definitions with the zero-denominator rule.
Metrics oracle(double tp, double fp, double tn, double fn)
{
    auto ratio = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
    Metrics m;
    m.accuracy = ratio(tp + tn, tp + fp + tn + fn);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
    m.fpr = ratio(fp, fp + tn);
    m.fnr = ratio(fn, fn + tp);
    return m;
}

} // namespace

TEST_CASE("worked example")
{
    const auto m = compute_metrics({2, 1, 12, 0});
    CHECK(m.accuracy == doctest::Approx(14.0 / 15));
    CHECK(m.precision == doctest::Approx(2.0 / 3));
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == doctest::Approx(0.8));
    CHECK(m.fpr == doctest::Approx(1.0 / 13));
    CHECK(m.fnr == 0.0);
}

TEST_CASE("zero denominators")
{
    const auto none = compute_metrics({0, 0, 10, 5});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f1 == 0.0);
    CHECK(none.fnr == 1.0);
    const auto all_neg = compute_metrics({0, 0, 7, 0});
    CHECK(all_neg.accuracy == 1.0);
    CHECK(all_neg.fnr == 0.0);
    CHECK_THROWS_AS(compute_metrics({}), EmptyEvaluation);
}

TEST_CASE("agrees with the oracle on random matrices")
{
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        ConfusionMatrix cm{rng.below(50), rng.below(50), rng.below(1000), rng.below(50)};
        if (i % 10 == 0)
            cm.tp = 0;
        if (i % 15 == 0)
            cm.fp = 0;
        if (cm.total() == 0)
            cm.tn = 1;
        const auto got = compute_metrics(cm);
        const auto want = oracle(cm.tp, cm.fp, cm.tn, cm.fn);
        REQUIRE(std::abs(got.accuracy - want.accuracy) <= 1e-12);
        REQUIRE(std::abs(got.precision - want.precision) <= 1e-12);
        REQUIRE(std::abs(got.recall - want.recall) <= 1e-12);
        REQUIRE(std::abs(got.f1 - want.f1) <= 1e-12);
        REQUIRE(std::abs(got.fpr - want.fpr) <= 1e-12);
        REQUIRE(std::abs(got.fnr - want.fnr) <= 1e-12);
    }
}

TEST_CASE("confusion add")
{
    ConfusionMatrix cm;
    cm.add(true, true);
    cm.add(true, false);
    cm.add(false, true);
    cm.add(false, false);
    cm.add(false, false);
    CHECK(cm == ConfusionMatrix{1, 1, 2, 1});
}
