#include "uscnn/metrics.hpp"

#include <doctest.h>

using namespace uscnn;

TEST_CASE("counts to OE, PCC and kappa") {
    const Metrics m = metrics_from_counts(10, 80, 5, 5);
    CHECK(m.oe == 10);
    CHECK(m.total() == 100);
    CHECK(m.pcc == doctest::Approx(0.9));
    // Mc = 15, Mu = 85; PRE = (15*15 + 85*85) / 100^2
    CHECK(m.pre == doctest::Approx((15.0 * 15 + 85.0 * 85) / 10000.0));
    CHECK(m.kappa == doctest::Approx((0.9 - m.pre) / (1.0 - m.pre)));
}

TEST_CASE("asymmetric errors use the prediction and truth marginals") {
    const Metrics m = metrics_from_counts(20, 60, 15, 5);
    // predicted changed 35, truth changed 25
    const double pre = (35.0 * 25 + 65.0 * 75) / 10000.0;
    CHECK(m.pre == doctest::Approx(pre).epsilon(1e-15));
    CHECK(m.kappa == doctest::Approx((0.8 - pre) / (1 - pre)).epsilon(1e-15));
}

TEST_CASE("perfect prediction has kappa 1") {
    CHECK(metrics_from_counts(7, 9, 0, 0).kappa == 1.0);
    CHECK(metrics_from_counts(0, 16, 0, 0).kappa == 1.0);
    CHECK(metrics_from_counts(16, 0, 0, 0).kappa == 1.0);
}

TEST_CASE("an all-unchanged predictor has kappa 0") {
    const Metrics m = metrics_from_counts(0, 90, 0, 10);
    CHECK(m.pcc == doctest::Approx(0.9));
    CHECK(m.kappa == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
}

TEST_CASE("complete disagreement between single-class maps") {
    const Metrics m = metrics_from_counts(0, 0, 16, 0);
    CHECK(m.pcc == 0.0);
    CHECK(m.kappa == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("evaluate counts pixels") {
    ChangeMap pred(2, 3), truth(2, 3);
    pred.set(0, 0, Label::changed);
    pred.set(0, 1, Label::changed);
    truth.set(0, 0, Label::changed);
    truth.set(1, 2, Label::changed);
    const Metrics m = evaluate(pred, truth);
    CHECK(m.tp == 1);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 3);
    CHECK(m.oe == 2);
}

TEST_CASE("swapping both label sets keeps PCC and kappa") {
    ChangeMap pred(3, 3), truth(3, 3);
    pred.set(0, 0, Label::changed);
    pred.set(1, 1, Label::changed);
    truth.set(1, 1, Label::changed);
    truth.set(2, 2, Label::changed);
    truth.set(2, 1, Label::changed);
    ChangeMap ip = pred, it = truth;
    ip.labels = (1 - pred.labels.array()).matrix();
    it.labels = (1 - truth.labels.array()).matrix();
    const Metrics a = evaluate(pred, truth), b = evaluate(ip, it);
    CHECK(a.pcc == b.pcc);
    CHECK(a.kappa == doctest::Approx(b.kappa).epsilon(1e-15));
    CHECK(a.oe == b.oe);
}

TEST_CASE("evaluate rejects mismatched dimensions") {
    CHECK_THROWS_AS(evaluate(ChangeMap(2, 2), ChangeMap(2, 3)), std::invalid_argument);
}
