#include <cmath>
#include <vector>

#include "convsim/model.hpp"
#include "convsim/rng.hpp"
#include "doctest.h"

using namespace convsim;

namespace {

CreditedExample example(std::vector<double> x, int action, double credit) {
    return CreditedExample{std::move(x), action, credit};
}

std::vector<EncodedExample> random_encoded(RngStream& rng, int n, int dim) {
    std::vector<EncodedExample> out;
    for (int i = 0; i < n; ++i) {
        EncodedExample e;
        e.x.resize(dim);
        for (double& v : e.x) v = rng.gaussian();
        e.y = rng.bernoulli(0.5) ? 1.0 : 0.0;
        e.weight = 0.1 + 2.0 * rng.uniform01();
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

TEST_CASE("credit encoding follows the sign convention") {
    std::vector<CreditedExample> raw{
        example({1.0, 1.0}, 0, 2.5),
        example({1.0, 1.0}, 0, 0.0),
        example({1.0, 1.0}, 0, -0.4),
    };
    auto sales = encode_examples(raw, LabelEncoding::sales_credit);
    CHECK(sales[0].y == 1.0);
    CHECK(sales[0].weight == 2.5);
    CHECK(sales[1].y == 0.0);
    CHECK(sales[1].weight == 1.0);
    CHECK(sales[2].y == 0.0);
    CHECK(sales[2].weight == 0.4);

    std::vector<CreditedExample> clicks{example({1.0, 1.0}, 0, 1.0), example({1.0, 1.0}, 0, 0.0)};
    auto ctr = encode_examples(clicks, LabelEncoding::click_label);
    CHECK(ctr[0].y == 1.0);
    CHECK(ctr[0].weight == 1.0);
    CHECK(ctr[1].y == 0.0);
    CHECK(ctr[1].weight == 1.0);
}

TEST_CASE("training on nothing returns the zero model") {
    Hyper hyper;
    PolicyModel model = train_logistic({}, 3, LabelEncoding::sales_credit, hyper);
    CHECK(model.trained_on_empty);
    CHECK(model.weights.rows() == 3);
    CHECK(model.weights.cols() == 4);
    for (double w : model.weights.data()) CHECK(w == 0.0);
}

TEST_CASE("a separable toy set learns a positive weight") {
    // feature +1 implies converted, feature -1 implies not
    std::vector<CreditedExample> examples;
    for (int i = 0; i < 40; ++i) {
        examples.push_back(example({i % 2 ? 1.0 : -1.0, 1.0}, 0, i % 2 ? 1.0 : 0.0));
    }
    Hyper hyper;
    hyper.epochs = 50;
    PolicyModel model = train_logistic(examples, 1, LabelEncoding::sales_credit, hyper);
    CHECK(model.weights.at(0, 0) > 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    RngStream rng(4242);
    const int dim = 5;
    const double l2 = 0.37;
    for (int point = 0; point < 50; ++point) {
        auto examples = random_encoded(rng, 12, dim);
        std::vector<double> w(dim);
        for (double& v : w) v = rng.gaussian();

        auto grad = logistic_grad(w, examples, l2);
        const double h = 1e-6;
        for (int j = 0; j < dim; ++j) {
            std::vector<double> lo = w, hi = w;
            lo[j] -= h;
            hi[j] += h;
            double numeric =
                (logistic_loss(hi, examples, l2) - logistic_loss(lo, examples, l2)) / (2.0 * h);
            double denom = std::max(std::abs(numeric), std::abs(grad[j]));
            if (denom < 1e-10) {
                CHECK(std::abs(grad[j] - numeric) < 1e-8);
            } else {
                CHECK(std::abs(grad[j] - numeric) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("full-batch loss does not increase across epochs at the default rate") {
    RngStream rng(909);
    std::vector<CreditedExample> examples;
    for (int i = 0; i < 60; ++i) {
        double x = rng.gaussian();
        examples.push_back(example({x, 1.0}, 0, rng.bernoulli(sigmoid(1.2 * x)) ? 1.0 : 0.0));
    }
    auto encoded = encode_examples(examples, LabelEncoding::sales_credit);

    Hyper hyper;
    hyper.batch_size = 1024;  // full batch so each epoch is one exact gradient step
    double prev = logistic_loss(std::vector<double>(2, 0.0), encoded, hyper.l2);
    for (int epochs = 1; epochs <= 12; ++epochs) {
        Hyper h = hyper;
        h.epochs = epochs;
        PolicyModel model = train_logistic(examples, 1, LabelEncoding::sales_credit, h);
        std::vector<double> w(model.weights.row(0).begin(), model.weights.row(0).end());
        double loss = logistic_loss(w, encoded, hyper.l2);
        CHECK(loss <= prev + 1e-12);
        prev = loss;
    }
}

TEST_CASE("training is bitwise deterministic") {
    RngStream rng(31337);
    std::vector<CreditedExample> examples;
    for (int i = 0; i < 200; ++i) {
        examples.push_back(example({rng.gaussian(), rng.gaussian(), 1.0}, rng.uniform_int(2),
                                   rng.bernoulli(0.3) ? rng.uniform01() : 0.0));
    }
    Hyper hyper;
    hyper.seed = 99;
    PolicyModel a = train_logistic(examples, 2, LabelEncoding::sales_credit, hyper);
    PolicyModel b = train_logistic(examples, 2, LabelEncoding::sales_credit, hyper);
    CHECK(a.weights == b.weights);

    hyper.seed = 100;
    PolicyModel c = train_logistic(examples, 2, LabelEncoding::sales_credit, hyper);
    CHECK(a.weights != c.weights);  // the shuffle seed matters
}

TEST_CASE("examples with bad shapes or actions are rejected") {
    Hyper hyper;
    std::vector<CreditedExample> wrong_action{example({1.0, 1.0}, 5, 1.0)};
    CHECK_THROWS_AS(train_logistic(wrong_action, 2, LabelEncoding::sales_credit, hyper),
                    std::invalid_argument);
    std::vector<CreditedExample> wrong_dim{example({1.0}, 0, 1.0)};
    CHECK_THROWS_AS(train_logistic(wrong_dim, 2, LabelEncoding::sales_credit, hyper),
                    std::invalid_argument);
    std::vector<CreditedExample> non_finite{example({1.0, 1.0, 1.0}, 0, std::nan(""))};
    CHECK_THROWS_AS(train_logistic(non_finite, 2, LabelEncoding::sales_credit, hyper),
                    std::invalid_argument);
}
