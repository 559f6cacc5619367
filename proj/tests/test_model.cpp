#include <doctest.h>

#include <cmath>
#include <vector>

#include "model.hpp"
#include "rng.hpp"

using namespace lcfed;

namespace {

Examples make_examples(int dim, std::vector<std::vector<double>> xs,
                       std::vector<int> ys) {
    Examples e;
    e.feature_dim = static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < xs.size(); ++i) e.push_back(xs[i], ys[i]);
    return e;
}

Examples random_examples(int dim, int classes, int n, std::uint64_t seed) {
    Rng rng(seed);
    Examples e;
    e.feature_dim = static_cast<std::size_t>(dim);
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (int i = 0; i < n; ++i) {
        for (auto& v : x) v = rng.normal();
        e.push_back(x, static_cast<int>(rng.uniform_int(classes)));
    }
    return e;
}

} // namespace

TEST_CASE("parameter layout dimensions") {
    ModelArch a{{2, 3, 2}, 1};
    CHECK(a.weight_layers() == 2);
    CHECK(a.layer_dim(0) == 9);  // (2+1)*3
    CHECK(a.layer_dim(1) == 8);  // (3+1)*2
    CHECK(a.layer_offset(1) == 9);
    CHECK(a.total_dim() == 17);
    CHECK(a.phi_dim() == 9);

    // [DERIVED] (4+1)*8 + (8+1)*3 with per-layer biases
    ModelArch b{{4, 8, 3}, 1};
    CHECK(b.total_dim() == 67);
    CHECK(b.phi_dim() == 40);

    ModelArch c{{5, 7, 6, 3}, 2};
    CHECK(c.total_dim() == (5 + 1) * 7 + (7 + 1) * 6 + (6 + 1) * 3);
    CHECK(c.phi_dim() == (5 + 1) * 7 + (7 + 1) * 6);
}

TEST_CASE("arch validation rejects bad shapes") {
    CHECK_THROWS_AS((ModelArch{{4}, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelArch{{4, 0, 2}, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelArch{{4, 8, 2}, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((ModelArch{{4, 8, 2}, 2}.validate()), std::invalid_argument);
    CHECK_NOTHROW((ModelArch{{4, 8, 2}, 1}.validate()));
    CHECK_NOTHROW((ModelArch{{4, 8, 8, 2}, 2}.validate()));
}

TEST_CASE("init draws bounded weights and zero biases") {
    ModelArch a{{16, 8, 4}, 1};
    ParamVec p = init_model(a, 42);
    REQUIRE(p.size() == a.total_dim());

    const double a0 = std::sqrt(6.0 / (16 + 8));
    for (double w : p.weights(0)) {
        CHECK(w > -a0);
        CHECK(w < a0);
    }
    const double a1 = std::sqrt(6.0 / (8 + 4));
    for (double w : p.weights(1)) {
        CHECK(w > -a1);
        CHECK(w < a1);
    }
    for (double b : p.biases(0)) CHECK(b == 0.0);
    for (double b : p.biases(1)) CHECK(b == 0.0);

    ParamVec q = init_model(a, 42);
    CHECK(p.values == q.values);
    ParamVec r = init_model(a, 43);
    CHECK(p.values != r.values);
}

TEST_CASE("split views cover the parameter vector exactly") {
    ModelArch a{{3, 5, 4, 2}, 2};
    ParamVec p = init_model(a, 7);
    SplitView sv = split_params(p);
    CHECK(sv.phi.size() == a.phi_dim());
    CHECK(sv.h.size() == a.total_dim() - a.phi_dim());
    CHECK(sv.phi.data() == p.data());
    CHECK(sv.h.data() == p.data() + a.phi_dim());
}

TEST_CASE("zero parameters give uniform softmax") {
    ModelArch a{{3, 4, 4}, 1};
    ParamVec p{std::vector<double>(a.total_dim(), 0.0), a};
    Examples e = random_examples(3, 4, 10, 1);

    // [DERIVED] uniform softmax over C classes: loss = ln C
    CHECK(loss_only(p, e) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

    // argmax ties resolve to class 0
    int zeros = 0;
    for (int y : e.labels) zeros += (y == 0);
    EvalResult ev = evaluate(p, e);
    CHECK(ev.accuracy ==
          doctest::Approx(static_cast<double>(zeros) / e.size()).epsilon(1e-12));
    CHECK(ev.mean_loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("identity network forward pass by hand") {
    ModelArch a{{2, 2, 2}, 1};
    ParamVec p{std::vector<double>(a.total_dim(), 0.0), a};
    // both layers the 2x2 identity, zero biases
    p.weights(0)[0] = 1.0;
    p.weights(0)[3] = 1.0;
    p.weights(1)[0] = 1.0;
    p.weights(1)[3] = 1.0;

    Examples e = make_examples(2, {{1.0, 0.0}}, {0});
    // [DERIVED] logits (1,0): CE(label 0) = ln(1 + e^-1)
    CHECK(loss_only(p, e) ==
          doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-14));

    // positive inputs pass the rectifier untouched, so argmax(logits) ==
    // argmax(x) and labels that agree with it are scored correct
    Examples big = make_examples(
        2, {{2.0, 1.0}, {0.5, 3.0}, {4.0, 0.1}, {0.2, 0.9}}, {0, 1, 0, 1});
    CHECK(evaluate(p, big).accuracy == 1.0);
}

TEST_CASE("gradient matches central differences") {
    ModelArch a{{4, 6, 3}, 1};
    ParamVec p = init_model(a, 11);
    Examples e = random_examples(4, 3, 8, 2);

    LossGrad lg = loss_and_grad(p, e);
    CHECK(lg.loss == doctest::Approx(loss_only(p, e)).epsilon(1e-14));
    REQUIRE(lg.grad.size() == p.size());

    const double h = 1e-6;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ParamVec plus = p, minus = p;
        plus.values[i] += h;
        minus.values[i] -= h;
        const double fd = (loss_only(plus, e) - loss_only(minus, e)) / (2 * h);
        CHECK(lg.grad.values[i] ==
              doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("empty batch span means the whole set") {
    ModelArch a{{3, 4, 2}, 1};
    ParamVec p = init_model(a, 5);
    Examples e = random_examples(3, 2, 6, 3);

    std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    LossGrad whole = loss_and_grad(p, e);
    LossGrad listed = loss_and_grad(p, e, all);
    CHECK(whole.loss == listed.loss);
    CHECK(whole.grad.values == listed.grad.values);
    CHECK(loss_only(p, e) == loss_only(p, e, all));
}

TEST_CASE("batch loss is the mean over the batch") {
    ModelArch a{{3, 4, 2}, 1};
    ParamVec p = init_model(a, 5);
    Examples e = random_examples(3, 2, 5, 4);

    std::vector<std::size_t> b0{0}, b1{1}, both{0, 1};
    const double l0 = loss_only(p, e, b0);
    const double l1 = loss_only(p, e, b1);
    CHECK(loss_only(p, e, both) ==
          doctest::Approx(0.5 * (l0 + l1)).epsilon(1e-14));

    // duplicating a batch leaves mean loss and gradient unchanged
    std::vector<std::size_t> doubled{0, 1, 0, 1};
    LossGrad g1 = loss_and_grad(p, e, both);
    LossGrad g2 = loss_and_grad(p, e, doubled);
    CHECK(g1.loss == doctest::Approx(g2.loss).epsilon(1e-14));
    for (std::size_t i = 0; i < g1.grad.size(); ++i)
        CHECK(g1.grad.values[i] ==
              doctest::Approx(g2.grad.values[i]).epsilon(1e-12).scale(1.0));
}
