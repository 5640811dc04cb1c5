// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "eegpipe/nn/adam.hpp"
#include "eegpipe/nn/net.hpp"

using namespace eegpipe;
using namespace eegpipe::nn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<Sample> random_batch(int n, long t, long d, int classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Sample> batch;
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.x.resize(t, d);
        for (long r = 0; r < t; ++r)
            for (long c = 0; c < d; ++c) s.x(r, c) = u(rng);
        s.label = i % classes;
        batch.push_back(std::move(s));
    }
    return batch;
}

// central finite differences over every parameter element
double fd_max_rel_error(Arch arch, int hidden, long t, int d, int classes,
                        double dropout, std::uint64_t seed) {
    ModelParams model = init_model(arch, d, hidden, classes, seed);
    auto batch = random_batch(3, t, d, classes, seed + 1);

    GradOptions opts;
    opts.dropout_rate = dropout;
    opts.train_mode = true;
    opts.dropout_seed = seed + 2;
    const GradResult gr = compute_gradients(model, batch, opts);

    std::vector<Eigen::Map<MatrixXd>> params;
    visit_tensors(model, [&params](const std::string&, Eigen::Map<MatrixXd> m) {
        params.push_back(m);
    });
    std::vector<Eigen::Map<const MatrixXd>> grads;
    visit_tensors(const_cast<const ModelParams&>(gr.grads),
                  [&grads](const std::string&, Eigen::Map<const MatrixXd> m) {
                      grads.push_back(m);
                  });

    const double eps = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (long i = 0; i < params[k].size(); ++i) {
            double& theta = params[k].data()[i];
            const double saved = theta;
            theta = saved + eps;
            const double lp = compute_loss(model, batch, opts);
            theta = saved - eps;
            const double lm = compute_loss(model, batch, opts);
            theta = saved;
            const double numeric = (lp - lm) / (2.0 * eps);
            const double analytic = grads[k].data()[i];
            const double denom = std::max({1.0, std::abs(numeric), std::abs(analytic)});
            worst = std::max(worst, std::abs(numeric - analytic) / denom);
        }
    }
    return worst;
}

}  // namespace

// A central difference is only a valid derivative estimate when the loss is
// differentiable within eps of the evaluation point; the seed keeps every
// ReLU pre-activation clear of its kink for all architectures.
TEST_CASE("gradients match finite differences for every architecture") {
    for (Arch arch : {Arch::Lstm, Arch::BiLstm, Arch::BiLstmAttW, Arch::BiLstmAttG,
                      Arch::BiLstmAttWG}) {
        CAPTURE(arch_name(arch));
        CHECK(fd_max_rel_error(arch, 4, 5, 3, 2, 0.0, 2026) < 1e-4);
    }
}

TEST_CASE("gradients stay correct with fixed-mask dropout") {
    CHECK(fd_max_rel_error(Arch::BiLstmAttWG, 4, 5, 3, 2, 0.5, 2026) < 1e-4);
}

TEST_CASE("zero input with tied directions gives tied gradients") {
    ModelParams model = init_model(Arch::BiLstm, 3, 4, 2, 9);
    model.bwd = model.fwd;
    // make the head see both directions identically
    model.dense1.W.rightCols(4) = model.dense1.W.leftCols(4);

    std::vector<Sample> batch;
    Sample s;
    s.x = MatrixXd::Zero(5, 3);
    s.label = 1;
    batch.push_back(s);

    GradOptions opts;  // no dropout
    const GradResult gr = compute_gradients(model, batch, opts);
    CHECK((gr.grads.fwd.W_i - gr.grads.bwd.W_i).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gr.grads.fwd.U_c - gr.grads.bwd.U_c).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gr.grads.fwd.b_o - gr.grads.bwd.b_o).cwiseAbs().maxCoeff() == 0.0);
    CHECK((gr.grads.fwd.W_f - gr.grads.bwd.W_f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("duplicated sample leaves the mean gradient unchanged") {
    ModelParams model = init_model(Arch::BiLstmAttWG, 3, 4, 2, 17);
    auto batch1 = random_batch(1, 4, 3, 2, 18);
    std::vector<Sample> batch2 = {batch1[0], batch1[0]};

    GradOptions opts;  // dropout off so both copies share the forward pass
    const GradResult g1 = compute_gradients(model, batch1, opts);
    const GradResult g2 = compute_gradients(model, batch2, opts);
    CHECK(g1.loss == doctest::Approx(g2.loss).epsilon(1e-15));

    double worst = 0.0;
    visit_tensors(const_cast<const ModelParams&>(g1.grads),
                  [&](const std::string& name, Eigen::Map<const MatrixXd> a) {
                      visit_tensors(const_cast<const ModelParams&>(g2.grads),
                                    [&](const std::string& other,
                                        Eigen::Map<const MatrixXd> b) {
                                        if (name == other)
                                            worst = std::max(worst,
                                                             (a - b).cwiseAbs().maxCoeff());
                                    });
                  });
    CHECK(worst < 1e-15);
}

TEST_CASE("parallel gradient reduction matches sequential within 1e-10") {
    ModelParams model = init_model(Arch::BiLstmAttWG, 4, 6, 3, 23);
    auto batch = random_batch(7, 5, 4, 3, 24);

    GradOptions seq;
    seq.threads = 1;
    GradOptions par = seq;
    par.threads = 3;
    const GradResult a = compute_gradients(model, batch, seq);
    const GradResult b = compute_gradients(model, batch, par);
    CHECK(std::abs(a.loss - b.loss) < 1e-12);

    std::vector<Eigen::Map<const MatrixXd>> ga, gb;
    visit_tensors(const_cast<const ModelParams&>(a.grads),
                  [&ga](const std::string&, Eigen::Map<const MatrixXd> m) { ga.push_back(m); });
    visit_tensors(const_cast<const ModelParams&>(b.grads),
                  [&gb](const std::string&, Eigen::Map<const MatrixXd> m) { gb.push_back(m); });
    for (std::size_t k = 0; k < ga.size(); ++k)
        CHECK((ga[k] - gb[k]).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("empty batch and bad labels are rejected") {
    ModelParams model = init_model(Arch::Lstm, 3, 4, 2, 1);
    GradOptions opts;
    CHECK_THROWS_AS(compute_gradients(model, {}, opts), EmptyDataset);
    auto batch = random_batch(2, 4, 3, 2, 2);
    batch[0].label = 5;
    CHECK_THROWS_AS(compute_gradients(model, batch, opts), InvalidConfig);
}

TEST_CASE("Adam") {
    ModelParams p = init_model(Arch::Lstm, 2, 3, 2, 31);

    SUBCASE("zero gradient leaves parameters unchanged") {
        const ModelParams before = p;
        ModelParams zero_grad = zeros_like(p);
        AdamState state(p);
        for (long t = 1; t <= 5; ++t) adam_step(p, zero_grad, state, t, 0.01);
        double diff = 0.0;
        visit_tensors(const_cast<const ModelParams&>(p),
                      [&](const std::string& name, Eigen::Map<const MatrixXd> a) {
                          visit_tensors(const_cast<const ModelParams&>(before),
                                        [&](const std::string& other,
                                            Eigen::Map<const MatrixXd> b) {
                                            if (name == other)
                                                diff = std::max(
                                                    diff, (a - b).cwiseAbs().maxCoeff());
                                        });
                      });
        CHECK(diff == 0.0);
    }
    SUBCASE("constant gradient steps approach lr in magnitude") {
        const double lr = 0.01;
        ModelParams grad = zeros_like(p);
        grad.fwd.W_i.setConstant(0.37);
        AdamState state(p);
        ModelParams prev = p;
        for (long t = 1; t <= 200; ++t) {
            prev = p;
            adam_step(p, grad, state, t, lr);
            const double step = (p.fwd.W_i - prev.fwd.W_i).cwiseAbs().maxCoeff();
            CHECK(step <= lr * (1.0 + 1e-6));
        }
        // in the moment limit the update magnitude approaches lr exactly
        const double last = (p.fwd.W_i - prev.fwd.W_i).cwiseAbs().maxCoeff();
        CHECK(last == doctest::Approx(lr).epsilon(1e-3));
    }
    SUBCASE("opposite gradients give opposite updates") {
        ModelParams a = init_model(Arch::Lstm, 2, 3, 2, 32);
        ModelParams b = a;
        ModelParams ga = zeros_like(a), gb = zeros_like(a);
        ga.fwd.W_i.setConstant(0.5);
        gb.fwd.W_i.setConstant(-0.5);
        AdamState sa(a), sb(b);
        for (long t = 1; t <= 10; ++t) {
            adam_step(a, ga, sa, t, 0.01);
            adam_step(b, gb, sb, t, 0.01);
        }
        const MatrixXd da = a.fwd.W_i - init_model(Arch::Lstm, 2, 3, 2, 32).fwd.W_i;
        const MatrixXd db = b.fwd.W_i - init_model(Arch::Lstm, 2, 3, 2, 32).fwd.W_i;
        CHECK((da + db).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("step index must be positive") {
        AdamState state(p);
        ModelParams g = zeros_like(p);
        CHECK_THROWS_AS(adam_step(p, g, state, 0, 0.01), InvalidConfig);
    }
}

TEST_CASE("global norm clipping") {
    ModelParams g = zeros_like(init_model(Arch::Lstm, 2, 3, 2, 41));
    g.fwd.W_i.setConstant(1.0);  // norm = sqrt(6)
    const double norm = std::sqrt(6.0);

    SUBCASE("below the limit nothing changes") {
        ModelParams copy = g;
        CHECK(clip_global_norm(copy, 10.0) == doctest::Approx(norm));
        CHECK((copy.fwd.W_i - g.fwd.W_i).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("above the limit the norm shrinks to the cap") {
        ModelParams copy = g;
        CHECK(clip_global_norm(copy, 1.0) == doctest::Approx(norm));
        double sq = 0.0;
        visit_tensors(const_cast<const ModelParams&>(copy),
                      [&sq](const std::string&, Eigen::Map<const MatrixXd> m) {
                          sq += m.squaredNorm();
                      });
        CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("disabled when max_norm <= 0") {
        ModelParams copy = g;
        clip_global_norm(copy, 0.0);
        CHECK((copy.fwd.W_i - g.fwd.W_i).cwiseAbs().maxCoeff() == 0.0);
    }
}
