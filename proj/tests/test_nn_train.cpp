// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "eegpipe/nn/train.hpp"

using namespace eegpipe;
using namespace eegpipe::nn;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// sequences whose every feature equals the class index
std::vector<Sample> separable_toy(int per_class, long t, long d) {
    std::vector<Sample> out;
    for (int cls = 0; cls < 2; ++cls)
        for (int i = 0; i < per_class; ++i)
            out.push_back({MatrixXd::Constant(t, d, static_cast<double>(cls)), cls});
    return out;
}

double max_param_diff(const ModelParams& a, const ModelParams& b) {
    double worst = 0.0;
    visit_tensors(const_cast<const ModelParams&>(a),
                  [&](const std::string& name, Eigen::Map<const MatrixXd> ma) {
                      visit_tensors(const_cast<const ModelParams&>(b),
                                    [&](const std::string& other,
                                        Eigen::Map<const MatrixXd> mb) {
                                        if (name == other)
                                            worst = std::max(
                                                worst, (ma - mb).cwiseAbs().maxCoeff());
                                    });
                  });
    return worst;
}

}  // namespace

TEST_CASE("metrics from a hand-built confusion matrix") {
    SUBCASE("binary TP=2 FP=1 FN=1 TN=2") {
        MatrixXd confusion(2, 2);
        confusion << 2, 1, 1, 2;
        const Metrics m = metrics_from_confusion(confusion);
        CHECK(m.accuracy == doctest::Approx(4.0 / 6.0));
        CHECK(m.macro_precision == doctest::Approx(2.0 / 3.0));
        CHECK(m.macro_recall == doctest::Approx(2.0 / 3.0));
        CHECK(m.macro_f1 == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("perfect predictor") {
        MatrixXd confusion = MatrixXd::Zero(3, 3);
        confusion.diagonal() << 5, 7, 9;
        const Metrics m = metrics_from_confusion(confusion);
        CHECK(m.accuracy == 1.0);
        CHECK(m.macro_f1 == 1.0);
    }
    SUBCASE("constant predictor on balanced classes") {
        MatrixXd confusion = MatrixXd::Zero(3, 3);
        confusion(0, 0) = confusion(1, 0) = confusion(2, 0) = 10.0;
        const Metrics m = metrics_from_confusion(confusion);
        CHECK(m.accuracy == doctest::Approx(1.0 / 3.0));
        // zero predicted support contributes zero precision
        CHECK(m.macro_precision == doctest::Approx((10.0 / 30.0) / 3.0));
    }
}

TEST_CASE("evaluate checks inputs") {
    ModelParams model = init_model(Arch::Lstm, 2, 3, 2, 7);
    CHECK_THROWS_AS(evaluate(model, {}), EmptyDataset);
}

TEST_CASE("evaluate a rigged constant predictor on balanced classes") {
    ModelParams model = init_model(Arch::Lstm, 2, 3, 3, 7);
    visit_tensors(model, [](const std::string&, Eigen::Map<MatrixXd> m) { m.setZero(); });
    model.output.b << 5.0, 0.0, 0.0;  // always predicts class 0

    std::vector<Sample> data;
    for (int cls = 0; cls < 3; ++cls)
        for (int i = 0; i < 4; ++i) data.push_back({MatrixXd::Constant(2, 2, 0.1 * i), cls});
    const Metrics m = evaluate(model, data);
    CHECK(m.accuracy == doctest::Approx(1.0 / 3.0));
    // confusion row sums equal class support
    for (int cls = 0; cls < 3; ++cls) CHECK(m.confusion.row(cls).sum() == 4.0);
}

TEST_CASE("stratified split") {
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) labels.push_back(i % 2);
    const SplitIndices s = stratified_split(labels, 0.8, 99);
    CHECK(s.train.size() == 40);
    CHECK(s.val.size() == 10);
    long train_ones = 0;
    for (std::size_t i : s.train) train_ones += labels[i];
    CHECK(train_ones == 20);

    // reproducible
    const SplitIndices again = stratified_split(labels, 0.8, 99);
    CHECK(again.train == s.train);
    CHECK(again.val == s.val);

    CHECK_THROWS_AS(stratified_split({0, 1}, 0.5, 1), InsufficientData);  // 1 per class is too few
}

TEST_CASE("linearly separable toy data reaches full validation accuracy") {
    TrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.01;
    cfg.dropout_rate = 0.2;
    cfg.hidden_size = 8;
    cfg.seed = 3;
    const TrainResult r = train(separable_toy(20, 4, 3), Arch::Lstm, cfg);
    CHECK(r.metrics.accuracy == 1.0);
    CHECK(r.metrics.history.size() == 10);
}

TEST_CASE("zero learning rate leaves parameters untouched and the loss flat") {
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.0;
    cfg.dropout_rate = 0.0;
    cfg.hidden_size = 4;
    cfg.seed = 11;
    const auto data = separable_toy(10, 3, 2);
    const TrainResult r = train(data, Arch::BiLstm, cfg);

    // the returned model equals a fresh init with the same derived seed
    const long d = data.front().x.cols();
    ModelParams fresh = init_model(Arch::BiLstm, static_cast<int>(d), 4, 2,
                                   derive_seed(cfg.seed, "model-init"));
    CHECK(max_param_diff(r.model, fresh) == 0.0);

    double lo = 1e300, hi = -1e300;
    for (const auto& e : r.metrics.history) {
        lo = std::min(lo, e.train_loss);
        hi = std::max(hi, e.train_loss);
    }
    CHECK(hi - lo < 1e-12);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.hidden_size = 6;
    cfg.seed = 21;
    const auto data = separable_toy(8, 3, 2);

    const TrainResult a = train(data, Arch::BiLstmAttWG, cfg);
    const TrainResult b = train(data, Arch::BiLstmAttWG, cfg);
    CHECK(max_param_diff(a.model, b.model) == 0.0);
    REQUIRE(a.metrics.history.size() == b.metrics.history.size());
    for (std::size_t i = 0; i < a.metrics.history.size(); ++i) {
        CHECK(a.metrics.history[i].train_loss == b.metrics.history[i].train_loss);
        CHECK(a.metrics.history[i].val_accuracy == b.metrics.history[i].val_accuracy);
    }

    cfg.seed = 22;
    const TrainResult c = train(data, Arch::BiLstmAttWG, cfg);
    CHECK(max_param_diff(a.model, c.model) > 0.0);
}

TEST_CASE("train validates its inputs") {
    TrainConfig cfg;
    cfg.epochs = 1;
    SUBCASE("empty dataset") { CHECK_THROWS_AS(train(std::vector<Sample>{}, Arch::Lstm, cfg),
                                               InsufficientData); }
    SUBCASE("single class") {
        std::vector<Sample> data;
        for (int i = 0; i < 4; ++i) data.push_back({MatrixXd::Zero(2, 2), 0});
        CHECK_THROWS_AS(train(data, Arch::Lstm, cfg), InsufficientData);
    }
    SUBCASE("class with one sample") {
        std::vector<Sample> data;
        for (int i = 0; i < 4; ++i) data.push_back({MatrixXd::Zero(2, 2), 0});
        data.push_back({MatrixXd::Zero(2, 2), 1});
        CHECK_THROWS_AS(train(data, Arch::Lstm, cfg), InsufficientData);
    }
    SUBCASE("bad config") {
        TrainConfig bad;
        bad.dropout_rate = 1.0;
        CHECK_THROWS_AS(train(separable_toy(4, 2, 2), Arch::Lstm, bad), InvalidConfig);
    }
}

TEST_CASE("feature sequences convert to samples") {
    features::FeatureSequence fs;
    fs.steps = 2;
    fs.channels = 2;
    fs.bands = 2;
    fs.rate = 1.0;
    fs.class_label = 1;
    fs.values = {1, 2, 3, 4, 5, 6, 7, 8};
    const Sample s = to_sample(fs);
    CHECK(s.label == 1);
    REQUIRE(s.x.rows() == 2);
    REQUIRE(s.x.cols() == 4);
    CHECK(s.x(0, 0) == 1.0);  // (t=0, channel 0, band 0)
    CHECK(s.x(1, 3) == 8.0);  // (t=1, channel 1, band 1)

    features::FeatureSequence unlabeled = fs;
    unlabeled.class_label.reset();
    CHECK_THROWS_AS(to_sample(unlabeled), InvalidConfig);
}
