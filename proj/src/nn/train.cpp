// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/nn/train.hpp"

#include <algorithm>
#include <map>

#include "eegpipe/nn/adam.hpp"

namespace eegpipe::nn {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0)) throw InvalidConfig("learning rate must be >= 0");
    if (batch_size < 1) throw InvalidConfig("batch size must be >= 1");
    if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
        throw InvalidConfig("dropout rate must lie in [0, 1)");
    if (!(split > 0.0 && split < 1.0)) throw InvalidConfig("split fraction must lie in (0, 1)");
    if (hidden_size < 1) throw InvalidConfig("hidden size must be >= 1");
    if (threads < 1) throw InvalidConfig("threads must be >= 1");
}

Sample to_sample(const features::FeatureSequence& fs) {
    if (!fs.class_label) throw InvalidConfig("feature sequence has no class label");
    for (double v : fs.values)
        if (!std::isfinite(v)) throw InvalidConfig("non-finite feature value");
    return Sample{fs.as_matrix(), *fs.class_label};
}

std::vector<Sample> to_samples(const std::vector<features::FeatureSequence>& dataset) {
    std::vector<Sample> out;
    out.reserve(dataset.size());
    for (const auto& fs : dataset) out.push_back(to_sample(fs));
    return out;
}

Metrics metrics_from_confusion(const Eigen::MatrixXd& confusion) {
    const long n_classes = confusion.rows();
    const double total = confusion.sum();
    if (!(total > 0.0)) throw EmptyDataset("empty confusion matrix");

    Metrics m;
    m.confusion = confusion;
    m.accuracy = confusion.trace() / total;
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    for (long c = 0; c < n_classes; ++c) {
        const double tp = confusion(c, c);
        const double predicted = confusion.col(c).sum();
        const double support = confusion.row(c).sum();
        const double precision = predicted > 0.0 ? tp / predicted : 0.0;
        const double recall = support > 0.0 ? tp / support : 0.0;
        const double f1 =
            (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        psum += precision;
        rsum += recall;
        fsum += f1;
    }
    m.macro_precision = psum / static_cast<double>(n_classes);
    m.macro_recall = rsum / static_cast<double>(n_classes);
    m.macro_f1 = fsum / static_cast<double>(n_classes);
    return m;
}

Metrics evaluate(const ModelParams& model, const std::vector<Sample>& dataset) {
    if (dataset.empty()) throw EmptyDataset("nothing to evaluate");
    Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(model.classes, model.classes);
    for (const Sample& s : dataset) {
        if (s.label < 0 || s.label >= model.classes)
            throw InvalidConfig("label " + std::to_string(s.label) + " outside model classes");
        Eigen::Index predicted;
        predict_probabilities(model, s.x).maxCoeff(&predicted);
        confusion(s.label, predicted) += 1.0;
    }
    return metrics_from_confusion(confusion);
}

namespace {

double mean_eval_loss(const ModelParams& model, const std::vector<Sample>& dataset) {
    GradOptions opts;
    opts.train_mode = false;
    return compute_loss(model, dataset, opts);
}

}  // namespace

SplitIndices stratified_split(const std::vector<int>& labels, double split_fraction,
                              std::uint64_t seed) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw InvalidConfig("split fraction must lie in (0, 1)");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::mt19937_64 rng(derive_seed(seed, "train-split"));
    SplitIndices out;
    for (auto& [label, members] : by_class) {
        if (members.size() < 2)
            throw InsufficientData("class " + std::to_string(label) +
                                   " has fewer than 2 samples");
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t n_train = static_cast<std::size_t>(
            std::lround(split_fraction * static_cast<double>(members.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, members.size() - 1);
        for (std::size_t m = 0; m < members.size(); ++m)
            (m < n_train ? out.train : out.val).push_back(members[m]);
    }
    std::shuffle(out.train.begin(), out.train.end(), rng);
    return out;
}

TrainResult train(const std::vector<Sample>& dataset, Arch arch, const TrainConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw InsufficientData("empty dataset");

    std::vector<int> labels;
    int max_label = 0;
    std::map<int, long> class_counts;
    for (const Sample& s : dataset) {
        if (s.label < 0) throw InvalidConfig("negative class label");
        labels.push_back(s.label);
        ++class_counts[s.label];
        max_label = std::max(max_label, s.label);
    }
    const int classes = max_label + 1;
    if (class_counts.size() < 2) throw InsufficientData("need at least 2 classes");

    const long T = dataset.front().x.rows();
    const long D = dataset.front().x.cols();
    for (const Sample& s : dataset)
        if (s.x.cols() != D || s.x.rows() != T)
            throw DimensionMismatch("samples differ in shape");

    SplitIndices split = stratified_split(labels, cfg.split, cfg.seed);
    std::vector<std::size_t>& train_idx = split.train;
    const std::vector<std::size_t>& val_idx = split.val;

    std::vector<Sample> val_set;
    val_set.reserve(val_idx.size());
    for (std::size_t i : val_idx) val_set.push_back(dataset[i]);

    ModelParams params = init_model(arch, static_cast<int>(D), cfg.hidden_size, classes,
                                    derive_seed(cfg.seed, "model-init"));
    AdamState adam(params);
    long step = 0;

    TrainResult result;
    result.model = params;
    double best_acc = -1.0, best_loss = 0.0;

    std::mt19937_64 epoch_rng(derive_seed(cfg.seed, "epoch-shuffle"));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), epoch_rng);

        double epoch_loss = 0.0;
        std::size_t done = 0;
        long batch_no = 0;
        while (done < train_idx.size()) {
            const std::size_t take =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                      train_idx.size() - done);
            std::vector<Sample> batch;
            batch.reserve(take);
            for (std::size_t m = 0; m < take; ++m) batch.push_back(dataset[train_idx[done + m]]);
            done += take;

            GradOptions opts;
            opts.dropout_rate = cfg.dropout_rate;
            opts.train_mode = true;
            opts.dropout_seed = derive_seed(cfg.seed, "dropout-batch",
                                            (static_cast<std::uint64_t>(epoch) << 20) ^
                                                static_cast<std::uint64_t>(batch_no));
            opts.threads = cfg.threads;
            GradResult gr = compute_gradients(params, batch, opts);
            clip_global_norm(gr.grads, cfg.clip_norm);
            adam_step(params, gr.grads, adam, ++step, cfg.learning_rate);

            epoch_loss += gr.loss * static_cast<double>(take);
            ++batch_no;
        }
        epoch_loss /= static_cast<double>(train_idx.size());

        const Metrics val_metrics = evaluate(params, val_set);
        const double val_loss = mean_eval_loss(params, val_set);
        result.metrics.history.push_back({epoch, epoch_loss, val_loss, val_metrics.accuracy});

        if (val_metrics.accuracy > best_acc ||
            (val_metrics.accuracy == best_acc && val_loss < best_loss)) {
            best_acc = val_metrics.accuracy;
            best_loss = val_loss;
            result.model = params;
            result.best_epoch = epoch;
        }
    }

    const Metrics best_metrics = evaluate(result.model, val_set);
    const auto history = std::move(result.metrics.history);
    result.metrics = best_metrics;
    result.metrics.history = history;
    return result;
}

TrainResult train(const std::vector<features::FeatureSequence>& dataset, Arch arch,
                  const TrainConfig& cfg) {
    return train(to_samples(dataset), arch, cfg);
}

}  // namespace eegpipe::nn
