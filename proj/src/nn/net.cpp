// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/nn/net.hpp"

#include <cmath>

#include "eegpipe/common/parallel.hpp"

namespace eegpipe::nn {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline VectorXd sigmoid(const VectorXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

void check_cell_dims(const LstmCellParams& cell, long x_size, long h_size, long c_size) {
    if (cell.W_i.cols() != x_size)
        throw DimensionMismatch("cell expects input dim " + std::to_string(cell.W_i.cols()) +
                                ", got " + std::to_string(x_size));
    if (cell.hidden() != h_size || cell.hidden() != c_size)
        throw DimensionMismatch("cell state dim mismatch: hidden " +
                                std::to_string(cell.hidden()) + ", h " + std::to_string(h_size) +
                                ", c " + std::to_string(c_size));
}

// One gate-by-gate step from explicit previous state.
struct CellStep {
    VectorXd i, f, o, g, c, h, f_pre;
};

CellStep cell_step(const LstmCellParams& cell, const VectorXd& x, const VectorXd& h_prev,
                   const VectorXd& c_prev) {
    CellStep s;
    s.i = sigmoid(cell.W_i * x + cell.U_i * h_prev + cell.b_i);
    if (cell.attention_forget) {
        s.f_pre = (cell.w_f.array() * c_prev.array()).tanh().matrix();
        s.f = sigmoid((cell.v_f.array() * s.f_pre.array()).matrix());
    } else {
        s.f = sigmoid(cell.W_f * x + cell.U_f * h_prev + cell.b_f);
    }
    s.o = sigmoid(cell.W_o * x + cell.U_o * h_prev + cell.b_o);
    s.g = (cell.W_c * x + cell.U_c * h_prev + cell.b_c).array().tanh().matrix();
    s.c = (s.f.array() * c_prev.array() + s.i.array() * s.g.array()).matrix();
    s.h = (s.o.array() * s.c.array().tanh()).matrix();
    return s;
}

// Per-direction forward state kept for backpropagation; all H x T.
struct DirCache {
    MatrixXd i, f, o, g, c, tanh_c, h, c_prev;
    MatrixXd f_pre;  // tanh(w_f (*) c_prev), attention gate only
};

DirCache run_direction(const LstmCellParams& cell, const MatrixXd& x_cols /* D x T */) {
    const long H = cell.hidden();
    const long T = x_cols.cols();
    check_cell_dims(cell, x_cols.rows(), H, H);

    DirCache cc;
    for (MatrixXd* m : {&cc.i, &cc.f, &cc.o, &cc.g, &cc.c, &cc.tanh_c, &cc.h, &cc.c_prev})
        m->resize(H, T);
    if (cell.attention_forget) cc.f_pre.resize(H, T);

    VectorXd h_prev = VectorXd::Zero(H);
    VectorXd c_prev = VectorXd::Zero(H);
    for (long t = 0; t < T; ++t) {
        const CellStep s = cell_step(cell, x_cols.col(t), h_prev, c_prev);
        cc.c_prev.col(t) = c_prev;
        cc.i.col(t) = s.i;
        cc.f.col(t) = s.f;
        cc.o.col(t) = s.o;
        cc.g.col(t) = s.g;
        cc.c.col(t) = s.c;
        cc.tanh_c.col(t) = s.c.array().tanh().matrix();
        cc.h.col(t) = s.h;
        if (cell.attention_forget) cc.f_pre.col(t) = s.f_pre;
        h_prev = s.h;
        c_prev = s.c;
    }
    return cc;
}

// BPTT over one direction. dh_out is H x T in the direction's processing
// order; gradients accumulate into g.
void backward_direction(const LstmCellParams& cell, const MatrixXd& x_cols, const DirCache& cc,
                        const MatrixXd& dh_out, LstmCellParams& g) {
    const long T = x_cols.cols();
    const long H = cell.hidden();

    VectorXd dh_next = VectorXd::Zero(H);
    VectorXd dc_next = VectorXd::Zero(H);
    for (long t = T - 1; t >= 0; --t) {
        const VectorXd x = x_cols.col(t);
        const VectorXd h_prev = (t > 0) ? VectorXd(cc.h.col(t - 1)) : VectorXd::Zero(H);
        const Eigen::ArrayXd i = cc.i.col(t).array();
        const Eigen::ArrayXd f = cc.f.col(t).array();
        const Eigen::ArrayXd o = cc.o.col(t).array();
        const Eigen::ArrayXd gt = cc.g.col(t).array();
        const Eigen::ArrayXd tc = cc.tanh_c.col(t).array();
        const Eigen::ArrayXd cp = cc.c_prev.col(t).array();

        const Eigen::ArrayXd dh = dh_out.col(t).array() + dh_next.array();
        const Eigen::ArrayXd do_ = dh * tc;
        const Eigen::ArrayXd dc = dc_next.array() + dh * o * (1.0 - tc * tc);
        const Eigen::ArrayXd di = dc * gt;
        const Eigen::ArrayXd dg = dc * i;
        const Eigen::ArrayXd df = dc * cp;

        const VectorXd dzi = (di * i * (1.0 - i)).matrix();
        const VectorXd dzo = (do_ * o * (1.0 - o)).matrix();
        const VectorXd dzg = (dg * (1.0 - gt * gt)).matrix();

        VectorXd dc_prev = (dc * f).matrix();
        VectorXd dh_prev = cell.U_i.transpose() * dzi + cell.U_o.transpose() * dzo +
                           cell.U_c.transpose() * dzg;

        if (cell.attention_forget) {
            // f = sigmoid(v_f (*) tanh(w_f (*) c_prev))
            const Eigen::ArrayXd pre = cc.f_pre.col(t).array();
            const Eigen::ArrayXd da = df * f * (1.0 - f);
            const Eigen::ArrayXd dpre = da * cell.v_f.array() * (1.0 - pre * pre);
            g.v_f.array() += da * pre;
            g.w_f.array() += dpre * cp;
            dc_prev.array() += dpre * cell.w_f.array();
        } else {
            const VectorXd dzf = (df * f * (1.0 - f)).matrix();
            g.W_f += dzf * x.transpose();
            g.U_f += dzf * h_prev.transpose();
            g.b_f += dzf;
            dh_prev += cell.U_f.transpose() * dzf;
        }

        g.W_i += dzi * x.transpose();
        g.U_i += dzi * h_prev.transpose();
        g.b_i += dzi;
        g.W_o += dzo * x.transpose();
        g.U_o += dzo * h_prev.transpose();
        g.b_o += dzo;
        g.W_c += dzg * x.transpose();
        g.U_c += dzg * h_prev.transpose();
        g.b_c += dzg;

        dh_next = dh_prev;
        dc_next = dc_prev;
    }
}

struct PoolCache {
    MatrixXd z, tanh_z;        // A x T
    VectorXd scores, weights;  // T
};

struct HeadCache {
    VectorXd z1, d1, z2, d2;  // d* are the post-ReLU, post-dropout activations
    VectorXd mask1, mask2;
    VectorXd logits, probs;
};

VectorXd dropout_mask(long n, double rate, bool train_mode, std::mt19937_64& rng) {
    if (!train_mode || rate <= 0.0) return VectorXd::Ones(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep = 1.0 - rate;
    VectorXd mask(n);
    for (long i = 0; i < n; ++i) mask[i] = (u(rng) < keep) ? 1.0 / keep : 0.0;
    return mask;
}

HeadCache head_forward_cached(const ModelParams& model, const VectorXd& context,
                              bool train_mode, double dropout_rate, std::mt19937_64& rng) {
    if (context.size() != model.dense1.W.cols())
        throw DimensionMismatch("head expects context dim " +
                                std::to_string(model.dense1.W.cols()) + ", got " +
                                std::to_string(context.size()));
    HeadCache hc;
    hc.z1 = model.dense1.W * context + model.dense1.b;
    hc.mask1 = dropout_mask(hc.z1.size(), dropout_rate, train_mode, rng);
    hc.d1 = hc.z1.cwiseMax(0.0).cwiseProduct(hc.mask1);
    hc.z2 = model.dense2.W * hc.d1 + model.dense2.b;
    hc.mask2 = dropout_mask(hc.z2.size(), dropout_rate, train_mode, rng);
    hc.d2 = hc.z2.cwiseMax(0.0).cwiseProduct(hc.mask2);
    hc.logits = model.output.W * hc.d2 + model.output.b;
    hc.probs = softmax(hc.logits);
    return hc;
}

// Returns dcontext; accumulates head gradients.
VectorXd head_backward(const ModelParams& model, const VectorXd& context, const HeadCache& hc,
                       const VectorXd& dlogits, ModelParams& g) {
    g.output.W += dlogits * hc.d2.transpose();
    g.output.b += dlogits;
    const VectorXd dd2 = model.output.W.transpose() * dlogits;
    const VectorXd dz2 =
        (dd2.array() * hc.mask2.array() * (hc.z2.array() > 0.0).cast<double>()).matrix();
    g.dense2.W += dz2 * hc.d1.transpose();
    g.dense2.b += dz2;
    const VectorXd dd1 = model.dense2.W.transpose() * dz2;
    const VectorXd dz1 =
        (dd1.array() * hc.mask1.array() * (hc.z1.array() > 0.0).cast<double>()).matrix();
    g.dense1.W += dz1 * context.transpose();
    g.dense1.b += dz1;
    return model.dense1.W.transpose() * dz1;
}

PoolCache attention_pool_cached(const AttentionPoolParams& pool, const MatrixXd& hiddens) {
    if (hiddens.rows() < 1) throw EmptySequence("attention pooling needs at least one step");
    if (pool.W_a.cols() != hiddens.cols())
        throw DimensionMismatch("pool expects input dim " + std::to_string(pool.W_a.cols()) +
                                ", got " + std::to_string(hiddens.cols()));
    PoolCache pc;
    pc.z = (pool.W_a * hiddens.transpose()).colwise() + pool.b_a;
    pc.tanh_z = pc.z.array().tanh().matrix();
    pc.scores = pc.tanh_z.transpose() * pool.u;
    pc.weights = softmax(pc.scores);
    return pc;
}

// Returns dhiddens; accumulates pool gradients.
MatrixXd attention_pool_backward(const AttentionPoolParams& pool, const MatrixXd& hiddens,
                                 const PoolCache& pc, const VectorXd& dcontext,
                                 AttentionPoolParams& g) {
    const VectorXd dweights = hiddens * dcontext;           // T
    MatrixXd dhiddens = pc.weights * dcontext.transpose();  // T x P
    const double mixed = pc.weights.dot(dweights);
    const VectorXd dscores = (pc.weights.array() * (dweights.array() - mixed)).matrix();
    g.u += pc.tanh_z * dscores;
    const MatrixXd dz =
        ((pool.u * dscores.transpose()).array() * (1.0 - pc.tanh_z.array().square())).matrix();
    g.W_a += dz * hiddens;
    g.b_a += dz.rowwise().sum();
    dhiddens += dz.transpose() * pool.W_a;
    return dhiddens;
}

struct SampleForward {
    DirCache fwd, bwd;
    MatrixXd hiddens;  // T x P
    PoolCache pool;
    bool pooled_by_attention = false;
    VectorXd context;
    HeadCache head;
};

SampleForward forward_sample(const ModelParams& model, const Eigen::MatrixXd& x /* T x D */,
                             bool train_mode, double dropout_rate, std::mt19937_64& rng) {
    if (x.rows() < 1) throw EmptySequence("empty input sequence");
    if (x.cols() != model.input_dim)
        throw DimensionMismatch("expected input dim " + std::to_string(model.input_dim) +
                                ", got " + std::to_string(x.cols()));
    const long T = x.rows();
    const long H = model.hidden;

    SampleForward sf;
    const MatrixXd x_cols = x.transpose();  // D x T
    sf.fwd = run_direction(model.fwd, x_cols);
    if (is_bidirectional(model.arch)) {
        sf.bwd = run_direction(model.bwd, MatrixXd(x_cols.rowwise().reverse()));
        sf.hiddens.resize(T, 2 * H);
        for (long t = 0; t < T; ++t) {
            sf.hiddens.row(t).head(H) = sf.fwd.h.col(t).transpose();
            sf.hiddens.row(t).tail(H) = sf.bwd.h.col(T - 1 - t).transpose();
        }
    } else {
        sf.hiddens = sf.fwd.h.transpose();
    }

    if (has_attention_pool(model.arch)) {
        sf.pool = attention_pool_cached(model.pool, sf.hiddens);
        sf.pooled_by_attention = true;
        sf.context = sf.hiddens.transpose() * sf.pool.weights;
    } else {
        sf.context = sf.hiddens.colwise().mean().transpose();
    }
    sf.head = head_forward_cached(model, sf.context, train_mode, dropout_rate, rng);
    return sf;
}

double cross_entropy(const VectorXd& logits, int label) {
    const double m = logits.maxCoeff();
    const double lse = m + std::log((logits.array() - m).exp().sum());
    return lse - logits[label];
}

void backward_sample(const ModelParams& model, const Eigen::MatrixXd& x, const SampleForward& sf,
                     int label, double scale, ModelParams& g) {
    VectorXd dlogits = sf.head.probs;
    dlogits[label] -= 1.0;
    dlogits *= scale;

    const VectorXd dcontext = head_backward(model, sf.context, sf.head, dlogits, g);

    const long T = x.rows();
    const long H = model.hidden;
    MatrixXd dhiddens;
    if (sf.pooled_by_attention) {
        dhiddens = attention_pool_backward(model.pool, sf.hiddens, sf.pool, dcontext, g.pool);
    } else {
        dhiddens = VectorXd::Ones(T) * (dcontext.transpose() / static_cast<double>(T));
    }

    const MatrixXd x_cols = x.transpose();
    if (is_bidirectional(model.arch)) {
        MatrixXd dh_fwd(H, T), dh_bwd(H, T);
        for (long t = 0; t < T; ++t) {
            dh_fwd.col(t) = dhiddens.row(t).head(H).transpose();
            dh_bwd.col(T - 1 - t) = dhiddens.row(t).tail(H).transpose();
        }
        backward_direction(model.fwd, x_cols, sf.fwd, dh_fwd, g.fwd);
        backward_direction(model.bwd, MatrixXd(x_cols.rowwise().reverse()), sf.bwd, dh_bwd,
                           g.bwd);
    } else {
        backward_direction(model.fwd, x_cols, sf.fwd, MatrixXd(dhiddens.transpose()), g.fwd);
    }
}

void check_labels(const ModelParams& model, const std::vector<Sample>& batch) {
    if (batch.empty()) throw EmptyDataset("empty batch");
    for (const Sample& s : batch)
        if (s.label < 0 || s.label >= model.classes)
            throw InvalidConfig("label " + std::to_string(s.label) + " outside [0, " +
                                std::to_string(model.classes) + ")");
}

void add_grads(ModelParams& dst, const ModelParams& src) {
    std::vector<Eigen::Map<MatrixXd>> dst_maps;
    visit_tensors(dst, [&dst_maps](const std::string&, Eigen::Map<MatrixXd> m) {
        dst_maps.push_back(m);
    });
    std::size_t k = 0;
    visit_tensors(src, [&](const std::string&, Eigen::Map<const MatrixXd> m) {
        dst_maps[k++] += m;
    });
}

}  // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::ArrayXd e = (logits.array() - m).exp();
    return (e / e.sum()).matrix();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_forward(const LstmCellParams& cell,
                                                              const Eigen::VectorXd& x_t,
                                                              const Eigen::VectorXd& h_prev,
                                                              const Eigen::VectorXd& c_prev) {
    check_cell_dims(cell, x_t.size(), h_prev.size(), c_prev.size());
    const CellStep s = cell_step(cell, x_t, h_prev, c_prev);
    return {s.h, s.c};
}

Eigen::MatrixXd lstm_forward(const LstmCellParams& cell, const Eigen::MatrixXd& sequence) {
    if (sequence.rows() < 1) throw EmptySequence("empty input sequence");
    return run_direction(cell, MatrixXd(sequence.transpose())).h.transpose();
}

Eigen::MatrixXd bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                               const Eigen::MatrixXd& sequence) {
    if (sequence.rows() < 1) throw EmptySequence("empty input sequence");
    const long T = sequence.rows();
    const long H = fwd.hidden();
    if (bwd.hidden() != H) throw DimensionMismatch("direction hidden sizes differ");
    const MatrixXd x_cols = sequence.transpose();
    const DirCache f = run_direction(fwd, x_cols);
    const DirCache b = run_direction(bwd, MatrixXd(x_cols.rowwise().reverse()));
    MatrixXd out(T, 2 * H);
    for (long t = 0; t < T; ++t) {
        out.row(t).head(H) = f.h.col(t).transpose();
        out.row(t).tail(H) = b.h.col(T - 1 - t).transpose();
    }
    return out;
}

PoolResult attention_pool(const AttentionPoolParams& pool, const Eigen::MatrixXd& hiddens) {
    PoolCache pc = attention_pool_cached(pool, hiddens);
    return {hiddens.transpose() * pc.weights, pc.weights};
}

Eigen::VectorXd head_forward(const ModelParams& model, const Eigen::VectorXd& context,
                             bool train_mode, double dropout_rate, std::mt19937_64& rng) {
    return head_forward_cached(model, context, train_mode, dropout_rate, rng).probs;
}

Eigen::VectorXd predict_probabilities(const ModelParams& model,
                                      const Eigen::MatrixXd& sequence) {
    std::mt19937_64 rng(0);
    return forward_sample(model, sequence, false, 0.0, rng).head.probs;
}

GradResult compute_gradients(const ModelParams& model, const std::vector<Sample>& batch,
                             const GradOptions& opts) {
    check_labels(model, batch);
    const double scale = 1.0 / static_cast<double>(batch.size());

    const auto chunks = chunk_ranges(batch.size(), opts.threads);
    std::vector<ModelParams> partial_grads;
    std::vector<double> partial_loss(chunks.size(), 0.0);
    partial_grads.reserve(chunks.size());
    for (std::size_t k = 0; k < chunks.size(); ++k) partial_grads.push_back(zeros_like(model));

    parallel_for(chunks.size(), static_cast<int>(chunks.size()), [&](std::size_t k) {
        for (std::size_t s = chunks[k].first; s < chunks[k].second; ++s) {
            std::mt19937_64 rng(derive_seed(opts.dropout_seed, "dropout", s));
            const SampleForward sf =
                forward_sample(model, batch[s].x, opts.train_mode, opts.dropout_rate, rng);
            partial_loss[k] += cross_entropy(sf.head.logits, batch[s].label) * scale;
            backward_sample(model, batch[s].x, sf, batch[s].label, scale, partial_grads[k]);
        }
    });

    GradResult result;
    result.grads = std::move(partial_grads[0]);
    result.loss = partial_loss[0];
    for (std::size_t k = 1; k < chunks.size(); ++k) {
        result.loss += partial_loss[k];
        add_grads(result.grads, partial_grads[k]);
    }
    return result;
}

double compute_loss(const ModelParams& model, const std::vector<Sample>& batch,
                    const GradOptions& opts) {
    check_labels(model, batch);
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        std::mt19937_64 rng(derive_seed(opts.dropout_seed, "dropout", s));
        const SampleForward sf =
            forward_sample(model, batch[s].x, opts.train_mode, opts.dropout_rate, rng);
        loss += cross_entropy(sf.head.logits, batch[s].label) * scale;
    }
    return loss;
}

}  // namespace eegpipe::nn
