// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/nn/model.hpp"

#include <cmath>

namespace eegpipe::nn {

std::string arch_name(Arch a) {
    switch (a) {
        case Arch::Lstm: return "lstm";
        case Arch::BiLstm: return "bilstm";
        case Arch::BiLstmAttW: return "bilstm-attw";
        case Arch::BiLstmAttG: return "bilstm-attg";
        case Arch::BiLstmAttWG: return "bilstm-attwg";
    }
    throw InvalidConfig("unknown architecture enum");
}

Arch parse_arch(const std::string& name) {
    if (name == "lstm") return Arch::Lstm;
    if (name == "bilstm") return Arch::BiLstm;
    if (name == "bilstm-attw") return Arch::BiLstmAttW;
    if (name == "bilstm-attg") return Arch::BiLstmAttG;
    if (name == "bilstm-attwg") return Arch::BiLstmAttWG;
    throw InvalidConfig("unknown architecture '" + name +
                        "' (expected lstm|bilstm|bilstm-attw|bilstm-attg|bilstm-attwg)");
}

namespace {

void fill_uniform(Eigen::MatrixXd& m, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (long c = 0; c < m.cols(); ++c)
        for (long r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
}

void fill_uniform(Eigen::VectorXd& v, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (long i = 0; i < v.size(); ++i) v[i] = u(rng);
}

LstmCellParams init_cell(bool attention_forget, int input, int hidden, std::mt19937_64& rng) {
    LstmCellParams c;
    c.attention_forget = attention_forget;
    const double wb = 1.0 / std::sqrt(static_cast<double>(input));
    const double ub = 1.0 / std::sqrt(static_cast<double>(hidden));

    auto gate = [&](Eigen::MatrixXd& W, Eigen::MatrixXd& U, Eigen::VectorXd& b) {
        W.resize(hidden, input);
        U.resize(hidden, hidden);
        b = Eigen::VectorXd::Zero(hidden);
        fill_uniform(W, wb, rng);
        fill_uniform(U, ub, rng);
    };

    gate(c.W_i, c.U_i, c.b_i);
    if (attention_forget) {
        c.v_f.resize(hidden);
        c.w_f.resize(hidden);
        fill_uniform(c.v_f, 0.1, rng);
        fill_uniform(c.w_f, 0.1, rng);
    } else {
        gate(c.W_f, c.U_f, c.b_f);
        c.b_f.setOnes();  // keep early memory open
    }
    gate(c.W_o, c.U_o, c.b_o);
    gate(c.W_c, c.U_c, c.b_c);
    return c;
}

DenseParams init_dense(int out, int in, std::mt19937_64& rng) {
    DenseParams d;
    d.W.resize(out, in);
    d.b = Eigen::VectorXd::Zero(out);
    fill_uniform(d.W, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    return d;
}

}  // namespace

ModelParams init_model(Arch arch, int input_dim, int hidden, int classes, std::uint64_t seed) {
    if (input_dim < 1 || hidden < 1 || classes < 2)
        throw InvalidConfig("model needs input_dim >= 1, hidden >= 1, classes >= 2");
    std::mt19937_64 rng(derive_seed(seed, "init"));

    ModelParams p;
    p.arch = arch;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.classes = classes;

    const bool attg = has_attention_gate(arch);
    p.fwd = init_cell(attg, input_dim, hidden, rng);
    if (is_bidirectional(arch)) p.bwd = init_cell(attg, input_dim, hidden, rng);

    const int pooled = p.pooled_dim();
    if (has_attention_pool(arch)) {
        // attention dimension equals the hidden size
        p.pool.W_a.resize(hidden, pooled);
        p.pool.b_a = Eigen::VectorXd::Zero(hidden);
        p.pool.u.resize(hidden);
        fill_uniform(p.pool.W_a, 1.0 / std::sqrt(static_cast<double>(pooled)), rng);
        fill_uniform(p.pool.u, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    }

    p.dense1 = init_dense(ModelParams::kDenseUnits, pooled, rng);
    p.dense2 = init_dense(ModelParams::kDenseUnits, ModelParams::kDenseUnits, rng);
    p.output = init_dense(classes, ModelParams::kDenseUnits, rng);
    return p;
}

ModelParams zeros_like(const ModelParams& like) {
    ModelParams z = like;
    visit_tensors(z, [](const std::string&, Eigen::Map<Eigen::MatrixXd> m) { m.setZero(); });
    return z;
}

long param_count(const ModelParams& p) {
    long n = 0;
    visit_tensors(p, [&n](const std::string&, Eigen::Map<const Eigen::MatrixXd> m) {
        n += m.size();
    });
    return n;
}

long forget_gate_param_count(bool attention, long hidden, long input) {
    return attention ? 2 * hidden : hidden * input + hidden * hidden + hidden;
}

}  // namespace eegpipe::nn
