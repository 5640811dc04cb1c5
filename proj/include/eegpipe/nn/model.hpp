// SPDX-License-Identifier: Apache-2.0
//
// Parameter containers for the sequence classifier. Five architectures:
//
//   lstm          unidirectional, standard cells, mean pooling
//   bilstm        bidirectional, standard cells, mean pooling
//   bilstm-attw   bidirectional, standard cells, attention pooling
//   bilstm-attg   bidirectional, attention-gated cells, mean pooling
//   bilstm-attwg  bidirectional, attention-gated cells, attention pooling
//
// The attention-gated cell replaces the forget gate's (W_f, U_f, b_f) with
// two per-unit vectors (v_f, w_f), computing
//   f_t = sigmoid(v_f (*) tanh(w_f (*) c_{t-1}))
// elementwise, which shrinks that gate from H*D + H^2 + H parameters to 2H.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <type_traits>

#include "eegpipe/common/errors.hpp"
#include "eegpipe/common/rng.hpp"

namespace eegpipe::nn {

enum class Arch { Lstm, BiLstm, BiLstmAttW, BiLstmAttG, BiLstmAttWG };

inline bool is_bidirectional(Arch a) { return a != Arch::Lstm; }
inline bool has_attention_gate(Arch a) {
    return a == Arch::BiLstmAttG || a == Arch::BiLstmAttWG;
}
inline bool has_attention_pool(Arch a) {
    return a == Arch::BiLstmAttW || a == Arch::BiLstmAttWG;
}

std::string arch_name(Arch a);
Arch parse_arch(const std::string& name);  // throws InvalidConfig

struct LstmCellParams {
    bool attention_forget = false;
    // input weights (hidden x input), recurrent weights (hidden x hidden)
    Eigen::MatrixXd W_i, U_i, W_f, U_f, W_o, U_o, W_c, U_c;
    Eigen::VectorXd b_i, b_f, b_o, b_c;
    // attention forget gate, per-unit (hidden); empty unless attention_forget
    Eigen::VectorXd v_f, w_f;

    long hidden() const { return W_i.rows(); }
    long input() const { return W_i.cols(); }
};

struct AttentionPoolParams {
    Eigen::MatrixXd W_a;  // attn dim x pooled input dim
    Eigen::VectorXd b_a;  // attn dim
    Eigen::VectorXd u;    // attn dim
};

struct DenseParams {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;  // out
};

struct ModelParams {
    static constexpr int kDenseUnits = 64;

    Arch arch = Arch::BiLstmAttWG;
    int input_dim = 0;
    int hidden = 0;
    int classes = 0;

    LstmCellParams fwd, bwd;   // bwd unused for the unidirectional arch
    AttentionPoolParams pool;  // unused without attention pooling
    DenseParams dense1, dense2, output;

    int pooled_dim() const { return is_bidirectional(arch) ? 2 * hidden : hidden; }
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight matrices, zero biases
// with the standard cell's forget bias at +1, and uniform(-0.1, 0.1) for
// the attention-gate vectors.
ModelParams init_model(Arch arch, int input_dim, int hidden, int classes,
                       std::uint64_t seed);

// Same shapes as `like`, all values zero. Used for gradients and Adam state.
ModelParams zeros_like(const ModelParams& like);

long param_count(const ModelParams& p);
long forget_gate_param_count(bool attention, long hidden, long input);

// Calls f(name, Eigen::Map<[const ]MatrixXd>) for every active tensor, in a
// fixed order shared by the optimizer, the checkpoint format and the tests.
template <typename Params, typename F>
void visit_tensors(Params& p, F&& f) {
    using Mat = std::conditional_t<std::is_const_v<Params>, const Eigen::MatrixXd,
                                   Eigen::MatrixXd>;
    using Map = Eigen::Map<Mat>;
    auto mat = [&f](const std::string& name, auto& m) {
        f(name, Map(m.data(), m.rows(), m.cols()));
    };
    auto vec = [&f](const std::string& name, auto& v) { f(name, Map(v.data(), v.size(), 1)); };

    auto cell = [&](const std::string& prefix, auto& c) {
        mat(prefix + ".W_i", c.W_i);
        mat(prefix + ".U_i", c.U_i);
        vec(prefix + ".b_i", c.b_i);
        if (c.attention_forget) {
            vec(prefix + ".v_f", c.v_f);
            vec(prefix + ".w_f", c.w_f);
        } else {
            mat(prefix + ".W_f", c.W_f);
            mat(prefix + ".U_f", c.U_f);
            vec(prefix + ".b_f", c.b_f);
        }
        mat(prefix + ".W_o", c.W_o);
        mat(prefix + ".U_o", c.U_o);
        vec(prefix + ".b_o", c.b_o);
        mat(prefix + ".W_c", c.W_c);
        mat(prefix + ".U_c", c.U_c);
        vec(prefix + ".b_c", c.b_c);
    };

    cell("fwd", p.fwd);
    if (is_bidirectional(p.arch)) cell("bwd", p.bwd);
    if (has_attention_pool(p.arch)) {
        mat("pool.W_a", p.pool.W_a);
        vec("pool.b_a", p.pool.b_a);
        vec("pool.u", p.pool.u);
    }
    mat("dense1.W", p.dense1.W);
    vec("dense1.b", p.dense1.b);
    mat("dense2.W", p.dense2.W);
    vec("dense2.b", p.dense2.b);
    mat("output.W", p.output.W);
    vec("output.b", p.output.b);
}

}  // namespace eegpipe::nn
