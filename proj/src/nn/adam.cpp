// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/nn/adam.hpp"

#include <cmath>
#include <vector>

namespace eegpipe::nn {

namespace {

std::vector<Eigen::Map<Eigen::MatrixXd>> tensor_maps(ModelParams& p) {
    std::vector<Eigen::Map<Eigen::MatrixXd>> maps;
    visit_tensors(p, [&maps](const std::string&, Eigen::Map<Eigen::MatrixXd> m) {
        maps.push_back(m);
    });
    return maps;
}

std::vector<Eigen::Map<const Eigen::MatrixXd>> tensor_maps(const ModelParams& p) {
    std::vector<Eigen::Map<const Eigen::MatrixXd>> maps;
    visit_tensors(p, [&maps](const std::string&, Eigen::Map<const Eigen::MatrixXd> m) {
        maps.push_back(m);
    });
    return maps;
}

}  // namespace

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, long t,
               double learning_rate, const AdamConfig& cfg) {
    if (t < 1) throw InvalidConfig("Adam step index must be >= 1");
    auto p = tensor_maps(params);
    auto g = tensor_maps(grads);
    auto m = tensor_maps(state.m);
    auto v = tensor_maps(state.v);
    if (p.size() != g.size() || p.size() != m.size())
        throw DimensionMismatch("Adam state does not match parameter layout");

    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].rows() != g[k].rows() || p[k].cols() != g[k].cols())
            throw DimensionMismatch("gradient shape differs from parameter shape");
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
        v[k].array() = cfg.beta2 * v[k].array() + (1.0 - cfg.beta2) * g[k].array().square();
        p[k].array() -=
            learning_rate * (m[k].array() / bc1) / ((v[k].array() / bc2).sqrt() + cfg.epsilon);
    }
}

double clip_global_norm(ModelParams& grads, double max_norm) {
    double sq = 0.0;
    visit_tensors(const_cast<const ModelParams&>(grads),
                  [&sq](const std::string&, Eigen::Map<const Eigen::MatrixXd> m) {
                      sq += m.squaredNorm();
                  });
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        visit_tensors(grads, [scale](const std::string&, Eigen::Map<Eigen::MatrixXd> m) {
            m *= scale;
        });
    }
    return norm;
}

}  // namespace eegpipe::nn
