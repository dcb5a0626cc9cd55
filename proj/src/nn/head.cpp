#include "sst/nn/head.hpp"

#include <cmath>
#include <stdexcept>

namespace sst::nn {

void HeadConfig::validate() const {
    if (input_dim < 1 || hidden_dim < 1)
        throw std::invalid_argument("head config: dimensions must be positive");
}

SimilarityHead::SimilarityHead(const HeadConfig& config, ParamStore& ps, Rng& rng)
    : config_(config) {
    config_.validate();
    d1_ = Dense(ps, "head.fc1", config_.input_dim, config_.hidden_dim, rng);
    d2_ = Dense(ps, "head.fc2", config_.hidden_dim, config_.hidden_dim, rng);
    d3_ = Dense(ps, "head.fc3", config_.hidden_dim, 1, rng);
}

Mat SimilarityHead::forward(const ParamStore& ps, const Mat& x, Cache& cache) const {
    if (x.rows() != config_.input_dim)
        throw std::invalid_argument("head forward: input dim mismatch");
    cache.x = x;
    cache.h1 = d1_.forward(ps, x);
    cache.a1 = relu(cache.h1);
    cache.h2 = d2_.forward(ps, cache.a1);
    cache.a2 = relu(cache.h2);
    cache.logit = d3_.forward(ps, cache.a2);
    return cache.logit.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

double SimilarityHead::bce_backward(ParamStore& ps, const Cache& cache, const Mat& probs,
                                    const std::vector<int>& labels) const {
    int b = static_cast<int>(probs.cols());
    if (static_cast<int>(labels.size()) != b)
        throw std::invalid_argument("head bce: label count mismatch");
    constexpr double eps = 1e-12;
    double loss = 0.0;
    Mat dlogit(1, b);
    for (int i = 0; i < b; ++i) {
        double p = std::min(1.0 - eps, std::max(eps, probs(0, i)));
        double y = labels[i] ? 1.0 : 0.0;
        loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        dlogit(0, i) = (probs(0, i) - y) / static_cast<double>(b);
    }
    Mat da2 = d3_.backward(ps, dlogit, cache.a2);
    Mat dh2 = relu_backward(da2, cache.h2);
    Mat da1 = d2_.backward(ps, dh2, cache.a1);
    Mat dh1 = relu_backward(da1, cache.h1);
    d1_.backward(ps, dh1, cache.x, /*skip_dx=*/true);
    return loss / static_cast<double>(b);
}

}  // namespace sst::nn
