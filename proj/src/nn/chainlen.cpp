#include "sst/nn/chainlen.hpp"

#include <cmath>
#include <stdexcept>

namespace sst::nn {

namespace {
constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
}

void ChainLenConfig::validate() const {
    if (input_channels < 1 || max_len < 1 || kernel < 1 || stride < 1 || mlp_hidden < 1)
        throw std::invalid_argument("chainlen config: dimensions must be positive");
    if (channels.empty()) throw std::invalid_argument("chainlen config: need conv channels");
}

ChainLenNet::ChainLenNet(const ChainLenConfig& config, ParamStore& ps, Rng& rng)
    : config_(config) {
    config_.validate();
    int in_ch = config_.input_channels;
    int len = config_.max_len;
    for (size_t l = 0; l < config_.channels.size(); ++l) {
        int out_ch = config_.channels[l];
        std::string p = "chainlen.conv" + std::to_string(l);
        convs_.emplace_back(ps, p, in_ch, out_ch, config_.kernel, config_.stride, true, rng);
        bn_gamma_.push_back(ps.add(p + ".bn.gamma", out_ch, 1));
        bn_beta_.push_back(ps.add(p + ".bn.beta", out_ch, 1));
        bn_mean_.push_back(ps.add(p + ".bn.running_mean", out_ch, 1, /*trainable=*/false));
        bn_var_.push_back(ps.add(p + ".bn.running_var", out_ch, 1, /*trainable=*/false));
        ps.mat(bn_gamma_.back()).setOnes();
        ps.mat(bn_var_.back()).setOnes();
        in_ch = out_ch;
        len = convs_.back().out_len(len);
        layer_len_.push_back(len);
    }
    m1_ = Dense(ps, "chainlen.fc1", config_.channels.back(), config_.mlp_hidden, rng);
    m2_ = Dense(ps, "chainlen.fc2", config_.mlp_hidden, 2, rng);
}

Mat ChainLenNet::forward_batch(ParamStore& ps, const std::vector<const std::vector<double>*>& inputs,
                               Cache& cache, bool train) {
    int batch = static_cast<int>(inputs.size());
    if (batch < 1) throw std::invalid_argument("chainlen forward: empty batch");
    size_t expected = static_cast<size_t>(config_.input_channels) * config_.max_len;

    int layers = static_cast<int>(convs_.size());
    cache.conv.assign(layers, {});
    cache.pre_bn.assign(layers, Mat());
    cache.xhat.assign(layers, Mat());
    cache.inv_std.assign(layers, Vec());
    cache.post_act.assign(layers, Mat());

    // Layer input, batch-concatenated.
    Mat x(config_.input_channels, static_cast<Eigen::Index>(config_.max_len) * batch);
    for (int k = 0; k < batch; ++k) {
        if (inputs[k]->size() != expected)
            throw std::invalid_argument("chainlen forward: input shape mismatch");
        for (int r = 0; r < config_.input_channels; ++r)
            for (int c = 0; c < config_.max_len; ++c)
                x(r, static_cast<Eigen::Index>(k) * config_.max_len + c) =
                    (*inputs[k])[static_cast<size_t>(r) * config_.max_len + c];
    }

    int in_len = config_.max_len;
    for (int l = 0; l < layers; ++l) {
        int out_len = layer_len_[l];
        int out_ch = config_.channels[l];
        Mat y(out_ch, static_cast<Eigen::Index>(out_len) * batch);
        cache.conv[l].assign(batch, Conv1d::Cache{});
        for (int k = 0; k < batch; ++k) {
            Mat xs = x.middleCols(static_cast<Eigen::Index>(k) * in_len, in_len);
            y.middleCols(static_cast<Eigen::Index>(k) * out_len, out_len) =
                convs_[l].forward(ps, xs, cache.conv[l][k]);
        }
        cache.pre_bn[l] = y;

        // Batch normalization over all positions of the batch.
        int n = static_cast<int>(y.cols());
        Vec mean(out_ch), var(out_ch);
        if (train) {
            mean = y.rowwise().mean();
            for (int r = 0; r < out_ch; ++r)
                var(r) = (y.row(r).array() - mean(r)).square().mean();
            auto rm = ps.mat(bn_mean_[l]);
            auto rv = ps.mat(bn_var_[l]);
            rm.col(0) = (1.0 - kBnMomentum) * rm.col(0) + kBnMomentum * mean;
            rv.col(0) = (1.0 - kBnMomentum) * rv.col(0) + kBnMomentum * var;
        } else {
            mean = ps.mat(bn_mean_[l]).col(0);
            var = ps.mat(bn_var_[l]).col(0);
        }
        cache.inv_std[l] = (var.array() + kBnEps).rsqrt().matrix();
        Mat xhat = y;
        xhat.colwise() -= mean;
        xhat.array().colwise() *= cache.inv_std[l].array();
        cache.xhat[l] = xhat;

        Mat z = xhat;
        z.array().colwise() *= ps.mat(bn_gamma_[l]).col(0).array();
        z.colwise() += ps.mat(bn_beta_[l]).col(0);
        cache.post_act[l] = relu(z);

        x = cache.post_act[l];
        in_len = out_len;
        (void)n;
    }

    // Global average pool per sample.
    int last_len = layer_len_.back();
    int last_ch = config_.channels.back();
    cache.pooled.resize(last_ch, batch);
    for (int k = 0; k < batch; ++k)
        cache.pooled.col(k) =
            x.middleCols(static_cast<Eigen::Index>(k) * last_len, last_len).rowwise().mean();

    cache.h1 = m1_.forward(ps, cache.pooled);
    cache.a1 = relu(cache.h1);
    return m2_.forward(ps, cache.a1);
}

void ChainLenNet::backward(ParamStore& ps, const Cache& cache, const Mat& dout) const {
    int batch = static_cast<int>(dout.cols());
    Mat da1 = m2_.backward(ps, dout, cache.a1);
    Mat dh1 = relu_backward(da1, cache.h1);
    Mat dpooled = m1_.backward(ps, dh1, cache.pooled);

    int layers = static_cast<int>(convs_.size());
    int last_len = layer_len_.back();
    Mat dx(config_.channels.back(), static_cast<Eigen::Index>(last_len) * batch);
    for (int k = 0; k < batch; ++k)
        dx.middleCols(static_cast<Eigen::Index>(k) * last_len, last_len) =
            (dpooled.col(k) / static_cast<double>(last_len)).replicate(1, last_len);

    for (int l = layers - 1; l >= 0; --l) {
        // Through relu and batch norm.
        Mat z = cache.xhat[l];
        z.array().colwise() *= ps.mat(bn_gamma_[l]).col(0).array();
        z.colwise() += ps.mat(bn_beta_[l]).col(0);
        Mat dz = relu_backward(dx, z);

        int out_ch = config_.channels[l];
        double n = static_cast<double>(dz.cols());
        Vec gamma = ps.mat(bn_gamma_[l]).col(0);
        Vec dgamma = (dz.array() * cache.xhat[l].array()).rowwise().sum().matrix();
        Vec dbeta = dz.rowwise().sum();
        ps.grad_mat(bn_gamma_[l]).col(0) += dgamma;
        ps.grad_mat(bn_beta_[l]).col(0) += dbeta;

        Mat dxhat = dz;
        dxhat.array().colwise() *= gamma.array();
        Vec sum_dxhat = dxhat.rowwise().sum();
        Vec sum_dxhat_xhat = (dxhat.array() * cache.xhat[l].array()).rowwise().sum().matrix();
        Mat dy = dxhat;
        dy.colwise() -= Vec(sum_dxhat / n);
        Mat corr = cache.xhat[l];
        corr.array().colwise() *= (sum_dxhat_xhat.array() / n);
        dy -= corr;
        dy.array().colwise() *= cache.inv_std[l].array();

        int in_len = l == 0 ? config_.max_len : layer_len_[l - 1];
        int in_ch = l == 0 ? config_.input_channels : config_.channels[l - 1];
        int out_len = layer_len_[l];
        Mat dprev;
        if (l > 0) dprev.setZero(in_ch, static_cast<Eigen::Index>(in_len) * batch);
        for (int k = 0; k < batch; ++k) {
            Mat dyk = dy.middleCols(static_cast<Eigen::Index>(k) * out_len, out_len);
            Mat dxk = convs_[l].backward(ps, dyk, cache.conv[l][k], /*skip_dx=*/l == 0);
            if (l > 0) dprev.middleCols(static_cast<Eigen::Index>(k) * in_len, in_len) = dxk;
        }
        (void)out_ch;
        if (l > 0) dx = std::move(dprev);
    }
}

}  // namespace sst::nn
