#include "sst/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace sst::nn {

Conv1d::Conv1d(ParamStore& ps, const std::string& name, int in_ch, int out_ch, int kernel,
               int stride, bool same_pad, Rng& rng)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), same_pad_(same_pad) {
    w_ = ps.add(name + ".weight", out_ch, in_ch * kernel);
    b_ = ps.add(name + ".bias", out_ch, 1);
    init_uniform_fanin(ps, w_, in_ch * kernel, rng);
    init_uniform_fanin(ps, b_, in_ch * kernel, rng);
}

int Conv1d::out_len(int in_len) const {
    if (same_pad_) return (in_len + stride_ - 1) / stride_;
    return (in_len - kernel_) / stride_ + 1;
}

int Conv1d::pad_left(int in_len) const {
    if (!same_pad_) return 0;
    int out = out_len(in_len);
    int total = std::max(0, (out - 1) * stride_ + kernel_ - in_len);
    return total / 2;
}

Mat Conv1d::forward(const ParamStore& ps, const Mat& x, Cache& cache) const {
    if (x.rows() != in_ch_) throw std::invalid_argument("Conv1d: channel mismatch");
    int L = static_cast<int>(x.cols());
    int Lo = out_len(L);
    if (Lo < 1) throw std::invalid_argument("Conv1d: input shorter than kernel");
    int pl = pad_left(L);

    cache.in_len = L;
    cache.cols.setZero(static_cast<Eigen::Index>(in_ch_) * kernel_, Lo);
    for (int j = 0; j < Lo; ++j) {
        int start = j * stride_ - pl;
        for (int k = 0; k < kernel_; ++k) {
            int src = start + k;
            if (src < 0 || src >= L) continue;
            cache.cols.block(static_cast<Eigen::Index>(k) * in_ch_, j, in_ch_, 1) = x.col(src);
        }
    }
    Mat y = ps.mat(w_) * cache.cols;
    y.colwise() += ps.mat(b_).col(0);
    return y;
}

Mat Conv1d::backward(ParamStore& ps, const Mat& dy, const Cache& cache, bool skip_dx) const {
    ps.grad_mat(w_) += dy * cache.cols.transpose();
    ps.grad_mat(b_).col(0) += dy.rowwise().sum();
    if (skip_dx) return Mat();

    Mat dcols = ps.mat(w_).transpose() * dy;
    int L = cache.in_len;
    int pl = pad_left(L);
    Mat dx = Mat::Zero(in_ch_, L);
    int Lo = static_cast<int>(dy.cols());
    for (int j = 0; j < Lo; ++j) {
        int start = j * stride_ - pl;
        for (int k = 0; k < kernel_; ++k) {
            int src = start + k;
            if (src < 0 || src >= L) continue;
            dx.col(src) += dcols.block(static_cast<Eigen::Index>(k) * in_ch_, j, in_ch_, 1);
        }
    }
    return dx;
}

LayerNorm::LayerNorm(ParamStore& ps, const std::string& name, int dim) : dim_(dim) {
    gamma_ = ps.add(name + ".gamma", dim, 1);
    beta_ = ps.add(name + ".beta", dim, 1);
    ps.mat(gamma_).setOnes();
}

Mat LayerNorm::forward(const ParamStore& ps, const Mat& x, Cache& cache) const {
    constexpr double eps = 1e-5;
    int L = static_cast<int>(x.cols());
    cache.xhat.resize(dim_, L);
    cache.inv_std.resize(L);
    for (int j = 0; j < L; ++j) {
        double mean = x.col(j).mean();
        double var = (x.col(j).array() - mean).square().mean();
        double inv = 1.0 / std::sqrt(var + eps);
        cache.inv_std(j) = inv;
        cache.xhat.col(j) = (x.col(j).array() - mean) * inv;
    }
    Mat y = cache.xhat;
    y.array().colwise() *= ps.mat(gamma_).col(0).array();
    y.colwise() += ps.mat(beta_).col(0);
    return y;
}

Mat LayerNorm::backward(ParamStore& ps, const Mat& dy, const Cache& cache) const {
    int L = static_cast<int>(dy.cols());
    auto gamma = ps.mat(gamma_).col(0);
    {
        auto ggrad = ps.grad_mat(gamma_);
        auto bgrad = ps.grad_mat(beta_);
        ggrad.col(0) += (dy.array() * cache.xhat.array()).rowwise().sum().matrix();
        bgrad.col(0) += dy.rowwise().sum();
    }
    Mat dx(dim_, L);
    double n = static_cast<double>(dim_);
    for (int j = 0; j < L; ++j) {
        Vec g = dy.col(j).cwiseProduct(gamma);
        double mg = g.mean();
        double mgx = g.cwiseProduct(cache.xhat.col(j)).mean();
        dx.col(j) =
            cache.inv_std(j) * (g.array() - mg - cache.xhat.col(j).array() * mgx).matrix();
        (void)n;
    }
    return dx;
}

Dense::Dense(ParamStore& ps, const std::string& name, int in, int out, Rng& rng)
    : in_(in), out_(out) {
    w_ = ps.add(name + ".weight", out, in);
    b_ = ps.add(name + ".bias", out, 1);
    init_uniform_fanin(ps, w_, in, rng);
    init_uniform_fanin(ps, b_, in, rng);
}

Mat Dense::forward(const ParamStore& ps, const Mat& x) const {
    Mat y = ps.mat(w_) * x;
    y.colwise() += ps.mat(b_).col(0);
    return y;
}

Mat Dense::backward(ParamStore& ps, const Mat& dy, const Mat& x, bool skip_dx) const {
    ps.grad_mat(w_) += dy * x.transpose();
    ps.grad_mat(b_).col(0) += dy.rowwise().sum();
    if (skip_dx) return Mat();
    return ps.mat(w_).transpose() * dy;
}

Mat gelu(const Mat& x) {
    return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)); });
}

Mat gelu_backward(const Mat& dy, const Mat& x) {
    Mat dx = x.unaryExpr([](double v) {
        double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
        double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
        return cdf + v * pdf;
    });
    return dx.cwiseProduct(dy);
}

Mat relu(const Mat& x) {
    return x.cwiseMax(0.0);
}

Mat relu_backward(const Mat& dy, const Mat& x) {
    return (x.array() > 0.0).select(dy, Mat::Zero(dy.rows(), dy.cols()));
}

Mat dropout_mask(int rows, int cols, double p, Rng& rng) {
    double keep = 1.0 - p;
    Mat m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return m;
}

}  // namespace sst::nn
