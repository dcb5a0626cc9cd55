#pragma once

#include "sst/nn/param_store.hpp"

namespace sst::nn {

// 1-D convolution over the position axis of a (channels x length)
// matrix, implemented as im2col + GEMM. Same-padding output length is
// ceil(L / stride); valid is floor((L - kernel) / stride) + 1.
class Conv1d {
public:
    struct Cache {
        Mat cols;  // (in_ch * kernel) x out_len
        int in_len = 0;
    };

    Conv1d() = default;
    Conv1d(ParamStore& ps, const std::string& name, int in_ch, int out_ch, int kernel, int stride,
           bool same_pad, Rng& rng);

    int out_len(int in_len) const;
    Mat forward(const ParamStore& ps, const Mat& x, Cache& cache) const;
    // Accumulates weight grads; returns dx unless skip_dx.
    Mat backward(ParamStore& ps, const Mat& dy, const Cache& cache, bool skip_dx = false) const;

    int in_ch() const { return in_ch_; }
    int out_ch() const { return out_ch_; }

private:
    int pad_left(int in_len) const;
    int in_ch_ = 0, out_ch_ = 0, kernel_ = 1, stride_ = 1;
    bool same_pad_ = true;
    size_t w_ = 0, b_ = 0;  // W: out_ch x (in_ch*kernel), b: out_ch x 1
};

// Per-position normalization over the channel axis.
class LayerNorm {
public:
    struct Cache {
        Mat xhat;
        Vec inv_std;
    };

    LayerNorm() = default;
    LayerNorm(ParamStore& ps, const std::string& name, int dim);

    Mat forward(const ParamStore& ps, const Mat& x, Cache& cache) const;
    Mat backward(ParamStore& ps, const Mat& dy, const Cache& cache) const;

private:
    int dim_ = 0;
    size_t gamma_ = 0, beta_ = 0;
};

class Dense {
public:
    Dense() = default;
    Dense(ParamStore& ps, const std::string& name, int in, int out, Rng& rng);

    Mat forward(const ParamStore& ps, const Mat& x) const;
    // x is the forward input (caller caches it).
    Mat backward(ParamStore& ps, const Mat& dy, const Mat& x, bool skip_dx = false) const;

    int in() const { return in_; }
    int out() const { return out_; }

private:
    int in_ = 0, out_ = 0;
    size_t w_ = 0, b_ = 0;
};

Mat gelu(const Mat& x);
Mat gelu_backward(const Mat& dy, const Mat& x);

Mat relu(const Mat& x);
Mat relu_backward(const Mat& dy, const Mat& x);

// Inverted dropout; mask entries are 0 or 1/(1-p).
Mat dropout_mask(int rows, int cols, double p, Rng& rng);

}  // namespace sst::nn
