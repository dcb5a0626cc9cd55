#include "sst/nn/fen.hpp"

#include <cmath>
#include <stdexcept>

namespace sst::nn {

MixerType mixer_from_string(const std::string& s) {
    if (s == "mhsa") return MixerType::Mhsa;
    if (s == "conv7") return MixerType::Conv7;
    if (s == "identity") return MixerType::Identity;
    throw std::invalid_argument("unknown mixer type: " + s);
}

std::string mixer_to_string(MixerType m) {
    switch (m) {
        case MixerType::Mhsa: return "mhsa";
        case MixerType::Conv7: return "conv7";
        case MixerType::Identity: return "identity";
    }
    return "?";
}

void FenConfig::validate() const {
    if (input_channels < 1 || input_len < 1 || hidden_dim < 1 || feature_dim < 1 || depth < 1)
        throw std::invalid_argument("fen config: dimensions must be positive");
    if (mixer == MixerType::Mhsa && hidden_dim % head_dim != 0)
        throw std::invalid_argument("fen config: hidden_dim must be divisible by head_dim");
    if (windows() < 1)
        throw std::invalid_argument("fen config: window conv larger than token sequence");
    if (block_dropout < 0.0 || block_dropout >= 1.0)
        throw std::invalid_argument("fen config: block_dropout must be in [0, 1)");
    if (mlp_ratio < 1) throw std::invalid_argument("fen config: mlp_ratio must be >= 1");
}

Fen::Fen(const FenConfig& config, ParamStore& ps, Rng& rng) : config_(config) {
    config_.validate();
    int H = config_.hidden_dim;
    embed_ = Conv1d(ps, "fen.embed", config_.input_channels, H, config_.embed_kernel,
                    config_.embed_stride, true, rng);
    for (int d = 0; d < config_.depth; ++d) {
        std::string p = "fen.block" + std::to_string(d);
        Block b;
        b.ln1 = LayerNorm(ps, p + ".ln1", H);
        if (config_.mixer == MixerType::Mhsa) {
            b.convq = Conv1d(ps, p + ".q", H, H, config_.kv_kernel, 1, true, rng);
            b.convk = Conv1d(ps, p + ".k", H, H, config_.kv_kernel, config_.kv_stride, true, rng);
            b.convv = Conv1d(ps, p + ".v", H, H, config_.kv_kernel, config_.kv_stride, true, rng);
            b.wo = Dense(ps, p + ".wo", H, H, rng);
        } else if (config_.mixer == MixerType::Conv7) {
            b.conv_mix = Conv1d(ps, p + ".mix", H, H, 7, 1, true, rng);
        }
        b.ln2 = LayerNorm(ps, p + ".ln2", H);
        b.ffn1 = Dense(ps, p + ".ffn1", H, H * config_.mlp_ratio, rng);
        b.ffn2 = Dense(ps, p + ".ffn2", H * config_.mlp_ratio, H, rng);
        blocks_.push_back(std::move(b));
    }
    window_ = Conv1d(ps, "fen.window", H, config_.feature_dim, config_.window_kernel,
                     config_.window_stride, false, rng);
    if (config_.chain_token) {
        chain_token_ = ps.add("fen.chain_token", H, 1);
        init_uniform_fanin(ps, chain_token_, H, rng);
        chain1_ = Dense(ps, "fen.chain1", H, config_.chain_head_hidden, rng);
        chain2_ = Dense(ps, "fen.chain2", config_.chain_head_hidden, 2, rng);
    }
}

namespace {

Mat softmax_rows(const Mat& s) {
    Mat p(s.rows(), s.cols());
    for (int r = 0; r < s.rows(); ++r) {
        double mx = s.row(r).maxCoeff();
        p.row(r) = (s.row(r).array() - mx).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

}  // namespace

Mat Fen::forward(const ParamStore& ps, const std::vector<double>& x, Cache& cache, bool train,
                 Rng* drop_rng, Eigen::Vector2d* chain_out) const {
    int C = config_.input_channels;
    int T = config_.input_len;
    if (x.size() != static_cast<size_t>(C) * T)
        throw std::invalid_argument("fen forward: input shape mismatch");

    cache.input.resize(C, T);
    for (int r = 0; r < C; ++r)
        for (int c = 0; c < T; ++c) {
            double v = x[static_cast<size_t>(r) * T + c];
            cache.input(r, c) = v >= 0.0 ? std::log1p(v) : -std::log1p(-v);
        }

    Mat h = embed_.forward(ps, cache.input, cache.embed);
    int n_tok = static_cast<int>(h.cols());
    if (config_.chain_token) {
        h.conservativeResize(Eigen::NoChange, n_tok + 1);
        h.col(n_tok) = ps.mat(chain_token_).col(0);
    }

    cache.block_in.clear();
    cache.blocks.assign(config_.depth, BlockCache{});
    int H = config_.hidden_dim;

    for (int d = 0; d < config_.depth; ++d) {
        const Block& blk = blocks_[d];
        BlockCache& bc = cache.blocks[d];
        cache.block_in.push_back(h);

        Mat u = blk.ln1.forward(ps, h, bc.ln1);
        Mat m;
        if (config_.mixer == MixerType::Mhsa) {
            bc.q = blk.convq.forward(ps, u, bc.qc);
            bc.k = blk.convk.forward(ps, u, bc.kc);
            bc.v = blk.convv.forward(ps, u, bc.vc);
            int nh = H / config_.head_dim;
            int hd = config_.head_dim;
            int lq = static_cast<int>(bc.q.cols());
            bc.attn.assign(nh, Mat());
            bc.attn_out.resize(H, lq);
            double scale = 1.0 / std::sqrt(static_cast<double>(hd));
            for (int hh = 0; hh < nh; ++hh) {
                auto qh = bc.q.middleRows(hh * hd, hd);
                auto kh = bc.k.middleRows(hh * hd, hd);
                auto vh = bc.v.middleRows(hh * hd, hd);
                Mat scores = (qh.transpose() * kh) * scale;
                bc.attn[hh] = softmax_rows(scores);
                bc.attn_out.middleRows(hh * hd, hd) = vh * bc.attn[hh].transpose();
            }
            m = blk.wo.forward(ps, bc.attn_out);
        } else if (config_.mixer == MixerType::Conv7) {
            m = blk.conv_mix.forward(ps, u, bc.mixc);
        } else {
            m = u;
        }
        h += m;

        bc.ffn_in = blk.ln2.forward(ps, h, bc.ln2);
        bc.ffn_h = blk.ffn1.forward(ps, bc.ffn_in);
        bc.ffn_g = gelu(bc.ffn_h);
        h += blk.ffn2.forward(ps, bc.ffn_g);

        if (train && config_.block_dropout > 0.0) {
            if (!drop_rng) throw std::invalid_argument("fen forward: train mode needs an rng");
            bc.mask = dropout_mask(static_cast<int>(h.rows()), static_cast<int>(h.cols()),
                                   config_.block_dropout, *drop_rng);
            h = h.cwiseProduct(bc.mask);
        }
    }

    cache.final_tokens = h.leftCols(n_tok);
    Mat windows = window_.forward(ps, cache.final_tokens, cache.window);

    if (config_.chain_token) {
        cache.chain_tok_final = h.col(n_tok);
        cache.chain_h1 = chain1_.forward(ps, cache.chain_tok_final);
        Mat a1 = gelu(cache.chain_h1);
        Mat pred = chain2_.forward(ps, a1);
        if (chain_out) *chain_out = pred.col(0);
    } else if (chain_out) {
        chain_out->setZero();
    }
    return windows;
}

void Fen::backward(ParamStore& ps, const Cache& cache, const Mat& dE,
                   const Eigen::Vector2d* dchain) const {
    int n_tok = static_cast<int>(cache.final_tokens.cols());
    int cols = n_tok + (config_.chain_token ? 1 : 0);
    int H = config_.hidden_dim;

    Mat dh = Mat::Zero(H, cols);
    dh.leftCols(n_tok) = window_.backward(ps, dE, cache.window);

    if (config_.chain_token && dchain) {
        Mat dpred(2, 1);
        dpred.col(0) = *dchain;
        Mat a1 = gelu(cache.chain_h1);
        Mat da1 = chain2_.backward(ps, dpred, a1);
        Mat dh1 = gelu_backward(da1, cache.chain_h1);
        Mat dtok = chain1_.backward(ps, dh1, cache.chain_tok_final);
        dh.col(n_tok) += dtok.col(0);
    }

    for (int d = config_.depth - 1; d >= 0; --d) {
        const Block& blk = blocks_[d];
        const BlockCache& bc = cache.blocks[d];

        if (bc.mask.size() > 0) dh = dh.cwiseProduct(bc.mask);

        // FFN sublayer.
        Mat dg = blk.ffn2.backward(ps, dh, bc.ffn_g);
        Mat dhh = gelu_backward(dg, bc.ffn_h);
        Mat dv = blk.ffn1.backward(ps, dhh, bc.ffn_in);
        dh += blk.ln2.backward(ps, dv, bc.ln2);

        // Mixer sublayer.
        Mat du;
        if (config_.mixer == MixerType::Mhsa) {
            Mat dattn_out = blk.wo.backward(ps, dh, bc.attn_out);
            int nh = H / config_.head_dim;
            int hd = config_.head_dim;
            Mat dq(H, bc.q.cols()), dk(H, bc.k.cols()), dvv(H, bc.v.cols());
            double scale = 1.0 / std::sqrt(static_cast<double>(hd));
            for (int hh = 0; hh < nh; ++hh) {
                auto qh = bc.q.middleRows(hh * hd, hd);
                auto kh = bc.k.middleRows(hh * hd, hd);
                auto vh = bc.v.middleRows(hh * hd, hd);
                auto dout = dattn_out.middleRows(hh * hd, hd);
                const Mat& p = bc.attn[hh];
                dvv.middleRows(hh * hd, hd) = dout * p;
                Mat dp = dout.transpose() * vh;  // Lq x Lk
                Mat ds(p.rows(), p.cols());
                for (int r = 0; r < p.rows(); ++r) {
                    double dot = dp.row(r).dot(p.row(r));
                    ds.row(r) = (dp.row(r).array() - dot) * p.row(r).array();
                }
                dq.middleRows(hh * hd, hd) = kh * ds.transpose() * scale;
                dk.middleRows(hh * hd, hd) = qh * ds * scale;
            }
            du = blk.convq.backward(ps, dq, bc.qc);
            du += blk.convk.backward(ps, dk, bc.kc);
            du += blk.convv.backward(ps, dvv, bc.vc);
        } else if (config_.mixer == MixerType::Conv7) {
            du = blk.conv_mix.backward(ps, dh, bc.mixc);
        } else {
            du = dh;
        }
        dh += blk.ln1.backward(ps, du, bc.ln1);
    }

    if (config_.chain_token) {
        ps.grad_mat(chain_token_).col(0) += dh.col(n_tok);
        dh.conservativeResize(Eigen::NoChange, n_tok);
    }
    embed_.backward(ps, dh, cache.embed, /*skip_dx=*/true);
}

}  // namespace sst::nn
