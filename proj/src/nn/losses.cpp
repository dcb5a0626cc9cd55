#include "sst/nn/losses.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace sst::nn {

double cosine(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

void cosine_grad(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b, double upstream,
                 Eigen::Ref<Vec> da, Eigen::Ref<Vec> db) {
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return;
    double dot = a.dot(b);
    double inv = 1.0 / (na * nb);
    da += upstream * (b * inv - a * (dot / (na * na * na * nb)));
    db += upstream * (a * inv - b * (dot / (nb * nb * nb * na)));
}

std::vector<double> window_similarities(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("window_similarities: shape mismatch");
    std::vector<double> sims(a.cols());
    for (int w = 0; w < a.cols(); ++w) sims[w] = cosine(a.col(w), b.col(w));
    return sims;
}

std::vector<double> temporal_similarities(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("temporal_similarities: shape mismatch");
    std::vector<double> sims(a.rows());
    for (int f = 0; f < a.rows(); ++f)
        sims[f] = cosine(a.row(f).transpose(), b.row(f).transpose());
    return sims;
}

double triplet_loss(const std::vector<double>& sim_ap, const std::vector<double>& sim_an,
                    double margin) {
    if (sim_ap.size() != sim_an.size() || sim_ap.empty())
        throw std::invalid_argument("triplet_loss: bad similarity vectors");
    double total = 0.0;
    for (size_t i = 0; i < sim_ap.size(); ++i)
        total += std::max(0.0, sim_an[i] - sim_ap[i] + margin);
    return total / static_cast<double>(sim_ap.size());
}

namespace {

enum class Axis { Window, Temporal };

double triplet_axis_grad(const Mat& a, const Mat& p, const Mat& n, double margin, double weight,
                         Axis axis, Mat& da, Mat& dp, Mat& dn) {
    int count = axis == Axis::Window ? static_cast<int>(a.cols()) : static_cast<int>(a.rows());
    double total = 0.0;
    double unit = weight / static_cast<double>(count);
    for (int i = 0; i < count; ++i) {
        if (axis == Axis::Window) {
            double sap = cosine(a.col(i), p.col(i));
            double san = cosine(a.col(i), n.col(i));
            double term = san - sap + margin;
            if (term > 0.0) {
                total += term;
                cosine_grad(a.col(i), n.col(i), unit, da.col(i), dn.col(i));
                cosine_grad(a.col(i), p.col(i), -unit, da.col(i), dp.col(i));
            }
        } else {
            Vec ar = a.row(i).transpose(), pr = p.row(i).transpose(), nr = n.row(i).transpose();
            double sap = cosine(ar, pr);
            double san = cosine(ar, nr);
            double term = san - sap + margin;
            if (term > 0.0) {
                total += term;
                Vec dar = Vec::Zero(ar.size()), dpr = Vec::Zero(ar.size()),
                    dnr = Vec::Zero(ar.size());
                cosine_grad(ar, nr, unit, dar, dnr);
                cosine_grad(ar, pr, -unit, dar, dpr);
                da.row(i) += dar.transpose();
                dp.row(i) += dpr.transpose();
                dn.row(i) += dnr.transpose();
            }
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace

double triplet_loss_window_grad(const Mat& a, const Mat& p, const Mat& n, double margin,
                                double weight, Mat& da, Mat& dp, Mat& dn) {
    return triplet_axis_grad(a, p, n, margin, weight, Axis::Window, da, dp, dn);
}

double triplet_loss_temporal_grad(const Mat& a, const Mat& p, const Mat& n, double margin,
                                  double weight, Mat& da, Mat& dp, Mat& dn) {
    return triplet_axis_grad(a, p, n, margin, weight, Axis::Temporal, da, dp, dn);
}

double hybrid_triplet_loss(const Mat& a, const Mat& p, const Mat& n, double margin, double w_mix) {
    double lw = triplet_loss(window_similarities(a, p), window_similarities(a, n), margin);
    double lt = triplet_loss(temporal_similarities(a, p), temporal_similarities(a, n), margin);
    return w_mix * lw + (1.0 - w_mix) * lt;
}

double hybrid_triplet_loss_grad(const Mat& a, const Mat& p, const Mat& n, double margin,
                                double w_mix, double weight, Mat& da, Mat& dp, Mat& dn) {
    double lw = 0.0, lt = 0.0;
    if (w_mix != 0.0)
        lw = triplet_loss_window_grad(a, p, n, margin, weight * w_mix, da, dp, dn);
    if (w_mix != 1.0)
        lt = triplet_loss_temporal_grad(a, p, n, margin, weight * (1.0 - w_mix), da, dp, dn);
    return w_mix * lw + (1.0 - w_mix) * lt;
}

namespace {

struct OrthContext {
    Mat gram_minus_i;  // G - I on normalized rows
    Vec inv_norm;      // 1 / row norm of the stacked matrix
    double loss = 0.0;
};

OrthContext orth_context(const std::vector<const Mat*>& blocks) {
    if (blocks.empty()) throw std::invalid_argument("orthogonality_loss: no embeddings");
    int d = static_cast<int>(blocks.front()->rows());
    Mat fft = Mat::Zero(d, d);
    for (const Mat* b : blocks) {
        if (b->rows() != d) throw std::invalid_argument("orthogonality_loss: row mismatch");
        fft += *b * b->transpose();
    }
    OrthContext ctx;
    ctx.inv_norm.resize(d);
    for (int r = 0; r < d; ++r) {
        double nr = std::sqrt(fft(r, r));
        ctx.inv_norm(r) = nr > 0.0 ? 1.0 / nr : 0.0;
    }
    Mat g = fft;
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) *= ctx.inv_norm(r) * ctx.inv_norm(c);
    ctx.gram_minus_i = g - Mat::Identity(d, d);
    ctx.loss = ctx.gram_minus_i.squaredNorm();
    // Zero rows contribute their diagonal deviation only; g(r,r) = 0
    // there, so (0 - 1)^2 is already counted above.
    return ctx;
}

}  // namespace

double orthogonality_loss(const std::vector<const Mat*>& blocks) {
    return orth_context(blocks).loss;
}

double orthogonality_loss_grad(const std::vector<const Mat*>& blocks, double weight,
                               const std::vector<Mat*>& grads) {
    OrthContext ctx = orth_context(blocks);
    int d = static_cast<int>(ctx.inv_norm.size());

    // L = ||Fhat Fhat' - I||^2 with Fhat = D^-1 F. dL/dFhat = 4 (G-I) Fhat.
    // Through the row normalization: dL/dF_r = D^-1 (m_r - c_r fhat_r)
    // with c_r = m_r . fhat_r = 4 [(G-I) G]_rr.
    Mat gm = ctx.gram_minus_i;
    Mat g = gm + Mat::Identity(d, d);
    Vec c = (4.0 * gm * g).diagonal();

    for (size_t i = 0; i < blocks.size(); ++i) {
        const Mat& f = *blocks[i];
        Mat fhat = ctx.inv_norm.asDiagonal() * f;
        Mat m = 4.0 * gm * fhat;
        m -= c.asDiagonal() * fhat;
        *grads[i] += weight * (ctx.inv_norm.asDiagonal() * m);
    }
    return ctx.loss;
}

namespace {

struct CovContext {
    Mat centered;   // stacked, mean-free columns
    Mat inv_reg;    // (C + eps I)^-1
    double loss = 0.0;
    int n = 0;
};

CovContext cov_context(const std::vector<const Mat*>& blocks, double eps) {
    if (blocks.empty()) throw std::invalid_argument("covariance_loss: no embeddings");
    int d = static_cast<int>(blocks.front()->rows());
    int n = 0;
    for (const Mat* b : blocks) n += static_cast<int>(b->cols());
    if (n < 2) throw std::invalid_argument("covariance_loss: need at least 2 columns");

    CovContext ctx;
    ctx.n = n;
    ctx.centered.resize(d, n);
    int at = 0;
    Vec mean = Vec::Zero(d);
    for (const Mat* b : blocks) mean += b->rowwise().sum();
    mean /= static_cast<double>(n);
    for (const Mat* b : blocks) {
        ctx.centered.middleCols(at, b->cols()) = b->colwise() - mean;
        at += static_cast<int>(b->cols());
    }

    Mat cov = ctx.centered * ctx.centered.transpose() / static_cast<double>(n - 1);
    cov += eps * Mat::Identity(d, d);
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("covariance_loss: regularized covariance not positive definite");
    double logdet = 0.0;
    for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
    logdet *= 2.0;
    if (!std::isfinite(logdet))
        throw std::runtime_error("covariance_loss: non-finite determinant (d=" +
                                 std::to_string(d) + ", n=" + std::to_string(n) + ")");
    ctx.loss = -logdet;
    ctx.inv_reg = llt.solve(Mat::Identity(d, d));
    return ctx;
}

}  // namespace

double covariance_loss(const std::vector<const Mat*>& blocks, double eps) {
    return cov_context(blocks, eps).loss;
}

double covariance_loss_grad(const std::vector<const Mat*>& blocks, double weight,
                            const std::vector<Mat*>& grads, double eps) {
    CovContext ctx = cov_context(blocks, eps);
    // dL/dC = -(C + eps I)^-1; columns are already centered so the
    // centering correction vanishes.
    Mat dcentered =
        (-2.0 / static_cast<double>(ctx.n - 1)) * (ctx.inv_reg * ctx.centered);
    int at = 0;
    for (size_t i = 0; i < blocks.size(); ++i) {
        int c = static_cast<int>(blocks[i]->cols());
        *grads[i] += weight * dcentered.middleCols(at, c);
        at += c;
    }
    return ctx.loss;
}

double mse_loss(const std::vector<Eigen::Vector2d>& preds,
                const std::vector<Eigen::Vector2d>& targets) {
    if (preds.size() != targets.size() || preds.empty())
        throw std::invalid_argument("mse_loss: bad inputs");
    double total = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) total += (preds[i] - targets[i]).squaredNorm();
    return total / (2.0 * static_cast<double>(preds.size()));
}

double mse_loss_grad(const std::vector<Eigen::Vector2d>& preds,
                     const std::vector<Eigen::Vector2d>& targets, double weight,
                     std::vector<Eigen::Vector2d>& dpreds) {
    double total = 0.0;
    dpreds.assign(preds.size(), Eigen::Vector2d::Zero());
    double scale = weight / static_cast<double>(preds.size());
    for (size_t i = 0; i < preds.size(); ++i) {
        total += (preds[i] - targets[i]).squaredNorm();
        dpreds[i] = scale * (preds[i] - targets[i]);
    }
    return total / (2.0 * static_cast<double>(preds.size()));
}

}  // namespace sst::nn
