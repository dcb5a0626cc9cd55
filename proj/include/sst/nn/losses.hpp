#pragma once

#include <vector>

#include "sst/nn/param_store.hpp"

namespace sst::nn {

// Cosine similarity with the zero-vector convention: either operand
// all-zero gives similarity 0 (and zero gradient).
double cosine(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b);

// Accumulates d(upstream * cos(a, b)) into da/db.
void cosine_grad(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b, double upstream,
                 Eigen::Ref<Vec> da, Eigen::Ref<Vec> db);

// Per-window cosine: entry w compares column w of each embedding.
std::vector<double> window_similarities(const Mat& a, const Mat& b);

// Per-feature cosine across the window axis: entry f compares row f.
std::vector<double> temporal_similarities(const Mat& a, const Mat& b);

// Mean over entries of max(0, sim_an[i] - sim_ap[i] + margin).
double triplet_loss(const std::vector<double>& sim_ap, const std::vector<double>& sim_an,
                    double margin);

// Window-form triplet loss on embeddings with gradient accumulation
// (scaled by `weight`). Temporal form swaps the compared axis.
double triplet_loss_window_grad(const Mat& a, const Mat& p, const Mat& n, double margin,
                                double weight, Mat& da, Mat& dp, Mat& dn);
double triplet_loss_temporal_grad(const Mat& a, const Mat& p, const Mat& n, double margin,
                                  double weight, Mat& da, Mat& dp, Mat& dn);

// w_mix * window form + (1 - w_mix) * temporal form.
double hybrid_triplet_loss(const Mat& a, const Mat& p, const Mat& n, double margin, double w_mix);
double hybrid_triplet_loss_grad(const Mat& a, const Mat& p, const Mat& n, double margin,
                                double w_mix, double weight, Mat& da, Mat& dp, Mat& dn);

// || Ghat - I ||_F^2 where Ghat is the feature-axis (d x d) Gram of
// the row-normalized stacked embedding matrix F = [blocks...].
double orthogonality_loss(const std::vector<const Mat*>& blocks);
double orthogonality_loss_grad(const std::vector<const Mat*>& blocks, double weight,
                               const std::vector<Mat*>& grads);

// -log det(Cov(F) + eps I), covariance over columns with the unbiased
// n-1 divisor; eps floors rank-deficient batches.
double covariance_loss(const std::vector<const Mat*>& blocks, double eps = 1e-4);
double covariance_loss_grad(const std::vector<const Mat*>& blocks, double weight,
                            const std::vector<Mat*>& grads, double eps = 1e-4);

// Mean squared error over all (sample, output) entries.
double mse_loss(const std::vector<Eigen::Vector2d>& preds,
                const std::vector<Eigen::Vector2d>& targets);
double mse_loss_grad(const std::vector<Eigen::Vector2d>& preds,
                     const std::vector<Eigen::Vector2d>& targets, double weight,
                     std::vector<Eigen::Vector2d>& dpreds);

}  // namespace sst::nn
