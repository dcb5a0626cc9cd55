#include "sst/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "sst/metrics.hpp"
#include "sst/nn/losses.hpp"
#include "sst/nn/mining.hpp"

namespace sst::nn {

MiningMode mining_from_string(const std::string& s) {
    if (s == "batch_all") return MiningMode::BatchAll;
    if (s == "batch_hard") return MiningMode::BatchHard;
    throw std::invalid_argument("unknown mining mode: " + s);
}

std::string mining_to_string(MiningMode m) {
    return m == MiningMode::BatchAll ? "batch_all" : "batch_hard";
}

void FenTrainConfig::validate() const {
    fen.validate();
    if (!(margin > 0.0)) throw std::invalid_argument("train config: margin must be > 0");
    if (mix_weight < 0.0 || mix_weight > 1.0)
        throw std::invalid_argument("train config: mix_weight must be in [0, 1]");
    if (lambda_orth < 0.0 || lambda_cov < 0.0 || lambda_chain < 0.0)
        throw std::invalid_argument("train config: loss weights must be >= 0");
    if (batch_size < 2) throw std::invalid_argument("train config: batch_size must be >= 2");
    if (epochs < 1 || workers < 1) throw std::invalid_argument("train config: bad epochs/workers");
}

void ChainLenTrainConfig::validate() const {
    net.validate();
    if (epochs < 1 || batch_size < 1) throw std::invalid_argument("chainlen config: bad loop");
}

namespace {

// Static slot assignment: worker w handles slots w, w+W, w+2W, ...
void parallel_slots(int n, int workers, const std::function<void(int slot, int worker)>& fn) {
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) fn(i, w);
        });
    for (auto& t : pool) t.join();
}

uint64_t mix_seed(uint64_t seed, uint64_t step, uint64_t slot) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (step + 1) + 0xbf58476d1ce4e5b9ull * (slot + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_int(0, static_cast<int64_t>(i) - 1)]);
}

}  // namespace

double auc_score(const std::vector<double>& scores, const std::vector<int>& labels) {
    RocCurve roc = roc_curve(scores, labels);
    return pauc(roc, 1.0, /*normalized=*/false);
}

Mat fen_embed(const ParamStore& ps, const Fen& fen, const std::vector<double>& x,
              Eigen::Vector2d* chain_out) {
    Fen::Cache cache;
    return fen.forward(ps, x, cache, /*train=*/false, nullptr, chain_out);
}

FenTrainResult train_fen(const std::vector<PairExample>& examples, const FenTrainConfig& config,
                         const EpochLogger& logger) {
    config.validate();
    int n = static_cast<int>(examples.size());
    if (n < 2) throw std::invalid_argument("train_fen: need at least 2 chains");

    int n_val = std::min(n - 2, static_cast<int>(std::lround(config.val_fraction * n)));
    if (n_val < 0) n_val = 0;
    int n_train = n - n_val;
    int batch = std::min(config.batch_size, n_train);
    int steps_per_epoch = std::max(1, n_train / batch);
    int total_steps = steps_per_epoch * config.epochs;

    FenTrainResult result;
    Rng init_rng(config.seed);
    result.fen = Fen(config.fen, result.params, init_rng);
    ParamStore& ps = result.params;
    Adam adam(config.lr, total_steps);

    Rng shuffle_rng(config.seed ^ 0x9e3779b9ull);
    std::vector<int> order(n_train);
    for (int i = 0; i < n_train; ++i) order[i] = i;

    int w = config.fen.windows();
    int d = config.fen.feature_dim;
    Vec snapshot = ps.value;
    uint64_t step_counter = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        EpochLog elog;
        elog.epoch = epoch;
        int steps_done = 0;

        for (int step = 0; step < steps_per_epoch; ++step) {
            std::vector<int> chain_idx(order.begin() + step * batch,
                                       order.begin() + (step + 1) * batch);
            int slots = 2 * batch;  // anchors then positives

            std::vector<Mat> emb(slots);
            std::vector<Eigen::Vector2d> chain_pred(slots);
            uint64_t this_step = step_counter++;

            auto input_of = [&](int slot) -> const std::vector<double>& {
                int c = chain_idx[slot % batch];
                return slot < batch ? examples[c].anchor : examples[c].positive;
            };

            parallel_slots(slots, config.workers, [&](int slot, int) {
                Fen::Cache cache;
                Rng drop(mix_seed(config.seed, this_step, slot));
                Eigen::Vector2d cp;
                emb[slot] = result.fen.forward(ps, input_of(slot), cache, /*train=*/true, &drop,
                                               &cp);
                chain_pred[slot] = cp;
            });

            std::vector<Mat> anchors(emb.begin(), emb.begin() + batch);
            std::vector<Mat> positives(emb.begin() + batch, emb.end());
            std::vector<Mat> demb(slots, Mat::Zero(d, w));

            // Triplet term with online mining.
            double triplet_total = 0.0;
            auto acc_triplet = [&](int i, int j, double weight) {
                Mat& da = demb[i];
                Mat& dp = demb[batch + i];
                Mat& dn = demb[batch + j];
                if (config.hybrid)
                    return hybrid_triplet_loss_grad(anchors[i], positives[i], positives[j],
                                                    config.margin, config.mix_weight, weight, da,
                                                    dp, dn);
                return triplet_loss_window_grad(anchors[i], positives[i], positives[j],
                                                config.margin, weight, da, dp, dn);
            };

            if (config.mining == MiningMode::BatchHard) {
                auto triplets = mine_batch_hard(anchors, positives);
                double wgt = 1.0 / static_cast<double>(triplets.size());
                for (const auto& t : triplets)
                    triplet_total += wgt * acc_triplet(t.anchor, t.negative, wgt);
            } else {
                auto triplets = mine_batch_all(anchors, positives, config.margin);
                if (!triplets.empty()) {
                    double wgt = 1.0 / static_cast<double>(triplets.size());
                    for (const auto& t : triplets)
                        triplet_total += wgt * acc_triplet(t.anchor, t.negative, wgt);
                }
            }

            // Decorrelation terms over the stacked batch embeddings.
            double orth = 0.0, cov = 0.0;
            if (config.lambda_orth > 0.0 || config.lambda_cov > 0.0) {
                std::vector<const Mat*> blocks(slots);
                std::vector<Mat*> grads(slots);
                for (int k = 0; k < slots; ++k) {
                    blocks[k] = &emb[k];
                    grads[k] = &demb[k];
                }
                if (config.lambda_orth > 0.0)
                    orth = orthogonality_loss_grad(blocks, config.lambda_orth, grads);
                if (config.lambda_cov > 0.0)
                    cov = covariance_loss_grad(blocks, config.lambda_cov, grads);
            }

            // Multi-task chain-length term from the chain token.
            double chain_mse = 0.0;
            std::vector<Eigen::Vector2d> dchain(slots, Eigen::Vector2d::Zero());
            if (config.fen.chain_token && config.lambda_chain > 0.0) {
                std::vector<Eigen::Vector2d> targets(slots);
                for (int k = 0; k < slots; ++k) targets[k] = examples[chain_idx[k % batch]].label;
                chain_mse = mse_loss_grad(chain_pred, targets, config.lambda_chain, dchain);
            }

            // Second pass: recompute forward (same dropout streams) and
            // accumulate parameter gradients per worker, merged in
            // worker order.
            ps.zero_grad();
            std::vector<ParamStore> worker_ps(config.workers, ps);
            for (auto& wp : worker_ps) wp.zero_grad();
            parallel_slots(slots, config.workers, [&](int slot, int worker) {
                Fen::Cache cache;
                Rng drop(mix_seed(config.seed, this_step, slot));
                result.fen.forward(ps, input_of(slot), cache, /*train=*/true, &drop, nullptr);
                Eigen::Vector2d dc = dchain[slot];
                result.fen.backward(worker_ps[worker], cache, demb[slot],
                                    config.fen.chain_token ? &dc : nullptr);
            });
            for (const auto& wp : worker_ps)
                ps.grad += wp.grad;

            double total = triplet_total + config.lambda_orth * orth + config.lambda_cov * cov +
                           config.lambda_chain * chain_mse;
            if (!std::isfinite(total)) {
                ps.value = snapshot;
                result.diverged = true;
                if (logger) logger(elog);
                result.log.push_back(elog);
                return result;
            }
            elog.triplet += triplet_total;
            elog.orth += orth;
            elog.cov += cov;
            elog.chain_mse += chain_mse;
            elog.total += total;
            ++steps_done;

            adam.step(ps);
        }

        double denom = std::max(1, steps_done);
        elog.triplet /= denom;
        elog.orth /= denom;
        elog.cov /= denom;
        elog.chain_mse /= denom;
        elog.total /= denom;

        // Validation: AUC of mean window similarity over the val pair grid.
        if (n_val >= 2) {
            std::vector<Mat> va(n_val), vp(n_val);
            parallel_slots(2 * n_val, config.workers, [&](int slot, int) {
                int c = n_train + slot % n_val;
                Mat e = fen_embed(ps, result.fen, slot < n_val ? examples[c].anchor
                                                               : examples[c].positive);
                (slot < n_val ? va : vp)[slot % n_val] = std::move(e);
            });
            Mat sims = mean_window_sim_matrix(va, vp);
            std::vector<double> scores;
            std::vector<int> labels;
            for (int i = 0; i < n_val; ++i)
                for (int j = 0; j < n_val; ++j) {
                    scores.push_back(sims(i, j));
                    labels.push_back(i == j ? 1 : 0);
                }
            elog.val_auc = auc_score(scores, labels);
        }

        snapshot = ps.value;
        result.log.push_back(elog);
        if (logger) logger(elog);
    }
    return result;
}

HeadTrainResult train_head(const std::vector<Mat>& anchor_embs,
                           const std::vector<Mat>& positive_embs, const HeadTrainConfig& config,
                           const EpochLogger& logger) {
    int n = static_cast<int>(anchor_embs.size());
    if (n < 2 || positive_embs.size() != anchor_embs.size())
        throw std::invalid_argument("train_head: need at least 2 embedding pairs");

    int w = static_cast<int>(anchor_embs.front().cols());
    Rng rng(config.seed);

    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
        features.push_back(window_similarities(anchor_embs[i], positive_embs[i]));
        labels.push_back(1);
        for (int k = 0; k < config.neg_per_pos; ++k) {
            int j = static_cast<int>(rng.uniform_int(0, n - 1));
            while (j == i) j = static_cast<int>(rng.uniform_int(0, n - 1));
            features.push_back(window_similarities(anchor_embs[i], positive_embs[j]));
            labels.push_back(0);
        }
    }
    if (std::count(labels.begin(), labels.end(), 1) == 0 ||
        std::count(labels.begin(), labels.end(), 0) == 0)
        throw std::invalid_argument("train_head: class-degenerate training set");

    HeadTrainResult result;
    HeadConfig hc;
    hc.input_dim = w;
    hc.hidden_dim = config.hidden;
    Rng init(config.seed ^ 0xabcdef);
    result.head = SimilarityHead(hc, result.params, init);
    ParamStore& ps = result.params;

    int m = static_cast<int>(features.size());
    int batch = std::min(config.batch_size, m);
    int steps = std::max(1, m / batch);
    Adam adam(config.lr, steps * config.epochs);

    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double epoch_loss = 0.0;
        for (int step = 0; step < steps; ++step) {
            Mat x(w, batch);
            std::vector<int> y(batch);
            for (int k = 0; k < batch; ++k) {
                int idx = order[step * batch + k];
                for (int r = 0; r < w; ++r) x(r, k) = features[idx][r];
                y[k] = labels[idx];
            }
            SimilarityHead::Cache cache;
            Mat probs = result.head.forward(ps, x, cache);
            ps.zero_grad();
            epoch_loss += result.head.bce_backward(ps, cache, probs, y);
            adam.step(ps);
        }
        result.epoch_loss.push_back(epoch_loss / steps);
        if (logger) {
            EpochLog el;
            el.epoch = epoch;
            el.total = epoch_loss / steps;
            logger(el);
        }
    }

    // Training accuracy at 0.5.
    int correct = 0;
    for (int i = 0; i < m; ++i) {
        Mat x(w, 1);
        for (int r = 0; r < w; ++r) x(r, 0) = features[i][r];
        SimilarityHead::Cache cache;
        double p = result.head.forward(ps, x, cache)(0, 0);
        if ((p >= 0.5) == (labels[i] == 1)) ++correct;
    }
    result.train_accuracy = static_cast<double>(correct) / m;
    return result;
}

ChainLenTrainResult train_chainlen(const std::vector<ChainLenExample>& examples,
                                   const ChainLenTrainConfig& config, const EpochLogger& logger) {
    config.validate();
    int n = static_cast<int>(examples.size());
    if (n < 2) throw std::invalid_argument("train_chainlen: need at least 2 examples");

    ChainLenTrainResult result;
    Rng init(config.seed);
    result.net = ChainLenNet(config.net, result.params, init);
    ParamStore& ps = result.params;

    int batch = std::min(config.batch_size, n);
    int steps = std::max(1, n / batch);
    Adam adam(config.lr, steps * config.epochs);
    Rng rng(config.seed ^ 0x77);

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Vec snapshot = ps.value;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double epoch_mse = 0.0;
        for (int step = 0; step < steps; ++step) {
            std::vector<const std::vector<double>*> inputs(batch);
            std::vector<Eigen::Vector2d> targets(batch);
            for (int k = 0; k < batch; ++k) {
                const auto& ex = examples[order[step * batch + k]];
                inputs[k] = &ex.tensor;
                targets[k] = ex.label;
            }
            ChainLenNet::Cache cache;
            Mat pred = result.net.forward_batch(ps, inputs, cache, /*train=*/true);

            std::vector<Eigen::Vector2d> preds(batch);
            for (int k = 0; k < batch; ++k) preds[k] = pred.col(k);
            std::vector<Eigen::Vector2d> dpreds;
            double mse = mse_loss_grad(preds, targets, 1.0, dpreds);
            if (!std::isfinite(mse)) {
                ps.value = snapshot;
                result.diverged = true;
                return result;
            }
            Mat dout(2, batch);
            for (int k = 0; k < batch; ++k) dout.col(k) = dpreds[k];
            ps.zero_grad();
            result.net.backward(ps, cache, dout);
            adam.step(ps);
            epoch_mse += mse;
        }
        result.epoch_mse.push_back(epoch_mse / steps);
        snapshot = ps.value;
        if (logger) {
            EpochLog el;
            el.epoch = epoch;
            el.total = epoch_mse / steps;
            logger(el);
        }
    }
    return result;
}

Eigen::Vector2d chainlen_predict(ParamStore& ps, ChainLenNet& net, const std::vector<double>& x) {
    ChainLenNet::Cache cache;
    std::vector<const std::vector<double>*> inputs{&x};
    Mat pred = net.forward_batch(ps, inputs, cache, /*train=*/false);
    return pred.col(0);
}

double correlation_score(const CorrelatorBundle& bundle, const Mat& emb_a, const Mat& emb_b) {
    auto sims = window_similarities(emb_a, emb_b);
    Mat x(static_cast<int>(sims.size()), 1);
    for (size_t r = 0; r < sims.size(); ++r) x(static_cast<int>(r), 0) = sims[r];
    SimilarityHead::Cache cache;
    return bundle.head.forward(bundle.head_params, x, cache)(0, 0);
}

}  // namespace sst::nn
