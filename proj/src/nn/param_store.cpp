#include "sst/nn/param_store.hpp"

#include <cmath>
#include <stdexcept>

namespace sst::nn {

size_t ParamStore::add(const std::string& name, int rows, int cols, bool trainable) {
    for (const auto& e : entries_)
        if (e.name == name) throw std::invalid_argument("duplicate parameter: " + name);
    // Pad to the packet size (8 doubles covers AVX-512).
    constexpr size_t kPad = 8;
    size_t offset = (static_cast<size_t>(value.size()) + kPad - 1) / kPad * kPad;
    Entry e;
    e.name = name;
    e.rows = rows;
    e.cols = cols;
    e.offset = offset;
    e.trainable = trainable;
    entries_.push_back(e);
    size_t total = offset + static_cast<size_t>(rows) * cols;
    size_t old = value.size();
    value.conservativeResize(static_cast<Eigen::Index>(total));
    value.tail(static_cast<Eigen::Index>(total - old)).setZero();
    grad.setZero(static_cast<Eigen::Index>(total));
    return entries_.size() - 1;
}

void Adam::step(ParamStore& ps) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (m_.size() != static_cast<size_t>(ps.value.size())) {
        m_.assign(static_cast<size_t>(ps.value.size()), 0.0);
        v_.assign(static_cast<size_t>(ps.value.size()), 0.0);
    }
    ++t_;
    double progress = total_steps_ > 1 ? static_cast<double>(t_ - 1) / (total_steps_ - 1) : 0.0;
    if (progress > 1.0) progress = 1.0;
    double lr = lr_ * 0.5 * (1.0 + std::cos(M_PI * progress));
    double bc1 = 1.0 - std::pow(beta1, t_);
    double bc2 = 1.0 - std::pow(beta2, t_);

    // Flat update; non-trainable entries are skipped per-entry.
    for (const auto& e : ps.entries()) {
        if (!e.trainable) continue;
        size_t end = e.offset + static_cast<size_t>(e.rows) * e.cols;
        for (size_t i = e.offset; i < end; ++i) {
            double g = ps.grad[i];
            m_[i] = beta1 * m_[i] + (1.0 - beta1) * g;
            v_[i] = beta2 * v_[i] + (1.0 - beta2) * g * g;
            double mhat = m_[i] / bc1;
            double vhat = v_[i] / bc2;
            ps.value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

void init_uniform_fanin(ParamStore& ps, size_t idx, int fan_in, Rng& rng) {
    double limit = std::sqrt(1.0 / std::max(1, fan_in));
    auto m = ps.mat(idx);
    for (int c = 0; c < m.cols(); ++c)
        for (int r = 0; r < m.rows(); ++r) m(r, c) = rng.uniform(-limit, limit);
}

}  // namespace sst::nn
