#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "sst/rng.hpp"

namespace sst::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using CMatMap = Eigen::Map<const Eigen::MatrixXd>;

// Flat storage for named parameter tensors and their gradients.
// Layers keep entry indices and fetch views at use time, so all
// registration must happen before the first forward pass.
//
// The backing store is Eigen-aligned and entry offsets are padded to
// the SIMD packet size: every tensor view then has the same alignment
// on every run, which keeps vectorized reductions bit-reproducible
// regardless of heap layout.
class ParamStore {
public:
    struct Entry {
        std::string name;
        int rows = 0;
        int cols = 0;
        size_t offset = 0;
        bool trainable = true;
    };

    size_t add(const std::string& name, int rows, int cols, bool trainable = true);

    MatMap mat(size_t idx) {
        const Entry& e = entries_[idx];
        return MatMap(value.data() + e.offset, e.rows, e.cols);
    }
    CMatMap mat(size_t idx) const {
        const Entry& e = entries_[idx];
        return CMatMap(value.data() + e.offset, e.rows, e.cols);
    }
    MatMap grad_mat(size_t idx) {
        const Entry& e = entries_[idx];
        return MatMap(grad.data() + e.offset, e.rows, e.cols);
    }

    const std::vector<Entry>& entries() const { return entries_; }
    size_t count() const { return static_cast<size_t>(value.size()); }
    void zero_grad() { grad.setZero(); }

    Vec value;
    Vec grad;

private:
    std::vector<Entry> entries_;
};

// Adam with cosine learning-rate decay over a fixed horizon.
class Adam {
public:
    Adam(double lr, int total_steps) : lr_(lr), total_steps_(total_steps) {}

    void step(ParamStore& ps);
    int steps_taken() const { return t_; }

private:
    double lr_;
    int total_steps_;
    int t_ = 0;
    std::vector<double> m_, v_;
};

// Uniform(-limit, limit) with limit = sqrt(1 / fan_in).
void init_uniform_fanin(ParamStore& ps, size_t idx, int fan_in, Rng& rng);

}  // namespace sst::nn
