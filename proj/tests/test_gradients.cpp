#include "doctest.h"
#include "gradcheck.hpp"
#include "sst/nn/layers.hpp"

using namespace sst;
using namespace sst::nn;

namespace {

// Layer-level finite differences for faster diagnostics than the
// end-to-end sweep.
template <typename Forward>
void check_param_grads(ParamStore& ps, const Forward& loss_of_params, double h = 1e-6,
                       double tol = 1e-5) {
    for (size_t i = 0; i < static_cast<size_t>(ps.value.size()); ++i) {
        double saved = ps.value[i];
        ps.value[i] = saved + h;
        double lp = loss_of_params();
        ps.value[i] = saved - h;
        double lm = loss_of_params();
        ps.value[i] = saved;
        double fd = (lp - lm) / (2 * h);
        double ga = ps.grad[i];
        double denom = std::max({std::abs(fd), std::abs(ga), 1e-6});
        CHECK(std::abs(fd - ga) / denom <= tol);
    }
}

Mat random_mat(Rng& rng, int r, int c) {
    Mat m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("conv1d parameter and input gradients") {
    for (bool same_pad : {true, false}) {
        for (int stride : {1, 2, 3}) {
            ParamStore ps;
            Rng rng(1);
            Conv1d conv(ps, "c", 3, 4, 3, stride, same_pad, rng);
            Mat x = random_mat(rng, 3, 12);
            Mat target = random_mat(rng, 4, conv.out_len(12));

            auto loss = [&] {
                Conv1d::Cache cache;
                Mat y = conv.forward(ps, x, cache);
                return 0.5 * (y - target).squaredNorm();
            };
            Conv1d::Cache cache;
            Mat y = conv.forward(ps, x, cache);
            ps.zero_grad();
            Mat dx = conv.backward(ps, y - target, cache);
            check_param_grads(ps, loss);

            // input gradient
            const double h = 1e-6;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 12; ++c) {
                    double saved = x(r, c);
                    x(r, c) = saved + h;
                    double lp = loss();
                    x(r, c) = saved - h;
                    double lm = loss();
                    x(r, c) = saved;
                    double fd = (lp - lm) / (2 * h);
                    CHECK(std::abs(fd - dx(r, c)) /
                              std::max({std::abs(fd), std::abs(dx(r, c)), 1e-6}) <=
                          1e-5);
                }
        }
    }
}

TEST_CASE("layer norm gradients") {
    ParamStore ps;
    Rng rng(2);
    LayerNorm ln(ps, "ln", 6);
    Mat x = random_mat(rng, 6, 5);
    Mat target = random_mat(rng, 6, 5);

    auto loss = [&] {
        LayerNorm::Cache cache;
        Mat y = ln.forward(ps, x, cache);
        return 0.5 * (y - target).squaredNorm();
    };
    LayerNorm::Cache cache;
    Mat y = ln.forward(ps, x, cache);
    ps.zero_grad();
    Mat dx = ln.backward(ps, y - target, cache);
    check_param_grads(ps, loss);

    const double h = 1e-6;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 5; ++c) {
            double saved = x(r, c);
            x(r, c) = saved + h;
            double lp = loss();
            x(r, c) = saved - h;
            double lm = loss();
            x(r, c) = saved;
            double fd = (lp - lm) / (2 * h);
            CHECK(std::abs(fd - dx(r, c)) / std::max({std::abs(fd), std::abs(dx(r, c)), 1e-6}) <=
                  1e-5);
        }
}

TEST_CASE("gelu derivative") {
    Rng rng(3);
    Mat x = random_mat(rng, 4, 4);
    Mat dy = Mat::Ones(4, 4);
    Mat dx = gelu_backward(dy, x);
    const double h = 1e-6;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            Mat xp = x, xm = x;
            xp(r, c) += h;
            xm(r, c) -= h;
            double fd = (gelu(xp)(r, c) - gelu(xm)(r, c)) / (2 * h);
            CHECK(dx(r, c) == doctest::Approx(fd).epsilon(1e-5));
        }
}

// Subsampled end-to-end sweeps; the acceptance suite runs the full
// parameter set for every loss.
TEST_CASE("encoder loss gradients match finite differences (subsampled)") {
    gradcheck::TinyHarness harness(29);
    for (auto kind : {gradcheck::LossKind::Triplet, gradcheck::LossKind::Hybrid,
                      gradcheck::LossKind::Orth, gradcheck::LossKind::Cov,
                      gradcheck::LossKind::MultiTask}) {
        auto result = harness.check(kind, 1e-5, 1e-4, /*stride=*/13);
        INFO(gradcheck::loss_name(kind), " worst=", result.worst_param,
             " rel=", result.max_rel_err);
        CHECK(result.failures == 0);
        CHECK(result.checked > 100);
    }
}
