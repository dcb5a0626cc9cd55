#include <set>

#include "doctest.h"
#include "sst/nn/losses.hpp"
#include "sst/nn/mining.hpp"
#include "sst/rng.hpp"

using namespace sst;
using namespace sst::nn;

namespace {

std::vector<Mat> random_embeddings(Rng& rng, int count, int dim, int windows) {
    std::vector<Mat> out;
    for (int i = 0; i < count; ++i) {
        Mat m(dim, windows);
        for (int c = 0; c < windows; ++c)
            for (int r = 0; r < dim; ++r) m(r, c) = rng.uniform(-1.0, 1.0);
        out.push_back(m);
    }
    return out;
}

double mean_sim(const Mat& a, const Mat& b) {
    auto sims = window_similarities(a, b);
    double total = 0.0;
    for (double s : sims) total += s;
    return total / static_cast<double>(sims.size());
}

}  // namespace

TEST_CASE("batch of two forces the other item as negative") {
    Rng rng(1);
    auto anchors = random_embeddings(rng, 2, 8, 5);
    auto positives = random_embeddings(rng, 2, 8, 5);
    auto triplets = mine_batch_hard(anchors, positives);
    REQUIRE(triplets.size() == 2);
    CHECK(triplets[0].anchor == 0);
    CHECK(triplets[0].positive == 0);
    CHECK(triplets[0].negative == 1);
    CHECK(triplets[1].negative == 0);
}

TEST_CASE("batch-hard equals exhaustive argmax on random batches") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        int b = 2 + static_cast<int>(rng.uniform_int(0, 6));
        auto anchors = random_embeddings(rng, b, 6, 4);
        auto positives = random_embeddings(rng, b, 6, 4);
        auto triplets = mine_batch_hard(anchors, positives);
        REQUIRE(static_cast<int>(triplets.size()) == b);
        for (int i = 0; i < b; ++i) {
            int best = -1;
            double best_sim = -2.0;
            for (int j = 0; j < b; ++j) {
                if (j == i) continue;
                double s = mean_sim(anchors[i], positives[j]);
                if (s > best_sim) {
                    best = j;
                    best_sim = s;
                }
            }
            CHECK(triplets[i].negative == best);
        }
    }
}

TEST_CASE("ties break to the lowest index") {
    Rng rng(3);
    auto anchors = random_embeddings(rng, 4, 8, 5);
    auto positives = random_embeddings(rng, 4, 8, 5);
    positives[3] = positives[1];  // duplicate: sims to any anchor tie
    auto triplets = mine_batch_hard(anchors, positives);
    for (const auto& t : triplets) {
        if (t.anchor == 1) continue;  // its own positive is excluded
        double s1 = mean_sim(anchors[t.anchor], positives[1]);
        double s3 = mean_sim(anchors[t.anchor], positives[3]);
        REQUIRE(s1 == doctest::Approx(s3));
        CHECK(t.negative != 3);  // index 1 wins the tie
    }
}

TEST_CASE("batch-all keeps exactly the loss-bearing triplets") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        int b = 2 + static_cast<int>(rng.uniform_int(0, 6));
        auto anchors = random_embeddings(rng, b, 6, 4);
        auto positives = random_embeddings(rng, b, 6, 4);
        double margin = 0.3;
        auto triplets = mine_batch_all(anchors, positives, margin);
        std::set<std::pair<int, int>> mined;
        for (const auto& t : triplets) mined.insert({t.anchor, t.negative});
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j) {
                if (i == j) continue;
                double loss = triplet_loss(window_similarities(anchors[i], positives[i]),
                                           window_similarities(anchors[i], positives[j]), margin);
                CHECK(mined.count({i, j}) == (loss > 0.0 ? 1 : 0));
            }
    }
}

TEST_CASE("batch-all edge cases: all-hard and perfectly separated") {
    // Anchors equal to every wrong positive and opposite to their own:
    // every pair violates.
    Mat base = Mat::Ones(4, 3);
    std::vector<Mat> anchors = {base, base};
    std::vector<Mat> positives = {-base, -base};
    auto all_hard = mine_batch_all(anchors, positives, 0.5);
    CHECK(all_hard.size() == 2);  // B(B-1) with B=2

    // Anchors aligned with their own positive and opposite to others.
    std::vector<Mat> a2 = {base, -base};
    std::vector<Mat> p2 = {base, -base};
    auto separated = mine_batch_all(a2, p2, 0.5);
    CHECK(separated.empty());

    CHECK_THROWS_AS(mine_batch_hard(std::vector<Mat>{base}, std::vector<Mat>{base}),
                    std::invalid_argument);
}
