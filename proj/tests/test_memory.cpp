#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "odm/memory.hpp"
#include "odm/rng.hpp"
#include "test_util.hpp"

using namespace odm;
using test::make_instance;
using test::make_label;
using test::random_label;

namespace {

OdmConfig small_config(int num_objects, std::vector<double> weights, double tau = 0.0,
                       int capacity = 4, int read_count = 2, int feature_dim = 2) {
    OdmConfig cfg;
    cfg.capacity = capacity;
    cfg.read_count = read_count;
    cfg.feature_dim = feature_dim;
    cfg.thresholds.assign(num_objects, tau);
    cfg.weights.assign(num_objects, std::move(weights));
    return cfg;
}

std::vector<double> feat(double v) { return {v, -v}; }

}  // namespace

TEST_CASE("weighted hamming distance") {
    CHECK(weighted_hamming_distance(make_label({0, 2}, 3), make_label({0, 2}, 3),
                                    {1, 2, 4}) == 0.0);
    CHECK(weighted_hamming_distance(make_label({0, 2}, 3), make_label({0, 1}, 3),
                                    {1, 2, 4}) == 6.0);
    CHECK_THROWS_AS(weighted_hamming_distance(make_label({0}, 2), make_label({0}, 3), {1, 1, 1}),
                    std::invalid_argument);
}

TEST_CASE("hamming score") {
    CHECK(hamming_score(make_label({}, 2), {3, 1}) == 0.0);
    CHECK(hamming_score(make_label({0, 1}, 2), {3, 1}) == 4.0);
    CHECK_THROWS_AS(hamming_score(make_label({0}, 2), {1.0}), std::invalid_argument);
}

TEST_CASE("hamming operations match the loop oracle") {
    Rng rng(21);
    const int c = 117;
    for (int round = 0; round < 1000; ++round) {
        const Label a = random_label(rng, c);
        const Label b = random_label(rng, c);
        std::vector<double> w(c);
        for (double& v : w) v = rng.uniform() * 10.0;

        double dist = 0.0, score = 0.0;
        for (int t = 0; t < c; ++t) {
            if ((a[t] != 0) ^ (b[t] != 0)) dist += w[t];
            if (a[t]) score += w[t];
        }
        CHECK(weighted_hamming_distance(a, b, w) == dist);
        CHECK(hamming_score(a, w) == score);
    }
}

namespace {

DatasetStats stats_with_counts(const std::vector<long long>& verb_counts, int num_verbs) {
    std::vector<HoiInstance> data;
    for (std::size_t t = 0; t < verb_counts.size(); ++t)
        for (long long i = 0; i < verb_counts[t]; ++i)
            data.push_back(make_instance(0, {static_cast<int>(t)}, num_verbs));
    return build_stats(data, 1, num_verbs);
}

}  // namespace

TEST_CASE("default thresholds") {
    SUBCASE("five or fewer feasible verbs give zero") {
        CHECK(default_thresholds(stats_with_counts({1, 2, 3}, 6)) == std::vector<double>{0.0});
        CHECK(default_thresholds(stats_with_counts({1, 2, 3, 4, 5}, 6)) ==
              std::vector<double>{0.0});
    }
    SUBCASE("third smallest weight above five verbs") {
        // counts 1..6 under N_o = 21: weights sorted {3.5, 4.2, 5.25, 7, 10.5, 21}
        const auto taus = default_thresholds(stats_with_counts({1, 2, 3, 4, 5, 6}, 6));
        CHECK(taus[0] == 21.0 / 4.0);
    }
    SUBCASE("duplicates count toward the third smallest") {
        // counts {3,3,3,2,2,2,1}: N_o = 16, weights {16/3 x3, 8 x3, 16}
        const auto taus = default_thresholds(stats_with_counts({3, 3, 3, 2, 2, 2, 1}, 7));
        CHECK(taus[0] == 16.0 / 3.0);
    }
}

TEST_CASE("read selection order") {
    OdmMemory mem(small_config(1, {1.0, 1.0}));
    SUBCASE("empty cell reads empty") {
        CHECK(mem.read(0, make_label({0}, 2), 2).empty());
    }

    REQUIRE(mem.write(0, feat(1), make_label({0}, 2), 1));
    REQUIRE(mem.write(0, feat(2), make_label({0}, 2), 2));
    REQUIRE(mem.write(0, feat(3), make_label({1}, 2), 3));

    SUBCASE("k covering the cell returns everything") {
        CHECK(mem.read(0, make_label({0}, 2), 10).size() == 3);
    }
    SUBCASE("disjoint label first, then earliest timestamp") {
        const auto picked = mem.read(0, make_label({0}, 2), 2);
        REQUIRE(picked.size() == 2);
        CHECK(picked[0].label == make_label({1}, 2));
        CHECK(picked[1].timestamp == 1);
    }
    SUBCASE("reads never mutate") {
        const std::string before = mem.snapshot().dump();
        (void)mem.read(0, make_label({0}, 2), 2);
        CHECK(mem.snapshot().dump() == before);
    }
    SUBCASE("query must be interactive and object known") {
        CHECK_THROWS_AS(mem.read(0, make_label({}, 2), 1), std::invalid_argument);
        CHECK_THROWS_AS(mem.read(5, make_label({0}, 2), 1), std::invalid_argument);
    }
}

TEST_CASE("write gating and eviction") {
    SUBCASE("below-threshold labels are rejected without mutation") {
        OdmMemory mem(small_config(1, {4.0, 2.0}, /*tau=*/5.0));
        const std::string before = mem.snapshot().dump();
        CHECK_FALSE(mem.write(0, feat(1), make_label({0}, 2), 1));  // score 4 <= 5
        CHECK(mem.snapshot().dump() == before);
        CHECK(mem.write(0, feat(1), make_label({0, 1}, 2), 1));  // score 6 > 5
    }
    SUBCASE("strictly-greater comparison on the threshold") {
        OdmMemory mem(small_config(1, {5.0, 1.0}, /*tau=*/5.0));
        CHECK_FALSE(mem.write(0, feat(1), make_label({0}, 2), 1));      // score 5, not > 5
        CHECK(mem.write(0, feat(1), make_label({0, 1}, 2), 1));         // score 6 > 5
    }
    SUBCASE("negatives never enter the memory") {
        OdmMemory mem(small_config(1, {1.0, 1.0}, /*tau=*/0.0));
        CHECK_FALSE(mem.write(0, feat(1), make_label({}, 2), 1));
        CHECK(mem.cell(0).empty());
    }
    SUBCASE("full cell evicts the longest-resident entry") {
        OdmMemory mem(small_config(1, {1.0, 1.0}, 0.0, /*capacity=*/2));
        REQUIRE(mem.write(0, feat(1), make_label({0}, 2), 3));
        REQUIRE(mem.write(0, feat(2), make_label({1}, 2), 7));
        REQUIRE(mem.write(0, feat(3), make_label({0}, 2), 9));
        REQUIRE(mem.cell(0).size() == 2);
        CHECK(mem.cell(0)[0].timestamp == 7);
        CHECK(mem.cell(0)[1].timestamp == 9);
    }
    SUBCASE("a 100-write feasible stream keeps the most recent 16") {
        OdmMemory mem(small_config(1, {1.0, 1.0}, 0.0, /*capacity=*/16));
        for (int step = 1; step <= 100; ++step)
            REQUIRE(mem.write(0, feat(step), make_label({step % 2}, 2), step));
        REQUIRE(mem.cell(0).size() == 16);
        for (int i = 0; i < 16; ++i) {  // window oracle: steps 85..100 in arrival order
            CHECK(mem.cell(0)[i].timestamp == 85 + i);
            CHECK(mem.cell(0)[i].feature == feat(85 + i));
        }
    }
    SUBCASE("validation errors") {
        OdmMemory mem(small_config(1, {1.0, 1.0}));
        CHECK_THROWS_AS(mem.write(2, feat(1), make_label({0}, 2), 1), std::invalid_argument);
        CHECK_THROWS_AS(mem.write(0, {1.0, 2.0, 3.0}, make_label({0}, 2), 1),
                        std::invalid_argument);
        REQUIRE(mem.write(0, feat(1), make_label({0}, 2), 5));
        CHECK_THROWS_AS(mem.write(0, feat(1), make_label({0}, 2), 5), std::invalid_argument);
    }
}

TEST_CASE("internal clock writes") {
    OdmMemory mem(small_config(1, {1.0, 1.0}));
    CHECK(mem.clock() == 0);
    REQUIRE(mem.write(0, feat(1), make_label({0}, 2)));
    REQUIRE(mem.write(0, feat(2), make_label({1}, 2)));
    CHECK(mem.clock() == 2);
    CHECK(mem.cell(0)[1].timestamp == 2);
}

TEST_CASE("memory behaves deterministically under random operation sequences") {
    Rng rng(31);
    const int c = 5;
    for (int round = 0; round < 300; ++round) {
        const int m = 1 + static_cast<int>(rng.uniform_int(3));
        std::vector<double> w(c);
        for (double& v : w) v = 1.0 + rng.uniform() * 5.0;
        const double tau = rng.uniform() * 3.0;
        auto cfg = small_config(m, w, tau, 3, 2);

        // one recorded op sequence, replayed on two memories
        struct Op {
            bool is_write;
            int object;
            Label label;
            std::vector<double> feature;
        };
        std::vector<Op> ops;
        for (int i = 0; i < 25; ++i)
            ops.push_back(Op{rng.uniform() < 0.7, static_cast<int>(rng.uniform_int(m)),
                             random_label(rng, c, true), feat(rng.uniform())});

        OdmMemory a(cfg), b(cfg);
        long long step = 0;
        for (const auto& op : ops) {
            if (op.is_write) {
                ++step;
                const bool wa = a.write(op.object, op.feature, op.label, step);
                const bool wb = b.write(op.object, op.feature, op.label, step);
                CHECK(wa == wb);
                CHECK(wa == (hamming_score(op.label, w) > tau));
            } else {
                const auto ra = a.read(op.object, op.label, 2);
                const auto rb = b.read(op.object, op.label, 2);
                CHECK(ra.size() == rb.size());
            }
            for (int o = 0; o < m; ++o) CHECK(a.cell(o).size() <= 3);
        }
        CHECK(a.snapshot().dump() == b.snapshot().dump());
    }
}

TEST_CASE("first pick prefers labels disjoint from the query") {
    Rng rng(17);
    const int c = 6;
    for (int round = 0; round < 200; ++round) {
        std::vector<double> w(c);
        for (double& v : w) v = 0.5 + rng.uniform() * 4.0;
        OdmMemory mem(small_config(1, w, 0.0, c, 2));
        // one single-verb entry per class
        for (int t = 0; t < c; ++t)
            REQUIRE(mem.write(0, feat(t), make_label({t}, c), t + 1));

        const int query_verb = static_cast<int>(rng.uniform_int(c));
        const auto picked = mem.read(0, make_label({query_verb}, c), 1);
        REQUIRE(picked.size() == 1);
        CHECK_FALSE(picked[0].label[query_verb]);  // some disjoint entry always exists
    }
}

TEST_CASE("raising the threshold never admits new labels") {
    Rng rng(41);
    const int c = 8;
    for (int round = 0; round < 500; ++round) {
        std::vector<double> w(c);
        for (double& v : w) v = rng.uniform() * 4.0;
        const double tau_lo = rng.uniform() * 5.0;
        const double tau_hi = tau_lo + rng.uniform() * 5.0;
        const Label label = random_label(rng, c, true);
        const bool feasible_hi = hamming_score(label, w) > tau_hi;
        const bool feasible_lo = hamming_score(label, w) > tau_lo;
        if (feasible_hi) CHECK(feasible_lo);
    }
}

TEST_CASE("snapshot layout") {
    OdmMemory mem(small_config(2, {1.0, 2.0}));
    REQUIRE(mem.write(0, feat(1), make_label({1}, 2), 4));
    const auto snap = mem.snapshot();
    CHECK(snap.at("clock") == 4);
    CHECK(snap.at("capacity") == 4);
    REQUIRE(snap.at("cells").size() == 2);
    const auto& entry = snap.at("cells")[0].at("entries")[0];
    CHECK(entry.at("verbs") == std::vector<int>{1});
    CHECK(entry.at("timestamp") == 4);
    CHECK(snap.at("cells")[1].at("entries").empty());
}

TEST_CASE("config validation") {
    auto cfg = small_config(1, {1.0, 1.0});
    cfg.read_count = 9;  // > capacity
    CHECK_THROWS_AS(OdmMemory{cfg}, std::invalid_argument);
    cfg = small_config(1, {1.0, 1.0});
    cfg.capacity = 0;
    CHECK_THROWS_AS(OdmMemory{cfg}, std::invalid_argument);
    cfg = small_config(1, {1.0, 1.0}, -1.0);
    CHECK_THROWS_AS(OdmMemory{cfg}, std::invalid_argument);
}
