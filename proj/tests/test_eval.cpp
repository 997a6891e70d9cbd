#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>

#include "doctest.h"
#include "odm/dataset_stats.hpp"
#include "odm/eval.hpp"
#include "odm/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace odm;
using test::make_instance;

namespace {

Box tile(int index) {
    const double x0 = index * 200.0;
    return Box{x0, 0.0, x0 + 100.0, 100.0};
}

ScoredPrediction pred(double score, const Box& box, int object = 0, int verb = 0,
                      int instance_id = 0) {
    return ScoredPrediction{instance_id, object, verb, score, box, box};
}

GroundTruthPair gt(const Box& box) { return GroundTruthPair{box, box}; }

}  // namespace

TEST_CASE("iou") {
    CHECK(iou(Box{0, 0, 10, 10}, Box{0, 0, 10, 10}) == 1.0);
    CHECK(iou(Box{0, 0, 10, 10}, Box{20, 20, 30, 30}) == 0.0);
    CHECK(iou(Box{0, 0, 10, 10}, Box{5, 5, 15, 15}) ==
          doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    CHECK_THROWS_AS(iou(Box{5, 5, 5, 9}, Box{0, 0, 1, 1}), std::invalid_argument);
}

TEST_CASE("match_and_ap reference cases") {
    SUBCASE("hand-enumerated envelope") {
        // [TP, FP, TP, FP] against 2 ground truths
        std::vector<ScoredPrediction> preds{pred(0.9, tile(0)), pred(0.8, tile(9)),
                                            pred(0.7, tile(1)), pred(0.6, tile(8))};
        const std::vector<GroundTruthPair> gts{gt(tile(0)), gt(tile(1))};
        CHECK(match_and_ap(preds, gts) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("perfect predictions") {
        std::vector<ScoredPrediction> preds{pred(0.9, tile(0)), pred(0.8, tile(1))};
        CHECK(match_and_ap(preds, {gt(tile(0)), gt(tile(1))}) == 1.0);
    }
    SUBCASE("everything misses") {
        std::vector<ScoredPrediction> preds{pred(0.9, tile(5)), pred(0.8, tile(6))};
        CHECK(match_and_ap(preds, {gt(tile(0))}) == 0.0);
    }
    SUBCASE("no predictions at all") {
        CHECK(match_and_ap({}, {gt(tile(0))}) == 0.0);
    }
    SUBCASE("zero ground truth is excluded upstream") {
        CHECK_THROWS_AS(match_and_ap({pred(0.9, tile(0))}, {}), std::invalid_argument);
    }
    SUBCASE("mixed classes are rejected") {
        std::vector<ScoredPrediction> preds{pred(0.9, tile(0), 0, 0),
                                            pred(0.8, tile(1), 0, 1)};
        CHECK_THROWS_AS(match_and_ap(preds, {gt(tile(0))}), std::invalid_argument);
    }
    SUBCASE("iou exactly at the threshold does not match") {
        // equal squares half-overlapping: iou = 1/3; threshold 1/3 must reject
        std::vector<ScoredPrediction> preds{pred(0.9, Box{0, 0, 10, 10})};
        CHECK(match_and_ap(preds, {gt(Box{5, 0, 15, 10})}, 1.0 / 3.0) == 0.0);
        CHECK(match_and_ap(preds, {gt(Box{5, 0, 15, 10})}, 0.3) == 1.0);
    }
}

namespace {

struct RandomCase {
    std::vector<ScoredPrediction> preds;
    std::vector<GroundTruthPair> gts;
};

RandomCase random_case(Rng& rng, int max_preds = 50, int max_gt = 10) {
    RandomCase rc;
    const int n_gt = 1 + static_cast<int>(rng.uniform_int(max_gt));
    for (int g = 0; g < n_gt; ++g) rc.gts.push_back(gt(tile(g)));
    const int n_pred = static_cast<int>(rng.uniform_int(max_preds + 1));
    for (int i = 0; i < n_pred; ++i) {
        Box box = tile(static_cast<int>(rng.uniform_int(n_gt + 2)));
        // jitter to produce IoUs straddling the threshold
        const double dx = (rng.uniform() - 0.5) * 100.0;
        const double dy = (rng.uniform() - 0.5) * 60.0;
        box = Box{box.x1 + dx, box.y1 + dy, box.x2 + dx, box.y2 + dy};
        rc.preds.push_back(pred(rng.uniform(), box));
    }
    return rc;
}

}  // namespace

TEST_CASE("match_and_ap equals the brute-force oracle") {
    Rng rng(101);
    for (int round = 0; round < 100; ++round) {
        const RandomCase rc = random_case(rng);
        CHECK(match_and_ap(rc.preds, rc.gts) ==
              doctest::Approx(test::brute_force_ap(rc.preds, rc.gts, 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("ap is invariant to monotone score transforms") {
    Rng rng(103);
    for (int round = 0; round < 50; ++round) {
        RandomCase rc = random_case(rng, 30, 6);
        const double before = match_and_ap(rc.preds, rc.gts);
        for (auto& p : rc.preds) p.score = (p.score + 1.0) / 3.0;
        CHECK(match_and_ap(rc.preds, rc.gts) == before);
    }
}

TEST_CASE("a duplicate prediction below all scores never raises ap") {
    Rng rng(104);
    for (int round = 0; round < 50; ++round) {
        RandomCase rc = random_case(rng, 30, 6);
        if (rc.preds.empty()) continue;
        for (auto& p : rc.preds) p.score = 0.2 + 0.8 * p.score;
        const double before = match_and_ap(rc.preds, rc.gts);
        rc.preds.push_back(pred(0.1, rc.preds.front().human_box));
        CHECK(match_and_ap(rc.preds, rc.gts) <= before + 1e-15);
    }
}

namespace {

struct Scenario {
    std::vector<HoiInstance> train;
    std::vector<HoiInstance> test;
    DatasetStats stats;
    int num_objects;
    int num_verbs;
};

Scenario make_scenario(Rng& rng, int m = 2, int c = 4, int n_train = 120, int n_test = 60) {
    std::vector<HoiInstance> train, test;
    for (int i = 0; i < n_train; ++i) {
        const int o = static_cast<int>(rng.uniform_int(m));
        const int t = rng.uniform() < 0.7 ? 0 : 1 + static_cast<int>(rng.uniform_int(c - 1));
        train.push_back(make_instance(o, {t}, c));
    }
    for (int i = 0; i < n_test; ++i) {
        const int o = static_cast<int>(rng.uniform_int(m));
        std::vector<int> verbs;
        if (i % 10 != 9) verbs.push_back(rng.uniform() < 0.7 ? 0 : 1 + static_cast<int>(
                                             rng.uniform_int(c - 1)));
        HoiInstance inst = make_instance(o, verbs, c);
        inst.human_box = tile(i);
        inst.object_box = tile(i);
        inst.split = Split::test;
        test.push_back(inst);
    }
    DatasetStats stats = build_stats(train, m, c);
    return Scenario{std::move(train), std::move(test), std::move(stats), m, c};
}

// emits every (object-of-instance, verb) prediction from a score table
std::vector<ScoredPrediction> predictions_from_scores(
    const Scenario& sc, const std::function<double(const HoiInstance&, int)>& score) {
    std::vector<ScoredPrediction> preds;
    for (std::size_t i = 0; i < sc.test.size(); ++i) {
        const auto& inst = sc.test[i];
        for (int t = 0; t < sc.num_verbs; ++t)
            preds.push_back(ScoredPrediction{static_cast<int>(i), inst.object, t,
                                             score(inst, t), *inst.human_box,
                                             *inst.object_box});
    }
    return preds;
}

}  // namespace

TEST_CASE("an oracle predictor scores one everywhere") {
    Rng rng(7);
    const Scenario sc = make_scenario(rng);
    const auto preds = predictions_from_scores(
        sc, [](const HoiInstance& inst, int t) { return inst.verbs[t] ? 1.0 : 0.0; });
    const EvalReport report = evaluate(preds, sc.test, sc.stats, EvalProtocol{});

    CHECK(report.standard.map_full == 1.0);
    if (report.standard.rare_defined) CHECK(report.standard.map_rare == 1.0);
    CHECK(report.object_bias.or_defined);
    CHECK(report.object_bias.object_rare_map == 1.0);
    CHECK(report.object_bias.object_nonrare_map == 1.0);
    CHECK(report.object_bias.ave == 1.0);
}

TEST_CASE("alpha zero leaves the object-rare group undefined and flagged") {
    Rng rng(8);
    const Scenario sc = make_scenario(rng);
    const auto preds = predictions_from_scores(
        sc, [](const HoiInstance& inst, int t) { return inst.verbs[t] ? 1.0 : 0.0; });
    EvalProtocol protocol;
    protocol.alpha = 0.0;
    const EvalReport report = evaluate(preds, sc.test, sc.stats, protocol);
    CHECK_FALSE(report.object_bias.or_defined);
    CHECK(report.object_bias.onr_defined);
}

TEST_CASE("single-class table collapses to its ap") {
    std::vector<HoiInstance> train{make_instance(0, {0}, 1)};
    std::vector<HoiInstance> test;
    HoiInstance pos = make_instance(0, {0}, 1);
    pos.human_box = tile(0);
    pos.object_box = tile(0);
    test.push_back(pos);
    const DatasetStats stats = build_stats(train, 1, 1);
    std::vector<ScoredPrediction> preds{pred(0.4, tile(0))};

    const EvalReport report = evaluate(preds, test, stats, EvalProtocol{});
    REQUIRE(report.per_class.size() == 1);
    CHECK(report.standard.map_full == report.per_class[0].ap);
    CHECK(report.per_class[0].ap == match_and_ap(preds, {gt(tile(0))}));
}

TEST_CASE("protocol aggregation matches an independent recomputation") {
    Rng rng(9);
    for (int round = 0; round < 10; ++round) {
        const Scenario sc = make_scenario(rng);
        const auto preds = predictions_from_scores(
            sc, [&](const HoiInstance&, int) { return rng.uniform(); });
        const EvalProtocol protocol;
        const EvalReport report = evaluate(preds, sc.test, sc.stats, protocol);

        // slow-path recomputation from the per-class table
        double full = 0.0;
        std::vector<double> rare_sum(sc.num_objects, 0.0), nonrare_sum(sc.num_objects, 0.0);
        std::vector<int> rare_n(sc.num_objects, 0), nonrare_n(sc.num_objects, 0);
        for (const auto& e : report.per_class) {
            full += e.ap;
            if (e.object_rare) {
                rare_sum[e.object] += e.ap;
                ++rare_n[e.object];
            } else {
                nonrare_sum[e.object] += e.ap;
                ++nonrare_n[e.object];
            }
            CHECK(e.object_rare ==
                  (static_cast<double>(e.train_count) /
                       static_cast<double>(sc.stats.object_count(e.object)) <
                   protocol.alpha));
        }
        full /= static_cast<double>(report.per_class.size());
        CHECK(report.standard.map_full == doctest::Approx(full).epsilon(1e-15));

        double or_total = 0.0, onr_total = 0.0;
        int or_objects = 0, onr_objects = 0;
        for (int o = 0; o < sc.num_objects; ++o) {
            if (rare_n[o] > 0) {
                or_total += rare_sum[o] / rare_n[o];
                ++or_objects;
            }
            if (nonrare_n[o] > 0) {
                onr_total += nonrare_sum[o] / nonrare_n[o];
                ++onr_objects;
            }
        }
        if (or_objects > 0) {
            CHECK(report.object_bias.object_rare_map ==
                  doctest::Approx(or_total / or_objects).epsilon(1e-15));
            CHECK(report.object_bias.objects_with_rare == or_objects);
        }
        if (onr_objects > 0)
            CHECK(report.object_bias.object_nonrare_map ==
                  doctest::Approx(onr_total / onr_objects).epsilon(1e-15));
        if (or_objects > 0 && onr_objects > 0)
            CHECK(report.object_bias.ave ==
                  doctest::Approx(0.5 * (report.object_bias.object_rare_map +
                                         report.object_bias.object_nonrare_map))
                      .epsilon(1e-15));
    }
}

TEST_CASE("excluded classes are the train classes without test positives") {
    std::vector<HoiInstance> train{make_instance(0, {0}, 3), make_instance(0, {1}, 3)};
    std::vector<HoiInstance> test;
    HoiInstance pos = make_instance(0, {0}, 3);
    pos.human_box = tile(0);
    pos.object_box = tile(0);
    pos.split = Split::test;
    test.push_back(pos);
    const DatasetStats stats = build_stats(train, 1, 3);

    const EvalReport report =
        evaluate({pred(0.5, tile(0), 0, 0)}, test, stats, EvalProtocol{});
    REQUIRE(report.excluded.size() == 1);
    CHECK(report.excluded[0] == std::pair<int, int>{0, 1});
}

TEST_CASE("eval report json round trip") {
    Rng rng(10);
    const Scenario sc = make_scenario(rng);
    const auto preds = predictions_from_scores(
        sc, [&](const HoiInstance&, int) { return rng.uniform(); });
    EvalReport report = evaluate(preds, sc.test, sc.stats, EvalProtocol{});
    report.vocab_hash = "feedface";
    const EvalReport back = eval_report_from_json(eval_report_to_json(report));
    CHECK(back.standard.map_full == report.standard.map_full);
    CHECK(back.object_bias.object_rare_map == report.object_bias.object_rare_map);
    CHECK(back.per_class.size() == report.per_class.size());
    CHECK(back.per_class[0].ap == report.per_class[0].ap);
    CHECK(back.excluded == report.excluded);
    CHECK(back.vocab_hash == "feedface");
}

TEST_CASE("predictions file round trip") {
    Rng rng(11);
    const Scenario sc = make_scenario(rng, 2, 3, 40, 20);
    const auto preds = predictions_from_scores(
        sc, [&](const HoiInstance&, int) { return rng.uniform(); });
    const std::string path =
        (std::filesystem::temp_directory_path() / "odm_preds_test.jsonl").string();
    save_predictions(path, preds);
    const auto back = load_predictions(path);
    REQUIRE(back.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(back[i].instance_id == preds[i].instance_id);
        CHECK(back[i].score == preds[i].score);
        CHECK(back[i].human_box.x1 == preds[i].human_box.x1);
    }
}
