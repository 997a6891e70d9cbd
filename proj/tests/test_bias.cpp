#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "odm/bias.hpp"
#include "odm/dataset_stats.hpp"
#include "odm/rng.hpp"
#include "test_util.hpp"

using namespace odm;
using test::make_instance;

namespace {

// long-double KL reference, independent of the production path
long double kl_oracle(const std::vector<double>& p, const std::vector<double>& m) {
    long double kl = 0.0L;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0)
            kl += static_cast<long double>(p[i]) *
                  (std::log(static_cast<long double>(p[i])) -
                   std::log(static_cast<long double>(m[i]))) /
                  std::log(2.0L);
    return kl;
}

long double jsd_oracle(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
    return 0.5L * (kl_oracle(p, m) + kl_oracle(q, m));
}

std::vector<double> random_distribution(Rng& rng, int n) {
    std::vector<double> p(n);
    double total = 0.0;
    for (double& v : p) {
        v = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        total += v;
    }
    if (total == 0.0) {
        p[0] = 1.0;
        return p;
    }
    for (double& v : p) v /= total;
    // renormalize exactly enough for the 1e-9 gate
    double s = 0.0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;
    return p;
}

}  // namespace

TEST_CASE("jsd reference values") {
    CHECK(jsd({0.3, 0.7}, {0.3, 0.7}) == 0.0);
    CHECK(jsd({1.0, 0.0}, {0.0, 1.0}) == 1.0);
    CHECK(jsd({0.5, 0.5}, {1.0, 0.0}) ==
          doctest::Approx(0.311278124459133).epsilon(1e-12));
}

TEST_CASE("jsd input validation") {
    CHECK_THROWS_AS(jsd({0.5, 0.5}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(jsd({1.5, -0.5}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(jsd({0.4, 0.4}, {0.5, 0.5}), std::invalid_argument);  // sums to 0.8
}

TEST_CASE("jsd properties against the long-double oracle") {
    Rng rng(11);
    for (int round = 0; round < 400; ++round) {
        const int n = 2 + static_cast<int>(rng.uniform_int(10));
        const auto p = random_distribution(rng, n);
        const auto q = random_distribution(rng, n);
        const double d = jsd(p, q);

        CHECK(d >= 0.0);
        CHECK(d <= 1.0 + 1e-12);
        CHECK(jsd(q, p) == doctest::Approx(d).epsilon(1e-12));
        CHECK(d == doctest::Approx(static_cast<double>(jsd_oracle(p, q))).epsilon(1e-12));

        // consistent permutation leaves the divergence unchanged
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        std::vector<double> pp(n), qq(n);
        for (int i = 0; i < n; ++i) {
            pp[i] = p[perm[i]];
            qq[i] = q[perm[i]];
        }
        CHECK(jsd(pp, qq) == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("model conditional scores") {
    SUBCASE("identical scores collapse to uniform") {
        ScoreFn flat = [](const HoiInstance&) { return std::vector<double>{0.5, 0.5, 0.5}; };
        std::vector<HoiInstance> data{make_instance(0, {1}, 3), make_instance(0, {2}, 3)};
        const auto p = model_conditional_scores(flat, data, 0, {0, 1, 2});
        for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("single instance normalizes its own scores") {
        ScoreFn fn = [](const HoiInstance&) { return std::vector<double>{0.8, 0.2}; };
        std::vector<HoiInstance> data{make_instance(0, {0}, 2)};
        const auto p = model_conditional_scores(fn, data, 0, {0, 1});
        CHECK(p[0] == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(p[1] == doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("no instances of the object") {
        ScoreFn fn = [](const HoiInstance&) { return std::vector<double>{1.0}; };
        std::vector<HoiInstance> data{make_instance(0, {0}, 1)};
        CHECK_THROWS_AS(model_conditional_scores(fn, data, 1, {0}), std::invalid_argument);
    }
}

TEST_CASE("object rare split") {
    // object 0: 100 interactive instances; verb 1 on 29 of them, verb 2 on 30
    std::vector<HoiInstance> data;
    for (int i = 0; i < 100; ++i) {
        std::vector<int> verbs{0};
        if (i < 29) verbs.push_back(1);
        if (i < 30) verbs.push_back(2);
        data.push_back(make_instance(0, verbs, 4));
    }
    const DatasetStats stats = build_stats(data, 2, 4);
    const RareSplit split = object_rare_split(stats, 0.3);

    REQUIRE(split.objects.size() == 1);
    const auto& part = split.objects.front();
    CHECK(part.rare == std::vector<int>{1});            // 0.29 < 0.3
    CHECK(part.non_rare == std::vector<int>{0, 2});     // boundary 0.30 goes non-rare
    CHECK(split.skipped == std::vector<int>{1});        // object 1 never seen

    CHECK_THROWS_AS(object_rare_split(stats, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(object_rare_split(stats, 1.0), std::invalid_argument);
}

TEST_CASE("object rare split properties") {
    Rng rng(5);
    for (int round = 0; round < 50; ++round) {
        std::vector<HoiInstance> data;
        const int c = 6;
        for (int i = 0; i < 60; ++i) {
            std::vector<int> verbs{static_cast<int>(rng.uniform_int(c))};
            data.push_back(make_instance(static_cast<int>(rng.uniform_int(2)), verbs, c));
        }
        const DatasetStats stats = build_stats(data, 2, c);
        const double lo = 0.1 + 0.3 * rng.uniform();
        const double hi = lo + 0.3 * rng.uniform();
        const RareSplit a = object_rare_split(stats, lo);
        const RareSplit b = object_rare_split(stats, hi);

        for (std::size_t i = 0; i < a.objects.size(); ++i) {
            // partition covers feasible(o) exactly once
            std::vector<int> joined = a.objects[i].rare;
            joined.insert(joined.end(), a.objects[i].non_rare.begin(),
                          a.objects[i].non_rare.end());
            std::sort(joined.begin(), joined.end());
            CHECK(joined == stats.feasible(a.objects[i].object));
            // raising alpha only grows the rare set
            CHECK(b.objects[i].rare.size() >= a.objects[i].rare.size());
            for (int t : a.objects[i].rare)
                CHECK(std::count(b.objects[i].rare.begin(), b.objects[i].rare.end(), t) == 1);
        }
    }
}

TEST_CASE("bias report with a ground-truth oracle") {
    // labels usable as scores: test-conditional divergence must vanish
    ScoreFn oracle = [](const HoiInstance& inst) {
        std::vector<double> s(inst.verbs.size());
        for (std::size_t t = 0; t < s.size(); ++t) s[t] = inst.verbs[t];
        return s;
    };

    Rng rng(3);
    std::vector<HoiInstance> train, test;
    for (int i = 0; i < 200; ++i) {
        const int o = static_cast<int>(rng.uniform_int(2));
        const int t = rng.uniform() < (o == 0 ? 0.8 : 0.3) ? 0 : 1;
        train.push_back(make_instance(o, {t}, 3));
        test.push_back(make_instance(o, {rng.uniform() < (o == 0 ? 0.8 : 0.3) ? 0 : 1}, 3));
    }
    const DistributionReport report = bias_report(oracle, train, test, 2, 3);
    REQUIRE(report.objects.size() == 2);
    for (const auto& rec : report.objects) {
        CHECK(rec.jsd_test_cond == doctest::Approx(0.0).epsilon(1e-10));
        double sum = 0.0;
        for (double v : rec.y_hat) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("bias report when train and test coincide") {
    Rng rng(9);
    std::vector<HoiInstance> data;
    for (int i = 0; i < 120; ++i)
        data.push_back(
            make_instance(0, {static_cast<int>(rng.uniform_int(3))}, 4));
    ScoreFn fn = [&](const HoiInstance&) {
        return std::vector<double>{0.5, 0.3, 0.2, 0.4};
    };
    const DistributionReport report = bias_report(fn, data, data, 1, 4);
    REQUIRE(report.objects.size() == 1);
    CHECK(report.objects[0].jsd_train_cond ==
          doctest::Approx(report.objects[0].jsd_test_cond).epsilon(1e-15));
    CHECK(report.objects[0].p_train_cond == report.objects[0].p_test_cond);
}

TEST_CASE("bias report lists one-sided objects with reasons") {
    std::vector<HoiInstance> train{make_instance(0, {0}, 2), make_instance(1, {1}, 2)};
    std::vector<HoiInstance> test{make_instance(0, {0}, 2)};
    ScoreFn fn = [](const HoiInstance&) { return std::vector<double>{0.6, 0.4}; };
    const DistributionReport report = bias_report(fn, train, test, 3, 2);
    CHECK(report.objects.size() == 1);
    REQUIRE(report.missing.size() == 2);
    CHECK(report.missing[0].object == 1);
    CHECK(report.missing[0].reason == "object absent from test split");
    CHECK(report.missing[1].object == 2);
    CHECK(report.missing[1].reason == "object unseen in training split");
}

TEST_CASE("bias report csv and json carry the distribution columns") {
    std::vector<HoiInstance> data{make_instance(0, {0}, 2), make_instance(0, {1}, 2)};
    const DistributionReport report = distribution_report(data, data, 1, 2);
    const std::string csv = report_to_csv(report);
    CHECK(csv.find("object,verb,p_train_cond,p_train_global,p_test_cond") == 0);
    CHECK(csv.find("y_hat") == std::string::npos);
    const auto j = report_to_json(report);
    CHECK(j.at("has_model") == false);
    CHECK(j.at("objects").size() == 1);
}
