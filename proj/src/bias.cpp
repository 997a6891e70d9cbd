#include "odm/bias.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "odm/dataset_io.hpp"
#include "odm/text.hpp"

namespace odm {

namespace {

void check_probability_vector(const std::vector<double>& p, const char* name) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument(std::string("jsd: negative entry in ") + name);
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument(std::string("jsd: ") + name + " does not sum to 1");
}

}  // namespace

double jsd(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("jsd: length mismatch");
    check_probability_vector(p, "p");
    check_probability_vector(q, "q");

    double kl_p = 0.0, kl_q = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) kl_p += p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) kl_q += q[i] * std::log2(q[i] / m);
    }
    return std::max(0.0, 0.5 * (kl_p + kl_q));
}

std::vector<double> model_conditional_scores(const ScoreFn& scores,
                                             const std::vector<HoiInstance>& dataset, int o,
                                             const std::vector<int>& feasible) {
    std::vector<double> mean;
    long long count = 0;
    for (const auto& inst : dataset) {
        if (inst.object != o) continue;
        const auto s = scores(inst);
        if (mean.empty()) mean.assign(s.size(), 0.0);
        if (s.size() != mean.size())
            throw std::invalid_argument("model_conditional_scores: score length mismatch");
        for (std::size_t t = 0; t < s.size(); ++t) mean[t] += s[t];
        ++count;
    }
    if (count == 0)
        throw std::invalid_argument("model_conditional_scores: no instances of object " +
                                    std::to_string(o));

    std::vector<double> restricted(feasible.size());
    double total = 0.0;
    for (std::size_t i = 0; i < feasible.size(); ++i) {
        restricted[i] = mean.at(feasible[i]) / static_cast<double>(count);
        total += restricted[i];
    }
    if (total <= 0.0)
        throw std::invalid_argument("model_conditional_scores: zero mass on feasible verbs");
    for (double& v : restricted) v /= total;
    return restricted;
}

std::vector<double> model_conditional_scores(const DualClassifier& clf,
                                             const std::vector<HoiInstance>& dataset, int o,
                                             const std::vector<int>& feasible) {
    return model_conditional_scores(
        [&clf](const HoiInstance& inst) { return predict(clf, inst.feature); }, dataset, o,
        feasible);
}

namespace {

DistributionReport build_report(const ScoreFn* scores, const std::vector<HoiInstance>& train_set,
                                const std::vector<HoiInstance>& test_set, int num_objects,
                                int num_verbs) {
    const DatasetStats train_stats = build_stats(train_set, num_objects, num_verbs);
    const DatasetStats test_stats = build_stats(test_set, num_objects, num_verbs);

    DistributionReport report;
    report.has_model = scores != nullptr;

    std::vector<long long> test_instances(num_objects, 0);
    for (const auto& inst : test_set) test_instances[inst.object] += 1;

    for (int o = 0; o < num_objects; ++o) {
        if (train_stats.object_count(o) == 0) {
            report.missing.push_back({o, "object unseen in training split"});
            continue;
        }
        if (test_instances[o] == 0) {
            report.missing.push_back({o, "object absent from test split"});
            continue;
        }
        if (test_stats.object_count(o) == 0) {
            report.missing.push_back({o, "object has no interactive test instances"});
            continue;
        }

        ObjectDistributionRecord rec;
        rec.object = o;
        rec.verbs = train_stats.feasible(o);
        rec.p_train_cond = conditional_distribution(train_stats, o);
        rec.p_train_global = global_renorm_distribution(train_stats, o);

        // test conditional, restricted to the training support
        rec.p_test_cond.assign(rec.verbs.size(), 0.0);
        double test_mass = 0.0;
        for (std::size_t i = 0; i < rec.verbs.size(); ++i) {
            rec.p_test_cond[i] = static_cast<double>(test_stats.pair_count(o, rec.verbs[i]));
            test_mass += rec.p_test_cond[i];
        }
        if (test_mass <= 0.0) {
            report.missing.push_back({o, "test interactions outside training-feasible verbs"});
            continue;
        }
        for (double& v : rec.p_test_cond) v /= test_mass;

        const auto [mn, mx] =
            std::minmax_element(rec.p_train_cond.begin(), rec.p_train_cond.end());
        rec.skew_ratio = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
        rec.jsd_cond_vs_global = jsd(rec.p_train_cond, rec.p_train_global);

        if (scores) {
            rec.y_hat = model_conditional_scores(*scores, test_set, o, rec.verbs);
            rec.jsd_train_cond = jsd(rec.y_hat, rec.p_train_cond);
            rec.jsd_train_global = jsd(rec.y_hat, rec.p_train_global);
            rec.jsd_test_cond = jsd(rec.y_hat, rec.p_test_cond);
        }
        report.objects.push_back(std::move(rec));
    }
    return report;
}

}  // namespace

DistributionReport bias_report(const ScoreFn& scores, const std::vector<HoiInstance>& train_set,
                               const std::vector<HoiInstance>& test_set, int num_objects,
                               int num_verbs) {
    return build_report(&scores, train_set, test_set, num_objects, num_verbs);
}

DistributionReport bias_report(const DualClassifier& clf,
                               const std::vector<HoiInstance>& train_set,
                               const std::vector<HoiInstance>& test_set,
                               const Vocabulary& vocab) {
    if (!clf.vocab_hash.empty() && clf.vocab_hash != vocabulary_hash(vocab))
        throw std::invalid_argument("bias_report: vocabulary mismatch between model and dataset");
    if (clf.num_verbs != vocab.num_verbs() || clf.feature_dim != vocab.feature_dim)
        throw std::invalid_argument("bias_report: model/vocabulary shape mismatch");
    ScoreFn scores = [&clf](const HoiInstance& inst) { return predict(clf, inst.feature); };
    return build_report(&scores, train_set, test_set, vocab.num_objects(), vocab.num_verbs());
}

DistributionReport distribution_report(const std::vector<HoiInstance>& train_set,
                                       const std::vector<HoiInstance>& test_set,
                                       int num_objects, int num_verbs) {
    return build_report(nullptr, train_set, test_set, num_objects, num_verbs);
}

RareSplit object_rare_split(const DatasetStats& stats, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("object_rare_split: alpha must be in (0,1)");
    RareSplit split;
    split.alpha = alpha;
    for (int o = 0; o < stats.num_objects(); ++o) {
        if (stats.object_count(o) == 0) {
            split.skipped.push_back(o);
            continue;
        }
        ObjectRarePartition part;
        part.object = o;
        const double n_o = static_cast<double>(stats.object_count(o));
        for (int t : stats.feasible(o)) {
            if (static_cast<double>(stats.pair_count(o, t)) / n_o < alpha)
                part.rare.push_back(t);
            else
                part.non_rare.push_back(t);
        }
        split.objects.push_back(std::move(part));
    }
    return split;
}

nlohmann::json report_to_json(const DistributionReport& report) {
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& rec : report.objects) {
        nlohmann::json j{{"object", rec.object},
                         {"verbs", rec.verbs},
                         {"p_train_cond", rec.p_train_cond},
                         {"p_train_global", rec.p_train_global},
                         {"p_test_cond", rec.p_test_cond},
                         {"jsd_cond_vs_global", rec.jsd_cond_vs_global},
                         {"skew_ratio", rec.skew_ratio}};
        if (report.has_model) {
            j["y_hat"] = rec.y_hat;
            j["jsd_train_cond"] = rec.jsd_train_cond;
            j["jsd_train_global"] = rec.jsd_train_global;
            j["jsd_test_cond"] = rec.jsd_test_cond;
        }
        objects.push_back(std::move(j));
    }
    nlohmann::json missing = nlohmann::json::array();
    for (const auto& m : report.missing)
        missing.push_back({{"object", m.object}, {"reason", m.reason}});
    return {{"has_model", report.has_model}, {"objects", objects}, {"missing", missing}};
}

std::string report_to_csv(const DistributionReport& report) {
    std::string csv = "object,verb,p_train_cond,p_train_global,p_test_cond";
    if (report.has_model) csv += ",y_hat";
    csv += "\n";
    for (const auto& rec : report.objects) {
        for (std::size_t i = 0; i < rec.verbs.size(); ++i) {
            csv += std::to_string(rec.object) + "," + std::to_string(rec.verbs[i]) + "," +
                   format_double(rec.p_train_cond[i]) + "," +
                   format_double(rec.p_train_global[i]) + "," +
                   format_double(rec.p_test_cond[i]);
            if (report.has_model) csv += "," + format_double(rec.y_hat[i]);
            csv += "\n";
        }
    }
    return csv;
}

}  // namespace odm
