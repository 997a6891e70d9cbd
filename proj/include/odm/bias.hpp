#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "odm/dataset_stats.hpp"
#include "odm/instance.hpp"
#include "odm/model.hpp"
#include "odm/vocabulary.hpp"

namespace odm {

/// Jensen-Shannon divergence, log base 2, range [0,1]. Inputs must be
/// equal-length probability vectors (nonnegative, sum 1 within 1e-9).
double jsd(const std::vector<double>& p, const std::vector<double>& q);

/// Per-object comparison of training statistics, test statistics and model
/// output. All vectors share the support feasible(o) of the training split.
struct ObjectDistributionRecord {
    int object = 0;
    std::vector<int> verbs;
    std::vector<double> p_train_cond;
    std::vector<double> p_train_global;
    std::vector<double> p_test_cond;
    std::vector<double> y_hat;         // empty when no model was supplied
    double jsd_train_cond = 0.0;       // D(y_hat, p_train_cond)
    double jsd_train_global = 0.0;     // D(y_hat, p_train_global)
    double jsd_test_cond = 0.0;        // D(y_hat, p_test_cond)
    double jsd_cond_vs_global = 0.0;   // D(p_train_cond, p_train_global)
    double skew_ratio = 0.0;           // max/min of p_train_cond
};

struct MissingObject {
    int object = 0;
    std::string reason;
};

struct DistributionReport {
    bool has_model = false;
    std::vector<ObjectDistributionRecord> objects;
    std::vector<MissingObject> missing;
};

/// Per-instance verb score vectors; lets tests substitute an oracle for the
/// trained model.
using ScoreFn = std::function<std::vector<double>(const HoiInstance&)>;

/// Mean sigmoid score vector over instances with object o, restricted to the
/// given feasible verbs and L1-normalized. Throws if no instance has o.
std::vector<double> model_conditional_scores(const ScoreFn& scores,
                                             const std::vector<HoiInstance>& dataset, int o,
                                             const std::vector<int>& feasible);
std::vector<double> model_conditional_scores(const DualClassifier& clf,
                                             const std::vector<HoiInstance>& dataset, int o,
                                             const std::vector<int>& feasible);

DistributionReport bias_report(const ScoreFn& scores, const std::vector<HoiInstance>& train_set,
                               const std::vector<HoiInstance>& test_set, int num_objects,
                               int num_verbs);

/// Checks the model's vocabulary fingerprint against the supplied vocabulary.
DistributionReport bias_report(const DualClassifier& clf,
                               const std::vector<HoiInstance>& train_set,
                               const std::vector<HoiInstance>& test_set,
                               const Vocabulary& vocab);

/// Distribution tables without model columns.
DistributionReport distribution_report(const std::vector<HoiInstance>& train_set,
                                       const std::vector<HoiInstance>& test_set,
                                       int num_objects, int num_verbs);

struct ObjectRarePartition {
    int object = 0;
    std::vector<int> rare;      // verb indices with pair_count/object_count < alpha
    std::vector<int> non_rare;  // the rest of feasible(o); the boundary lands here
};

struct RareSplit {
    double alpha = 0.3;
    std::vector<ObjectRarePartition> objects;
    std::vector<int> skipped;  // objects never seen interactively
};

RareSplit object_rare_split(const DatasetStats& stats, double alpha);

nlohmann::json report_to_json(const DistributionReport& report);
/// Columns: object, verb, p_train_cond, p_train_global, p_test_cond[, y_hat].
std::string report_to_csv(const DistributionReport& report);

}  // namespace odm
