#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "odm/dataset_stats.hpp"
#include "odm/instance.hpp"
#include "odm/model.hpp"

namespace odm {

struct ScoredPrediction {
    int instance_id = 0;  // index into the evaluated split
    int object = 0;
    int verb = 0;
    double score = 0.0;
    Box human_box;
    Box object_box;
};

/// Intersection over union; boxes must be non-degenerate.
double iou(const Box& a, const Box& b);

struct GroundTruthPair {
    Box human_box;
    Box object_box;
};

/// All-point interpolated AP for one interaction class. Predictions are
/// sorted by descending score (stable on ties) and each is greedily matched
/// to the unmatched ground truth with the highest min(human IoU, object IoU),
/// requiring both IoUs to exceed the threshold. Throws when ground_truth is
/// empty (such classes are excluded upstream).
double match_and_ap(const std::vector<ScoredPrediction>& predictions,
                    const std::vector<GroundTruthPair>& ground_truth,
                    double iou_threshold = 0.5);

struct EvalProtocol {
    double alpha = 0.3;           // object-rare boundary on pair_count/object_count
    double iou_threshold = 0.5;
    long long rare_cutoff = 10;   // standard-protocol rare boundary on training instances
};

struct ClassAp {
    int object = 0;
    int verb = 0;
    double ap = 0.0;
    long long train_count = 0;
    long long test_positives = 0;
    bool rare = false;         // train_count < rare_cutoff
    bool object_rare = false;  // train pair share under its object < alpha
};

struct StandardResult {
    double map_full = 0.0;
    double map_rare = 0.0;     // meaningful only when rare_defined
    double map_nonrare = 0.0;
    bool rare_defined = false;
    bool nonrare_defined = false;
    long long num_classes = 0;
    long long num_rare = 0;
};

struct ObjectBiasResult {
    double object_rare_map = 0.0;     // OR
    double object_nonrare_map = 0.0;  // ONR
    double ave = 0.0;
    bool or_defined = false;
    bool onr_defined = false;
    long long objects_with_rare = 0;
    long long objects_with_nonrare = 0;
};

struct EvalReport {
    EvalProtocol protocol;
    StandardResult standard;
    ObjectBiasResult object_bias;
    std::vector<ClassAp> per_class;
    std::vector<std::pair<int, int>> excluded;  // training classes without test positives
    std::string vocab_hash;
};

/// Scores every verb for every instance; boxes must be present. Detection
/// confidences default to 1 when absent.
std::vector<ScoredPrediction> generate_predictions(const DualClassifier& clf,
                                                   const std::vector<HoiInstance>& instances);

/// Per-class AP table over every class with at least one test positive.
/// The evaluable universe is training classes plus test-only classes.
std::vector<ClassAp> per_class_aps(const std::vector<ScoredPrediction>& predictions,
                                   const std::vector<HoiInstance>& test_set,
                                   const DatasetStats& train_stats,
                                   const EvalProtocol& protocol,
                                   std::vector<std::pair<int, int>>* excluded = nullptr);

StandardResult standard_eval(const std::vector<ClassAp>& table, const EvalProtocol& protocol);
ObjectBiasResult object_bias_eval(const std::vector<ClassAp>& table, int num_objects);

EvalReport evaluate(const std::vector<ScoredPrediction>& predictions,
                    const std::vector<HoiInstance>& test_set, const DatasetStats& train_stats,
                    const EvalProtocol& protocol);

nlohmann::json eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);
/// Columns: object,verb,ap,train_count,test_positives,rare,object_rare,
/// train_object_count.
std::string per_class_csv(const EvalReport& report, const DatasetStats& train_stats);

void save_predictions(const std::string& path, const std::vector<ScoredPrediction>& preds);
std::vector<ScoredPrediction> load_predictions(const std::string& path);

}  // namespace odm
