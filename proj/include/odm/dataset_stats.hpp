#pragma once

#include <cstdint>
#include <vector>

#include "odm/instance.hpp"

namespace odm {

/// Per-object interaction statistics of a training set.
///
/// object_count(o) counts interactive instances with object o (an instance
/// counts once however many verbs it carries); pair_count(o, t) counts
/// instances where verb t is active under object o. Negatives are excluded
/// from both. weight(o, t) is the inverse interaction frequency
/// object_count / pair_count for feasible verbs and 0 otherwise.
class DatasetStats {
public:
    DatasetStats(int num_objects, int num_verbs);

    int num_objects() const { return static_cast<int>(object_counts_.size()); }
    int num_verbs() const { return num_verbs_; }

    long long object_count(int o) const { return object_counts_.at(o); }
    long long pair_count(int o, int t) const { return pair_counts_.at(o).at(t); }
    long long global_verb_count(int t) const { return global_verb_counts_.at(t); }

    /// Feasible verb indices for object o, ascending.
    const std::vector<int>& feasible(int o) const { return feasible_.at(o); }

    double weight(int o, int t) const { return weights_.at(o).at(t); }
    /// Full length-c weight vector for object o (zeros on infeasible verbs).
    const std::vector<double>& weights(int o) const { return weights_.at(o); }

private:
    friend DatasetStats build_stats(const std::vector<HoiInstance>&, int, int);

    int num_verbs_;
    std::vector<long long> object_counts_;
    std::vector<std::vector<long long>> pair_counts_;
    std::vector<long long> global_verb_counts_;
    std::vector<std::vector<int>> feasible_;
    std::vector<std::vector<double>> weights_;
};

/// Counts a dataset. Throws on an empty dataset, an out-of-range object
/// index, or inconsistent feature dimensions.
DatasetStats build_stats(const std::vector<HoiInstance>& dataset, int num_objects,
                         int num_verbs);

/// p(v|o): verb distribution conditioned on object o, over feasible(o).
/// Throws if o was never seen interactively.
std::vector<double> conditional_distribution(const DatasetStats& stats, int o);

/// p_o(v): global verb frequencies restricted to feasible(o), renormalized.
std::vector<double> global_renorm_distribution(const DatasetStats& stats, int o);

}  // namespace odm
