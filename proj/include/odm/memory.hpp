#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "odm/dataset_stats.hpp"
#include "odm/instance.hpp"

namespace odm {

/// Weighted disagreement of two multi-hot labels: sum of w[t] over positions
/// where the labels differ. Infeasible verbs carry zero weight and drop out.
double weighted_hamming_distance(const Label& a, const Label& b,
                                 const std::vector<double>& weights);

/// Write-feasibility score of a label: sum of w[t] over active verbs.
double hamming_score(const Label& label, const std::vector<double>& weights);

/// Per-object write thresholds: the third smallest weight (duplicates
/// counted) for objects with more than 5 feasible verbs, 0 otherwise.
std::vector<double> default_thresholds(const DatasetStats& stats);

struct MemoryEntry {
    std::vector<double> feature;
    Label label;
    long long timestamp = 0;
};

struct OdmConfig {
    int capacity = 16;
    int read_count = 4;
    int feature_dim = 0;
    std::vector<double> thresholds;            // tau per object
    std::vector<std::vector<double>> weights;  // per object, length num_verbs

    int num_objects() const { return static_cast<int>(thresholds.size()); }
    void validate() const;
};

OdmConfig make_odm_config(const DatasetStats& stats, int feature_dim, int capacity = 16,
                          int read_count = 4);

/// One bounded cell of (feature, label, timestamp) entries per object class.
///
/// Reads select up to k entries by greedy weighted-Hamming distance against
/// an accumulated query label, so verbs not yet covered dominate the choice.
/// Writes are gated on the hamming score exceeding the object's threshold;
/// a full cell evicts its oldest entry. Single-writer; reads never mutate.
class OdmMemory {
public:
    explicit OdmMemory(OdmConfig config);

    const OdmConfig& config() const { return config_; }
    int num_objects() const { return config_.num_objects(); }
    long long clock() const { return clock_; }
    const std::vector<MemoryEntry>& cell(int o) const;

    /// Greedy label-aware selection of up to k entries; fewer if the cell
    /// holds fewer, empty if it is empty. The query must be interactive.
    std::vector<MemoryEntry> read(int o, const Label& query, int k) const;

    /// Inserts if hamming_score(label) strictly exceeds the object threshold,
    /// evicting the smallest-timestamp entry when full. `step` must exceed
    /// the memory clock. Returns whether the entry was stored.
    bool write(int o, std::vector<double> feature, const Label& label, long long step);

    /// write() with the internal clock supplying the step.
    bool write(int o, std::vector<double> feature, const Label& label);

    nlohmann::json snapshot() const;

private:
    void check_object(int o) const;

    OdmConfig config_;
    std::vector<std::vector<MemoryEntry>> cells_;
    long long clock_ = 0;
};

}  // namespace odm
