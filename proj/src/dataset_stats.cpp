#include "odm/dataset_stats.hpp"

#include <stdexcept>
#include <string>

namespace odm {

DatasetStats::DatasetStats(int num_objects, int num_verbs)
    : num_verbs_(num_verbs),
      object_counts_(num_objects, 0),
      pair_counts_(num_objects, std::vector<long long>(num_verbs, 0)),
      global_verb_counts_(num_verbs, 0),
      feasible_(num_objects),
      weights_(num_objects, std::vector<double>(num_verbs, 0.0)) {}

DatasetStats build_stats(const std::vector<HoiInstance>& dataset, int num_objects,
                         int num_verbs) {
    if (dataset.empty()) throw std::invalid_argument("empty dataset");
    if (num_objects < 1 || num_verbs < 1)
        throw std::invalid_argument("build_stats: vocabulary sizes must be >= 1");

    DatasetStats stats(num_objects, num_verbs);
    const std::size_t dim = dataset.front().feature.size();

    for (const auto& inst : dataset) {
        if (inst.object < 0 || inst.object >= num_objects)
            throw std::invalid_argument("unknown object: index " + std::to_string(inst.object));
        if (static_cast<int>(inst.verbs.size()) != num_verbs)
            throw std::invalid_argument("build_stats: label length mismatch");
        if (inst.feature.size() != dim)
            throw std::invalid_argument("build_stats: feature dimension mismatch");
        if (!inst.interactive()) continue;  // negatives carry no interaction statistics

        stats.object_counts_[inst.object] += 1;
        for (int t = 0; t < num_verbs; ++t) {
            if (inst.verbs[t]) {
                stats.pair_counts_[inst.object][t] += 1;
                stats.global_verb_counts_[t] += 1;
            }
        }
    }

    for (int o = 0; o < num_objects; ++o) {
        for (int t = 0; t < num_verbs; ++t) {
            const long long n_vo = stats.pair_counts_[o][t];
            if (n_vo > 0) {
                stats.feasible_[o].push_back(t);
                stats.weights_[o][t] = static_cast<double>(stats.object_counts_[o]) /
                                       static_cast<double>(n_vo);
            }
        }
    }
    return stats;
}

std::vector<double> conditional_distribution(const DatasetStats& stats, int o) {
    if (o < 0 || o >= stats.num_objects())
        throw std::invalid_argument("unknown object: index " + std::to_string(o));
    if (stats.object_count(o) == 0) throw std::invalid_argument("object unseen in training");

    const auto& verbs = stats.feasible(o);
    long long total = 0;
    for (int t : verbs) total += stats.pair_count(o, t);

    std::vector<double> p(verbs.size());
    for (std::size_t i = 0; i < verbs.size(); ++i)
        p[i] = static_cast<double>(stats.pair_count(o, verbs[i])) / static_cast<double>(total);
    return p;
}

std::vector<double> global_renorm_distribution(const DatasetStats& stats, int o) {
    if (o < 0 || o >= stats.num_objects())
        throw std::invalid_argument("unknown object: index " + std::to_string(o));
    if (stats.object_count(o) == 0) throw std::invalid_argument("object unseen in training");

    const auto& verbs = stats.feasible(o);
    long long total = 0;
    for (int t : verbs) total += stats.global_verb_count(t);

    std::vector<double> p(verbs.size());
    for (std::size_t i = 0; i < verbs.size(); ++i)
        p[i] = static_cast<double>(stats.global_verb_count(verbs[i])) /
               static_cast<double>(total);
    return p;
}

}  // namespace odm
