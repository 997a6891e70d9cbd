#include "odm/memory.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace odm {

double weighted_hamming_distance(const Label& a, const Label& b,
                                 const std::vector<double>& weights) {
    if (a.size() != b.size() || a.size() != weights.size())
        throw std::invalid_argument("weighted_hamming_distance: length mismatch");
    double dist = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t)
        if ((a[t] != 0) != (b[t] != 0)) dist += weights[t];
    return dist;
}

double hamming_score(const Label& label, const std::vector<double>& weights) {
    if (label.size() != weights.size())
        throw std::invalid_argument("hamming_score: length mismatch");
    double score = 0.0;
    for (std::size_t t = 0; t < label.size(); ++t)
        if (label[t]) score += weights[t];
    return score;
}

std::vector<double> default_thresholds(const DatasetStats& stats) {
    std::vector<double> taus(stats.num_objects(), 0.0);
    for (int o = 0; o < stats.num_objects(); ++o) {
        const auto& verbs = stats.feasible(o);
        if (static_cast<int>(verbs.size()) <= 5) continue;
        std::vector<double> ws;
        ws.reserve(verbs.size());
        for (int t : verbs) ws.push_back(stats.weight(o, t));
        std::sort(ws.begin(), ws.end());
        taus[o] = ws[2];  // third smallest, duplicates counted
    }
    return taus;
}

void OdmConfig::validate() const {
    if (capacity < 1) throw std::invalid_argument("odm config: capacity must be >= 1");
    if (read_count < 1 || read_count > capacity)
        throw std::invalid_argument("odm config: read_count must be in [1, capacity]");
    if (feature_dim < 1) throw std::invalid_argument("odm config: feature_dim must be >= 1");
    if (thresholds.size() != weights.size())
        throw std::invalid_argument("odm config: thresholds/weights size mismatch");
    for (double tau : thresholds)
        if (tau < 0.0) throw std::invalid_argument("odm config: negative threshold");
}

OdmConfig make_odm_config(const DatasetStats& stats, int feature_dim, int capacity,
                          int read_count) {
    OdmConfig config;
    config.capacity = capacity;
    config.read_count = read_count;
    config.feature_dim = feature_dim;
    config.thresholds = default_thresholds(stats);
    config.weights.reserve(stats.num_objects());
    for (int o = 0; o < stats.num_objects(); ++o) config.weights.push_back(stats.weights(o));
    config.validate();
    return config;
}

OdmMemory::OdmMemory(OdmConfig config) : config_(std::move(config)) {
    config_.validate();
    cells_.resize(config_.num_objects());
}

void OdmMemory::check_object(int o) const {
    if (o < 0 || o >= num_objects())
        throw std::invalid_argument("unknown object: index " + std::to_string(o));
}

const std::vector<MemoryEntry>& OdmMemory::cell(int o) const {
    check_object(o);
    return cells_[o];
}

std::vector<MemoryEntry> OdmMemory::read(int o, const Label& query, int k) const {
    check_object(o);
    if (!is_interactive(query))
        throw std::invalid_argument("read: query label has no active verbs");
    const auto& entries = cells_[o];
    const auto& w = config_.weights[o];

    std::vector<MemoryEntry> selected;
    if (entries.empty() || k <= 0) return selected;

    Label accumulated = query;
    std::vector<bool> taken(entries.size(), false);
    const int take = std::min<int>(k, static_cast<int>(entries.size()));
    for (int round = 0; round < take; ++round) {
        int best = -1;
        double best_dist = -1.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (taken[i]) continue;
            const double d = weighted_hamming_distance(accumulated, entries[i].label, w);
            // ties: smaller timestamp, then cell position
            if (best < 0 || d > best_dist ||
                (d == best_dist && entries[i].timestamp < entries[best].timestamp)) {
                best = static_cast<int>(i);
                best_dist = d;
            }
        }
        taken[best] = true;
        selected.push_back(entries[best]);
        for (std::size_t t = 0; t < accumulated.size(); ++t)
            accumulated[t] = accumulated[t] || entries[best].label[t];
    }
    return selected;
}

bool OdmMemory::write(int o, std::vector<double> feature, const Label& label,
                      long long step) {
    check_object(o);
    if (static_cast<int>(feature.size()) != config_.feature_dim)
        throw std::invalid_argument("write: feature dimension mismatch");
    if (label.size() != config_.weights[o].size())
        throw std::invalid_argument("write: label length mismatch");
    if (step <= clock_)
        throw std::invalid_argument("write: step must exceed the memory clock");

    if (!(hamming_score(label, config_.weights[o]) > config_.thresholds[o])) return false;

    auto& entries = cells_[o];
    if (static_cast<int>(entries.size()) >= config_.capacity) {
        auto oldest = std::min_element(
            entries.begin(), entries.end(),
            [](const MemoryEntry& a, const MemoryEntry& b) { return a.timestamp < b.timestamp; });
        entries.erase(oldest);
    }
    entries.push_back(MemoryEntry{std::move(feature), label, step});
    clock_ = step;
    return true;
}

bool OdmMemory::write(int o, std::vector<double> feature, const Label& label) {
    return write(o, std::move(feature), label, clock_ + 1);
}

nlohmann::json OdmMemory::snapshot() const {
    nlohmann::json cells = nlohmann::json::array();
    for (int o = 0; o < num_objects(); ++o) {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& e : cells_[o]) {
            std::vector<int> active;
            for (int t = 0; t < static_cast<int>(e.label.size()); ++t)
                if (e.label[t]) active.push_back(t);
            entries.push_back({{"feature", e.feature},
                               {"verbs", active},
                               {"timestamp", e.timestamp}});
        }
        cells.push_back({{"object", o}, {"entries", entries}});
    }
    return {{"clock", clock_}, {"capacity", config_.capacity}, {"cells", cells}};
}

}  // namespace odm
