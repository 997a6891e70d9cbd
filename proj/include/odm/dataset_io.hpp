#pragma once

#include <string>
#include <vector>

#include "odm/instance.hpp"
#include "odm/vocabulary.hpp"

namespace odm {

// Dataset files are JSON Lines, one instance per line:
//   {"feature":[...], "object":int, "verbs":[active verb indices],
//    "human_box":[4]|null, "object_box":[4]|null,
//    "human_score":f64|null, "object_score":f64|null, "split":"train"|"test"}
// The companion vocabulary file is a single JSON object:
//   {"verbs":[...], "objects":[...], "feature_dim":int}

void save_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::string& path);

/// Canonical serialization used for fingerprinting a vocabulary.
std::string vocabulary_hash(const Vocabulary& vocab);

void save_instances(const std::string& path, const std::vector<HoiInstance>& instances,
                    const Vocabulary& vocab);

/// Loads and validates instances against the vocabulary. Throws with the
/// offending line number on malformed input.
std::vector<HoiInstance> load_instances(const std::string& path, const Vocabulary& vocab);

std::string instance_to_json_line(const HoiInstance& inst);
HoiInstance instance_from_json_line(const std::string& line, const Vocabulary& vocab);

}  // namespace odm
