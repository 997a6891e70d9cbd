#pragma once

#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace odm {

/// Verb and object name tables. Integer indices into these lists identify
/// verbs and objects everywhere else; the order is part of the dataset format.
struct Vocabulary {
    std::vector<std::string> verb_names;
    std::vector<std::string> object_names;
    int feature_dim = 0;

    int num_verbs() const { return static_cast<int>(verb_names.size()); }
    int num_objects() const { return static_cast<int>(object_names.size()); }

    void validate() const {
        if (verb_names.empty() || object_names.empty())
            throw std::invalid_argument("vocabulary: empty verb or object list");
        if (feature_dim < 1)
            throw std::invalid_argument("vocabulary: feature_dim must be >= 1");
        auto check_unique = [](const std::vector<std::string>& names, const char* what) {
            std::unordered_set<std::string> seen;
            for (const auto& n : names)
                if (!seen.insert(n).second)
                    throw std::invalid_argument(std::string("vocabulary: duplicate ") + what +
                                                " name '" + n + "'");
        };
        check_unique(verb_names, "verb");
        check_unique(object_names, "object");
    }
};

}  // namespace odm
