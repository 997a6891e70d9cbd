#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace odm {

/// Multi-hot verb label, one 0/1 entry per verb class.
using Label = std::vector<std::uint8_t>;

inline int active_verb_count(const Label& label) {
    int n = 0;
    for (auto v : label) n += v != 0;
    return n;
}

inline bool is_interactive(const Label& label) {
    for (auto v : label)
        if (v) return true;
    return false;
}

/// Axis-aligned box, pixel corners (x1,y1) top-left, (x2,y2) bottom-right.
struct Box {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

    bool valid() const { return x1 < x2 && y1 < y2; }
    double area() const { return (x2 - x1) * (y2 - y1); }
};

enum class Split { train, test };

/// One human-object pair: the interaction feature, its object class, the
/// multi-hot verb label, and optional detection boxes/confidences. An
/// all-zero label marks a non-interactive (negative) pair.
struct HoiInstance {
    std::vector<double> feature;
    int object = 0;
    Label verbs;
    std::optional<Box> human_box;
    std::optional<Box> object_box;
    std::optional<double> human_score;
    std::optional<double> object_score;
    Split split = Split::train;

    bool interactive() const { return is_interactive(verbs); }
};

}  // namespace odm
