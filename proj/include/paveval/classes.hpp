#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace paveval {

// The seven pavement distress labels. Ordinals are fixed: they are the
// DarkNet class indices and the submission category_id values.
enum class DistressClass : int {
    Alligator = 0,
    Block = 1,
    Transverse = 2,
    Patching = 3,
    Sealing = 4,
    Longitudinal = 5,
    Manhole = 6,
};

inline constexpr int kNumClasses = 7;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Alligator", "Block",        "Transverse", "Patching",
    "Sealing",   "Longitudinal", "Manhole",
};

inline std::string_view class_name(DistressClass c) {
    return kClassNames[static_cast<int>(c)];
}

inline std::optional<DistressClass> class_from_index(int index) {
    if (index < 0 || index >= kNumClasses) return std::nullopt;
    return static_cast<DistressClass>(index);
}

// Case-insensitive lookup against the seven class names.
inline std::optional<DistressClass> class_from_name(std::string_view name) {
    auto lower = [](char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    };
    for (int i = 0; i < kNumClasses; ++i) {
        const std::string_view cand = kClassNames[i];
        if (cand.size() != name.size()) continue;
        bool eq = true;
        for (size_t j = 0; j < name.size(); ++j) {
            if (lower(cand[j]) != lower(name[j])) {
                eq = false;
                break;
            }
        }
        if (eq) return static_cast<DistressClass>(i);
    }
    return std::nullopt;
}

}  // namespace paveval
