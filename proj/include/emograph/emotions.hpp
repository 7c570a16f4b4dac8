#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace emograph {

inline constexpr int kNumEmotions = 26;

// The 26 EMOTIC category names, in canonical index order.
const std::array<std::string, kNumEmotions>& emotion_categories();

std::optional<int> emotion_index(std::string_view name);

}  // namespace emograph
