#include "emograph/emotions.hpp"

namespace emograph {

const std::array<std::string, kNumEmotions>& emotion_categories() {
  static const std::array<std::string, kNumEmotions> names = {
      "affection",    "anger",         "annoyance",  "anticipation",
      "aversion",     "confidence",    "disapproval", "disconnection",
      "disquietment", "doubt/confusion", "embarrassment", "engagement",
      "esteem",       "excitement",    "fatigue",    "fear",
      "happiness",    "pain",          "peace",      "pleasure",
      "sadness",      "sensitivity",   "suffering",  "surprise",
      "sympathy",     "yearning"};
  return names;
}

std::optional<int> emotion_index(std::string_view name) {
  const auto& names = emotion_categories();
  for (int i = 0; i < kNumEmotions; ++i) {
    if (names[static_cast<std::size_t>(i)] == name) return i;
  }
  return std::nullopt;
}

}  // namespace emograph
