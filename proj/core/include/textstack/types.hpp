// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace textstack {

/// The four tweet categories. The order is fixed globally; serialized models,
/// probability vectors, and stacked feature blocks all follow it.
enum class Label : int { normal = 0, spam = 1, abusive = 2, hateful = 3 };

inline constexpr int kNumClasses = 4;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "normal", "spam", "abusive", "hateful"};

std::string_view to_string(Label label);

/// Throws std::runtime_error naming the offending string.
Label label_from_string(std::string_view s);

inline std::vector<std::string> class_name_vector() {
  return {std::string(kClassNames[0]), std::string(kClassNames[1]),
          std::string(kClassNames[2]), std::string(kClassNames[3])};
}

struct RawRecord {
  std::string id;
  std::string text;
  Label label = Label::normal;
};

/// Normalized, tokenized tweet. Tokens are lowercase alphanumeric runs,
/// pure punctuation runs, or the sentinels user_tag / web_link.
struct ProcessedTweet {
  std::string id;
  std::vector<std::string> tokens;
  Label label = Label::normal;
};

}  // namespace textstack
