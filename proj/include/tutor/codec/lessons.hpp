#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tutor::codec {

struct Lesson {
  std::string id;  // "T<term>-<nn>", e.g. "T1-10"
  int term = 1;
  int week = 1;
  std::string title;
};

/// Two-term C programming curriculum, fourteen weekly lessons per term.
const std::vector<Lesson>& lesson_catalog();
const Lesson* find_lesson(std::string_view id);

}  // namespace tutor::codec
