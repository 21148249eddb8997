#include "tutor/codec/lessons.hpp"

#include <array>
#include <cstdio>

namespace tutor::codec {

const std::vector<Lesson>& lesson_catalog() {
  static const std::vector<Lesson> catalog = [] {
    static constexpr std::array<std::string_view, 14> kTerm1 = {
        "Programming and C",        "Fundamentals of C Programming", "Data Types",
        "Numeral Systems",          "Variables and Constants",       "Data Type Transformations",
        "Operators",                "Basic Input / Output Functions", "Program Control",
        "Loops - 1 (For)",          "Loops - 2 (Do... While and While)", "Preprocessors",
        "Functions",                "Arrays",
    };
    static constexpr std::array<std::string_view, 14> kTerm2 = {
        "Pointers",
        "Sorting Algorithms - 1 (Selection, Insertion)",
        "Sorting Algorithms - 2 (Bubble, Shell, Quick)",
        "Searching Algorithms",
        "Structural Data Types",
        "File Operators - 1 (Text)",
        "File Operators - 2 (Binary)",
        "Determiners",
        "Dynamic Memory Operations",
        "Graphic",
        "Ports",
        "Basic Functions in C - 1 (Display, String)",
        "Basic Functions in C - 2 (Math, Number, Date, Time)",
        "Basic Functions in C - 3 (Directory, Data Type Trans.)",
    };
    std::vector<Lesson> out;
    auto add_term = [&out](int term, const auto& titles) {
      for (std::size_t i = 0; i < titles.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "T%d-%02zu", term, i + 1);
        out.push_back(Lesson{id, term, static_cast<int>(i + 1), std::string(titles[i])});
      }
    };
    add_term(1, kTerm1);
    add_term(2, kTerm2);
    return out;
  }();
  return catalog;
}

const Lesson* find_lesson(std::string_view id) {
  for (const Lesson& l : lesson_catalog()) {
    if (l.id == id) return &l;
  }
  return nullptr;
}

}  // namespace tutor::codec
