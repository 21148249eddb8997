#pragma once

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace tutor::testing {

inline const std::vector<std::string> kRandomTags = {"t-one", "t-two", "t-three"};

/// Random rule document with `count` rules drawn from the whole predicate
/// language, ids prefixed with `prefix`. Loads cleanly with the KB loader.
nlohmann::json random_rule_document(std::mt19937_64& rng, int count, const std::string& prefix = "R");

}  // namespace tutor::testing
