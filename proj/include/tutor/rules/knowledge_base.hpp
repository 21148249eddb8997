#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/rules/category.hpp"
#include "tutor/rules/constraint.hpp"

namespace tutor::rules {

class KbError : public std::runtime_error {
 public:
  enum class Code { RuleParseError, DuplicateRuleId, UnknownCategory, UnboundBindingInCs };

  KbError(Code code, std::string document, std::string rule_id, const std::string& message);

  Code code() const { return code_; }
  std::string_view code_name() const;
  const std::string& document() const { return document_; }
  const std::string& rule_id() const { return rule_id_; }

 private:
  Code code_;
  std::string document_;
  std::string rule_id_;
};

struct RuleDocument {
  std::string name;  // file name or upload label, used in errors
  std::string text;
};

class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  const std::string& version() const { return version_; }
  const std::set<std::string>& tag_vocabulary() const { return tags_; }
  /// Sorted by id.
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Constraint* find(std::string_view id) const;
  std::size_t size() const { return constraints_.size(); }

 private:
  friend KnowledgeBase load_knowledge_base(const std::vector<RuleDocument>& documents);

  std::string version_;
  std::set<std::string> tags_;
  std::vector<Constraint> constraints_;
};

/// Parses and merges `.rules.json` documents. Throws KbError.
KnowledgeBase load_knowledge_base(const std::vector<RuleDocument>& documents);

/// Reads every `*.rules.json` under each path (file or directory), sorted by
/// path, then loads them.
KnowledgeBase load_knowledge_base_files(const std::vector<std::filesystem::path>& paths);

/// Constraint count per category; every category is present.
std::map<RuleCategory, std::size_t> kb_stats(const KnowledgeBase& kb);

}  // namespace tutor::rules
