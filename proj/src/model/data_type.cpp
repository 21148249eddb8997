#include "tutor/model/data_type.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

#include "tutor/model/expression.hpp"

namespace tutor::model {

DataType DataType::pointer_to(DataType element) {
  DataType t(Kind::PointerTo);
  t.element_ = std::make_shared<const DataType>(std::move(element));
  return t;
}

DataType DataType::array_of(DataType element, std::size_t length) {
  DataType t(Kind::ArrayOf);
  t.element_ = std::make_shared<const DataType>(std::move(element));
  t.length_ = length;
  return t;
}

DataType DataType::struct_ref(std::string name) {
  DataType t(Kind::StructRef);
  t.struct_name_ = std::move(name);
  return t;
}

const DataType& DataType::element() const {
  if (!element_) throw std::logic_error("DataType::element on non-composite type " + to_string());
  return *element_;
}

int DataType::pointer_depth() const {
  int depth = 0;
  const DataType* t = this;
  while (t->kind_ == Kind::PointerTo || t->kind_ == Kind::ArrayOf) {
    if (t->kind_ == Kind::PointerTo) ++depth;
    t = t->element_.get();
  }
  return depth;
}

std::string DataType::to_string() const {
  switch (kind_) {
    case Kind::Int: return "int";
    case Kind::Float: return "float";
    case Kind::Char: return "char";
    case Kind::Void: return "void";
    case Kind::FileHandle: return "FILE*";
    case Kind::StructRef: return "struct " + struct_name_;
    case Kind::PointerTo: return element_->to_string() + "*";
    case Kind::ArrayOf: return element_->to_string() + "[" + std::to_string(length_) + "]";
  }
  return "?";
}

bool operator==(const DataType& a, const DataType& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case DataType::Kind::PointerTo: return *a.element_ == *b.element_;
    case DataType::Kind::ArrayOf: return a.length_ == b.length_ && *a.element_ == *b.element_;
    case DataType::Kind::StructRef: return a.struct_name_ == b.struct_name_;
    default: return true;
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<DataType> parse_type(std::string_view text) {
  std::string_view s = trim(text);
  DataType base;
  auto take_word = [&s](std::string_view word) {
    if (s.substr(0, word.size()) != word) return false;
    if (s.size() > word.size()) {
      char next = s[word.size()];
      if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
    }
    s.remove_prefix(word.size());
    return true;
  };
  if (take_word("int")) {
    base = DataType::integer();
  } else if (take_word("float")) {
    base = DataType::floating();
  } else if (take_word("char")) {
    base = DataType::character();
  } else if (take_word("void")) {
    base = DataType::void_type();
  } else if (take_word("FILE")) {
    s = trim(s);
    if (s.empty() || s.front() != '*') return std::nullopt;
    s.remove_prefix(1);
    base = DataType::file_handle();
  } else if (take_word("struct")) {
    s = trim(s);
    std::size_t n = 0;
    while (n < s.size() && (std::isalnum(static_cast<unsigned char>(s[n])) || s[n] == '_')) ++n;
    std::string name(s.substr(0, n));
    if (!is_identifier(name)) return std::nullopt;
    s.remove_prefix(n);
    base = DataType::struct_ref(std::move(name));
  } else {
    return std::nullopt;
  }

  while (true) {
    s = trim(s);
    if (s.empty()) break;
    if (s.front() == '*') {
      s.remove_prefix(1);
      base = DataType::pointer_to(std::move(base));
    } else if (s.front() == '[') {
      s.remove_prefix(1);
      s = trim(s);
      std::size_t length = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), length);
      if (ec != std::errc() || ptr == s.data()) return std::nullopt;
      s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
      s = trim(s);
      if (s.empty() || s.front() != ']') return std::nullopt;
      s.remove_prefix(1);
      base = DataType::array_of(std::move(base), length);
    } else {
      return std::nullopt;
    }
  }
  return base;
}

std::string_view type_category(const DataType& type) {
  switch (type.kind()) {
    case DataType::Kind::Int: return "int";
    case DataType::Kind::Float: return "float";
    case DataType::Kind::Char: return "char";
    case DataType::Kind::Void: return "void";
    case DataType::Kind::PointerTo: return "pointer";
    case DataType::Kind::ArrayOf: return "array";
    case DataType::Kind::StructRef: return "struct";
    case DataType::Kind::FileHandle: return "file";
  }
  return "?";
}

}  // namespace tutor::model
