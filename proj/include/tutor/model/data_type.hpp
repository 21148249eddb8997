#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace tutor::model {

/// Static type of the teaching language. Immutable value; nested element
/// types are shared between copies.
class DataType {
 public:
  enum class Kind { Int, Float, Char, Void, PointerTo, ArrayOf, StructRef, FileHandle };

  static constexpr int kMaxPointerDepth = 4;

  DataType() = default;

  static DataType integer() { return DataType(Kind::Int); }
  static DataType floating() { return DataType(Kind::Float); }
  static DataType character() { return DataType(Kind::Char); }
  static DataType void_type() { return DataType(Kind::Void); }
  static DataType file_handle() { return DataType(Kind::FileHandle); }
  static DataType pointer_to(DataType element);
  static DataType array_of(DataType element, std::size_t length);
  static DataType struct_ref(std::string name);

  Kind kind() const { return kind_; }
  /// Element type of PointerTo/ArrayOf. Must not be called on other kinds.
  const DataType& element() const;
  std::size_t length() const { return length_; }
  const std::string& struct_name() const { return struct_name_; }

  bool is_integral() const { return kind_ == Kind::Int || kind_ == Kind::Char; }
  bool is_arithmetic() const { return is_integral() || kind_ == Kind::Float; }
  bool is_pointer() const { return kind_ == Kind::PointerTo; }
  bool is_array() const { return kind_ == Kind::ArrayOf; }
  bool is_scalar() const { return is_arithmetic() || is_pointer() || kind_ == Kind::FileHandle; }

  /// Number of directly nested PointerTo wrappers (through arrays too).
  int pointer_depth() const;

  /// Canonical C-like spelling: "int", "char*", "int[10]", "struct Point", "FILE*".
  std::string to_string() const;

  friend bool operator==(const DataType& a, const DataType& b);

 private:
  explicit DataType(Kind kind) : kind_(kind) {}

  Kind kind_ = Kind::Int;
  std::shared_ptr<const DataType> element_;
  std::size_t length_ = 0;
  std::string struct_name_;
};

/// Parses the canonical spelling produced by DataType::to_string. Grammar:
/// base ("int" | "float" | "char" | "void" | "FILE*" | "struct" NAME) followed
/// by any sequence of "*" and "[N]" suffixes applied left to right.
std::optional<DataType> parse_type(std::string_view text);

/// Lower-case category name used by rule predicates: int, float, char, void,
/// pointer, array, struct, file.
std::string_view type_category(const DataType& type);

}  // namespace tutor::model
