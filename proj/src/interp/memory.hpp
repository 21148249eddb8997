#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tutor/model/data_type.hpp"
#include "tutor/model/program.hpp"

namespace tutor::interp {

/// Raised for any fault the running program commits.
struct Fault {
  std::string message;
};

struct Pointer {
  std::size_t object = 0;  // 0 is NULL
  std::int64_t offset = 0;

  bool is_null() const { return object == 0; }
  friend bool operator==(const Pointer&, const Pointer&) = default;
};

struct FileRef {
  std::size_t id = 0;  // 0 is NULL
  friend bool operator==(const FileRef&, const FileRef&) = default;
};

/// One memory cell: ints and chars share the integer slot.
using Cell = std::variant<std::int64_t, double, Pointer, FileRef>;

enum class Storage { Global, Stack, Heap, Literal, Temporary };

/// Cell-addressed memory. Every scalar occupies one cell; arrays and structs
/// are flattened. Objects are never reused, so stale pointers stay detectable.
class Memory {
 public:
  explicit Memory(const std::map<std::string, std::vector<model::Param>, std::less<>>& structs);

  std::size_t cells_of(const model::DataType& type) const;
  std::int64_t field_offset(const std::string& struct_name, const std::string& field, model::DataType& field_type) const;

  /// New zero-initialised object holding one value of `type` (or `count` of them).
  Pointer allocate(const model::DataType& type, Storage storage, std::int64_t count = 1);
  Pointer allocate_string(const std::string& text);
  void release(std::size_t object);
  /// free(): checks heap origin, block start and liveness.
  void free_heap(const Pointer& p);

  const Cell& read(const Pointer& p) const;
  void write(const Pointer& p, Cell value);
  void copy(const Pointer& to, const Pointer& from, std::size_t cells);
  /// Characters up to the terminating zero.
  std::string read_string(const Pointer& p) const;
  /// Stores `text` plus a terminator; faults when it does not fit.
  void write_string(const Pointer& p, const std::string& text);

  std::size_t heap_cells() const { return heap_cells_; }

 private:
  struct Object {
    std::vector<Cell> cells;
    Storage storage = Storage::Stack;
    bool alive = true;
  };

  const Object& checked(const Pointer& p) const;
  void zero(Object& object, std::size_t at, const model::DataType& type) const;

  const std::map<std::string, std::vector<model::Param>, std::less<>>& structs_;
  std::vector<Object> objects_;
  std::size_t heap_cells_ = 0;
};

Cell zero_cell(const model::DataType& type);

}  // namespace tutor::interp
