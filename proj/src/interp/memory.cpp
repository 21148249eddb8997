#include "memory.hpp"

namespace tutor::interp {

using model::DataType;

namespace {
constexpr std::size_t kMaxHeapCells = std::size_t{1} << 22;
constexpr std::size_t kMaxObjectCells = std::size_t{1} << 22;
}  // namespace

Cell zero_cell(const DataType& type) {
  switch (type.kind()) {
    case DataType::Kind::Float: return 0.0;
    case DataType::Kind::PointerTo: return Pointer{};
    case DataType::Kind::FileHandle: return FileRef{};
    default: return std::int64_t{0};
  }
}

Memory::Memory(const std::map<std::string, std::vector<model::Param>, std::less<>>& structs) : structs_(structs) {
  objects_.push_back(Object{{}, Storage::Global, false});  // NULL
}

std::size_t Memory::cells_of(const DataType& type) const {
  switch (type.kind()) {
    case DataType::Kind::ArrayOf: return type.length() * cells_of(type.element());
    case DataType::Kind::StructRef: {
      auto it = structs_.find(type.struct_name());
      if (it == structs_.end()) throw Fault{"unknown struct " + type.struct_name()};
      std::size_t n = 0;
      for (const model::Param& f : it->second) n += cells_of(f.type);
      return n;
    }
    default: return 1;
  }
}

std::int64_t Memory::field_offset(const std::string& struct_name, const std::string& field, DataType& field_type) const {
  auto it = structs_.find(struct_name);
  if (it == structs_.end()) throw Fault{"unknown struct " + struct_name};
  std::int64_t at = 0;
  for (const model::Param& f : it->second) {
    if (f.name == field) {
      field_type = f.type;
      return at;
    }
    at += static_cast<std::int64_t>(cells_of(f.type));
  }
  throw Fault{"struct " + struct_name + " has no member " + field};
}

void Memory::zero(Object& object, std::size_t at, const DataType& type) const {
  switch (type.kind()) {
    case DataType::Kind::ArrayOf: {
      std::size_t step = cells_of(type.element());
      for (std::size_t i = 0; i < type.length(); ++i) zero(object, at + i * step, type.element());
      break;
    }
    case DataType::Kind::StructRef: {
      for (const model::Param& f : structs_.at(type.struct_name())) {
        zero(object, at, f.type);
        at += cells_of(f.type);
      }
      break;
    }
    default:
      object.cells[at] = zero_cell(type);
  }
}

Pointer Memory::allocate(const DataType& type, Storage storage, std::int64_t count) {
  std::size_t each = cells_of(type);
  if (count <= 0) throw Fault{"allocation of " + std::to_string(count) + " elements"};
  std::size_t total = each * static_cast<std::size_t>(count);
  if (total > kMaxObjectCells || (storage == Storage::Heap && heap_cells_ + total > kMaxHeapCells)) {
    throw Fault{"allocation too large"};
  }
  Object object{std::vector<Cell>(total), storage, true};
  for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) zero(object, i * each, type);
  if (storage == Storage::Heap) heap_cells_ += total;
  objects_.push_back(std::move(object));
  return Pointer{objects_.size() - 1, 0};
}

Pointer Memory::allocate_string(const std::string& text) {
  Pointer p = allocate(DataType::character(), Storage::Literal, static_cast<std::int64_t>(text.size() + 1));
  for (std::size_t i = 0; i < text.size(); ++i) {
    objects_[p.object].cells[i] = static_cast<std::int64_t>(static_cast<signed char>(text[i]));
  }
  return p;
}

void Memory::release(std::size_t object) {
  Object& o = objects_.at(object);
  o.alive = false;
  o.cells.clear();
  o.cells.shrink_to_fit();
}

void Memory::free_heap(const Pointer& p) {
  if (p.is_null()) return;
  Object& o = objects_.at(p.object);
  if (o.storage != Storage::Heap) throw Fault{"free of memory that was not allocated with malloc"};
  if (!o.alive) throw Fault{"memory freed twice"};
  if (p.offset != 0) throw Fault{"free of a pointer into the middle of an allocation"};
  heap_cells_ -= o.cells.size();
  release(p.object);
}

const Memory::Object& Memory::checked(const Pointer& p) const {
  if (p.is_null()) throw Fault{"NULL pointer dereference"};
  const Object& o = objects_.at(p.object);
  if (!o.alive) {
    throw Fault{o.storage == Storage::Heap ? "use of freed memory" : "use of a variable whose lifetime has ended"};
  }
  if (p.offset < 0 || static_cast<std::size_t>(p.offset) >= o.cells.size()) {
    throw Fault{"access out of bounds (index " + std::to_string(p.offset) + " of " + std::to_string(o.cells.size()) +
                ")"};
  }
  return o;
}

const Cell& Memory::read(const Pointer& p) const { return checked(p).cells[static_cast<std::size_t>(p.offset)]; }

void Memory::write(const Pointer& p, Cell value) {
  checked(p);
  objects_[p.object].cells[static_cast<std::size_t>(p.offset)] = std::move(value);
}

void Memory::copy(const Pointer& to, const Pointer& from, std::size_t cells) {
  for (std::size_t i = 0; i < cells; ++i) {
    auto k = static_cast<std::int64_t>(i);
    write(Pointer{to.object, to.offset + k}, read(Pointer{from.object, from.offset + k}));
  }
}

std::string Memory::read_string(const Pointer& p) const {
  std::string out;
  for (std::int64_t i = 0;; ++i) {
    const Cell& c = read(Pointer{p.object, p.offset + i});
    auto ch = std::get_if<std::int64_t>(&c);
    if (ch == nullptr || *ch == 0) break;
    out.push_back(static_cast<char>(*ch));
  }
  return out;
}

void Memory::write_string(const Pointer& p, const std::string& text) {
  const Object& o = checked(p);
  if (static_cast<std::size_t>(p.offset) + text.size() + 1 > o.cells.size()) {
    throw Fault{"input of " + std::to_string(text.size()) + " characters does not fit the buffer"};
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    write(Pointer{p.object, p.offset + static_cast<std::int64_t>(i)},
          static_cast<std::int64_t>(static_cast<signed char>(text[i])));
  }
  write(Pointer{p.object, p.offset + static_cast<std::int64_t>(text.size())}, std::int64_t{0});
}

}  // namespace tutor::interp
