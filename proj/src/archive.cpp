/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/archive.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "trivid/error.hpp"

namespace trivid {

namespace {

constexpr char kWeightMagic[4] = {'T', 'R', 'I', 'W'};
constexpr char kMaskMagic[4] = {'T', 'R', 'I', 'M'};
constexpr uint16_t kVersion = 1;

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    if (!std::filesystem::exists(path)) {
      throw IoError("file not found: " + path.string());
    }
    in_.open(path, std::ios::binary);
    if (!in_) throw IoError("cannot open for reading: " + path.string());
  }

  void bytes(void* dst, size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw IoError("truncated file: " + path_.string());
    }
  }

  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }

  uint16_t u16() {
    uint8_t b[2];
    bytes(b, 2);
    return static_cast<uint16_t>(b[0] | (b[1] << 8));
  }

  uint32_t u32() {
    uint8_t b[4];
    bytes(b, 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open for writing: " + path.string());
  }

  void bytes(const void* src, size_t n) {
    out_.write(static_cast<const char*>(src), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed: " + path_.string());
  }

  void u8(uint8_t v) { bytes(&v, 1); }

  void u16(uint16_t v) {
    uint8_t b[2] = {static_cast<uint8_t>(v & 0xFF),
                    static_cast<uint8_t>(v >> 8)};
    bytes(b, 2);
  }

  void u32(uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v & 0xFF),
                    static_cast<uint8_t>((v >> 8) & 0xFF),
                    static_cast<uint8_t>((v >> 16) & 0xFF),
                    static_cast<uint8_t>((v >> 24) & 0xFF)};
    bytes(b, 4);
  }

  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

  void close() {
    out_.close();
    if (!out_) throw IoError("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

size_t shape_size(const std::vector<uint32_t>& shape) {
  size_t n = 1;
  for (uint32_t d : shape) n *= d;
  return n;
}

void validate_shape(const std::vector<uint32_t>& shape,
                    const std::string& name) {
  require(!shape.empty(), "tensor '" + name + "' has empty shape");
  for (uint32_t d : shape) {
    require(d >= 1, "tensor '" + name + "' has a zero dimension");
  }
}

// Reads the shared header and the per-entry name/shape prologue.
struct EntryHead {
  std::string name;
  std::vector<uint32_t> shape;
};

uint32_t read_header(Reader& r, const char magic[4],
                     const std::filesystem::path& path) {
  char got[4];
  r.bytes(got, 4);
  if (std::memcmp(got, magic, 4) != 0) {
    throw FormatError("bad magic in " + path.string());
  }
  uint16_t version = r.u16();
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version) +
                      " in " + path.string());
  }
  return r.u32();
}

EntryHead read_entry_head(Reader& r, const std::filesystem::path& path) {
  EntryHead head;
  uint16_t name_len = r.u16();
  head.name.resize(name_len);
  if (name_len > 0) r.bytes(head.name.data(), name_len);
  uint8_t ndim = r.u8();
  if (ndim == 0) throw FormatError("zero-rank tensor in " + path.string());
  head.shape.resize(ndim);
  for (uint8_t i = 0; i < ndim; ++i) {
    head.shape[i] = r.u32();
    if (head.shape[i] == 0) {
      throw FormatError("zero dimension in " + path.string());
    }
  }
  return head;
}

void write_entry_head(Writer& w, const std::string& name,
                      const std::vector<uint32_t>& shape) {
  require(name.size() <= 0xFFFF, "tensor name too long: " + name);
  require(shape.size() <= 0xFF, "tensor rank too large: " + name);
  w.u16(static_cast<uint16_t>(name.size()));
  w.bytes(name.data(), name.size());
  w.u8(static_cast<uint8_t>(shape.size()));
  for (uint32_t d : shape) w.u32(d);
}

void check_unique_names(const std::vector<std::string>& names,
                        const std::filesystem::path& path) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw FormatError("duplicate tensor name '" + n + "' in " +
                        path.string());
    }
  }
}

}  // namespace

size_t WeightTensor::size() const { return shape_size(shape); }

void WeightArchive::validate() const {
  std::set<std::string> seen;
  for (const WeightTensor& t : tensors) {
    validate_shape(t.shape, t.name);
    require(t.values.size() == t.size(),
            "tensor '" + t.name + "' value count does not match shape");
    require(seen.insert(t.name).second,
            "duplicate tensor name '" + t.name + "'");
    if (t.shape.size() == 4) {
      require(t.shape[2] == t.shape[3],
              "tensor '" + t.name + "' kernel is not square");
      require(t.shape[2] % 2 == 1,
              "tensor '" + t.name + "' kernel size must be odd");
    }
  }
}

const WeightTensor* WeightArchive::find(const std::string& name) const {
  for (const WeightTensor& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

size_t WeightArchive::total_size() const {
  size_t n = 0;
  for (const WeightTensor& t : tensors) n += t.size();
  return n;
}

size_t MaskEntry::size() const { return shape_size(shape); }

size_t MaskEntry::kept_count() const {
  size_t n = 0;
  for (uint8_t b : bits) n += b ? 1 : 0;
  return n;
}

void PruneMask::validate() const {
  std::set<std::string> seen;
  for (const MaskEntry& e : entries) {
    validate_shape(e.shape, e.name);
    require(e.bits.size() == e.size(),
            "mask '" + e.name + "' bit count does not match shape");
    require(seen.insert(e.name).second,
            "duplicate mask entry name '" + e.name + "'");
  }
}

const MaskEntry* PruneMask::find(const std::string& name) const {
  for (const MaskEntry& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

size_t PruneMask::total_size() const {
  size_t n = 0;
  for (const MaskEntry& e : entries) n += e.size();
  return n;
}

size_t PruneMask::total_kept() const {
  size_t n = 0;
  for (const MaskEntry& e : entries) n += e.kept_count();
  return n;
}

void check_congruent(const WeightArchive& archive, const PruneMask& mask) {
  require(archive.tensors.size() == mask.entries.size(),
          "mask entry count does not match archive tensor count");
  for (size_t i = 0; i < archive.tensors.size(); ++i) {
    const WeightTensor& t = archive.tensors[i];
    const MaskEntry& e = mask.entries[i];
    require(t.name == e.name,
            "mask/tensor name mismatch at index " + std::to_string(i));
    require(t.shape == e.shape, "mask/tensor shape mismatch for '" + t.name +
                                    "'");
    require(e.bits.size() == t.values.size(),
            "mask bit count mismatch for '" + t.name + "'");
  }
}

PruneMask full_mask(const WeightArchive& archive) {
  PruneMask mask;
  mask.entries.reserve(archive.tensors.size());
  for (const WeightTensor& t : archive.tensors) {
    MaskEntry e;
    e.name = t.name;
    e.shape = t.shape;
    e.bits.assign(t.size(), 1);
    mask.entries.push_back(std::move(e));
  }
  return mask;
}

WeightArchive load_weight_archive(const std::filesystem::path& path) {
  Reader r(path);
  uint32_t count = read_header(r, kWeightMagic, path);
  WeightArchive archive;
  archive.tensors.reserve(count);
  std::vector<std::string> names;
  for (uint32_t i = 0; i < count; ++i) {
    EntryHead head = read_entry_head(r, path);
    WeightTensor t;
    t.name = std::move(head.name);
    t.shape = std::move(head.shape);
    size_t n = shape_size(t.shape);
    t.values.resize(n);
    for (size_t j = 0; j < n; ++j) t.values[j] = r.f32();
    names.push_back(t.name);
    archive.tensors.push_back(std::move(t));
  }
  if (!r.at_eof()) {
    throw FormatError("trailing bytes in " + path.string());
  }
  check_unique_names(names, path);
  archive.validate();
  return archive;
}

void save_weight_archive(const WeightArchive& archive,
                         const std::filesystem::path& path) {
  archive.validate();
  require(archive.tensors.size() <= 0xFFFFFFFFull, "too many tensors");
  Writer w(path);
  w.bytes(kWeightMagic, 4);
  w.u16(kVersion);
  w.u32(static_cast<uint32_t>(archive.tensors.size()));
  for (const WeightTensor& t : archive.tensors) {
    write_entry_head(w, t.name, t.shape);
    for (float v : t.values) w.f32(v);
  }
  w.close();
}

PruneMask load_mask(const std::filesystem::path& path) {
  Reader r(path);
  uint32_t count = read_header(r, kMaskMagic, path);
  PruneMask mask;
  mask.entries.reserve(count);
  std::vector<std::string> names;
  for (uint32_t i = 0; i < count; ++i) {
    EntryHead head = read_entry_head(r, path);
    MaskEntry e;
    e.name = std::move(head.name);
    e.shape = std::move(head.shape);
    size_t n = shape_size(e.shape);
    size_t packed = (n + 7) / 8;
    std::vector<uint8_t> raw(packed);
    r.bytes(raw.data(), packed);
    // Padding bits past the used range must be zero; anything else means the
    // header dims and payload disagree.
    if (n % 8 != 0) {
      uint8_t tail = raw.back() >> (n % 8);
      if (tail != 0) {
        throw FormatError("mask payload does not match header dims in " +
                          path.string());
      }
    }
    e.bits.resize(n);
    for (size_t j = 0; j < n; ++j) {
      e.bits[j] = (raw[j / 8] >> (j % 8)) & 1;
    }
    names.push_back(e.name);
    mask.entries.push_back(std::move(e));
  }
  if (!r.at_eof()) {
    throw FormatError("trailing bytes in " + path.string());
  }
  check_unique_names(names, path);
  mask.validate();
  return mask;
}

void save_mask(const PruneMask& mask, const std::filesystem::path& path) {
  mask.validate();
  require(mask.entries.size() <= 0xFFFFFFFFull, "too many mask entries");
  Writer w(path);
  w.bytes(kMaskMagic, 4);
  w.u16(kVersion);
  w.u32(static_cast<uint32_t>(mask.entries.size()));
  for (const MaskEntry& e : mask.entries) {
    write_entry_head(w, e.name, e.shape);
    size_t n = e.bits.size();
    std::vector<uint8_t> raw((n + 7) / 8, 0);
    for (size_t j = 0; j < n; ++j) {
      if (e.bits[j]) raw[j / 8] |= static_cast<uint8_t>(1u << (j % 8));
    }
    if (!raw.empty()) w.bytes(raw.data(), raw.size());
  }
  w.close();
}

}  // namespace trivid
