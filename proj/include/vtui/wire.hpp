#pragma once

// Little-endian binary encoding shared by the bag format and message payloads.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtui/error.hpp"

namespace vtui::wire {

using Bytes = std::vector<std::uint8_t>;

class Writer {
 public:
  Writer() = default;
  explicit Writer(Bytes& out) : out_(&out) {}

  void u8(std::uint8_t v) { buf().push_back(v); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void boolean(bool v) { u8(v ? 1 : 0); }

  /// u16 length prefix, then raw UTF-8 bytes.
  void str(std::string_view s);
  /// u32 length prefix, then raw bytes.
  void blob(std::span<const std::uint8_t> b);
  void raw(std::span<const std::uint8_t> b) { buf().insert(buf().end(), b.begin(), b.end()); }

  Bytes& bytes() { return buf(); }
  Bytes take() { return std::move(buf()); }

 private:
  Bytes& buf() { return out_ ? *out_ : own_; }

  template <typename T>
  void put_le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf().push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes own_;
  Bytes* out_ = nullptr;
};

/// Bounds-checked reader. Underflow throws Error(errc) so the same reader
/// reports BagCorrupt for bags and a caller-chosen code for payloads.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data, Errc errc = Errc::BagCorrupt)
      : data_(data), errc_(errc) {}

  std::uint8_t u8() { return get_le<std::uint8_t>(); }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(get_le<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  bool boolean() { return u8() != 0; }
  std::string str();
  Bytes blob();
  std::span<const std::uint8_t> take(std::size_t n);

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& what) const;

 private:
  template <typename T>
  T get_le() {
    auto s = take(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(s[i]) << (8 * i));
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  Errc errc_;
};

}  // namespace vtui::wire
