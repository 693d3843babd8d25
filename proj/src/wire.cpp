#include "vtui/wire.hpp"

#include <limits>

namespace vtui::wire {

void Writer::str(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::SinkWriteError, "string longer than 65535 bytes");
  }
  u16(static_cast<std::uint16_t>(s.size()));
  auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  buf().insert(buf().end(), p, p + s.size());
}

void Writer::blob(std::span<const std::uint8_t> b) {
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

std::span<const std::uint8_t> Reader::take(std::size_t n) {
  if (n > remaining()) fail("truncated: need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_));
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::string Reader::str() {
  auto n = u16();
  auto s = take(n);
  return {reinterpret_cast<const char*>(s.data()), s.size()};
}

Bytes Reader::blob() {
  auto n = u32();
  auto s = take(n);
  return {s.begin(), s.end()};
}

void Reader::fail(const std::string& what) const { throw Error(errc_, what); }

}  // namespace vtui::wire
