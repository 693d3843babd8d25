#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vtui/msgbus/envelope.hpp"

namespace vtui::msgbus {

/// Ordered log of envelopes. On disk:
///
///   offset 0   8 bytes  magic "VTUIBAG\n"
///   offset 8   u32      format version (1)
///   offset 12  u32      reserved, zero
///   u32 topic count, then per topic: str topic, str type_tag (sorted by topic)
///   i64 start stamp, i64 duration
///   records until EOF: u32 body length, then body =
///     str topic, str type_tag, str publisher, u64 seq, i64 stamp, payload (rest of body)
///
/// All integers little-endian; str is a u16 byte length followed by UTF-8.
struct BagFile {
  std::map<std::string, std::string> topics;
  Nanos start = 0;
  Nanos duration = 0;
  std::vector<Envelope> records;

  bool operator==(const BagFile&) const = default;
};

inline constexpr std::uint32_t kBagFormatVersion = 1;
inline constexpr std::size_t kBagHeaderSize = 16;

/// Stable sort by (stamp, publisher, seq); arrival order breaks remaining ties.
void sort_records(std::vector<Envelope>& records);

Bytes serialize_bag(const BagFile& bag);
/// Throws BagCorrupt on any malformed input.
BagFile parse_bag(std::span<const std::uint8_t> data);

void write_bag_file(const BagFile& bag, const std::filesystem::path& path);
BagFile read_bag_file(const std::filesystem::path& path);

/// Strips the `replay:` publisher prefix and rebases stamps to start at 0, so
/// a recording and the recording of its replay compare equal.
BagFile normalized(const BagFile& bag);

/// Subset of the bag whose topics match any pattern, framed as a recorder
/// with those patterns would have framed it.
BagFile filter_bag(const BagFile& bag, const std::vector<std::string>& patterns);

}  // namespace vtui::msgbus
