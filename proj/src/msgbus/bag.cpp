#include "vtui/msgbus/bag.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <tuple>

namespace vtui::msgbus {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'V', 'T', 'U', 'I', 'B', 'A', 'G', '\n'};
constexpr std::string_view kReplayPrefix = "replay:";

bool record_less(const Envelope& a, const Envelope& b) {
  return std::tie(a.stamp, a.publisher, a.seq) < std::tie(b.stamp, b.publisher, b.seq);
}

}  // namespace

void sort_records(std::vector<Envelope>& records) { std::stable_sort(records.begin(), records.end(), record_less); }

Bytes serialize_bag(const BagFile& bag) {
  wire::Writer w;
  w.raw(kMagic);
  w.u32(kBagFormatVersion);
  w.u32(0);
  w.u32(static_cast<std::uint32_t>(bag.topics.size()));
  for (const auto& [topic, tag] : bag.topics) {
    w.str(topic);
    w.str(tag);
  }
  w.i64(bag.start);
  w.i64(bag.duration);
  for (const auto& r : bag.records) {
    wire::Writer body;
    body.str(r.topic);
    body.str(r.type_tag);
    body.str(r.publisher);
    body.u64(r.seq);
    body.i64(r.stamp);
    body.raw(r.payload);
    w.u32(static_cast<std::uint32_t>(body.bytes().size()));
    w.raw(body.bytes());
  }
  return w.take();
}

BagFile parse_bag(std::span<const std::uint8_t> data) {
  wire::Reader in(data, Errc::BagCorrupt);
  auto magic = in.take(kMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) in.fail("bad magic");
  if (auto v = in.u32(); v != kBagFormatVersion) in.fail("unsupported version " + std::to_string(v));
  if (in.u32() != 0) in.fail("reserved header field is not zero");

  BagFile bag;
  auto ntopics = in.u32();
  for (std::uint32_t i = 0; i < ntopics; ++i) {
    auto topic = in.str();
    auto tag = in.str();
    if (!valid_topic_name(topic)) in.fail("bad topic name in table: " + topic);
    if (!bag.topics.emplace(std::move(topic), std::move(tag)).second) in.fail("duplicate topic in table");
  }
  bag.start = in.i64();
  bag.duration = in.i64();
  if (bag.duration < 0) in.fail("negative duration");

  while (!in.done()) {
    auto len = in.u32();
    wire::Reader body(in.take(len), Errc::BagCorrupt);
    Envelope e;
    e.topic = body.str();
    e.type_tag = body.str();
    e.publisher = body.str();
    e.seq = body.u64();
    e.stamp = body.i64();
    auto rest = body.take(body.remaining());
    e.payload.assign(rest.begin(), rest.end());

    auto it = bag.topics.find(e.topic);
    if (it == bag.topics.end()) in.fail("record topic not in table: " + e.topic);
    if (it->second != e.type_tag) in.fail("record type_tag differs from table for " + e.topic);
    if (!bag.records.empty() && record_less(e, bag.records.back())) in.fail("records out of order");
    bag.records.push_back(std::move(e));
  }
  return bag;
}

void write_bag_file(const BagFile& bag, const std::filesystem::path& path) {
  auto bytes = serialize_bag(bag);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::SinkWriteError, "cannot write " + path.string());
}

BagFile read_bag_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_bag(bytes);
}

BagFile normalized(const BagFile& bag) {
  BagFile out = bag;
  for (auto& r : out.records) {
    while (r.publisher.starts_with(kReplayPrefix)) r.publisher.erase(0, kReplayPrefix.size());
    r.stamp -= bag.start;
  }
  out.start = 0;
  sort_records(out.records);
  return out;
}

BagFile filter_bag(const BagFile& bag, const std::vector<std::string>& patterns) {
  auto keep = [&](const std::string& topic) {
    return std::any_of(patterns.begin(), patterns.end(), [&](const auto& p) { return topic_matches(p, topic); });
  };
  BagFile out;
  out.start = bag.start;
  out.duration = bag.duration;
  for (const auto& [t, tag] : bag.topics) {
    if (keep(t)) out.topics.emplace(t, tag);
  }
  for (const auto& r : bag.records) {
    if (keep(r.topic)) out.records.push_back(r);
  }
  if (!out.records.empty()) {
    out.start = out.records.front().stamp;
    out.duration = out.records.back().stamp - out.start;
  }
  return out;
}

}  // namespace vtui::msgbus
