#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/beast/core/detail/base64.hpp>

#include "vtui/apps/attach.hpp"
#include "vtui/error.hpp"
#include "vtui/msgbus/bag.hpp"
#include "vtui/physics/messages.hpp"
#include "vtui/runtime/gateway.hpp"
#include "vtui/runtime/run.hpp"
#include "vtui/scene/format.hpp"
#include "ws_client.hpp"

namespace vtui::runtime {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::WsClient;
using namespace std::chrono_literals;

fs::path scene_path(const std::string& name) { return fs::path(VTUI_SOURCE_DIR) / "scenes" / name; }

fs::path temp_path(const std::string& name) {
  auto dir = fs::temp_directory_path() / "vtui_runtime_test";
  fs::create_directories(dir);
  return dir / name;
}

std::optional<Errc> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

void attach_apps(Simulation& sim) { apps::attach_example_nodes(sim); }

/// Runs a Runner on its own thread for the lifetime of the object.
class Background {
 public:
  explicit Background(Runner& r) : runner_(r) {
    thread_ = std::thread([this] {
      try {
        report_ = runner_.run();
      } catch (...) {
        error_ = std::current_exception();
      }
    });
  }
  ~Background() {
    runner_.request_stop();
    if (thread_.joinable()) thread_.join();
  }
  RunReport finish() {
    runner_.request_stop();
    if (thread_.joinable()) thread_.join();
    if (error_) std::rethrow_exception(error_);
    return report_;
  }

 private:
  Runner& runner_;
  RunReport report_;
  std::exception_ptr error_;
  std::thread thread_;
};

// ---------------------------------------------------------------- runner

TEST(Run, TenSecondsAtOneMillisecondIsTenThousandSteps) {
  RunConfig c;
  c.scene_path = scene_path("display_cube.scene");
  c.duration = 10.0;
  c.dt = 0.001;
  c.record_patterns = {"/**"};
  c.record_out = temp_path("ten.bag");
  auto r = run(c);
  EXPECT_EQ(r.steps, 10000u);
  EXPECT_DOUBLE_EQ(r.virtual_duration, 10.0);
  ASSERT_TRUE(r.bag_path);
  // Every message published during the run is in the /** recording.
  EXPECT_EQ(r.records, r.messages);
  EXPECT_EQ(msgbus::read_bag_file(*r.bag_path).records.size(), r.messages);
}

TEST(Run, SameSeedGivesIdenticalNormalizedBags) {
  for (const char* scene : {"display_cube.scene", "sifteo_pair.scene", "marble.scene"}) {
    std::vector<msgbus::BagFile> bags;
    for (int i = 0; i < 2; ++i) {
      RunConfig c;
      c.scene_path = scene_path(scene);
      c.duration = 1.5;
      c.seed = 42;
      c.record_patterns = {"/**"};
      c.record_out = temp_path(std::string(scene) + std::to_string(i) + ".bag");
      c.setup = attach_apps;
      run(c);
      bags.push_back(msgbus::read_bag_file(*c.record_out));
    }
    EXPECT_FALSE(bags[0].records.empty()) << scene;
    EXPECT_EQ(msgbus::serialize_bag(msgbus::normalized(bags[0])), msgbus::serialize_bag(msgbus::normalized(bags[1])))
        << scene;
  }
}

TEST(Run, ReplayedAccelerometerDrivesTheSameAppOutput) {
  RunConfig first;
  first.scene_path = scene_path("display_cube.scene");
  first.duration = 1.0;
  first.record_patterns = {"/tui/**", "/app/**"};
  first.record_out = temp_path("hal_first.bag");
  first.setup = attach_apps;
  run(first);
  auto recorded = msgbus::read_bag_file(*first.record_out);

  RunConfig second = first;
  second.replay_path = first.record_out;
  second.record_patterns = {"/app/**"};
  second.record_out = temp_path("hal_second.bag");
  auto r = run(second);
  ASSERT_EQ(r.replayed_devices, std::vector<std::string>{"cube/accel"});
  auto replayed = msgbus::read_bag_file(*second.record_out);

  auto apps_first = msgbus::normalized(msgbus::filter_bag(recorded, {"/app/**"}));
  auto apps_second = msgbus::normalized(replayed);
  ASSERT_FALSE(apps_first.records.empty());
  EXPECT_EQ(msgbus::serialize_bag(apps_first), msgbus::serialize_bag(apps_second));
}

TEST(Run, RemapFeedsADifferentlyNamedInstance) {
  RunConfig first;
  first.scene_path = scene_path("display_cube.scene");
  first.duration = 0.2;
  first.record_patterns = {"/tui/cube/accel/sample"};
  first.record_out = temp_path("remap_src.bag");
  run(first);
  // Rename the recorded topic so only the remap can connect it.
  auto bag = msgbus::read_bag_file(*first.record_out);
  msgbus::BagFile renamed = bag;
  renamed.topics.clear();
  renamed.topics["/tui/old/accel/sample"] = bag.topics.at("/tui/cube/accel/sample");
  for (auto& e : renamed.records) e.topic = "/tui/old/accel/sample";
  msgbus::write_bag_file(renamed, temp_path("remap_renamed.bag"));

  RunConfig second;
  second.scene_path = first.scene_path;
  second.duration = 0.2;
  second.replay_path = temp_path("remap_renamed.bag");
  auto without = run(second);
  EXPECT_TRUE(without.replayed_devices.empty());
  second.remap = {{"/tui/old/accel/sample", "/tui/cube/accel/sample"}};
  auto with = run(second);
  EXPECT_EQ(with.replayed_devices, std::vector<std::string>{"cube/accel"});
}

TEST(Run, ConfigInvariants) {
  RunConfig c;
  c.scene_path = scene_path("display_cube.scene");
  c.snapshot_rate = 1001.0;  // dt = 1 ms
  EXPECT_EQ(code_of([&] { Runner r(c); }), Errc::BadConfig);
  c.snapshot_rate = 1000.0;
  EXPECT_EQ(code_of([&] { Runner r(c); }), std::nullopt);
  c.mode = ClockMode::Realtime;
  c.factor = 0.0;
  EXPECT_EQ(code_of([&] { Runner r(c); }), Errc::BadConfig);
  c.factor = 1.0;
  c.record_out = temp_path("x.bag");
  EXPECT_EQ(code_of([&] { Runner r(c); }), Errc::BadConfig);
  EXPECT_EQ(decimation_for(30.0, 0.001), 33u);
  EXPECT_EQ(decimation_for(1000.0, 0.001), 1u);
}

TEST(Run, InvalidSceneIsASceneError) {
  auto bad = temp_path("bad.scene");
  std::ofstream(bad) << "scene_format = 1\n[model m]\n[link a]\ngeometry = box 1 1 1\nmass = -1\n";
  RunConfig c;
  c.scene_path = bad;
  EXPECT_EQ(code_of([&] { Runner r(c); }), Errc::SceneError);
  c.scene_path = temp_path("missing.scene");
  EXPECT_EQ(code_of([&] { Runner r(c); }), Errc::Io);
}

TEST(Run, DivergenceReportsTheLastGoodStep) {
  RunConfig c;
  c.scene_path = scene_path("display_cube.scene");
  c.duration = 1.0;
  c.setup = [](Simulation& sim) {
    physics::WrenchCommand w;
    w.body = *sim.world().find_body("cube/body");
    w.force = Vec3(1e6, 0, 0);
    w.duration = 1.0;
    sim.world().apply_wrench(w);
  };
  Runner r(c);
  auto report = r.run();
  ASSERT_TRUE(report.last_good_step);
  EXPECT_LT(*report.last_good_step, 1000u);
  EXPECT_EQ(report.steps, *report.last_good_step);
  EXPECT_EQ(r.sim().step_count(), *report.last_good_step);
  EXPECT_FALSE(report.error.empty());
}

TEST(Run, RealtimeModePacesToTheWallClock) {
  RunConfig c;
  c.scene_path = scene_path("display_cube.scene");
  c.duration = 0.5;
  c.mode = ClockMode::Realtime;
  c.factor = 10.0;
  auto r = run(c);
  EXPECT_EQ(r.steps, 500u);
  EXPECT_GE(r.wall_time, 0.045);
  EXPECT_LT(r.wall_time, 2.0);
}

TEST(Run, StopRequestEndsAnUnboundedRun) {
  RunConfig c;
  c.scene_path = scene_path("display_cube.scene");
  Runner r(c);
  Background bg(r);
  std::this_thread::sleep_for(50ms);
  auto report = bg.finish();
  EXPECT_GT(report.steps, 0u);
}

msgbus::BagFile three_record_bag() {
  msgbus::Bus bus;
  auto pub = bus.advertise("n", "/a/b", "Blob");
  auto rec = bus.record({"/**"});
  for (int i = 0; i < 3; ++i) bus.publish_at(pub, wire::Bytes{std::uint8_t(i)}, msgbus::seconds_to_nanos(0.5 * i));
  return bus.stop(rec);
}

TEST(Run, ReplaySpeedScalesVirtualDuration) {
  auto bag = three_record_bag();
  ASSERT_EQ(bag.records.size(), 3u);
  auto path = temp_path("three.bag");
  msgbus::write_bag_file(bag, path);
  auto normal = replay_bag(path, 1.0);
  auto fast = replay_bag(path, 2.0);
  EXPECT_EQ(normal.messages, 3u);
  EXPECT_DOUBLE_EQ(normal.virtual_duration, 1.0);
  EXPECT_DOUBLE_EQ(fast.virtual_duration, 0.5);
  EXPECT_EQ(code_of([&] { replay_bag(path, 0.0); }), Errc::BadConfig);
  auto out = temp_path("three_again.bag");
  auto copied = replay_bag(path, 1.0, {{"/a/b", "/c"}}, {"/**"}, out);
  EXPECT_EQ(copied.records, 3u);
  EXPECT_EQ(msgbus::read_bag_file(out).topics.count("/c"), 1u);
}

// ---------------------------------------------------------------- CLI

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult cli(const std::string& args) {
  std::string cmd = std::string(VTUI_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int status = pclose(p);
  return {WEXITSTATUS(status), out};
}

TEST(Cli, ValidateExitCodes) {
  EXPECT_EQ(cli("validate " + scene_path("display_cube.scene").string()).exit_code, 0);
  auto bad = temp_path("cli_bad.scene");
  std::ofstream(bad) << "scene_format = 1\n[model m]\n[link a]\ngeometry = box 1 1 1\nmass = -1\n";
  auto r = cli("validate " + bad.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("RANGE"), std::string::npos) << r.output;
  EXPECT_EQ(cli("run " + bad.string() + " --duration 1").exit_code, 2);
  EXPECT_EQ(cli("").exit_code, 2);
  EXPECT_EQ(cli("run").exit_code, 2);
  EXPECT_EQ(cli("frobnicate").exit_code, 2);
  EXPECT_EQ(cli("bag info " + temp_path("nope.bag").string()).exit_code, 1);
}

TEST(Cli, RunReportsExactSteps) {
  auto r = cli("run " + scene_path("display_cube.scene").string() + " --duration 10 --no-apps");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("steps: 10000\n"), std::string::npos) << r.output;
}

TEST(Cli, BagInfoCountsRecords) {
  auto path = temp_path("cli_three.bag");
  msgbus::write_bag_file(three_record_bag(), path);
  auto r = cli("bag info " + path.string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("records: 3\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("/a/b"), std::string::npos);
  EXPECT_NE(r.output.find("duration: 1 s"), std::string::npos) << r.output;
}

TEST(Cli, ReplaySpeedTwoHalvesDuration) {
  auto path = temp_path("cli_speed.bag");
  msgbus::write_bag_file(three_record_bag(), path);
  auto one = cli("replay " + path.string());
  auto two = cli("replay " + path.string() + " --speed 2");
  EXPECT_NE(one.output.find("virtual_duration: 1 s"), std::string::npos) << one.output;
  EXPECT_NE(two.output.find("virtual_duration: 0.5 s"), std::string::npos) << two.output;
}

TEST(Cli, RecordThenReplayIntoScene) {
  auto bag = temp_path("cli_rec.bag");
  auto r = cli("record " + scene_path("display_cube.scene").string() + " --duration 0.5 --record /tui/** --out " +
               bag.string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto rp = cli("replay " + bag.string() + " --scene " + scene_path("display_cube.scene").string() +
                " --duration 0.5");
  EXPECT_EQ(rp.exit_code, 0) << rp.output;
  EXPECT_NE(rp.output.find("replayed: cube/accel"), std::string::npos) << rp.output;
  EXPECT_EQ(cli("record " + scene_path("display_cube.scene").string() + " --duration 0.1").exit_code, 2);
}

// ---------------------------------------------------------------- gateway

RunConfig gateway_config() {
  RunConfig c;
  c.scene_path = scene_path("display_cube.scene");
  c.mode = ClockMode::Realtime;
  c.factor = 1.0;
  c.snapshot_rate = 100.0;
  c.listen = "127.0.0.1:0";
  c.setup = attach_apps;
  return c;
}

std::uint64_t step_of(const json& m) { return m.at("step_count").get<std::uint64_t>(); }

const json* find_body(const json& update, const std::string& name) {
  for (const auto& b : update.at("bodies"))
    if (b.at("name") == name) return &b;
  return nullptr;
}

TEST(Gateway, HelloThenSceneGraph) {
  Runner r(gateway_config());
  ASSERT_NE(r.gateway_port(), 0);
  Background bg(r);
  WsClient ws(r.gateway_port());
  auto hello = ws.recv();
  ASSERT_TRUE(hello);
  EXPECT_EQ((*hello)["type"], "hello");
  EXPECT_EQ((*hello)["protocol_version"], kProtocolVersion);
  EXPECT_DOUBLE_EQ((*hello)["dt"].get<double>(), 0.001);
  EXPECT_EQ((*hello)["seed"], 1);
  auto graph = ws.recv();
  ASSERT_TRUE(graph);
  ASSERT_EQ((*graph)["type"], "scene_graph");
  const json* cube = nullptr;
  for (const auto& inst : (*graph)["instances"])
    if (inst["model"] == "display_cube") cube = &inst;
  ASSERT_NE(cube, nullptr);
  EXPECT_EQ(cube->at("displays").size(), 6u);
  EXPECT_EQ(cube->at("links").at(0).at("geometry").at("type"), "box");
  for (const auto& d : cube->at("displays")) EXPECT_EQ(d.at("resolution"), json::array({64, 64}));
}

TEST(Gateway, DisplayFramesAreBase64AndCachedForLateClients) {
  Runner r(gateway_config());
  Background bg(r);
  std::set<std::string> seen;
  {
    WsClient ws(r.gateway_port());
    while (seen.size() < 6) {
      auto m = ws.recv_type("display_frame", 3000ms);
      ASSERT_TRUE(m) << "got " << seen.size() << " frames";
      std::string data = (*m)["data"];
      std::vector<std::uint8_t> px(12288 + 3);
      auto [n, used] = boost::beast::detail::base64::decode(px.data(), data.data(), data.size());
      EXPECT_EQ(n, 64u * 64u * 3u);
      EXPECT_EQ(used, data.size());
      seen.insert((*m)["display"]);
    }
  }
  // A second client gets the retained frames right after the scene graph.
  WsClient late(r.gateway_port());
  EXPECT_EQ((*late.recv())["type"], "hello");
  EXPECT_EQ((*late.recv())["type"], "scene_graph");
  std::set<std::string> cached;
  for (int i = 0; i < 6; ++i) {
    auto m = late.recv_type("display_frame", 1000ms);
    ASSERT_TRUE(m);
    cached.insert((*m)["display"]);
  }
  EXPECT_EQ(cached, seen);
}

TEST(Gateway, ApplyWrenchLiftsTheCube) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient ws(r.gateway_port());
  auto first = ws.recv_type("state_update");
  ASSERT_TRUE(first);
  double z0 = find_body(*first, "cube/body")->at("position")[2];
  ws.send({{"type", "apply_wrench"}, {"body", "cube/body"}, {"force", {0, 0, 20}}, {"duration", 0.05}, {"id", 7}});
  auto ack = ws.recv_type("ack");
  ASSERT_TRUE(ack);
  EXPECT_EQ((*ack)["cmd"], "apply_wrench");
  EXPECT_EQ((*ack)["id"], 7);
  const std::uint64_t applied = step_of(*ack);
  double best = z0;
  double best_vz = 0;
  int updates = 0;
  while (updates < 20) {
    auto m = ws.recv_type("state_update");
    ASSERT_TRUE(m);
    if (step_of(*m) <= applied) continue;
    ++updates;
    const json* b = find_body(*m, "cube/body");
    best = std::max(best, b->at("position")[2].get<double>());
    best_vz = std::max(best_vz, b->at("linear_velocity")[2].get<double>());
  }
  EXPECT_GT(best_vz, 5.0);  // ~ (20/0.1 - 9.81) * 0.05
  EXPECT_GT(best, z0 + 0.2);
}

TEST(Gateway, PauseThenThreeSingleStepsGivesThreeUpdates) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient ws(r.gateway_port());
  ASSERT_TRUE(ws.recv_type("state_update"));
  ws.send({{"type", "pause"}});
  std::vector<json> updates;
  auto keep = [&](const json& m) {
    if (m["type"] == "state_update") updates.push_back(m);
  };
  auto paused = ws.recv_type("ack", 3000ms, keep);
  ASSERT_TRUE(paused);
  const std::uint64_t at = step_of(*paused);
  for (int i = 0; i < 3; ++i) ws.send({{"type", "step_n"}, {"n", 1}});
  for (int i = 0; i < 3; ++i) ASSERT_TRUE(ws.recv_type("ack", 3000ms, keep));
  for (auto& m : ws.collect(400ms)) keep(m);

  std::vector<std::uint64_t> after;
  for (const auto& u : updates)
    if (step_of(u) > at) after.push_back(step_of(u));
  EXPECT_EQ(after, (std::vector<std::uint64_t>{at + 1, at + 2, at + 3}));
  EXPECT_EQ(r.sim().step_count(), at + 3);

  ws.send({{"type", "resume"}});
  ASSERT_TRUE(ws.recv_type("ack"));
  auto later = ws.recv_type("state_update");
  ASSERT_TRUE(later);
  for (int i = 0; i < 5; ++i) later = ws.recv_type("state_update");
  EXPECT_GT(step_of(*later), at + 3);
}

TEST(Gateway, AcksAreTaggedWithTheBoundaryAndUpdatesAreMonotonic) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient ws(r.gateway_port());
  std::optional<std::uint64_t> last;
  bool monotonic = true;
  std::vector<std::uint64_t> ack_steps;
  auto watch = [&](const json& m) {
    if (m["type"] == "state_update") {
      if (last && step_of(m) <= *last) monotonic = false;
      last = step_of(m);
    }
  };
  for (int i = 0; i < 20; ++i) {
    ws.send({{"type", "select"}, {"body", "cube/body"}});
    auto ack = ws.recv_type("ack", 3000ms, watch);
    ASSERT_TRUE(ack);
    ack_steps.push_back(step_of(*ack));
    for (auto& m : ws.collect(5ms)) watch(m);
  }
  EXPECT_TRUE(monotonic);
  EXPECT_TRUE(std::is_sorted(ack_steps.begin(), ack_steps.end()));
}

TEST(Gateway, BadMessagesGetErrorsAndTheConnectionStays) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient ws(r.gateway_port());
  ws.send({{"type", "teleport"}});
  auto e1 = ws.recv_type("error");
  ASSERT_TRUE(e1);
  EXPECT_EQ((*e1)["code"], "BadMessage");
  ws.send_text("{not json");
  auto e2 = ws.recv_type("error");
  ASSERT_TRUE(e2);
  EXPECT_EQ((*e2)["code"], "BadMessage");
  ws.send({{"type", "apply_wrench"}, {"body", "nobody/here"}, {"force", {0, 0, 1}}});
  auto e3 = ws.recv_type("error");
  ASSERT_TRUE(e3);
  EXPECT_EQ((*e3)["code"], "NoSuchBody");
  ws.send({{"type", "step_n"}, {"n", 0}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "BadMessage");
  ws.send({{"type", "hello"}, {"protocol_version", 2}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "BadMessage");
  ws.send({{"type", "hello"}, {"protocol_version", 1}});
  auto ack = ws.recv_type("ack");
  ASSERT_TRUE(ack);
  EXPECT_EQ((*ack)["cmd"], "hello");
  EXPECT_FALSE(ws.closed());
}

TEST(Gateway, OversizedFrameClosesTheConnection) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient ws(r.gateway_port());
  ASSERT_TRUE(ws.recv_type("scene_graph"));
  ws.send_text(std::string(kMaxFrameBytes + 1, 'x'));
  auto deadline = std::chrono::steady_clock::now() + 3s;
  while (!ws.closed() && std::chrono::steady_clock::now() < deadline) ws.recv(100ms);
  EXPECT_TRUE(ws.closed());
  EXPECT_EQ(ws.close_reason().code, boost::beast::websocket::close_code::too_big);
  // The server keeps accepting.
  WsClient again(r.gateway_port());
  EXPECT_EQ((*again.recv())["type"], "hello");
}

TEST(Gateway, TouchByWorldPointRepliesWithPixels) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient ws(r.gateway_port());
  // The resting cube's top face is centred over the origin at z = 0.05;
  // a quarter pixel off centre lands inside pixel (32, 32).
  ws.send({{"type", "touch"}, {"display", "cube/face_pz"}, {"point", {0.0002, -0.0002, 0.05}}, {"phase", "up"}});
  auto c = ws.recv_type("ack");
  ASSERT_TRUE(c);
  EXPECT_EQ((*c)["u"], 32);
  EXPECT_EQ((*c)["v"], 32);
  ws.send({{"type", "touch"}, {"display", "cube/face_pz"}, {"point", {0.0, 0.0, 0.2}}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "OffSurface");
  // Display Cube faces are not touch-sensitive, so pixel touches have no topic.
  ws.send({{"type", "touch"}, {"display", "cube/face_pz"}, {"u", 1}, {"v", 1}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "NoSuchDevice");
}

TEST(Gateway, TouchByPixelPublishesOnTheTouchTopic) {
  RunConfig c = gateway_config();
  c.scene_path = scene_path("sifteo_pair.scene");
  Runner r(c);
  auto sub = r.sim().bus().subscribe("test", "/tui/c1/screen/touch", "TouchEvent", 16);
  Background bg(r);
  WsClient ws(r.gateway_port());
  ws.send({{"type", "touch"}, {"display", "c1/screen"}, {"u", 10}, {"v", 20}, {"phase", "down"}});
  auto a = ws.recv_type("ack");
  ASSERT_TRUE(a);
  EXPECT_EQ((*a)["u"], 10);
  EXPECT_EQ((*a)["v"], 20);
  auto got = sub.drain();
  ASSERT_EQ(got.size(), 1u);
  auto ev = devices::decode<devices::TouchEvent>(got[0].payload);
  EXPECT_EQ(ev.u, 10u);
  EXPECT_EQ(ev.v, 20u);
  EXPECT_EQ(ev.source, devices::TouchSource::Ui);
  ws.send({{"type", "touch"}, {"display", "c1/screen"}, {"u", 128}, {"v", 0}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "OffSurface");
  ws.send({{"type", "touch"}, {"display", "c1/nothing"}, {"u", 1}, {"v", 1}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "NoSuchDevice");
  ws.send({{"type", "touch"}, {"display", "c1/screen"}, {"u", -1}, {"v", 1}});
  EXPECT_EQ((*ws.recv_type("error"))["code"], "BadMessage");
}

TEST(Gateway, SpawnBroadcastsANewSceneGraph) {
  Runner r(gateway_config());
  Background bg(r);
  WsClient a(r.gateway_port());
  WsClient b(r.gateway_port());
  ASSERT_TRUE(a.recv_type("scene_graph"));
  ASSERT_TRUE(b.recv_type("scene_graph"));
  a.send({{"type", "spawn"}, {"model", "display_cube"}, {"name", "cube2"}, {"position", {0.3, 0, 0.2}}});
  std::optional<json> graph_a;
  auto ack = a.recv_type("ack", 3000ms, [&](const json& m) {
    if (m["type"] == "scene_graph") graph_a = m;
  });
  ASSERT_TRUE(ack);
  EXPECT_EQ((*ack)["instance"], "cube2");
  if (!graph_a) graph_a = a.recv_type("scene_graph");
  auto graph_b = b.recv_type("scene_graph");
  for (const auto& g : {graph_a, graph_b}) {
    ASSERT_TRUE(g);
    EXPECT_EQ((*g)["instances"].size(), 3u);
  }
  // Both clients see the new body move under gravity.
  auto u = b.recv_type("state_update");
  ASSERT_TRUE(u);
  EXPECT_NE(find_body(*u, "cube2/body"), nullptr);
  a.send({{"type", "spawn"}, {"model", "display_cube"}, {"name", "cube2"}});
  EXPECT_EQ((*a.recv_type("error"))["code"], "NameCollision");
}

TEST(Gateway, TrajectoryIsBitIdenticalWithOrWithoutGateway) {
  const int kSteps = 400;
  RunConfig c = gateway_config();
  c.setup = {};
  Runner r(c);
  r.control().pause();
  physics::BodyId body = *r.sim().world().find_body("cube/body");
  {
    Background bg(r);
    WsClient ws(r.gateway_port());
    ws.send({{"type", "apply_wrench"}, {"body", body}, {"force", {3, 1, 4}}, {"torque", {0.01, 0, 0.02}},
             {"duration", 0.1}});
    ASSERT_TRUE(ws.recv_type("ack"));
    ws.send({{"type", "step_n"}, {"n", kSteps}});
    ASSERT_TRUE(ws.recv_type("ack"));
    auto deadline = std::chrono::steady_clock::now() + 10s;
    while (r.sim().step_count() < kSteps && std::chrono::steady_clock::now() < deadline) std::this_thread::sleep_for(5ms);
    bg.finish();
  }
  ASSERT_EQ(r.sim().step_count(), static_cast<std::uint64_t>(kSteps));

  SimulationOptions o;
  Simulation plain(scene::load_scene_file(c.scene_path), o);
  physics::WrenchCommand w;
  w.body = body;
  w.force = Vec3(3, 1, 4);
  w.torque = Vec3(0.01, 0, 0.02);
  w.duration = 0.1;
  plain.world().apply_wrench(w);
  plain.run_steps(kSteps);
  const auto& a = r.sim().world().body(body).state;
  const auto& b = plain.world().body(body).state;
  EXPECT_TRUE(a.pose == b.pose);
  EXPECT_TRUE(a.linear_velocity == b.linear_velocity);
  EXPECT_TRUE(a.angular_velocity == b.angular_velocity);
}

TEST(Gateway, MessageBuilders) {
  physics::WorldState s;
  s.step_count = 12;
  s.stamp = msgbus::seconds_to_nanos(0.012);
  s.bodies.push_back({3, "a/b", Pose{Vec3(1, 2, 3), Quat::Identity()}, Vec3(0, 0, -1), Vec3::Zero()});
  auto j = state_update_json(s);
  EXPECT_EQ(j["step_count"], 12);
  EXPECT_DOUBLE_EQ(j["time"].get<double>(), 0.012);
  EXPECT_EQ(j["bodies"][0]["orientation"], json::array({1.0, 0.0, 0.0, 0.0}));
  auto f = display_frame_json("cube", devices::DisplayFrame::filled("face_px", 2, 1, 255, 0, 0));
  EXPECT_EQ(f["display"], "cube/face_px");
  EXPECT_EQ(f["data"], "/wAA/wAA");
}

}  // namespace
}  // namespace vtui::runtime
