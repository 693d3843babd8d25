// vtui: run, validate, record and replay scenes; inspect bags; serve the
// WebSocket gateway. Exit codes: 0 ok, 1 runtime error, 2 validation/usage.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "vtui/apps/attach.hpp"
#include "vtui/error.hpp"
#include "vtui/msgbus/bag.hpp"
#include "vtui/runtime/gateway.hpp"
#include "vtui/runtime/run.hpp"
#include "vtui/scene/format.hpp"
#include "vtui/scene/validate.hpp"

namespace {

using namespace vtui;

std::atomic<bool> g_interrupted{false};
extern "C" void on_signal(int) { g_interrupted = true; }

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::SceneError:
    case Errc::SyntaxError:
    case Errc::UnknownField:
    case Errc::BadUnit:
    case Errc::ZeroMass:
    case Errc::NameCollision:
    case Errc::ValidationFailed:
    case Errc::BadConfig:
      return 2;
    default:
      return 1;
  }
}

msgbus::TopicRemap parse_remaps(const std::vector<std::string>& items) {
  msgbus::TopicRemap remap;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw Error(Errc::BadConfig, "remap must be FROM=TO, got '" + item + "'");
    }
    remap[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return remap;
}

struct RunFlags {
  std::string scene;
  double duration = -1.0;
  double dt = 0.0;
  long long seed = -1;
  std::vector<std::string> record;
  std::string out;
  std::string replay;
  std::vector<std::string> remap;
  double speed = 1.0;
  std::string listen;
  double snapshot_rate = 30.0;
  double realtime = 0.0;
  bool no_apps = false;
  bool serial = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool scene_required) {
  auto* s = cmd->add_option("scene,--scene", f.scene, "Scene file");
  if (scene_required) s->required();
  cmd->add_option("--duration", f.duration, "Virtual seconds to run (default: until interrupted)");
  cmd->add_option("--dt", f.dt, "Override the scene's step, s");
  cmd->add_option("--seed", f.seed, "Override the scene's seed");
  cmd->add_option("--record", f.record, "Topic pattern to record (repeatable)");
  cmd->add_option("--out", f.out, "Bag file to write the recording to");
  cmd->add_option("--replay", f.replay, "Bag whose topics feed the matching devices");
  cmd->add_option("--remap", f.remap, "Bag topic remap FROM=TO (repeatable)");
  cmd->add_option("--listen", f.listen, "Gateway address host:port");
  cmd->add_option("--snapshot-rate", f.snapshot_rate, "Hz of /world/state snapshots");
  cmd->add_option("--realtime", f.realtime, "Pace to wall clock with this factor");
  cmd->add_flag("--no-apps", f.no_apps, "Do not attach the example application nodes");
  cmd->add_flag("--serial", f.serial, "Use the serial physics kernels");
}

runtime::RunConfig to_config(const RunFlags& f) {
  runtime::RunConfig c;
  c.scene_path = f.scene;
  if (f.duration >= 0.0) c.duration = f.duration;
  if (f.dt > 0.0) c.dt = f.dt;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  c.record_patterns = f.record;
  if (!f.out.empty()) {
    c.record_out = f.out;
    if (c.record_patterns.empty()) c.record_patterns = {"/**"};
  }
  if (!f.replay.empty()) c.replay_path = f.replay;
  c.remap = parse_remaps(f.remap);
  c.snapshot_rate = f.snapshot_rate;
  if (f.realtime > 0.0) {
    c.mode = runtime::ClockMode::Realtime;
    c.factor = f.realtime;
  }
  if (!f.listen.empty()) c.listen = f.listen;
  c.parallel = !f.serial;
  if (!f.no_apps) {
    c.setup = [](runtime::Simulation& sim) {
      for (const auto& line : apps::attach_example_nodes(sim)) std::cerr << "node: " << line << "\n";
    };
  }
  return c;
}

void print_report(const runtime::RunReport& r) {
  std::cout << std::setprecision(9);
  std::cout << "steps: " << r.steps << "\n";
  std::cout << "virtual_duration: " << r.virtual_duration << " s\n";
  std::cout << "wall_time: " << r.wall_time << " s\n";
  std::cout << "messages: " << r.messages << "\n";
  for (const auto& d : r.replayed_devices) std::cout << "replayed: " << d << "\n";
  if (r.bag_path) std::cout << "bag: " << r.bag_path->string() << " (" << r.records << " records)\n";
  if (r.max_lag > 0.0) std::cout << "max_lag: " << r.max_lag << " s\n";
  if (r.last_good_step) std::cout << "diverged after step " << *r.last_good_step << ": " << r.error << "\n";
}

int do_run(const RunFlags& f) {
  runtime::Runner runner(to_config(f));
  if (runner.gateway()) std::cerr << "listening on port " << runner.gateway_port() << "\n";
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done) {
      if (g_interrupted) runner.request_stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  runtime::RunReport report;
  try {
    report = runner.run();
  } catch (...) {
    done = true;
    watcher.join();
    throw;
  }
  done = true;
  watcher.join();
  print_report(report);
  return report.last_good_step ? 1 : 0;
}

int do_validate(const std::string& path) {
  auto text = scene::read_text_file(path);
  scene::SceneSpec spec;
  try {
    spec = scene::parse_scene_unchecked(text);
  } catch (const scene::ParseError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    return 2;
  }
  auto diags = scene::validate(spec);
  if (!diags.empty()) {
    std::cerr << path << ":\n" << scene::format_diagnostics(diags);
    return 2;
  }
  std::cout << path << ": ok (" << spec.models.size() << " models, " << spec.instances.size() << " instances, "
            << spec.link_count() << " links)\n";
  return 0;
}

int do_bag_info(const std::string& path) {
  auto bag = msgbus::read_bag_file(path);
  std::map<std::string, std::uint64_t> counts;
  for (const auto& e : bag.records) ++counts[e.topic];
  std::size_t width = 5;
  for (const auto& [t, tag] : bag.topics) width = std::max(width, t.size());
  std::cout << std::left << std::setw(static_cast<int>(width)) << "topic" << "  " << std::setw(18) << "type"
            << "  count\n";
  for (const auto& [t, tag] : bag.topics) {
    std::cout << std::setw(static_cast<int>(width)) << t << "  " << std::setw(18) << tag << "  " << counts[t]
              << "\n";
  }
  std::cout << "records: " << bag.records.size() << "\n";
  std::cout << std::setprecision(9) << "duration: " << msgbus::nanos_to_seconds(bag.duration) << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vtui: virtual tangible interface simulator"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run a scene");
  add_run_flags(run_cmd, run_flags, true);

  RunFlags record_flags;
  auto* record_cmd = app.add_subcommand("record", "Run a scene and record topics to a bag");
  add_run_flags(record_cmd, record_flags, true);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scene file");
  validate_cmd->add_option("scene", validate_path, "Scene file")->required();

  std::string replay_bag_path;
  RunFlags replay_flags;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a bag onto a bus, or into a scene's devices with --scene");
  replay_cmd->add_option("bag", replay_bag_path, "Bag file")->required();
  replay_cmd->add_option("--speed", replay_flags.speed, "Replay speed factor");
  replay_cmd->add_option("--scene", replay_flags.scene, "Scene whose devices take the bag's streams");
  replay_cmd->add_option("--duration", replay_flags.duration, "Virtual seconds (scene replay)");
  replay_cmd->add_option("--record", replay_flags.record, "Topic pattern to record (repeatable)");
  replay_cmd->add_option("--out", replay_flags.out, "Bag file for the recording");
  replay_cmd->add_option("--remap", replay_flags.remap, "Topic remap FROM=TO (repeatable)");
  replay_cmd->add_flag("--no-apps", replay_flags.no_apps, "Do not attach the example application nodes");

  auto* bag_cmd = app.add_subcommand("bag", "Bag utilities");
  bag_cmd->require_subcommand(1);
  std::string info_path;
  auto* info_cmd = bag_cmd->add_subcommand("info", "Print topics, record counts and duration");
  info_cmd->add_option("bag", info_path, "Bag file")->required();

  RunFlags serve_flags;
  serve_flags.listen = "127.0.0.1:8765";
  serve_flags.realtime = 1.0;
  auto* serve_cmd = app.add_subcommand("serve", "Run a scene in realtime behind the WebSocket gateway");
  add_run_flags(serve_cmd, serve_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*run_cmd) return do_run(run_flags);
    if (*record_cmd) {
      if (record_flags.out.empty()) throw Error(Errc::BadConfig, "record needs --out");
      return do_run(record_flags);
    }
    if (*validate_cmd) return do_validate(validate_path);
    if (*info_cmd) return do_bag_info(info_path);
    if (*serve_cmd) return do_run(serve_flags);
    if (*replay_cmd) {
      if (!replay_flags.scene.empty()) {
        if (replay_flags.speed != 1.0) throw Error(Errc::BadConfig, "--speed applies to bus replay only");
        replay_flags.replay = replay_bag_path;
        return do_run(replay_flags);
      }
      std::optional<std::filesystem::path> out;
      std::vector<std::string> patterns = replay_flags.record;
      if (!replay_flags.out.empty()) {
        out = replay_flags.out;
        if (patterns.empty()) patterns = {"/**"};
      }
      auto report = runtime::replay_bag(replay_bag_path, replay_flags.speed, parse_remaps(replay_flags.remap),
                                        patterns, out);
      print_report(report);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
