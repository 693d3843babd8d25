#pragma once

// Spinning a top in the simulation: select it, lift it with a wrench, give
// it an angular impulse about its axis and let go.

#include <string>
#include <vector>

#include "vtui/scene/types.hpp"

namespace vtui::apps {

struct TopScenarioOptions {
  std::string instance = "top";
  /// Body whose +z is the top's axis; gets the lift and spin wrenches.
  std::string link = "disc";
  double spin_rate = 50.0;  // rad/s; 0 skips the angular impulse
  double spin_time = 0.05;  // s the impulse is spread over
  double lift_factor = 1.02;  // lift force as a multiple of the top's weight
  double duration = 2.0;  // s after release
  double snapshot_interval = 0.01;
  bool parallel = true;
};

struct TiltSample {
  double t = 0.0;  // s since release
  double tilt = 0.0;  // rad between the top's axis and world +z
};

struct TopReport {
  std::vector<std::string> script;  // steps as executed
  std::vector<TiltSample> series;
  double spin_after_impulse = 0.0;  // rad/s about the axis at release
  double final_tilt = 0.0;
  std::uint64_t steps = 0;
};

/// Defaults from the model's param.spin_rate and param.spin_time.
TopScenarioOptions top_options_from(const scene::SceneSpec& spec, const std::string& instance = "top");

TopReport spinning_top_scenario(const scene::SceneSpec& spec, TopScenarioOptions options);

}  // namespace vtui::apps
