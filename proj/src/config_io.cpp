#include "stapcrb/config_io.hpp"

#include <fstream>

namespace stapcrb {

namespace {

template <class F>
void for_each_field(SceneConfig& c, F&& f) {
  f("carrier_freq_hz", c.carrier_freq_hz);
  f("bandwidth_hz", c.bandwidth_hz);
  f("prf_hz", c.prf_hz);
  f("num_pulses", c.num_pulses);
  f("num_channels", c.num_channels);
  f("element_spacing_m", c.element_spacing_m);
  f("full_array_cols", c.full_array_cols);
  f("full_array_rows", c.full_array_rows);
  f("platform_height_m", c.platform_height_m);
  f("range_lower_m", c.range_lower_m);
  f("range_upper_m", c.range_upper_m);
  f("azimuth_min_deg", c.azimuth_min_deg);
  f("azimuth_max_deg", c.azimuth_max_deg);
  f("velocity_min_mps", c.velocity_min_mps);
  f("velocity_max_mps", c.velocity_max_mps);
  f("azimuth_step_deg", c.azimuth_step_deg);
  f("velocity_step_mps", c.velocity_step_mps);
  f("num_range_bins", c.num_range_bins);
  f("elevation_rad", c.elevation_rad);
  f("cnr_db", c.cnr_db);
  f("rcs_spread", c.rcs_spread);
  f("snapshots", c.snapshots);
  f("target_scnr_db", c.target_scnr_db);
  f("rng_seed", c.rng_seed);
}

}  // namespace

SceneConfig scene_from_json(const nlohmann::json& j, SceneConfig base) {
  if (!j.is_object()) throw ConfigError("scene config must be a JSON object");
  std::size_t matched = 0;
  for_each_field(base, [&](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) {
      try {
        field = it->template get<std::remove_reference_t<decltype(field)>>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
      }
      ++matched;
    }
  });
  if (matched != j.size()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for_each_field(base, [&](const char* key, auto&) { known = known || it.key() == key; });
      if (!known) throw ConfigError("unknown scene config key: " + it.key());
    }
  }
  return base;
}

nlohmann::json scene_to_json(const SceneConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  SceneConfig copy = cfg;
  for_each_field(copy, [&](const char* key, auto& field) { j[key] = field; });
  return j;
}

SceneConfig load_scene_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  return scene_from_json(j);
}

void save_scene_file(const SceneConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write config " + path);
  os << scene_to_json(cfg).dump(2) << '\n';
}

nlohmann::json truth_to_json(const TargetTruth& t) {
  return {{"range_bin_index", t.range_bin_index},
          {"azimuth_deg", t.azimuth_deg},
          {"velocity_mps", t.velocity_mps},
          {"rcs", t.rcs}};
}

TargetTruth truth_from_json(const nlohmann::json& j) {
  TargetTruth t;
  t.range_bin_index = j.at("range_bin_index").get<int>();
  t.azimuth_deg = j.at("azimuth_deg").get<double>();
  t.velocity_mps = j.at("velocity_mps").get<double>();
  t.rcs = j.at("rcs").get<double>();
  return t;
}

}  // namespace stapcrb
