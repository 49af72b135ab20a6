#include "robofruit/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "robofruit/error.hpp"

namespace robofruit::config {

using geometry::Vec3;
using orchestrator::TrialConfig;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::InvalidConfig, path.empty() ? msg : path + ": " + msg);
}

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json mat3(const geometry::Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

/// Overlays the keys of one JSON object onto existing values; every key must
/// be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) bad(path_, "expected an object");
  }
  Reader(const Reader&) = delete;
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& item : j_.items()) {
      if (!used_.contains(item.key())) bad(path_, "unknown key '" + item.key() + "'");
    }
  }

  const json* find(const char* key) {
    const auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void get(const char* key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const nlohmann::json::exception&) {
        bad(child(key), "wrong type");
      }
    }
  }
  void get(const char* key, Vec3& out) {
    if (const json* v = find(key)) out = read_vec3(*v, child(key));
  }
  void get(const char* key, geometry::Mat3& out) {
    if (const json* v = find(key)) {
      const auto a = read_numbers(*v, 9, child(key));
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out(r, c) = a[static_cast<std::size_t>(3 * r + c)];
      }
    }
  }
  template <typename F>
  void object(const char* key, F&& f) {
    if (const json* v = find(key)) {
      Reader sub(*v, child(key));
      f(sub);
    }
  }

  static std::vector<double> read_numbers(const json& v, std::size_t n, const std::string& path) {
    if (!v.is_array() || v.size() != n) bad(path, fmt::format("expected {} numbers", n));
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad(path, "expected numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  static Vec3 read_vec3(const json& v, const std::string& path) {
    const auto a = read_numbers(v, 3, path);
    return {a[0], a[1], a[2]};
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json intrinsics_json(const geometry::Intrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
          {"width", k.width}, {"height", k.height}};
}

void read_intrinsics(Reader& r, geometry::Intrinsics& k) {
  r.get("fx", k.fx);
  r.get("fy", k.fy);
  r.get("cx", k.cx);
  r.get("cy", k.cy);
  r.get("width", k.width);
  r.get("height", k.height);
}

json transform_json(const geometry::RigidTransform& t) {
  return {{"rotation", mat3(t.rotation())}, {"translation", vec3(t.translation())}};
}

void read_transform(Reader& r, geometry::RigidTransform& t, const std::string& path) {
  geometry::Mat3 rot = t.rotation();
  Vec3 trans = t.translation();
  r.get("rotation", rot);
  r.get("translation", trans);
  if (!geometry::is_rotation(rot, 1e-6)) bad(path, "rotation is not orthonormal");
  t = geometry::RigidTransform(rot, trans);
}

json hsv_range_json(const head::HsvRange& r) {
  return {{"lower", {r.lower.h, r.lower.s, r.lower.v}},
          {"upper", {r.upper.h, r.upper.s, r.upper.v}}};
}

void read_hsv(Reader& r, const char* key, head::Hsv& out) {
  if (const json* v = r.find(key)) {
    const auto a = Reader::read_numbers(*v, 3, r.child(key));
    out = {static_cast<int>(a[0]), static_cast<int>(a[1]), static_cast<int>(a[2])};
  }
}

json scene_config_json(const scene::SceneConfig& s) {
  return {{"berry_count", s.berry_count},
          {"ripe_fraction", s.ripe_fraction},
          {"ripeness_threshold", s.ripeness_threshold},
          {"variety", std::string(scene::to_string(s.variety))},
          {"cluster_count", s.cluster_count},
          {"cluster_spread", s.cluster_spread},
          {"row_x", {s.row_x_min, s.row_x_max}},
          {"row_y", {s.row_y_min, s.row_y_max}},
          {"row_z", {s.row_z_min, s.row_z_max}},
          {"flesh_radius", {s.flesh_radius_min, s.flesh_radius_max}},
          {"stem_length", s.stem_length},
          {"stem_tilt_sd", s.stem_tilt_sd},
          {"grasp_half_width", s.grasp_half_width},
          {"mass_kg", {s.mass_min_kg, s.mass_max_kg}},
          {"occlusion_radius", s.occlusion_radius},
          {"min_separation", s.min_separation},
          {"punnet_position", vec3(s.punnet_position)}};
}

void read_range(Reader& r, const char* key, double& lo, double& hi) {
  if (const json* v = r.find(key)) {
    const auto a = Reader::read_numbers(*v, 2, r.child(key));
    lo = a[0];
    hi = a[1];
  }
}

scene::Variety variety_from_string(const std::string& s, const std::string& path) {
  for (auto v : {scene::Variety::Katrina, scene::Variety::Zara, scene::Variety::Generic}) {
    if (scene::to_string(v) == s) return v;
  }
  bad(path, "unknown variety '" + s + "'");
}

void read_scene_config(Reader& r, scene::SceneConfig& s) {
  r.get("berry_count", s.berry_count);
  r.get("ripe_fraction", s.ripe_fraction);
  r.get("ripeness_threshold", s.ripeness_threshold);
  if (const json* v = r.find("variety")) {
    if (!v->is_string()) bad(r.child("variety"), "expected a string");
    s.variety = variety_from_string(v->get<std::string>(), r.child("variety"));
  }
  r.get("cluster_count", s.cluster_count);
  r.get("cluster_spread", s.cluster_spread);
  read_range(r, "row_x", s.row_x_min, s.row_x_max);
  read_range(r, "row_y", s.row_y_min, s.row_y_max);
  read_range(r, "row_z", s.row_z_min, s.row_z_max);
  read_range(r, "flesh_radius", s.flesh_radius_min, s.flesh_radius_max);
  r.get("stem_length", s.stem_length);
  r.get("stem_tilt_sd", s.stem_tilt_sd);
  r.get("grasp_half_width", s.grasp_half_width);
  read_range(r, "mass_kg", s.mass_min_kg, s.mass_max_kg);
  r.get("occlusion_radius", s.occlusion_radius);
  r.get("min_separation", s.min_separation);
  r.get("punnet_position", s.punnet_position);
}

json trial_config_json(const TrialConfig& t, const GprSource& g) {
  json rig;
  rig["top_camera"] = camera_to_json(t.rig.top_cam);
  rig["bottom_intrinsics"] = intrinsics_json(t.rig.bottom_intrinsics);
  rig["bottom_mounts"] = json::array();
  for (const auto& m : t.rig.bottom_mounts) rig["bottom_mounts"].push_back(transform_json(m));
  rig["home"] = vec3(t.rig.home_position);
  rig["table_side"] = {{"normal", vec3(t.rig.table_side.normal)},
                       {"offset", t.rig.table_side.offset}};

  json j;
  j["rig"] = rig;
  j["policy"] = std::string(scheduler::to_string(t.policy));
  j["direction"] = std::string(scheduler::to_string(t.direction));
  j["noise"] = {{"mean_error", vec3(t.noise.mean_error)},
                {"sd_error", vec3(t.noise.sd_error)},
                {"dropout_below", t.noise.dropout_below},
                {"dropout_above", t.noise.dropout_above}};
  j["detector"] = {{"miss_prob", t.detector.miss_prob},
                   {"class_error_prob", t.detector.class_error_prob},
                   {"bbox_jitter_px", t.detector.bbox_jitter_px},
                   {"ripeness_threshold", t.detector.ripeness_threshold},
                   {"mask_pixels", t.detector.mask_pixels},
                   {"mask_depth_sd", t.detector.mask_depth_sd},
                   {"mask_outlier_fraction", t.detector.mask_outlier_fraction}};
  j["bottom"] = {{"bbox_jitter_px", t.bottom.bbox_jitter_px},
                 {"head_plane_depth", t.bottom.head_plane_depth},
                 {"pluckable_only", t.bottom.pluckable_only},
                 {"ripeness_threshold", t.bottom.ripeness_threshold}};
  j["gpr"] = {{"model_path", g.model_path},
              {"teach_samples", g.teach_samples},
              {"teach_seed", g.teach_seed},
              {"sigma0_sq", t.gpr_options.sigma0_sq},
              {"jitter", t.gpr_options.jitter},
              {"scaling", t.gpr_options.scaling == gpr::FeatureScaling::ZScore ? "zscore" : "none"},
              {"validity_flag", t.gpr_layout.validity_flag},
              {"include_pregrasp_pose", t.gpr_layout.include_pregrasp_pose}};
  j["standoff"] = t.standoff;
  j["nominal_pp_offset"] = vec3(t.nominal_pp_offset);
  j["depth_near"] = t.depth_near;
  j["depth_far"] = t.depth_far;
  j["gamma_max"] = t.gamma_max;
  j["max_adjustments"] = t.max_adjustments;
  j["adjustment_step"] = t.adjustment_step;
  j["adjustment_deadband_px"] = t.adjustment_deadband_px;
  j["retries"] = t.retries;
  j["confirm_attempts"] = t.confirm_attempts;
  j["retreat_distance"] = t.retreat_distance;
  j["threshold_confirm"] = t.threshold_confirm;
  j["threshold_validate"] = t.threshold_validate;
  j["hsv"] = {{"range1", hsv_range_json(t.hsv.range1)}, {"range2", hsv_range_json(t.hsv.range2)}};
  j["glare_prob"] = t.glare_prob;
  j["replace_full_punnet"] = t.replace_full_punnet;
  j["separators"] = {{"sweep_half_span", t.separators.sweep_half_span},
                     {"engagement_distance", t.separators.engagement_distance},
                     {"success_prob", t.separators.success_prob}};
  j["grip_cut"] = {{"capture_half_width", t.grip_cut.window.half_width},
                   {"capture_half_height", t.grip_cut.window.half_height},
                   {"blade_to_finger_mm", t.grip_cut.blade_to_finger_mm},
                   {"residual_min_mm", t.grip_cut.residual_min_mm},
                   {"residual_max_mm", t.grip_cut.residual_max_mm}};
  j["force"] = {{"mass", t.force.mass},           {"g", t.force.g},
                {"mu", t.force.mu},               {"safety", t.force.safety},
                {"grip_limit", t.force.grip_limit}, {"cut_capability", t.force.cut_capability}};
  j["grip_force"] = t.grip_force;
  j["limits"] = {{"free_v", t.limits.free_v}, {"free_a", t.limits.free_a},
                 {"lin_v", t.limits.lin_v},   {"lin_a", t.limits.lin_a}};
  const auto& tc = t.time;
  j["time"] = {{"detection_s", tc.detection_s},
               {"planning_s_per_segment", tc.planning_s_per_segment},
               {"association_s", tc.association_s},
               {"adjustment_s", tc.adjustment_s},
               {"gpr_s", tc.gpr_s},
               {"confirm_poll_s", tc.confirm_poll_s},
               {"separator_s", tc.separator_s},
               {"grip_cut_s", tc.grip_cut_s},
               {"validation_s", tc.validation_s},
               {"release_s", tc.release_s},
               {"punnet_swap_s", tc.punnet_swap_s}};
  j["injection"] = {{"position", t.injection.position},
                    {"cut_command", t.injection.cut_command},
                    {"grip_cut", t.injection.grip_cut},
                    {"validation", t.injection.validation}};
  j["verbose"] = t.verbose;
  return j;
}

void read_trial_config(Reader& r, TrialConfig& t, GprSource& g) {
  r.object("rig", [&](Reader& rig) {
    if (const json* cam = rig.find("top_camera")) t.rig.top_cam = camera_from_json(*cam);
    rig.object("bottom_intrinsics", [&](Reader& k) { read_intrinsics(k, t.rig.bottom_intrinsics); });
    if (const json* mounts = rig.find("bottom_mounts")) {
      if (!mounts->is_array() || mounts->size() != sensors::kBottomCameras) {
        bad(rig.child("bottom_mounts"), "expected 3 mounts {right, middle, left}");
      }
      for (std::size_t c = 0; c < sensors::kBottomCameras; ++c) {
        const std::string path = fmt::format("{}[{}]", rig.child("bottom_mounts"), c);
        Reader m((*mounts)[c], path);
        read_transform(m, t.rig.bottom_mounts[c], path);
      }
    }
    rig.get("home", t.rig.home_position);
    rig.object("table_side", [&](Reader& h) {
      h.get("normal", t.rig.table_side.normal);
      h.get("offset", t.rig.table_side.offset);
    });
  });
  if (const json* v = r.find("policy")) {
    try {
      t.policy = scheduler::policy_from_string(v->get<std::string>());
    } catch (const std::exception& e) {
      bad(r.child("policy"), e.what());
    }
  }
  if (const json* v = r.find("direction")) {
    try {
      t.direction = scheduler::direction_from_string(v->get<std::string>());
    } catch (const std::exception& e) {
      bad(r.child("direction"), e.what());
    }
  }
  r.object("noise", [&](Reader& n) {
    n.get("mean_error", t.noise.mean_error);
    n.get("sd_error", t.noise.sd_error);
    n.get("dropout_below", t.noise.dropout_below);
    n.get("dropout_above", t.noise.dropout_above);
  });
  r.object("detector", [&](Reader& d) {
    d.get("miss_prob", t.detector.miss_prob);
    d.get("class_error_prob", t.detector.class_error_prob);
    d.get("bbox_jitter_px", t.detector.bbox_jitter_px);
    d.get("ripeness_threshold", t.detector.ripeness_threshold);
    d.get("mask_pixels", t.detector.mask_pixels);
    d.get("mask_depth_sd", t.detector.mask_depth_sd);
    d.get("mask_outlier_fraction", t.detector.mask_outlier_fraction);
  });
  r.object("bottom", [&](Reader& b) {
    b.get("bbox_jitter_px", t.bottom.bbox_jitter_px);
    b.get("head_plane_depth", t.bottom.head_plane_depth);
    b.get("pluckable_only", t.bottom.pluckable_only);
    b.get("ripeness_threshold", t.bottom.ripeness_threshold);
  });
  r.object("gpr", [&](Reader& m) {
    m.get("model_path", g.model_path);
    m.get("teach_samples", g.teach_samples);
    m.get("teach_seed", g.teach_seed);
    m.get("sigma0_sq", t.gpr_options.sigma0_sq);
    m.get("jitter", t.gpr_options.jitter);
    if (const json* v = m.find("scaling")) {
      const std::string s = v->is_string() ? v->get<std::string>() : "";
      if (s == "zscore") t.gpr_options.scaling = gpr::FeatureScaling::ZScore;
      else if (s == "none") t.gpr_options.scaling = gpr::FeatureScaling::None;
      else bad(m.child("scaling"), "expected \"zscore\" or \"none\"");
    }
    m.get("validity_flag", t.gpr_layout.validity_flag);
    m.get("include_pregrasp_pose", t.gpr_layout.include_pregrasp_pose);
  });
  r.get("standoff", t.standoff);
  r.get("nominal_pp_offset", t.nominal_pp_offset);
  r.get("depth_near", t.depth_near);
  r.get("depth_far", t.depth_far);
  r.get("gamma_max", t.gamma_max);
  r.get("max_adjustments", t.max_adjustments);
  r.get("adjustment_step", t.adjustment_step);
  r.get("adjustment_deadband_px", t.adjustment_deadband_px);
  r.get("retries", t.retries);
  r.get("confirm_attempts", t.confirm_attempts);
  r.get("retreat_distance", t.retreat_distance);
  r.get("threshold_confirm", t.threshold_confirm);
  r.get("threshold_validate", t.threshold_validate);
  r.object("hsv", [&](Reader& h) {
    h.object("range1", [&](Reader& x) {
      read_hsv(x, "lower", t.hsv.range1.lower);
      read_hsv(x, "upper", t.hsv.range1.upper);
    });
    h.object("range2", [&](Reader& x) {
      read_hsv(x, "lower", t.hsv.range2.lower);
      read_hsv(x, "upper", t.hsv.range2.upper);
    });
  });
  r.get("glare_prob", t.glare_prob);
  r.get("replace_full_punnet", t.replace_full_punnet);
  r.object("separators", [&](Reader& s) {
    s.get("sweep_half_span", t.separators.sweep_half_span);
    s.get("engagement_distance", t.separators.engagement_distance);
    s.get("success_prob", t.separators.success_prob);
  });
  r.object("grip_cut", [&](Reader& s) {
    s.get("capture_half_width", t.grip_cut.window.half_width);
    s.get("capture_half_height", t.grip_cut.window.half_height);
    s.get("blade_to_finger_mm", t.grip_cut.blade_to_finger_mm);
    s.get("residual_min_mm", t.grip_cut.residual_min_mm);
    s.get("residual_max_mm", t.grip_cut.residual_max_mm);
  });
  r.object("force", [&](Reader& f) {
    f.get("mass", t.force.mass);
    f.get("g", t.force.g);
    f.get("mu", t.force.mu);
    f.get("safety", t.force.safety);
    f.get("grip_limit", t.force.grip_limit);
    f.get("cut_capability", t.force.cut_capability);
  });
  r.get("grip_force", t.grip_force);
  r.object("limits", [&](Reader& l) {
    l.get("free_v", t.limits.free_v);
    l.get("free_a", t.limits.free_a);
    l.get("lin_v", t.limits.lin_v);
    l.get("lin_a", t.limits.lin_a);
  });
  r.object("time", [&](Reader& c) {
    auto& tc = t.time;
    c.get("detection_s", tc.detection_s);
    c.get("planning_s_per_segment", tc.planning_s_per_segment);
    c.get("association_s", tc.association_s);
    c.get("adjustment_s", tc.adjustment_s);
    c.get("gpr_s", tc.gpr_s);
    c.get("confirm_poll_s", tc.confirm_poll_s);
    c.get("separator_s", tc.separator_s);
    c.get("grip_cut_s", tc.grip_cut_s);
    c.get("validation_s", tc.validation_s);
    c.get("release_s", tc.release_s);
    c.get("punnet_swap_s", tc.punnet_swap_s);
  });
  r.object("injection", [&](Reader& i) {
    i.get("position", t.injection.position);
    i.get("cut_command", t.injection.cut_command);
    i.get("grip_cut", t.injection.grip_cut);
    i.get("validation", t.injection.validation);
  });
  r.get("verbose", t.verbose);
}

std::string read_file(const std::string& path, ErrorKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kind, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SimConfig profile_defaults(const std::string& profile) {
  SimConfig c;
  c.profile = profile;
  if (profile == "default") {
    return c;
  }
  if (profile == "golden") {
    c.trial = TrialConfig::golden();
    c.gpr.teach_samples = 0;
    return c;
  }
  if (profile == "calibrated") {
    c.trial = TrialConfig::calibrated();
    return c;
  }
  bad("profile", "unknown profile '" + profile + "' (default, golden, calibrated)");
}

json camera_to_json(const geometry::CameraModel& cam) {
  json j = intrinsics_json(cam.intrinsics);
  j["rotation"] = mat3(cam.base_from_camera.rotation());
  j["translation"] = vec3(cam.base_from_camera.translation());
  return j;
}

geometry::CameraModel camera_from_json(const json& j) {
  geometry::CameraModel cam;
  Reader r(j, "camera");
  read_intrinsics(r, cam.intrinsics);
  read_transform(r, cam.base_from_camera, "camera");
  try {
    cam.intrinsics.validate();
  } catch (const Error& e) {
    bad("camera", e.what());
  }
  return cam;
}

json to_json(const SimConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["scene"] = scene_config_json(c.scene);
  j["trial"] = trial_config_json(c.trial, c.gpr);
  return j;
}

SimConfig sim_config_from_json(const json& j) {
  if (!j.is_object()) bad("", "configuration must be a JSON object");
  std::string profile = "default";
  if (const auto it = j.find("profile"); it != j.end()) {
    if (!it->is_string()) bad("profile", "expected a string");
    profile = it->get<std::string>();
  }
  SimConfig c = profile_defaults(profile);
  {
    Reader r(j, "");
    r.find("profile");
    r.object("scene", [&](Reader& s) { read_scene_config(s, c.scene); });
    r.object("trial", [&](Reader& t) { read_trial_config(t, c.trial, c.gpr); });
  }
  try {
    c.scene.validate();
    c.trial.validate();
  } catch (const Error& e) {
    bad("", e.what());
  }
  return c;
}

SimConfig load_config(const std::string& path) {
  const std::string text = read_file(path, ErrorKind::InvalidConfig);
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    bad(path, e.what());
  }
  return sim_config_from_json(j);
}

std::string default_config_text() { return to_json(SimConfig{}).dump(2) + "\n"; }

json scene_to_json(const scene::Scene& s) {
  json berries = json::array();
  for (const auto& b : s.berries) {
    berries.push_back({{"id", b.id},
                       {"variety", std::string(scene::to_string(b.variety))},
                       {"flesh_center", vec3(b.flesh_center)},
                       {"flesh_radius", b.flesh_radius},
                       {"stem_direction", vec3(b.stem_direction)},
                       {"key_points",
                        {{"picking_point", vec3(b.key_points.picking_point)},
                         {"top", vec3(b.key_points.top)},
                         {"bottom", vec3(b.key_points.bottom)},
                         {"left_grasp", vec3(b.key_points.left_grasp)},
                         {"right_grasp", vec3(b.key_points.right_grasp)}}},
                       {"ripeness", b.ripeness},
                       {"stem_diameter_mm", b.stem_diameter_mm},
                       {"mass_kg", b.mass_kg},
                       {"occluder_ids", b.occluder_ids}});
  }
  json occupancy = json::array();
  for (const auto& o : s.punnet.occupancy) occupancy.push_back(o ? json(*o) : json(nullptr));
  json j;
  j["rng_seed"] = s.rng_seed;
  j["table_pose"] = transform_json(s.table_pose);
  j["punnet"] = {{"pose", transform_json(s.punnet.pose)},
                 {"width", s.punnet.width},
                 {"length", s.punnet.length},
                 {"margin", s.punnet.margin},
                 {"slot_height", s.punnet.slot_height},
                 {"occupancy", occupancy}};
  j["berries"] = berries;
  return j;
}

scene::Scene scene_from_json(const json& j) {
  scene::Scene s;
  try {
    s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    {
      Reader r(j.at("table_pose"), "table_pose");
      read_transform(r, s.table_pose, "table_pose");
    }
    const json& p = j.at("punnet");
    {
      Reader r(p.at("pose"), "punnet.pose");
      read_transform(r, s.punnet.pose, "punnet.pose");
    }
    s.punnet.width = p.at("width").get<double>();
    s.punnet.length = p.at("length").get<double>();
    s.punnet.margin = p.at("margin").get<double>();
    s.punnet.slot_height = p.at("slot_height").get<double>();
    const json& occ = p.at("occupancy");
    if (!occ.is_array() || occ.size() != scene::Punnet::kSlots) bad("punnet", "bad occupancy");
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (!occ[k].is_null()) s.punnet.occupancy[k] = occ[k].get<int>();
    }
    for (const json& bj : j.at("berries")) {
      scene::Berry b;
      b.id = bj.at("id").get<int>();
      b.variety = variety_from_string(bj.at("variety").get<std::string>(), "berry");
      b.flesh_center = Reader::read_vec3(bj.at("flesh_center"), "flesh_center");
      b.flesh_radius = bj.at("flesh_radius").get<double>();
      b.stem_direction = Reader::read_vec3(bj.at("stem_direction"), "stem_direction");
      const json& kp = bj.at("key_points");
      b.key_points.picking_point = Reader::read_vec3(kp.at("picking_point"), "picking_point");
      b.key_points.top = Reader::read_vec3(kp.at("top"), "top");
      b.key_points.bottom = Reader::read_vec3(kp.at("bottom"), "bottom");
      b.key_points.left_grasp = Reader::read_vec3(kp.at("left_grasp"), "left_grasp");
      b.key_points.right_grasp = Reader::read_vec3(kp.at("right_grasp"), "right_grasp");
      b.ripeness = bj.at("ripeness").get<double>();
      b.stem_diameter_mm = bj.at("stem_diameter_mm").get<double>();
      b.mass_kg = bj.at("mass_kg").get<double>();
      b.occluder_ids = bj.at("occluder_ids").get<std::vector<int>>();
      s.berries.push_back(std::move(b));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("scene: ") + e.what());
  }
  return s;
}

json trial_log_to_json(const orchestrator::TrialLog& log) {
  json attempts = json::array();
  for (const auto& a : log.attempts) {
    json segs = json::array();
    for (const auto& s : a.segments) {
      segs.push_back({{"mode", std::string(motion::to_string(s.mode))},
                      {"to", std::string(motion::to_string(s.goal.label))},
                      {"profile", std::string(motion::to_string(s.profile))},
                      {"length", s.length},
                      {"a_max", s.a_max},
                      {"duration", s.duration}});
    }
    const auto& e = a.events;
    attempts.push_back(
        {{"berry_id", a.berry_id},
         {"outcome", std::string(orchestrator::to_string(a.outcome))},
         {"attempt_index", a.attempt_index},
         {"target_pluckable", a.target_pluckable},
         {"duration", a.duration},
         {"events",
          {{"detections", e.detections},
           {"associations", e.associations},
           {"adjustments", e.adjustments},
           {"gpr_queries", e.gpr_queries},
           {"confirm_polls", e.confirm_polls},
           {"separator_ops", e.separator_ops},
           {"grip_cuts", e.grip_cuts},
           {"validations", e.validations},
           {"releases", e.releases}}},
         {"confirm_ratio", a.confirm_ratio ? json(*a.confirm_ratio) : json(nullptr)},
         {"validate_ratio", a.validate_ratio ? json(*a.validate_ratio) : json(nullptr)},
         {"residual_warning", a.residual_warning},
         {"segments", segs}});
  }
  json j;
  j["seed"] = log.seed;
  j["total_fruit"] = log.total_fruit;
  j["pluckable"] = log.pluckable;
  j["detected_pluckable"] = log.detected_pluckable;
  j["successes"] = log.successes;
  j["attempt_count"] = log.attempt_count();
  j["total_time"] = log.total_time;
  j["punnet_swaps"] = log.punnet_swaps;
  j["false_positive_attempts"] = log.false_positive_attempts;
  j["ended_early"] = log.ended_early.empty() ? json(nullptr) : json(log.ended_early);
  j["attempts"] = attempts;
  if (!log.events.empty()) j["events"] = log.events;
  return j;
}

std::string attempts_csv(const std::vector<orchestrator::TrialLog>& logs) {
  std::string out =
      "seed,berry_id,attempt_index,outcome,target_pluckable,duration_s,segments,"
      "adjustments,confirm_polls,confirm_ratio,validate_ratio\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? fmt::format("{:.4f}", *v) : std::string();
  };
  for (const auto& log : logs) {
    for (const auto& a : log.attempts) {
      out += fmt::format("{},{},{},{},{},{:.3f},{},{},{},{},{}\n", log.seed, a.berry_id,
                         a.attempt_index, orchestrator::to_string(a.outcome),
                         a.target_pluckable ? 1 : 0, a.duration, a.segments.size(),
                         a.events.adjustments, a.events.confirm_polls, opt(a.confirm_ratio),
                         opt(a.validate_ratio));
    }
  }
  return out;
}

json gpr_model_to_json(const gpr::GprModel& model, const gpr::FeatureLayout& layout) {
  json samples = json::array();
  for (const auto& s : model.samples()) {
    samples.push_back({{"features", s.features}, {"label", vec3(s.label)}});
  }
  const auto& o = model.options();
  return {{"sigma0_sq", o.sigma0_sq},
          {"jitter", o.jitter},
          {"scaling", o.scaling == gpr::FeatureScaling::ZScore ? "zscore" : "none"},
          {"validity_flag", layout.validity_flag},
          {"include_pregrasp_pose", layout.include_pregrasp_pose},
          {"samples", samples}};
}

void save_gpr_model(const gpr::GprModel& model, const gpr::FeatureLayout& layout,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write " + path);
  out << gpr_model_to_json(model, layout).dump(2) << "\n";
}

gpr::GprModel load_gpr_model(const std::string& path, const gpr::GprOptions& fallback_options) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  if (csv) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidConfig, "cannot open GPR training set " + path);
    return gpr::GprModel::fit(gpr::load_training_csv(in), fallback_options);
  }
  const std::string text = read_file(path, ErrorKind::InvalidConfig);
  try {
    const json j = json::parse(text);
    gpr::GprOptions o;
    o.sigma0_sq = j.at("sigma0_sq").get<double>();
    o.jitter = j.at("jitter").get<double>();
    const std::string scaling = j.at("scaling").get<std::string>();
    if (scaling != "zscore" && scaling != "none") bad(path, "bad scaling");
    o.scaling = scaling == "zscore" ? gpr::FeatureScaling::ZScore : gpr::FeatureScaling::None;
    std::vector<gpr::GprSample> samples;
    for (const json& sj : j.at("samples")) {
      gpr::GprSample s;
      s.features = sj.at("features").get<std::vector<double>>();
      s.label = Reader::read_vec3(sj.at("label"), "label");
      samples.push_back(std::move(s));
    }
    return gpr::GprModel::fit(samples, o);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

void attach_gpr_model(SimConfig& c) {
  if (!c.gpr.model_path.empty()) {
    auto model = load_gpr_model(c.gpr.model_path, c.trial.gpr_options);
    if (model.feature_dim() != c.trial.gpr_layout.dimension()) {
      throw Error(ErrorKind::InvalidConfig,
                  fmt::format("{}: model has {} features, layout expects {}", c.gpr.model_path,
                              model.feature_dim(), c.trial.gpr_layout.dimension()));
    }
    c.trial.gpr_model = std::make_shared<const gpr::GprModel>(std::move(model));
    return;
  }
  if (c.gpr.teach_samples == 0) {
    c.trial.gpr_model.reset();
    return;
  }
  const auto samples = orchestrator::collect_teach_samples(c.trial, c.scene,
                                                           c.gpr.teach_samples, c.gpr.teach_seed);
  c.trial.gpr_model =
      std::make_shared<const gpr::GprModel>(gpr::GprModel::fit(samples, c.trial.gpr_options));
}

}  // namespace robofruit::config
