#pragma once

// JSON configuration file and the JSON/CSV forms of scenes, trial logs and
// GPR models.
//
// A configuration file may be partial: values are overlaid on the profile
// named by "profile" ("default", "golden" or "calibrated"). Unknown keys are
// rejected so typos do not silently fall back to defaults.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "robofruit/gpr.hpp"
#include "robofruit/orchestrator.hpp"
#include "robofruit/scene.hpp"

namespace robofruit::config {

using json = nlohmann::ordered_json;

struct GprSource {
  /// JSON model file (see save_gpr_model) or training CSV. Empty: teach.
  std::string model_path;
  std::size_t teach_samples = 200;
  std::uint64_t teach_seed = 900001;
};

struct SimConfig {
  std::string profile = "default";
  scene::SceneConfig scene;
  orchestrator::TrialConfig trial;
  GprSource gpr;
};

SimConfig profile_defaults(const std::string& profile);

json to_json(const SimConfig& c);
/// Throws InvalidConfig for unknown keys, wrong types or invalid values.
SimConfig sim_config_from_json(const json& j);
SimConfig load_config(const std::string& path);
std::string default_config_text();

json camera_to_json(const geometry::CameraModel& cam);
geometry::CameraModel camera_from_json(const json& j);

json scene_to_json(const scene::Scene& s);
scene::Scene scene_from_json(const json& j);

json trial_log_to_json(const orchestrator::TrialLog& log);
/// One row per attempt record across all logs.
std::string attempts_csv(const std::vector<orchestrator::TrialLog>& logs);

json gpr_model_to_json(const gpr::GprModel& model, const gpr::FeatureLayout& layout);
void save_gpr_model(const gpr::GprModel& model, const gpr::FeatureLayout& layout,
                    const std::string& path);
/// Refits from the stored hyperparameters and training data. A ".csv" path
/// is read as a training set and fitted with `fallback_options`. Throws
/// ParseError, InvalidConfig or the fit errors.
gpr::GprModel load_gpr_model(const std::string& path,
                             const gpr::GprOptions& fallback_options);

/// Attaches the model named by `c.gpr`, teaching one when no path is set.
void attach_gpr_model(SimConfig& c);

}  // namespace robofruit::config
