#include "robofruit/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "robofruit/error.hpp"
#include "robofruit/rng.hpp"

namespace robofruit::sensors {

namespace {

// Strawberries are drawn slightly taller than wide.
constexpr double kFleshElongation = 1.15;

std::uint64_t pixel_hash(int id, int x, int y) {
  return mix_seed((static_cast<std::uint64_t>(id) << 40) ^
                  (static_cast<std::uint64_t>(x) << 20) ^
                  static_cast<std::uint64_t>(y));
}

void jitter_box(BoundingBox& b, double jitter, Rng& rng) {
  if (jitter <= 0.0) return;
  b.xp1 += rng.uniform(-jitter, jitter);
  b.yp1 += rng.uniform(-jitter, jitter);
  b.xp2 += rng.uniform(-jitter, jitter);
  b.yp2 += rng.uniform(-jitter, jitter);
  if (b.xp1 > b.xp2) std::swap(b.xp1, b.xp2);
  if (b.yp1 > b.yp2) std::swap(b.yp1, b.yp2);
}

}  // namespace

SensorNoiseModel SensorNoiseModel::field_model() {
  SensorNoiseModel m;
  m.mean_error = Vec3(0.062, 0.009, -0.019);
  m.sd_error = Vec3(0.012, 0.014, 0.016);
  return m;
}

void SensorNoiseModel::validate() const {
  if ((sd_error.array() < 0.0).any()) {
    throw Error(ErrorKind::InvalidConfig, "noise SD must be non-negative");
  }
  if (!(dropout_below < dropout_above)) {
    throw Error(ErrorKind::InvalidConfig, "dropout_below must be < dropout_above");
  }
}

DetectorConfig DetectorConfig::noise_free() {
  DetectorConfig d;
  d.miss_prob = 0.0;
  d.class_error_prob = 0.0;
  d.bbox_jitter_px = 0.0;
  d.mask_depth_sd = 0.0;
  return d;
}

std::optional<BoundingBox> project_flesh_box(const CameraModel& cam,
                                             const scene::Berry& berry) {
  const Vec3 pc = cam.to_camera(berry.flesh_center);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const auto& k = cam.intrinsics;
  const double u = k.fx * pc.x() / pc.z() + k.cx;
  const double v = k.fy * pc.y() / pc.z() + k.cy;
  const double ru = k.fx * berry.flesh_radius / pc.z();
  const double rv = kFleshElongation * k.fy * berry.flesh_radius / pc.z();
  return BoundingBox{u - ru, v - rv, u + ru, v + rv};
}

std::vector<Detection> observe_top(const scene::Scene& scene,
                                   const CameraModel& top_cam,
                                   const SensorNoiseModel& noise,
                                   const DetectorConfig& detector,
                                   std::uint64_t seed) {
  noise.validate();
  top_cam.intrinsics.validate();
  std::vector<Detection> out;
  for (const auto& berry : scene.berries) {
    // Per-berry stream: a berry's observation does not depend on its
    // neighbours.
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(berry.id) + 1000));
    const Vec3 pc = top_cam.to_camera(berry.flesh_center);
    const double depth = pc.z();
    if (!(depth > noise.dropout_below && depth < noise.dropout_above)) continue;
    const Pixel centre = geometry::project_to_pixel(top_cam, berry.flesh_center);
    if (!top_cam.intrinsics.contains(centre)) continue;
    if (rng.bernoulli(detector.miss_prob)) continue;

    Detection det;
    det.berry_id_truth = berry.id;
    det.bbox = *project_flesh_box(top_cam, berry);
    jitter_box(det.bbox, detector.bbox_jitter_px, rng);

    const bool ripe = scene::ground_truth_pluckable(berry, detector.ripeness_threshold);
    const bool flip = rng.bernoulli(detector.class_error_prob);
    det.predicted_class = (ripe != flip) ? PredictedClass::Pluckable
                                         : PredictedClass::Unpluckable;

    const auto kps = berry.key_points.as_array();
    for (std::size_t i = 0; i < kps.size(); ++i) {
      det.key_points_px[i] =
          geometry::try_project(top_cam, kps[i]).value_or(Pixel{centre});
    }

    auto& depths = det.depth.berry_mask_depths;
    depths.reserve(static_cast<std::size_t>(detector.mask_pixels));
    for (int i = 0; i < detector.mask_pixels; ++i) {
      if (i > 0 && rng.bernoulli(detector.mask_outlier_fraction)) {
        // Half the outliers bleed to the background, half are near-range junk.
        depths.push_back(rng.bernoulli(0.5) ? rng.uniform(0.55, 1.5)
                                            : rng.uniform(0.01, 0.15));
      } else {
        depths.push_back(std::max(1e-3, rng.normal(depth, detector.mask_depth_sd)));
      }
    }
    for (int axis = 0; axis < 3; ++axis) {
      det.depth.per_axis_error[axis] =
          rng.normal(noise.mean_error[axis], noise.sd_error[axis]);
    }
    out.push_back(std::move(det));
  }
  return out;
}

double filter_and_average_depth(const DepthObservation& obs, double near,
                                double far) {
  if (!(near < far)) {
    throw Error(ErrorKind::PreconditionViolated, "near must be < far");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (double d : obs.berry_mask_depths) {
    if (d > near && d < far) {
      sum += d;
      ++n;
    }
  }
  if (n == 0) {
    throw Error(ErrorKind::NoValidDepth, "all mask depths filtered out");
  }
  return sum / static_cast<double>(n);
}

BottomObservation observe_bottom(const scene::Scene& scene,
                                 const BottomCameras& cams,
                                 const BottomSensorConfig& config,
                                 std::uint64_t seed) {
  BottomObservation out;
  for (std::size_t c = 0; c < kBottomCameras; ++c) {
    const auto& cam = cams[c];
    for (const auto& berry : scene.berries) {
      if (config.pluckable_only &&
          !scene::ground_truth_pluckable(berry, config.ripeness_threshold)) {
        continue;
      }
      Rng rng(derive_seed(seed, (static_cast<std::uint64_t>(berry.id) << 2) | c));
      const Vec3 pc = cam.to_camera(berry.flesh_center);
      if (!(pc.z() > config.head_plane_depth)) continue;
      auto box = project_flesh_box(cam, berry);
      if (!box || !cam.intrinsics.contains(geometry::bbox_center(*box))) continue;
      jitter_box(*box, config.bbox_jitter_px, rng);
      out.boxes[c].push_back(*box);
      out.truth_ids[c].push_back(berry.id);
    }
  }
  return out;
}

ColorPatch render_bottom_patch(const scene::Scene& scene,
                               const CameraModel& cam,
                               const BoundingBox& window,
                               const RenderOptions& options) {
  const auto& k = cam.intrinsics;
  const int x0 = static_cast<int>(std::lround(window.xp1));
  const int y0 = static_cast<int>(std::lround(window.yp1));
  const int x1 = static_cast<int>(std::lround(window.xp2));
  const int y1 = static_cast<int>(std::lround(window.yp2));
  if (x0 < 0 || y0 < 0 || x1 > k.width || y1 > k.height || x1 < x0 || y1 < y0) {
    throw Error(ErrorKind::WindowOutOfBounds, "render window outside sensor");
  }

  ColorPatch patch;
  patch.width = x1 - x0;
  patch.height = y1 - y0;
  patch.rgb.assign(static_cast<std::size_t>(3 * patch.width * patch.height), 0);
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) patch.set(x, y, {110, 110, 105});
  }

  struct Visible {
    const scene::Berry* berry;
    double depth, u, v, ru, rv;
  };
  std::vector<Visible> visible;
  for (const auto& b : scene.berries) {
    const Vec3 pc = cam.to_camera(b.flesh_center);
    if (!(pc.z() > 0.0)) continue;
    visible.push_back({&b, pc.z(), k.fx * pc.x() / pc.z() + k.cx,
                       k.fy * pc.y() / pc.z() + k.cy,
                       k.fx * b.flesh_radius / pc.z(),
                       kFleshElongation * k.fy * b.flesh_radius / pc.z()});
  }
  // Painter's order: far to near, ties by id.
  std::sort(visible.begin(), visible.end(), [](const Visible& a, const Visible& b) {
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.berry->id < b.berry->id;
  });

  Rng glare_rng(derive_seed(options.seed, 7));
  for (const auto& vb : visible) {
    const bool ripe =
        scene::ground_truth_pluckable(*vb.berry, options.ripeness_threshold);
    for (int y = 0; y < patch.height; ++y) {
      const double py = y0 + y + 0.5;
      const double dy = (py - vb.v) / vb.rv;
      if (std::abs(dy) > 1.0) continue;
      for (int x = 0; x < patch.width; ++x) {
        const double px = x0 + x + 0.5;
        const double dx = (px - vb.u) / vb.ru;
        if (dx * dx + dy * dy > 1.0) continue;
        const std::uint64_t h = pixel_hash(vb.berry->id, x0 + x, y0 + y);
        std::array<std::uint8_t, 3> c;
        if (glare_rng.bernoulli(options.glare_prob)) {
          c = {static_cast<std::uint8_t>(240 + h % 16),
               static_cast<std::uint8_t>(235 + (h >> 8) % 21),
               static_cast<std::uint8_t>(230 + (h >> 16) % 26)};
        } else if (ripe) {
          c = {static_cast<std::uint8_t>(200 + h % 56),
               static_cast<std::uint8_t>((h >> 8) % 41),
               static_cast<std::uint8_t>((h >> 16) % 41)};
        } else {
          c = {static_cast<std::uint8_t>(150 + h % 41),
               static_cast<std::uint8_t>(200 + (h >> 8) % 41),
               static_cast<std::uint8_t>(140 + (h >> 16) % 41)};
        }
        patch.set(x, y, c);
      }
    }
  }
  return patch;
}

void write_ppm(const ColorPatch& patch, std::ostream& out) {
  out << "P6\n" << patch.width << ' ' << patch.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(patch.rgb.data()),
            static_cast<std::streamsize>(patch.rgb.size()));
}

}  // namespace robofruit::sensors
