#pragma once

// Gaussian-process regression of the picking-point localisation error from
// bottom-camera bounding boxes.
//
// Kernel: k(x, x') = sigma0^2 + x . x' (dot-product kernel; homogeneous when
// sigma0^2 = 0). One weight vector per output axis shares a single Cholesky
// factor of K + jitter * I.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robofruit/geometry.hpp"

namespace robofruit::gpr {

using geometry::BoundingBox;
using geometry::Vec3;

double kernel_eval(double sigma0_sq, std::span<const double> x,
                   std::span<const double> x_prime);

struct GprSample {
  std::vector<double> features;
  /// Localisation error: estimated minus taught picking point, per axis.
  Vec3 label = Vec3::Zero();
};

enum class FeatureScaling { None, ZScore };

struct GprOptions {
  double sigma0_sq = 1.0;
  double jitter = 1e-6;
  FeatureScaling scaling = FeatureScaling::None;
};

struct GprPrediction {
  Vec3 mean = Vec3::Zero();
  Vec3 variance = Vec3::Zero();
};

class GprModel {
 public:
  /// Throws EmptyTrainingSet, DimensionMismatch, InvalidConfig (jitter <= 0)
  /// or NotPositiveDefinite.
  static GprModel fit(const std::vector<GprSample>& samples,
                      const GprOptions& options = {});

  GprPrediction predict(std::span<const double> features) const;

  std::size_t feature_dim() const { return static_cast<std::size_t>(train_.cols()); }
  std::size_t sample_count() const { return samples_.size(); }
  const GprOptions& options() const { return options_; }
  const std::vector<GprSample>& samples() const { return samples_; }
  /// Mean training label: the systematic part of the localisation error.
  const Vec3& label_mean() const { return label_mean_; }
  /// Gram matrix K(X, X) of the (scaled) training inputs, without jitter.
  Eigen::MatrixXd gram() const;

 private:
  Eigen::VectorXd scale(std::span<const double> features) const;

  GprOptions options_;
  std::vector<GprSample> samples_;
  Eigen::VectorXd feature_mean_;
  Eigen::VectorXd feature_scale_;
  Eigen::MatrixXd train_;  // n x d, scaled
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::MatrixXd alpha_;  // n x 3
  Vec3 label_mean_ = Vec3::Zero();
};

/// pose minus the predicted mean error.
Vec3 correct_picking_point(const Vec3& pose, const GprModel& model,
                           std::span<const double> features);

/// Feature vector layout: the {right, middle, left} box corners, optionally
/// followed by an all-cameras-present flag and the pre-grasp position.
struct FeatureLayout {
  bool validity_flag = false;
  bool include_pregrasp_pose = false;

  std::size_t dimension() const {
    return 12 + (validity_flag ? 1 : 0) + (include_pregrasp_pose ? 3 : 0);
  }
};

/// Missing boxes are replaced by the matching `fallback` box.
std::vector<double> assemble_features(
    const std::array<std::optional<BoundingBox>, 3>& boxes,
    const std::array<BoundingBox, 3>& fallback, const FeatureLayout& layout,
    const Vec3& pregrasp_position = Vec3::Zero());

/// CSV with a header row: feature columns followed by three label columns.
std::vector<GprSample> load_training_csv(std::istream& in);
void save_training_csv(const std::vector<GprSample>& samples, std::ostream& out);

}  // namespace robofruit::gpr
