#include "robofruit/gpr.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "robofruit/error.hpp"

namespace robofruit::gpr {

double kernel_eval(double sigma0_sq, std::span<const double> x,
                   std::span<const double> x_prime) {
  if (x.size() != x_prime.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("kernel inputs of length {} and {}", x.size(),
                            x_prime.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * x_prime[i];
  return sigma0_sq + dot;
}

GprModel GprModel::fit(const std::vector<GprSample>& samples,
                       const GprOptions& options) {
  if (samples.empty()) {
    throw Error(ErrorKind::EmptyTrainingSet, "no training samples");
  }
  if (!(options.jitter > 0.0) || options.sigma0_sq < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "jitter must be > 0 and sigma0^2 >= 0");
  }
  const std::size_t d = samples.front().features.size();
  const auto n = static_cast<Eigen::Index>(samples.size());
  for (const auto& s : samples) {
    if (s.features.size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "inconsistent feature lengths");
    }
  }

  GprModel m;
  m.options_ = options;
  m.samples_ = samples;

  Eigen::MatrixXd raw(n, static_cast<Eigen::Index>(d));
  Eigen::MatrixXd y(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    raw.row(i) = Eigen::Map<const Eigen::RowVectorXd>(s.features.data(),
                                                      static_cast<Eigen::Index>(d));
    y.row(i) = s.label.transpose();
  }

  m.feature_mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  m.feature_scale_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d));
  if (options.scaling == FeatureScaling::ZScore) {
    m.feature_mean_ = raw.colwise().mean().transpose();
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      const double var =
          (raw.col(j).array() - m.feature_mean_(j)).square().mean();
      // Constant columns carry no information; leave them unscaled.
      m.feature_scale_(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
  }
  m.train_ = (raw.rowwise() - m.feature_mean_.transpose()).array().rowwise() /
             m.feature_scale_.transpose().array();

  Eigen::MatrixXd k = m.gram();
  k.diagonal().array() += options.jitter;
  m.llt_.compute(k);
  if (m.llt_.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorisation failed");
  }
  m.alpha_ = m.llt_.solve(y);
  m.label_mean_ = y.colwise().mean().transpose();
  return m;
}

Eigen::MatrixXd GprModel::gram() const {
  // Symmetric by construction: only the upper triangle is computed.
  const Eigen::Index n = train_.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = options_.sigma0_sq + train_.row(i).dot(train_.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::VectorXd GprModel::scale(std::span<const double> features) const {
  if (features.size() != feature_dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("expected {} features, got {}", feature_dim(),
                            features.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(features.data(),
                                            static_cast<Eigen::Index>(features.size()));
  return (x - feature_mean_).cwiseQuotient(feature_scale_);
}

GprPrediction GprModel::predict(std::span<const double> features) const {
  const Eigen::VectorXd xs = scale(features);
  const Eigen::VectorXd k_star =
      (train_ * xs).array() + options_.sigma0_sq;
  GprPrediction p;
  p.mean = (alpha_.transpose() * k_star);
  const Eigen::VectorXd v = llt_.matrixL().solve(k_star);
  const double var = std::max(0.0, options_.sigma0_sq + xs.squaredNorm() - v.squaredNorm());
  p.variance = Vec3::Constant(var);
  return p;
}

Vec3 correct_picking_point(const Vec3& pose, const GprModel& model,
                           std::span<const double> features) {
  return pose - model.predict(features).mean;
}

std::vector<double> assemble_features(
    const std::array<std::optional<BoundingBox>, 3>& boxes,
    const std::array<BoundingBox, 3>& fallback, const FeatureLayout& layout,
    const Vec3& pregrasp_position) {
  std::vector<double> f;
  f.reserve(layout.dimension());
  bool all_present = true;
  for (std::size_t c = 0; c < 3; ++c) {
    const BoundingBox& b = boxes[c] ? *boxes[c] : fallback[c];
    all_present = all_present && boxes[c].has_value();
    f.insert(f.end(), {b.xp1, b.yp1, b.xp2, b.yp2});
  }
  if (layout.validity_flag) f.push_back(all_present ? 1.0 : 0.0);
  if (layout.include_pregrasp_pose) {
    f.insert(f.end(), {pregrasp_position.x(), pregrasp_position.y(),
                       pregrasp_position.z()});
  }
  return f;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::ParseError,
                fmt::format("line {}: '{}' is not a number", line_no, s));
  }
  return v;
}

}  // namespace

std::vector<GprSample> load_training_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::ParseError, "missing header row");
  }
  const auto header = split_csv_line(line);
  const std::size_t cols = header.size();
  if (cols != 15 && cols != 16 && cols != 18 && cols != 19) {
    throw Error(ErrorKind::ParseError,
                fmt::format("expected 12/13 (+3) feature columns plus 3 labels, got {} columns",
                            cols));
  }
  std::vector<GprSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols) {
      throw Error(ErrorKind::ParseError,
                  fmt::format("line {}: {} cells, header has {}", line_no,
                              cells.size(), cols));
    }
    GprSample s;
    for (std::size_t i = 0; i + 3 < cols; ++i) {
      s.features.push_back(parse_double(cells[i], line_no));
    }
    for (int a = 0; a < 3; ++a) {
      s.label[a] = parse_double(cells[cols - 3 + static_cast<std::size_t>(a)], line_no);
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void save_training_csv(const std::vector<GprSample>& samples, std::ostream& out) {
  static constexpr const char* kCams[] = {"r", "m", "l"};
  static constexpr const char* kCorners[] = {"xp1", "yp1", "xp2", "yp2"};
  const std::size_t d = samples.empty() ? 12 : samples.front().features.size();
  std::vector<std::string> names;
  for (const char* cam : kCams) {
    for (const char* corner : kCorners) names.push_back(fmt::format("{}_{}", cam, corner));
  }
  if (d == 13 || d == 16) names.emplace_back("all_cameras");
  if (d >= 15) {
    names.insert(names.end(), {"pg_x", "pg_y", "pg_z"});
  }
  names.insert(names.end(), {"err_x", "err_y", "err_z"});
  out << fmt::format("{}\n", fmt::join(names, ","));
  for (const auto& s : samples) {
    std::vector<std::string> cells;
    for (double f : s.features) cells.push_back(fmt::format("{:.17g}", f));
    for (int a = 0; a < 3; ++a) cells.push_back(fmt::format("{:.17g}", s.label[a]));
    out << fmt::format("{}\n", fmt::join(cells, ","));
  }
}

}  // namespace robofruit::gpr
