#include <gtest/gtest.h>

#include <sstream>
#include <vector>

#include "robofruit/error.hpp"
#include "robofruit/gpr.hpp"
#include "robofruit/rng.hpp"
#include "oracles.hpp"

using namespace robofruit;
using namespace robofruit::gpr;

using robofruit::oracles::brute_force_mean;

namespace {

std::vector<GprSample> random_samples(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<GprSample> s(n);
  for (auto& sample : s) {
    for (std::size_t j = 0; j < d; ++j) sample.features.push_back(rng.uniform(-1, 1));
    sample.label = Vec3(rng.normal(0.06, 0.01), rng.normal(0.01, 0.01), rng.normal(-0.02, 0.01));
  }
  return s;
}

}  // namespace

TEST(Gpr, KernelIsBiasPlusDotProduct) {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  EXPECT_DOUBLE_EQ(kernel_eval(0.5, a, b), 0.5 + 12.0);
  EXPECT_DOUBLE_EQ(kernel_eval(0.0, a, a), 14.0);
  const std::vector<double> c{1, 2};
  EXPECT_THROW(kernel_eval(1.0, a, c), Error);
}

TEST(Gpr, MatchesDenseBruteForceSolve) {
  Rng rng(2024);
  for (int problem = 0; problem < 50; ++problem) {
    const std::size_t n = 1 + rng.below(20);
    const auto train = random_samples(rng, n, 12);
    const GprOptions opt{rng.uniform(0.0, 2.0), 1e-6, FeatureScaling::None};
    const auto model = GprModel::fit(train, opt);
    for (int q = 0; q < 5; ++q) {
      std::vector<double> x(12);
      for (auto& v : x) v = rng.uniform(-1, 1);
      const Vec3 expect = brute_force_mean(train, x, opt.sigma0_sq, opt.jitter);
      const Vec3 got = model.predict(x).mean;
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(got[a], expect[a], 1e-8) << "problem " << problem;
    }
  }
}

TEST(Gpr, HomogeneousKernelIsRidgeThroughOrigin) {
  Rng rng(77);
  for (int problem = 0; problem < 50; ++problem) {
    const std::size_t n = 2 + rng.below(30);
    const double jitter = 1e-6;
    std::vector<GprSample> train(n);
    double sxx = 0.0;
    Vec3 sxy = Vec3::Zero();
    const double slope = rng.uniform(-2, 2);
    for (auto& s : train) {
      const double x = rng.uniform(-3, 3);
      s.features = {x};
      s.label = Vec3(slope * x + rng.normal(0, 0.1), -x, 0.5 * x);
      sxx += x * x;
      sxy += x * s.label;
    }
    const auto model = GprModel::fit(train, {0.0, jitter, FeatureScaling::None});
    for (double xs : {-2.0, 0.3, 4.0}) {
      const Vec3 ridge = xs * sxy / (sxx + jitter);
      const Vec3 got = model.predict(std::vector<double>{xs}).mean;
      for (int a = 0; a < 3; ++a) EXPECT_NEAR(got[a], ridge[a], 1e-4);
    }
  }
}

TEST(Gpr, ZScoreEqualsFittingOnStandardisedInputs) {
  Rng rng(5);
  auto train = random_samples(rng, 15, 12);
  for (auto& s : train) {
    for (std::size_t j = 0; j < s.features.size(); ++j) s.features[j] = 100.0 + 40.0 * s.features[j] * (j + 1);
  }
  const auto scaled = GprModel::fit(train, {1.0, 1e-6, FeatureScaling::ZScore});
  std::vector<double> mean(12, 0.0), sd(12, 0.0);
  for (const auto& s : train) {
    for (std::size_t j = 0; j < 12; ++j) mean[j] += s.features[j] / train.size();
  }
  for (const auto& s : train) {
    for (std::size_t j = 0; j < 12; ++j) sd[j] += std::pow(s.features[j] - mean[j], 2) / train.size();
  }
  for (auto& v : sd) v = std::sqrt(v);
  auto standardise = [&](std::vector<double> f) {
    for (std::size_t j = 0; j < 12; ++j) f[j] = (f[j] - mean[j]) / sd[j];
    return f;
  };
  std::vector<GprSample> manual = train;
  for (auto& s : manual) s.features = standardise(s.features);
  const std::vector<double> x(12, 120.0);
  const Vec3 expect = brute_force_mean(manual, standardise(x), 1.0, 1e-6);
  const Vec3 got = scaled.predict(x).mean;
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(got[a], expect[a], 1e-8);
}

TEST(Gpr, VarianceShrinksAtTrainingInputs) {
  Rng rng(9);
  const auto train = random_samples(rng, 5, 12);
  const auto model = GprModel::fit(train, {1.0, 1e-6, FeatureScaling::None});
  const auto at = model.predict(train[0].features);
  std::vector<double> far(12, 5.0);
  const auto away = model.predict(far);
  EXPECT_GE(at.variance.x(), 0.0);
  EXPECT_LT(at.variance.x(), 1e-4);
  EXPECT_GT(away.variance.x(), at.variance.x());
  EXPECT_LT((at.mean - train[0].label).norm(), 1e-4);
}

TEST(Gpr, LabelMeanAndCorrection) {
  Rng rng(10);
  const auto train = random_samples(rng, 8, 12);
  const auto model = GprModel::fit(train);
  Vec3 mean = Vec3::Zero();
  for (const auto& s : train) mean += s.label / 8.0;
  EXPECT_LT((model.label_mean() - mean).norm(), 1e-15);
  const Vec3 pose(0.4, 0.0, 0.1);
  EXPECT_EQ(correct_picking_point(pose, model, train[1].features),
            pose - model.predict(train[1].features).mean);
}

TEST(Gpr, FitErrors) {
  try {
    GprModel::fit({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyTrainingSet);
  }
  std::vector<GprSample> bad{{{1, 2}, Vec3::Zero()}, {{1}, Vec3::Zero()}};
  try {
    GprModel::fit(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  std::vector<GprSample> ok{{{1, 2}, Vec3::Zero()}};
  EXPECT_THROW(GprModel::fit(ok, {1.0, 0.0, FeatureScaling::None}), Error);
  const auto m = GprModel::fit(ok);
  EXPECT_THROW(m.predict(std::vector<double>{1.0}), Error);
}

TEST(Gpr, FeatureAssembly) {
  const std::array<std::optional<geometry::BoundingBox>, 3> boxes{
      geometry::BoundingBox{1, 2, 3, 4}, std::nullopt, geometry::BoundingBox{9, 10, 11, 12}};
  const std::array<geometry::BoundingBox, 3> fallback{
      geometry::BoundingBox{}, geometry::BoundingBox{5, 6, 7, 8}, geometry::BoundingBox{}};
  FeatureLayout layout;
  EXPECT_EQ(assemble_features(boxes, fallback, layout),
            (std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}));
  layout.validity_flag = true;
  layout.include_pregrasp_pose = true;
  const auto f = assemble_features(boxes, fallback, layout, Vec3(0.1, 0.2, 0.3));
  ASSERT_EQ(f.size(), layout.dimension());
  EXPECT_EQ(f[12], 0.0);
  EXPECT_EQ(f[15], 0.3);
}

TEST(Gpr, TrainingCsvRoundTrip) {
  Rng rng(12);
  const auto train = random_samples(rng, 6, 12);
  std::stringstream ss;
  save_training_csv(train, ss);
  const auto back = load_training_csv(ss);
  ASSERT_EQ(back.size(), train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    EXPECT_EQ(back[i].features, train[i].features);
    EXPECT_EQ(back[i].label, train[i].label);
  }
  std::istringstream junk("f0,dx,dy,dz\n1,2,x,4\n");
  EXPECT_THROW(load_training_csv(junk), Error);
}
