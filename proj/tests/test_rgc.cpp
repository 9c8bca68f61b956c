#include "rgc/classifiers.hpp"
#include "rgc/error.hpp"
#include "rgc/model_io.hpp"
#include "rgc/sigproc.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <vector>

using namespace rgc;

namespace {

std::vector<EegSegment> class_segments(std::mt19937_64& rng, int per_class, Eigen::Index samples,
                                       int channels = 6) {
  Eigen::MatrixXd cp = Eigen::MatrixXd::Identity(channels, channels);
  Eigen::MatrixXd cn = Eigen::MatrixXd::Identity(channels, channels);
  cp(0, 0) = 2.0;
  cn(1, 1) = 2.0;
  std::vector<EegSegment> out;
  for (int k = 0; k < 2 * per_class; ++k) {
    const bool pos = k % 2 == 0;
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(pos ? cp : cn).matrixL();
    Eigen::MatrixXd data = l * rgc::testing::gaussian_matrix(channels, samples, rng);
    normalize_segment(data);
    out.push_back(EegSegment{std::move(data), 64.0, pos ? Label::Positive : Label::Negative,
                             static_cast<std::size_t>(k)});
  }
  return out;
}

}  // namespace

TEST_CASE("RGC training accuracy on diag(2,1,..) vs diag(1,2,..)") {
  std::mt19937_64 rng(1);
  const auto train = class_segments(rng, 100, 3840);
  const RgcModel model = train_rgc(train);
  CHECK(model.feature_dim == 21);
  CHECK(model.svm.weights.size() == 21);
  int correct = 0;
  for (const auto& s : train) {
    const Label l = classify_rgc(model, s);
    CHECK((l == Label::Positive || l == Label::Negative));
    correct += l == s.label;
  }
  CHECK(correct >= 190);

  const auto fresh = class_segments(rng, 50, 3840);
  int held_out = 0;
  for (const auto& s : fresh) held_out += classify_rgc(model, s) == s.label;
  CHECK(held_out >= 95);
}

TEST_CASE("RGC reference mean pools both classes") {
  std::mt19937_64 rng(2);
  const auto train = class_segments(rng, 10, 256);
  std::vector<SpdMatrix> covs;
  for (const auto& s : train) covs.push_back(shrinkage_covariance(s).covariance);
  const RgcModel model = train_rgc(train);
  CHECK(model.reference_mean.matrix().isApprox(log_euclidean_mean(covs).matrix(), 1e-12));

  RgcOptions it;
  it.mean = MeanEstimator::Iterative;
  const RgcModel m2 = train_rgc(train, it);
  CHECK(riemannian_distance(m2.reference_mean, riemannian_mean_iterative(covs).mean) < 1e-10);
}

TEST_CASE("RGC duplicated training set gives the same classifier") {
  std::mt19937_64 rng(3);
  const auto train = class_segments(rng, 15, 512);
  auto doubled = train;
  doubled.insert(doubled.end(), train.begin(), train.end());
  RgcOptions opts;
  opts.svm_c = 1.0;
  const RgcModel a = train_rgc(train, opts);
  opts.svm_c = 0.5;  // duplicating every example doubles the hinge term
  const RgcModel b = train_rgc(doubled, opts);
  CHECK(a.reference_mean.matrix().isApprox(b.reference_mean.matrix(), 1e-12));
  CHECK((a.svm.weights - b.svm.weights).norm() < 1e-3 * a.svm.weights.norm());
  const auto probe = class_segments(rng, 10, 512);
  for (const auto& s : probe) CHECK(classify_rgc(a, s) == classify_rgc(b, s));
}

TEST_CASE("RGC invariances") {
  std::mt19937_64 rng(4);
  const auto train = class_segments(rng, 20, 512);
  const auto test = class_segments(rng, 10, 512);
  const RgcModel model = train_rgc(train);

  SUBCASE("channel permutation") {
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.indices() << 3, 0, 5, 1, 4, 2;
    auto permute = [&](std::vector<EegSegment> set) {
      for (auto& s : set) s.data = perm * s.data;
      return set;
    };
    const RgcModel pm = train_rgc(permute(train));
    const auto ptest = permute(test);
    for (std::size_t k = 0; k < test.size(); ++k) {
      const double d0 = rgc_decision_value(model, test[k]);
      const double d1 = rgc_decision_value(pm, ptest[k]);
      CHECK(d1 == doctest::Approx(d0).epsilon(1e-5).scale(1.0));
    }
  }
  SUBCASE("global scale before normalization") {
    auto rescale = [](std::vector<EegSegment> set) {
      for (auto& s : set) {
        s.data *= 37.5;
        normalize_segment(s.data);
      }
      return set;
    };
    const RgcModel sm = train_rgc(rescale(train));
    const auto stest = rescale(test);
    for (std::size_t k = 0; k < test.size(); ++k) {
      CHECK(classify_rgc(sm, stest[k]) == classify_rgc(model, test[k]));
    }
  }
}

TEST_CASE("RGC input validation") {
  std::mt19937_64 rng(5);
  auto train = class_segments(rng, 5, 128);
  std::vector<EegSegment> single;
  for (const auto& s : train)
    if (s.label == Label::Positive) single.push_back(s);
  CHECK_THROWS_AS(train_rgc(single), InvalidInput);
  const RgcModel model = train_rgc(train);
  const EegSegment wrong{Eigen::MatrixXd::Identity(4, 128), 64.0, Label::Positive, 0};
  CHECK_THROWS_AS(classify_rgc(model, wrong), InvalidInput);
}

TEST_CASE("select_svm_c picks from the grid") {
  std::mt19937_64 rng(6);
  const auto train = class_segments(rng, 15, 256);
  std::vector<SpdMatrix> covs;
  std::vector<Label> labels;
  std::vector<std::size_t> groups;
  for (const auto& s : train) {
    covs.push_back(shrinkage_covariance(s).covariance);
    labels.push_back(s.label);
    groups.push_back(s.segment_id);
  }
  const std::vector<double> grid{10.0, 0.01, 1.0, 0.1};
  const double c = select_svm_c(covs, labels, groups, grid);
  CHECK(std::find(grid.begin(), grid.end(), c) != grid.end());
  const std::vector<double> one{0.7};
  CHECK(select_svm_c(covs, labels, groups, one) == 0.7);
}

TEST_CASE("model archives round trip") {
  std::mt19937_64 rng(7);
  const auto train = class_segments(rng, 10, 256);
  const RgcModel rgc = train_rgc(train);
  const CspModel csp = train_csp(train, 4);
  const auto dir = std::filesystem::temp_directory_path() / "rgc_model_io_test";
  std::filesystem::create_directories(dir);

  save_model(dir / "rgc.json", rgc);
  save_model(dir / "csp.json", csp);
  const RgcModel r2 = load_rgc_model(dir / "rgc.json");
  const CspModel c2 = load_csp_model(dir / "csp.json");
  CHECK(r2.reference_mean.matrix() == rgc.reference_mean.matrix());
  CHECK(r2.svm.weights == rgc.svm.weights);
  CHECK(r2.svm.bias == rgc.svm.bias);
  CHECK(r2.feature_dim == rgc.feature_dim);
  CHECK(c2.filters == csp.filters);
  CHECK(c2.eigenvalues == csp.eigenvalues);
  CHECK(c2.lda.weights == csp.lda.weights);
  CHECK(c2.lda.bias == csp.lda.bias);

  const auto j = to_json(rgc);
  CHECK(j.at("format_version") == kModelFormatVersion);
  CHECK_THROWS_AS(csp_model_from_json(j), FormatError);
  auto bad = j;
  bad["format_version"] = 99;
  CHECK_THROWS_AS(rgc_model_from_json(bad), FormatError);
  bad = j;
  bad.erase("svm");
  CHECK_THROWS_AS(rgc_model_from_json(bad), FormatError);
  {
    std::ofstream junk(dir / "junk.json");
    junk << "{ not json";
  }
  CHECK_THROWS_AS(load_rgc_model(dir / "junk.json"), FormatError);
  std::filesystem::remove_all(dir);
}
