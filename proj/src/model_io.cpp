#include "rgc/model_io.hpp"

#include "rgc/error.hpp"

#include <fstream>

namespace rgc {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", values}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto values = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != values.size()) {
    throw FormatError("model archive: matrix shape does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = values[k++];
  return m;
}

json decision_to_json(const LinearDecisionFunction& d) {
  return json{{"weights", std::vector<double>(d.weights.data(), d.weights.data() + d.weights.size())},
              {"bias", d.bias}};
}

LinearDecisionFunction decision_from_json(const json& j) {
  const auto w = j.at("weights").get<std::vector<double>>();
  return LinearDecisionFunction{Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                                j.at("bias").get<double>()};
}

void check_header(const json& j, const char* kind) {
  if (j.value("format", "") != "rgc-model") throw FormatError("not a model archive");
  if (j.value("kind", "") != kind) {
    throw FormatError(std::string("model archive kind is '") + j.value("kind", "") +
                      "', expected '" + kind + "'");
  }
  const int version = j.value("format_version", -1);
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
}

template <typename F>
auto parse_guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string("model archive: ") + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return parse_guarded([&] { return json::parse(in); });
}

}  // namespace

json to_json(const RgcModel& model) {
  return json{{"format", "rgc-model"},
              {"format_version", kModelFormatVersion},
              {"kind", "rgc"},
              {"channels", model.channels()},
              {"feature_dim", model.feature_dim},
              {"reference_mean", matrix_to_json(model.reference_mean.matrix())},
              {"svm", decision_to_json(model.svm)}};
}

json to_json(const CspModel& model) {
  return json{{"format", "rgc-model"},
              {"format_version", kModelFormatVersion},
              {"kind", "csp"},
              {"channels", model.channels()},
              {"filters", matrix_to_json(model.filters)},
              {"eigenvalues", std::vector<double>(model.eigenvalues.data(),
                                                  model.eigenvalues.data() + model.eigenvalues.size())},
              {"lda", decision_to_json(model.lda)}};
}

RgcModel rgc_model_from_json(const json& j) {
  return parse_guarded([&] {
    check_header(j, "rgc");
    const auto c = j.at("channels").get<Eigen::Index>();
    const auto dim = j.at("feature_dim").get<Eigen::Index>();
    const Eigen::MatrixXd mean = matrix_from_json(j.at("reference_mean"));
    if (mean.rows() != c || mean.cols() != c || dim != half_vector_length(c)) {
      throw FormatError("model archive: inconsistent RGC dimensions");
    }
    LinearDecisionFunction svm = decision_from_json(j.at("svm"));
    if (svm.weights.size() != dim) throw FormatError("model archive: SVM weight length mismatch");
    return RgcModel{SpdMatrix(mean), std::move(svm), dim};
  });
}

CspModel csp_model_from_json(const json& j) {
  return parse_guarded([&] {
    check_header(j, "csp");
    const auto c = j.at("channels").get<Eigen::Index>();
    Eigen::MatrixXd filters = matrix_from_json(j.at("filters"));
    const auto ev = j.at("eigenvalues").get<std::vector<double>>();
    LinearDecisionFunction lda = decision_from_json(j.at("lda"));
    if (filters.rows() != c || static_cast<std::size_t>(filters.cols()) != ev.size() ||
        lda.weights.size() != filters.cols()) {
      throw FormatError("model archive: inconsistent CSP dimensions");
    }
    return CspModel{std::move(filters),
                    Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size())),
                    std::move(lda)};
  });
}

void save_model(const std::filesystem::path& path, const RgcModel& model) {
  write_json(path, to_json(model));
}

void save_model(const std::filesystem::path& path, const CspModel& model) {
  write_json(path, to_json(model));
}

RgcModel load_rgc_model(const std::filesystem::path& path) {
  return rgc_model_from_json(read_json(path));
}

CspModel load_csp_model(const std::filesystem::path& path) {
  return csp_model_from_json(read_json(path));
}

}  // namespace rgc
