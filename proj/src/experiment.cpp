#include "rgc/experiment.hpp"

#include "rgc/dataset.hpp"
#include "rgc/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace rgc {

namespace {

using nlohmann::json;

double round6(double x) { return std::round(x * 1e6) / 1e6; }

std::string fixed6(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << x;
  return os.str();
}

std::string optional6(const std::optional<double>& v) { return v ? fixed6(*v) : "NA"; }

json optional_json(const std::optional<double>& v) { return v ? json(round6(*v)) : json(nullptr); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("cannot parse " + what + " '" + s + "'");
  }
}

struct SvmPolicy {
  bool grid = false;
  double c = 1.0;
};

SvmPolicy parse_svm_policy(const std::string& s) {
  if (s == "grid") return {true, 1.0};
  double c = 0.0;
  try {
    std::size_t pos = 0;
    c = std::stod(s, &pos);
    if (pos != s.size()) c = 0.0;
  } catch (const std::exception&) {
    c = 0.0;
  }
  if (!(c > 0.0)) throw InvalidInput("svm_c must be a positive number or \"grid\", got '" + s + "'");
  return {false, c};
}

std::vector<EegSegment> shuffled_labels(std::vector<EegSegment> segments, std::uint64_t seed) {
  if (segments.size() < 2) return segments;
  // assign_folds with one fold per item is a seeded permutation.
  const std::vector<int> perm = assign_folds(segments.size(), static_cast<int>(segments.size()), seed);
  std::vector<Label> labels;
  for (const auto& s : segments) labels.push_back(s.label);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    segments[i].label = labels[static_cast<std::size_t>(perm[i])];
  }
  return segments;
}

struct SubjectOutcome {
  std::vector<AccuracyCurve> curves;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
};

SubjectOutcome run_subject(const ExperimentConfig& config, const Recording& rec) {
  SubjectOutcome outcome;
  try {
    SegmentationResult seg = prepare_segments(rec, config);
    outcome.warnings = std::move(seg.warnings);
    std::vector<EegSegment> segments = std::move(seg.segments);
    if (config.shuffle_labels) segments = shuffled_labels(std::move(segments), config.seed ^ 0xC0FFEEULL);

    const SvmPolicy svm = parse_svm_policy(config.svm_c);
    CvOptions options;
    options.rgc.svm_c = svm.c;
    options.rgc.mean = config.mean_estimator;
    options.svm_grid_search = svm.grid;
    options.csp_filters = config.csp_filters;
    for (const Method m : config.methods) {
      outcome.curves.push_back(
          ten_fold_cv(segments, config.windows, m, config.seed, options, rec.subject_id));
    }
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  return outcome;
}

}  // namespace

std::string to_string(MeanEstimator m) {
  return m == MeanEstimator::Iterative ? "iterative" : "log-euclidean";
}

MeanEstimator parse_mean_estimator(const std::string& s) {
  if (s == "log-euclidean") return MeanEstimator::LogEuclidean;
  if (s == "iterative") return MeanEstimator::Iterative;
  throw InvalidInput("mean_estimator must be 'log-euclidean' or 'iterative', got '" + s + "'");
}

void ExperimentConfig::validate() const {
  std::ostringstream os;
  if (methods.empty()) os << "at least one method is required; ";
  if (windows.empty()) os << "at least one window length is required; ";
  for (const double w : windows) {
    if (!(w > 0.0) || w > segment_s) os << "window " << w << " s is outside (0, segment_s]; ";
  }
  if (!(band_low > 0.0 && band_low < band_high)) os << "band edges must satisfy 0 < low < high; ";
  if (filter_order < 2 || filter_order % 2 != 0) os << "filter_order must be even and >= 2; ";
  if (!(target_fs > 0.0)) os << "target_fs must be positive; ";
  if (!(segment_s > 0.0)) os << "segment_s must be positive; ";
  if (!(alpha > 0.0 && alpha < 1.0)) os << "alpha must lie in (0, 1); ";
  if (csp_filters < 2 || csp_filters % 2 != 0) os << "csp_filters must be even and >= 2; ";
  try {
    parse_svm_policy(svm_c);
  } catch (const InvalidInput& e) {
    os << e.what() << "; ";
  }
  if (!os.str().empty()) throw InvalidInput("invalid configuration: " + os.str());
}

json to_json(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (const auto m : c.methods) methods.push_back(to_string(m));
  const SynthSpec& s = c.synth;
  return json{{"dataset", c.dataset},
              {"synth",
               {{"subjects", s.n_subjects},
                {"channels", s.channels},
                {"fs", s.fs},
                {"minutes", s.minutes},
                {"trial_minutes", s.trial_minutes},
                {"strength", s.strength},
                {"rank", s.perturbation_rank},
                {"noise", s.noise_level},
                {"seed", s.seed}}},
              {"methods", methods},
              {"windows", c.windows},
              {"seed", c.seed},
              {"band_low", c.band_low},
              {"band_high", c.band_high},
              {"filter_order", c.filter_order},
              {"target_fs", c.target_fs},
              {"segment_s", c.segment_s},
              {"svm_c", c.svm_c},
              {"mean_estimator", to_string(c.mean_estimator)},
              {"alpha", c.alpha},
              {"csp_filters", c.csp_filters},
              {"shuffle_labels", c.shuffle_labels},
              {"out", c.out}};
}

ExperimentConfig config_from_json(const json& j) {
  static const std::set<std::string> known{
      "dataset",   "synth",     "methods",   "windows",        "seed",  "band_low",
      "band_high", "filter_order", "target_fs", "segment_s",   "svm_c", "mean_estimator",
      "alpha",     "csp_filters",  "shuffle_labels", "out"};
  static const std::set<std::string> known_synth{"subjects", "channels", "fs",    "minutes", "trial_minutes",
                                                 "strength", "rank",     "noise", "seed"};
  if (!j.is_object()) throw InvalidInput("configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw InvalidInput("unknown configuration field '" + key + "'");
  }

  ExperimentConfig c;
  try {
    c.dataset = j.value("dataset", c.dataset);
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      for (const auto& [key, value] : s.items()) {
        if (!known_synth.contains(key)) throw InvalidInput("unknown synth field '" + key + "'");
      }
      c.synth.n_subjects = s.value("subjects", c.synth.n_subjects);
      c.synth.channels = s.value("channels", c.synth.channels);
      c.synth.fs = s.value("fs", c.synth.fs);
      c.synth.minutes = s.value("minutes", c.synth.minutes);
      c.synth.trial_minutes = s.value("trial_minutes", c.synth.trial_minutes);
      c.synth.strength = s.value("strength", c.synth.strength);
      c.synth.perturbation_rank = s.value("rank", c.synth.perturbation_rank);
      c.synth.noise_level = s.value("noise", c.synth.noise_level);
      c.synth.seed = s.value("seed", c.synth.seed);
    }
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("windows")) c.windows = j.at("windows").get<std::vector<double>>();
    c.seed = j.value("seed", c.seed);
    c.band_low = j.value("band_low", c.band_low);
    c.band_high = j.value("band_high", c.band_high);
    c.filter_order = j.value("filter_order", c.filter_order);
    c.target_fs = j.value("target_fs", c.target_fs);
    c.segment_s = j.value("segment_s", c.segment_s);
    if (j.contains("svm_c")) {
      const auto& v = j.at("svm_c");
      c.svm_c = v.is_number() ? fixed6(v.get<double>()) : v.get<std::string>();
    }
    if (j.contains("mean_estimator")) {
      c.mean_estimator = parse_mean_estimator(j.at("mean_estimator").get<std::string>());
    }
    c.alpha = j.value("alpha", c.alpha);
    c.csp_filters = j.value("csp_filters", c.csp_filters);
    c.shuffle_labels = j.value("shuffle_labels", c.shuffle_labels);
    c.out = j.value("out", c.out);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("configuration: ") + e.what());
  }
  c.synth.band_low_hz = c.band_low;
  c.synth.band_high_hz = c.band_high;
  c.synth.filter_order = c.filter_order;
  return c;
}

SegmentationResult prepare_segments(const Recording& rec, const ExperimentConfig& config) {
  const BandpassFilter filter =
      design_butterworth_bandpass(config.filter_order, config.band_low, config.band_high, rec.fs);
  const Recording decimated = downsample(filter_forward(filter, rec), config.target_fs);
  return segment_and_normalize(decimated, config.segment_s);
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows) {
    os << r.subject << ',' << to_string(r.method) << ',' << fixed6(r.window_s) << ','
       << fixed6(r.accuracy) << ',' << r.n_decisions << ',' << optional6(r.significance) << ','
       << optional6(r.mesd_s) << '\n';
  }
  return os.str();
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw FormatError("results CSV: unexpected header (expected '" + std::string(kCsvHeader) + "')");
  }
  auto optional_field = [](const std::string& s, const char* what) -> std::optional<double> {
    if (s == "NA") return std::nullopt;
    return parse_double(s, what);
  };
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) {
      throw FormatError("results CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    ResultRow r;
    r.subject = f[0];
    try {
      r.method = parse_method(f[1]);
    } catch (const InvalidInput& e) {
      throw FormatError(e.what());
    }
    r.window_s = parse_double(f[2], "window_len_s");
    r.accuracy = parse_double(f[3], "accuracy");
    r.n_decisions = static_cast<long>(parse_double(f[4], "n_decisions"));
    r.significance = optional_field(f[5], "significance_threshold");
    r.mesd_s = optional_field(f[6], "mesd_s");
    rows.push_back(std::move(r));
  }
  return rows;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

json summarize(const std::vector<ResultRow>& rows, double alpha) {
  json methods = json::object();
  std::vector<Method> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  }
  for (const Method m : order) {
    std::map<std::string, std::optional<double>> mesd_by_subject;
    std::vector<std::string> subjects;
    std::map<double, std::vector<const ResultRow*>, std::greater<>> by_window;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      if (!mesd_by_subject.contains(r.subject)) subjects.push_back(r.subject);
      mesd_by_subject[r.subject] = r.mesd_s;
      by_window[r.window_s].push_back(&r);
    }

    json per_subject = json::object();
    std::vector<double> mesds;
    for (const auto& s : subjects) {
      per_subject[s] = optional_json(mesd_by_subject[s]);
      if (mesd_by_subject[s]) mesds.push_back(*mesd_by_subject[s]);
    }
    json mesd_json{{"n_subjects", mesds.size()}, {"per_subject", per_subject}};
    if (!mesds.empty()) {
      mesd_json["median"] = round6(quantile(mesds, 0.5));
      mesd_json["q25"] = round6(quantile(mesds, 0.25));
      mesd_json["q75"] = round6(quantile(mesds, 0.75));
    }

    json accuracy = json::array();
    for (const auto& [window, entries] : by_window) {
      std::vector<double> acc;
      long above = 0;
      for (const auto* r : entries) {
        acc.push_back(r->accuracy);
        above += r->significance && r->accuracy > *r->significance;
      }
      double mean = 0.0;
      for (const double a : acc) mean += a;
      mean /= static_cast<double>(acc.size());
      accuracy.push_back({{"window_len_s", round6(window)},
                          {"n_subjects", acc.size()},
                          {"mean", round6(mean)},
                          {"median", round6(quantile(acc, 0.5))},
                          {"q25", round6(quantile(acc, 0.25))},
                          {"q75", round6(quantile(acc, 0.75))},
                          {"n_above_significance", above}});
    }
    methods[to_string(m)] = {{"mesd", mesd_json}, {"accuracy", accuracy}};
  }
  return json{{"mesd_model", "MESD (simplified)"}, {"alpha", alpha}, {"methods", methods}};
}

std::vector<ResultRow> rows_for_curve(const AccuracyCurve& curve, double alpha) {
  std::optional<double> m;
  try {
    m = mesd(curve).mesd_s;
  } catch (const NoStableDesign&) {
  }
  std::vector<ResultRow> rows;
  for (const auto& e : curve.entries) {
    rows.push_back(ResultRow{curve.subject_id, curve.method, e.window_s, e.accuracy, e.n_decisions,
                             significance_threshold(e.n_decisions, alpha), m});
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::vector<Recording>& recordings) {
  config.validate();
  const auto policy =
      std::thread::hardware_concurrency() > 1 ? std::launch::async : std::launch::deferred;
  std::vector<std::future<SubjectOutcome>> jobs;
  jobs.reserve(recordings.size());
  for (const auto& rec : recordings) {
    jobs.push_back(std::async(policy, [&config, &rec] { return run_subject(config, rec); }));
  }

  ExperimentResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    SubjectOutcome outcome = jobs[i].get();
    result.warnings.insert(result.warnings.end(), outcome.warnings.begin(), outcome.warnings.end());
    if (outcome.error) {
      result.failures.push_back(SubjectFailure{recordings[i].subject_id, *outcome.error});
      continue;
    }
    for (auto& curve : outcome.curves) {
      auto rows = rows_for_curve(curve, config.alpha);
      result.rows.insert(result.rows.end(), rows.begin(), rows.end());
      result.curves.push_back(std::move(curve));
    }
  }
  result.csv = format_csv(result.rows);
  // Summaries are computed from the printed values so CSV and JSON agree.
  result.summary = summarize(parse_csv(result.csv), config.alpha);
  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"subject", f.subject}, {"error", f.error}});
  result.summary["failures"] = failures;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  if (!config.dataset.empty()) return run_experiment(config, load_dataset(config.dataset));
  return run_experiment(config, generate_synthetic(config.synth));
}

void write_experiment_outputs(const ExperimentConfig& config, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(config.out);
  fs::create_directories(dir);
  auto write = [&dir](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / name).string());
    out << text;
  };
  write("results.csv", result.csv);
  write("summary.json", result.summary.dump(2) + "\n");
  write("config_resolved.json", to_json(config).dump(2) + "\n");
}

}  // namespace rgc
