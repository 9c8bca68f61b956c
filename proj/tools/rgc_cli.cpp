// rgc: command-line front end.
//
//   rgc synth    --out DIR [synthetic spec flags]
//   rgc run      [--config FILE] [overrides...]
//   rgc mesd     --in results.csv [--out mesd.csv]
//   rgc report   --in results.csv [--out summary.json] [--alpha A]
//   rgc validate --dataset DIR

#include "rgc/dataset.hpp"
#include "rgc/error.hpp"
#include "rgc/evaluation.hpp"
#include "rgc/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rgc::Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rgc::Error("cannot write " + path);
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct SynthFlags {
  int subjects = 3;
  int channels = 16;
  double fs = 128.0;
  double minutes = 36.0;
  double trial_minutes = 6.0;
  double strength = 1.0;
  int rank = 2;
  double noise = 0.0;
  std::uint64_t seed = 1;
};

// Registers synthetic-spec flags; `prefix` is "synth_" under `run` so the flag
// names match the config's nested synth fields.
std::map<std::string, CLI::Option*> add_synth_flags(CLI::App* app, SynthFlags& f,
                                                    const std::string& prefix) {
  std::map<std::string, CLI::Option*> opts;
  opts["subjects"] = app->add_option("--" + prefix + "subjects", f.subjects, "Number of subjects");
  opts["channels"] = app->add_option("--" + prefix + "channels", f.channels, "EEG channels");
  opts["fs"] = app->add_option("--" + prefix + "fs", f.fs, "Sampling rate [Hz]");
  opts["minutes"] = app->add_option("--" + prefix + "minutes", f.minutes, "Minutes per subject");
  opts["trial_minutes"] =
      app->add_option("--" + prefix + "trial_minutes", f.trial_minutes, "Minutes per trial");
  opts["strength"] =
      app->add_option("--" + prefix + "strength", f.strength, "Class perturbation strength");
  opts["rank"] = app->add_option("--" + prefix + "rank", f.rank, "Perturbation rank");
  opts["noise"] = app->add_option("--" + prefix + "noise", f.noise, "Isotropic noise std");
  opts["seed"] = app->add_option("--" + prefix + "seed", f.seed, "Generator seed");
  return opts;
}

rgc::SynthSpec to_spec(const SynthFlags& f) {
  rgc::SynthSpec s;
  s.n_subjects = f.subjects;
  s.channels = f.channels;
  s.fs = f.fs;
  s.minutes = f.minutes;
  s.trial_minutes = f.trial_minutes;
  s.strength = f.strength;
  s.perturbation_rank = f.rank;
  s.noise_level = f.noise;
  s.seed = f.seed;
  return s;
}

int cmd_synth(const std::string& out, const SynthFlags& flags) {
  const auto recordings = rgc::generate_synthetic(to_spec(flags));
  for (const auto& r : recordings) rgc::write_recording(out, r);
  std::cout << "wrote " << recordings.size() << " synthetic subjects to " << out << "\n";
  return 0;
}

int cmd_validate(const std::string& dir) {
  const auto recordings = rgc::load_dataset(dir);
  for (const auto& r : recordings) {
    std::size_t labeled = 0;
    for (const auto& t : r.trials) labeled += t.end - t.start;
    std::ostringstream line;
    line << r.subject_id << ": " << r.channels() << " channels, " << r.samples() << " samples at "
         << r.fs << " Hz (" << std::fixed << std::setprecision(2)
         << static_cast<double>(r.samples()) / r.fs / 60.0 << " min), " << r.trials.size()
         << " trials, " << labeled << " labeled samples\n";
    std::cout << line.str();
  }
  std::cout << "dataset OK: " << recordings.size() << " subjects\n";
  return 0;
}

int cmd_mesd(const std::string& in, const std::string& out) {
  const auto rows = rgc::parse_csv(read_file(in));
  std::map<std::pair<std::string, std::string>, std::vector<rgc::CurveEntry>> curves;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.subject, rgc::to_string(r.method));
    if (!curves.contains(key)) order.push_back(key);
    curves[key].push_back(rgc::CurveEntry{r.window_s, r.accuracy, r.n_decisions, 0});
  }
  std::ostringstream os;
  os << "subject,method,mesd_s,optimal_window_s,optimal_n_states\n";
  for (const auto& key : order) {
    os << key.first << ',' << key.second << ',';
    try {
      const auto m = rgc::mesd(curves[key]);
      os << std::fixed << std::setprecision(6) << m.mesd_s << ',' << m.optimal_window_s << ','
         << m.optimal_n_states << '\n';
    } catch (const rgc::NoStableDesign&) {
      os << "NA,NA,NA\n";
    }
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    write_file(out, os.str());
  }
  return 0;
}

int cmd_report(const std::string& in, const std::string& out, double alpha) {
  const json summary = rgc::summarize(rgc::parse_csv(read_file(in)), alpha);
  if (out.empty()) {
    std::cout << summary.dump(2) << "\n";
  } else {
    write_file(out, summary.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian-geometry and CSP decoding of the directional focus of auditory attention"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  std::string synth_out;
  SynthFlags synth_flags;
  synth->add_option("--out", synth_out, "Output directory")->required();
  add_synth_flags(synth, synth_flags, "");

  // run
  auto* run = app.add_subcommand("run", "Cross-validate methods over decision-window lengths");
  std::string config_path;
  run->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  std::string dataset, methods, windows, svm_c, mean_estimator, out;
  std::uint64_t seed = 0;
  double band_low = 0, band_high = 0, target_fs = 0, segment_s = 0, alpha = 0;
  int filter_order = 0, csp_filters = 0;
  bool shuffle_labels = false;
  std::map<std::string, CLI::Option*> run_opts;
  run_opts["dataset"] = run->add_option("--dataset", dataset, "Dataset directory");
  run_opts["methods"] = run->add_option("--methods", methods, "Comma-separated: RGC,CSP");
  run_opts["windows"] = run->add_option("--windows", windows, "Comma-separated window lengths [s]");
  run_opts["seed"] = run->add_option("--seed", seed, "Cross-validation seed");
  run_opts["band_low"] = run->add_option("--band_low", band_low, "Bandpass low edge [Hz]");
  run_opts["band_high"] = run->add_option("--band_high", band_high, "Bandpass high edge [Hz]");
  run_opts["filter_order"] = run->add_option("--filter_order", filter_order, "Bandpass order");
  run_opts["target_fs"] = run->add_option("--target_fs", target_fs, "Decimated rate [Hz]");
  run_opts["segment_s"] = run->add_option("--segment_s", segment_s, "Segment length [s]");
  run_opts["svm_c"] = run->add_option("--svm_c", svm_c, "SVM cost or 'grid'");
  run_opts["mean_estimator"] =
      run->add_option("--mean_estimator", mean_estimator, "log-euclidean | iterative");
  run_opts["alpha"] = run->add_option("--alpha", alpha, "Significance level");
  run_opts["csp_filters"] = run->add_option("--csp_filters", csp_filters, "CSP filter count");
  run_opts["shuffle_labels"] =
      run->add_flag("--shuffle_labels", shuffle_labels, "Permute segment labels (control)");
  run_opts["out"] = run->add_option("--out", out, "Output directory");
  SynthFlags run_synth;
  const auto synth_opts = add_synth_flags(run, run_synth, "synth_");

  // mesd
  auto* mesd_cmd = app.add_subcommand("mesd", "Recompute MESD from an accuracy CSV");
  std::string mesd_in, mesd_out;
  mesd_cmd->add_option("--in", mesd_in, "results.csv")->required()->check(CLI::ExistingFile);
  mesd_cmd->add_option("--out", mesd_out, "Output CSV (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "Aggregate medians and quartiles from a results CSV");
  std::string report_in, report_out;
  double report_alpha = 0.05;
  report->add_option("--in", report_in, "results.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output JSON (default: stdout)");
  report->add_option("--alpha", report_alpha, "Significance level recorded in the summary");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a dataset directory");
  std::string validate_dir;
  validate->add_option("--dataset", validate_dir, "Dataset directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_out, synth_flags);
    if (validate->parsed()) return cmd_validate(validate_dir);
    if (mesd_cmd->parsed()) return cmd_mesd(mesd_in, mesd_out);
    if (report->parsed()) return cmd_report(report_in, report_out, report_alpha);

    json cfg = config_path.empty() ? json::object() : json::parse(read_file(config_path));
    auto given = [&](const char* name) { return run_opts.at(name)->count() > 0; };
    if (given("dataset")) cfg["dataset"] = dataset;
    if (given("methods")) cfg["methods"] = split_list(methods);
    if (given("windows")) {
      std::vector<double> w;
      for (const auto& item : split_list(windows)) w.push_back(std::stod(item));
      cfg["windows"] = w;
    }
    if (given("seed")) cfg["seed"] = seed;
    if (given("band_low")) cfg["band_low"] = band_low;
    if (given("band_high")) cfg["band_high"] = band_high;
    if (given("filter_order")) cfg["filter_order"] = filter_order;
    if (given("target_fs")) cfg["target_fs"] = target_fs;
    if (given("segment_s")) cfg["segment_s"] = segment_s;
    if (given("svm_c")) cfg["svm_c"] = svm_c;
    if (given("mean_estimator")) cfg["mean_estimator"] = mean_estimator;
    if (given("alpha")) cfg["alpha"] = alpha;
    if (given("csp_filters")) cfg["csp_filters"] = csp_filters;
    if (given("shuffle_labels")) cfg["shuffle_labels"] = shuffle_labels;
    if (given("out")) cfg["out"] = out;
    const json synth_values{{"subjects", run_synth.subjects}, {"channels", run_synth.channels},
                            {"fs", run_synth.fs},             {"minutes", run_synth.minutes},
                            {"trial_minutes", run_synth.trial_minutes},
                            {"strength", run_synth.strength}, {"rank", run_synth.rank},
                            {"noise", run_synth.noise},       {"seed", run_synth.seed}};
    for (const auto& [name, opt] : synth_opts) {
      if (opt->count() > 0) cfg["synth"][name] = synth_values.at(name);
    }

    const rgc::ExperimentConfig config = rgc::config_from_json(cfg);
    const rgc::ExperimentResult result = rgc::run_experiment(config);
    rgc::write_experiment_outputs(config, result);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << result.rows.size() << " rows to " << config.out << "/results.csv\n";
    if (!result.failures.empty()) {
      std::cerr << result.failures.size() << " subject(s) failed:\n";
      for (const auto& f : result.failures) std::cerr << "  " << f.subject << ": " << f.error << "\n";
      return 1;
    }
    return 0;
  } catch (const rgc::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
