// driftfuzz command-line front end.
//
//   driftfuzz synth      --out DIR [--family F | --drift KIND --severity S] [--rows M] [--seed S]
//   driftfuzz mdl-train  --in ref.csv --out model.json [--config cfg.json]
//   driftfuzz detect     --ref ref.csv --test test.csv --config cfg.json [--model model.json]
//   driftfuzz ablation   --trials N --seed S --out DIR
//   driftfuzz distbench  --trials N --out DIR
//   driftfuzz report     --format svg|csv|json --in results.json [--out PATH]
//
// detect exits 0 when no drift is found, 1 on drift and 2 on any error.

#include <CLI11/CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "driftfuzz.hpp"

namespace fs = std::filesystem;
using namespace driftfuzz;

namespace {

constexpr int kExitError = 2;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory '" + dir + "': " + ec.message());
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

struct SynthArgs {
  std::string out;
  std::string family = "gaussian";
  std::string drift;
  int severity = 0;
  std::size_t rows = 1000;
  std::uint64_t seed = 0;
  double mcar_rate = 0.2;
};

int run_synth(const SynthArgs& a) {
  Family family = parse_family(a.family);
  std::optional<DriftSpec> drift;
  if (!a.drift.empty()) {
    drift = DriftSpec{parse_drift_kind(a.drift), a.severity};
    family = base_family(drift->kind);
  } else if (a.severity != 0) {
    fail(ErrorCode::InvalidArgument, "--severity needs --drift");
  }
  const RandomSource rng(a.seed);
  const auto base = table1_spec(family, rng.derive(0));
  const auto test_spec = drift ? apply_drift(base, *drift) : base;
  const auto rates = half_mcar_rates(base.dims(), a.mcar_rate);
  const auto ref = inject_mcar(generate(base, a.rows, rng.derive(1)), rates, rng.derive(2));
  const auto test = inject_mcar(generate(test_spec, a.rows, rng.derive(3)), rates, rng.derive(4));

  ensure_dir(a.out);
  write_csv_file(join(a.out, "ref.csv"), ref);
  write_csv_file(join(a.out, "test.csv"), test);
  json manifest = {{"seed", a.seed},
                   {"rng", std::string(RandomSource::kAlgorithm)},
                   {"rows", a.rows},
                   {"spec", to_json(base)},
                   {"test_spec", to_json(test_spec)},
                   {"mcar_rates", rates.rates},
                   {"files", {{"reference", "ref.csv"}, {"test", "test.csv"}}}};
  manifest["drift"] = drift ? to_json(*drift) : json(nullptr);
  write_json_file(join(a.out, "manifest.json"), manifest);
  return 0;
}

PipelineConfig load_config(const std::string& path, ConfigId fallback) {
  if (path.empty()) return make_config(fallback);
  return pipeline_config_from_json(read_json_file(path));
}

int run_mdl_train(const std::string& in, const std::string& out, const std::string& config_path) {
  auto cfg = load_config(config_path, ConfigId::MdlFwfGauTopq);
  if (!uses_mdl(cfg.config_id)) cfg.config_id = ConfigId::MdlFwfGauTopq;
  const auto reference = read_csv_file(in);
  const auto fit = fit_reference(reference, cfg);
  json j = {{"format", "driftfuzz-model/1"},
            {"config", to_json(cfg)},
            {"partition", to_json(fit.partition)},
            {"distance_model", to_json(*fit.model)}};
  write_json_file(out, j);
  std::cerr << "trained on " << fit.model->pair_count << " pairs, sigma_mask " << fit.model->sigma_mask
            << ", cv_mae " << fit.model->cv_mae << "\n";
  return 0;
}

int run_detect(const std::string& ref_path, const std::string& test_path, const std::string& config_path,
               const std::string& model_path) {
  const auto cfg = load_config(config_path, ConfigId::MdlFwfGauTopq);
  const auto reference = read_csv_file(ref_path);
  const auto test = read_csv_file(test_path);
  std::optional<Partition> partition;
  std::optional<DistanceModel> model;
  if (!model_path.empty()) {
    const auto j = read_json_file(model_path);
    partition = partition_from_json(json_detail::at(j, "partition"));
    if (j.contains("distance_model") && !j["distance_model"].is_null())
      model = distance_model_from_json(j["distance_model"]);
  }
  const auto verdict = detect(reference, test, cfg, partition ? &*partition : nullptr, model ? &*model : nullptr);
  json out = to_json(verdict);
  out["config_id"] = std::string(to_string(cfg.config_id));
  std::cout << out.dump(2) << std::endl;
  return verdict.drift ? 1 : 0;
}

struct AblationArgs {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> drifts{"gaussian_mean"};
  std::vector<std::string> configs;
  std::size_t m = 1000;
  std::size_t max_pairs = 3000;
  double mcar_rate = 0.2;
};

int run_ablation_cmd(const AblationArgs& a) {
  AblationOptions opt;
  opt.trials = a.trials;
  opt.master_seed = a.seed;
  opt.m = a.m;
  opt.mcar_rate = a.mcar_rate;
  opt.drifts.clear();
  for (const auto& d : a.drifts) opt.drifts.push_back(parse_drift_kind(d));
  if (a.configs.empty()) {
    opt.configs = all_configs();
  } else {
    for (const auto& c : a.configs) opt.configs.push_back(make_config(parse_config_id(c)));
  }
  for (auto& c : opt.configs) c.max_pairs = a.max_pairs;
  const auto res = run_ablation(opt);

  ensure_dir(a.out);
  write_json_file(join(a.out, "ablation.json"), to_json(res, opt));
  emit_report(res.curves, ReportFormat::Csv, join(a.out, "curves.csv"));
  emit_report(res.curves, ReportFormat::Svg, join(a.out, "curves.svg"));
  for (const auto& c : res.correlations)
    std::cerr << c.config << " vs complete (" << to_string(c.drift)
              << "): " << (c.pearson ? std::to_string(*c.pearson) : "undefined, " + c.note) << "\n";
  if (!res.failures.empty()) std::cerr << res.failures.size() << " failed cells, see ablation.json\n";
  return 0;
}

int run_distbench_cmd(std::size_t trials, std::uint64_t seed, const std::string& out,
                      const std::vector<std::string>& families, std::size_t max_pairs) {
  DistanceBenchmarkOptions opt;
  opt.trials = trials;
  opt.master_seed = seed;
  opt.mdl.max_pairs = max_pairs;
  if (!families.empty()) {
    opt.families.clear();
    for (const auto& f : families) opt.families.push_back(parse_family(f));
  }
  const auto res = run_distance_benchmark(opt);
  ensure_dir(out);
  write_json_file(join(out, "distbench.json"), to_json(res));
  emit_report(res, ReportFormat::Csv, join(out, "distbench.csv"));
  write_distance_table(std::cerr, res, ReportFormat::Csv);
  return 0;
}

int run_report(const std::string& fmt_name, const std::string& in, const std::string& out) {
  const auto fmt = parse_report_format(fmt_name);
  const auto j = read_json_file(in);
  const std::string kind = j.value("kind", "");
  auto write = [&](auto&& writer) {
    if (out.empty())
      writer(std::cout);
    else
      write_report_file(out, writer);
  };
  if (kind == "distbench") {
    const auto table = distance_benchmark_from_json(j);
    write([&](std::ostream& o) { write_distance_table(o, table, fmt); });
    return 0;
  }
  if (kind != "ablation" && kind != "curves") fail(ErrorCode::ParseError, in + ": not an ablation, curves or distbench file");
  std::vector<DriftCurve> curves;
  for (const auto& c : json_detail::at(j, "curves")) curves.push_back(drift_curve_from_json(c));
  if (fmt == ReportFormat::Json && kind == "ablation") {
    write([&](std::ostream& o) { o << j.dump(2) << '\n'; });
    return 0;
  }
  write([&](std::ostream& o) { write_curves(o, curves, fmt); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-drift detection for windows with missing values"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a reference/test window pair");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--family", synth.family, "uniform, gaussian, exponential, poisson or categorical");
  s->add_option("--drift", synth.drift, "Drift kind applied to the test window");
  s->add_option("--severity", synth.severity, "Drift severity 0-10")->check(CLI::Range(0, 10));
  s->add_option("--rows", synth.rows, "Rows per window")->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "Master seed");
  s->add_option("--mcar-rate", synth.mcar_rate, "Missing rate on the first half of the columns")
      ->check(CLI::Range(0.0, 1.0));

  std::string train_in, train_out, train_cfg;
  auto* t = app.add_subcommand("mdl-train", "Fit the partition and distance model of a reference window");
  t->add_option("--in", train_in, "Reference CSV")->required();
  t->add_option("--out", train_out, "Model JSON")->required();
  t->add_option("--config", train_cfg, "Pipeline config JSON");

  std::string ref_path, test_path, cfg_path, model_path;
  auto* d = app.add_subcommand("detect", "Test two windows for drift");
  d->add_option("--ref", ref_path, "Reference CSV")->required();
  d->add_option("--test", test_path, "Test CSV")->required();
  d->add_option("--config", cfg_path, "Pipeline config JSON")->required();
  d->add_option("--model", model_path, "Model JSON from mdl-train");

  AblationArgs abl;
  auto* a = app.add_subcommand("ablation", "Severity sweep over pipeline configs");
  a->add_option("--trials", abl.trials, "Trials per level")->check(CLI::PositiveNumber);
  a->add_option("--seed", abl.seed, "Master seed");
  a->add_option("--out", abl.out, "Output directory")->required();
  a->add_option("--drift", abl.drifts, "Drift kinds")->delimiter(',');
  a->add_option("--configs", abl.configs, "Config ids (default: all)")->delimiter(',');
  a->add_option("--rows", abl.m, "Rows per window")->check(CLI::PositiveNumber);
  a->add_option("--max-pairs", abl.max_pairs, "Training pairs for the distance model")->check(CLI::PositiveNumber);
  a->add_option("--mcar-rate", abl.mcar_rate, "Missing rate on the first half of the columns")
      ->check(CLI::Range(0.0, 1.0));

  std::size_t db_trials = 5, db_pairs = 20000;
  std::uint64_t db_seed = 0;
  std::string db_out;
  std::vector<std::string> db_families;
  auto* b = app.add_subcommand("distbench", "Distance-estimation error of imputers and MDL");
  b->add_option("--trials", db_trials, "Trials per family")->check(CLI::PositiveNumber);
  b->add_option("--seed", db_seed, "Master seed");
  b->add_option("--out", db_out, "Output directory")->required();
  b->add_option("--family", db_families, "Families (default: all)")->delimiter(',');
  b->add_option("--max-pairs", db_pairs, "Training pairs for the distance model")->check(CLI::PositiveNumber);

  std::string rep_fmt, rep_in, rep_out;
  auto* r = app.add_subcommand("report", "Render ablation or distbench results");
  r->add_option("--format", rep_fmt, "svg, csv or json")->required();
  r->add_option("--in", rep_in, "ablation.json or distbench.json")->required();
  r->add_option("--out", rep_out, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_mdl_train(train_in, train_out, train_cfg);
    if (*d) return run_detect(ref_path, test_path, cfg_path, model_path);
    if (*a) return run_ablation_cmd(abl);
    if (*b) return run_distbench_cmd(db_trials, db_seed, db_out, db_families, db_pairs);
    if (*r) return run_report(rep_fmt, rep_in, rep_out);
  } catch (const Error& e) {
    std::cerr << "driftfuzz: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "driftfuzz: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
