// khop: train, recall and run sweep experiments on kernel Hopfield networks.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "khop/analysis.hpp"
#include "khop/config.hpp"
#include "khop/dynamics.hpp"
#include "khop/experiments.hpp"
#include "khop/learning.hpp"
#include "khop/model_io.hpp"
#include "khop/plots.hpp"
#include "khop/report.hpp"
#include "khop/validation.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainArgs {
  std::string rule = "klr";
  std::size_t n = 100;
  double load = 0.5;
  double c = 2.0;
  double lambda = 0.01;
  double beta = 0.1;
  std::size_t m_updates = 200;
  std::uint64_t seed = 1;
  std::string out = "model.khop";
};

int run_train(const TrainArgs& a) {
  using namespace khop;
  const Rule rule = parse_rule(a.rule);
  const std::size_t p = pattern_count(a.n, a.load);
  if (p < 1) throw UsageError("load gives P < 1");
  const PatternSet patterns = condition_patterns(a.seed, a.n, p);
  const LearnConfig lc{a.beta, a.m_updates, a.lambda};
  const TrainOutcome t = measure_training(rule, patterns, KernelParams::from_scaling(a.c, a.n), lc);
  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write '" + a.out + "'");
  write_model(out, ModelFile{rule, a.lambda, patterns, t.model});
  std::cout << "trained " << to_string(rule) << " n=" << a.n << " p=" << p << " in " << t.seconds << " s -> " << a.out
            << '\n';
  if (t.curve) std::cout << "loss " << t.curve->losses.front() << " -> " << t.curve->losses.back() << '\n';
  return 0;
}

struct RecallArgs {
  std::string model;
  std::size_t pattern = 0;
  double similarity = 1.0;
  std::uint64_t seed = 1;
  std::string state;  // optional +/- string
  std::size_t max_steps = 30;
};

int run_recall(const RecallArgs& a) {
  using namespace khop;
  std::ifstream in(a.model);
  if (!in) throw std::runtime_error("cannot read model '" + a.model + "'");
  const ModelFile f = read_model(in);
  if (a.pattern >= f.patterns.p()) throw UsageError("--pattern out of range");
  const State initial =
      a.state.empty() ? corrupt(f.patterns[a.pattern], a.similarity, a.seed) : parse_pattern_line(a.state);
  if (initial.size() != f.patterns.n()) throw UsageError("initial state has wrong length");
  const RecallTrace tr = std::visit([&](const auto& m) { return recall(initial, m, DynParams{a.max_steps}); }, f.model);
  const Nearest near = nearest_pattern(tr.final, f.patterns, a.pattern);
  std::cout << "outcome " << to_string(tr.outcome) << '\n'
            << "classification " << to_string(classify(tr, f.patterns, a.pattern)) << '\n'
            << "steps " << tr.steps << '\n'
            << "period " << tr.period << '\n'
            << "initial_overlap " << overlap(initial, f.patterns[a.pattern]) << '\n'
            << "hamming_nearest " << near.distance << '\n'
            << "nearest_idx " << near.index << '\n';
  if (const auto* d = std::get_if<DualModel>(&f.model)) std::cout << "lyapunov " << lyapunov(tr.final, *d) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string kind;
  std::string config;
  std::string manifest;
  std::string out_dir = "results";
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> workers;
  bool allow_large = false;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  using namespace khop;
  const ExperimentKind kind = parse_kind(a.kind);
  ExperimentConfig cfg;
  try {
    if (!a.manifest.empty()) {
      cfg = parse_config(parse_manifest(read_file(a.manifest)).config_yaml, kind);
    } else if (!a.config.empty()) {
      cfg = load_config(a.config, kind);
    } else {
      cfg = default_config(kind);
    }
    if (!a.seeds.empty()) cfg.seeds = a.seeds;
    if (a.workers) cfg.workers = *a.workers;
    if (a.allow_large) cfg.allow_large = true;
    validate(cfg);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  for (auto n : cfg.n)
    if (n >= kLargeN) std::cerr << "warning: N=" << n << " runs are minutes-scale per seed\n";

  const std::string started = utc_timestamp();
  const ExperimentResult res = run_experiment(cfg);
  const RunManifest m = write_experiment(res, a.out_dir, started);
  for (const auto& [role, path] : m.outputs) std::cout << role << ": " << path << '\n';

  if (res.gamma_search)
    for (const auto& [n, c] : res.gamma_search->best) std::cout << "c_opt(N=" << n << ") = " << c << '\n';
  if (res.learning_curve) {
    const auto& lc = *res.learning_curve;
    std::cout << "loss(200)/loss(150) = " << lc.ratio_200_150 << (lc.plateau ? " (plateau)" : " (still decreasing)")
              << ", monotone=" << lc.monotone << '\n';
  }
  if (res.audit)
    std::cout << "cycles " << res.audit->cycles << ", not converged " << res.audit->not_converged << " of "
              << res.audit->trials << " trials\n";
  return 0;
}

int run_plot(const std::string& csv, const std::string& fig, std::string out) {
  using namespace khop;
  if (out.empty()) out = std::filesystem::path(csv).replace_extension("").string() + "_fig" + fig + ".svg";
  CsvTable table;
  try {
    table = parse_csv(read_file(csv));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  std::string svg;
  try {
    svg = plot_figure(table, fig);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_file(out, svg);
  std::cout << out << '\n';
  return 0;
}

int run_validate(std::uint64_t seed) {
  bool ok = true;
  for (const auto& c : khop::oracle::run_invariant_suite(seed)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"khop: kernel-trained Hopfield associative memory simulator"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "fit a model on seeded random patterns and dump it");
  train->add_option("--rule", ta.rule, "hebbian|llr|klr|krr")->capture_default_str();
  train->add_option("--n", ta.n, "neurons")->capture_default_str();
  train->add_option("--load", ta.load, "P/N")->capture_default_str();
  train->add_option("--c", ta.c, "kernel scaling factor, gamma = c/N")->capture_default_str();
  train->add_option("--lambda", ta.lambda, "L2 regularization")->capture_default_str();
  train->add_option("--beta", ta.beta, "learning rate")->capture_default_str();
  train->add_option("--updates", ta.m_updates, "gradient steps")->capture_default_str();
  train->add_option("--seed", ta.seed, "master seed")->capture_default_str();
  train->add_option("--out,-o", ta.out, "model file")->capture_default_str();

  RecallArgs ra;
  auto* rec = app.add_subcommand("recall", "run one recall from a model dump");
  rec->add_option("--model,-m", ra.model, "model file")->required();
  rec->add_option("--pattern", ra.pattern, "target pattern index")->capture_default_str();
  rec->add_option("--similarity", ra.similarity, "initial overlap with the target")->capture_default_str();
  rec->add_option("--seed", ra.seed, "corruption seed")->capture_default_str();
  rec->add_option("--state", ra.state, "explicit initial state as a +/- string");
  rec->add_option("--max-steps", ra.max_steps, "step budget")->capture_default_str();

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "run a sweep experiment");
  exp->add_option("kind", ea.kind,
                  "landscape|compare|scaling|sensitivity|gamma-search|learning-curve|dynamics-audit")
      ->required();
  exp->add_option("--config,-c", ea.config, "YAML config file");
  exp->add_option("--manifest", ea.manifest, "re-run the config recorded in a manifest");
  exp->add_option("--out-dir", ea.out_dir, "output directory")->capture_default_str();
  exp->add_option("--seed", ea.seeds, "master seed(s), overrides the config");
  exp->add_option("--workers", ea.workers, "worker threads (0 = all cores)");
  exp->add_flag("--allow-large", ea.allow_large, "permit N >= 500");

  std::string plot_csv, plot_fig, plot_out;
  auto* plot = app.add_subcommand("plot", "render a figure from an experiment CSV");
  plot->add_option("csv", plot_csv, "input CSV")->required();
  plot->add_option("--fig", plot_fig, "1a|1b|1c|1d|2a|2b|3a|3b|4|A|B|C")->required();
  plot->add_option("--out,-o", plot_out, "output SVG");

  std::uint64_t validate_seed = 1;
  auto* val = app.add_subcommand("validate", "run the invariant and oracle suite");
  val->add_option("--seed", validate_seed, "seed for the random instances")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (*train) return run_train(ta);
    if (*rec) return run_recall(ra);
    if (*exp) return run_experiment_cmd(ea);
    if (*plot) return run_plot(plot_csv, plot_fig, plot_out);
    if (*val) return run_validate(validate_seed);
  } catch (const UsageError& e) {
    std::cerr << "khop: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "khop: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "khop: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
