// dgp: sample deep-GP priors, diagnose their ergodicity, and run Bayesian
// inference on point observations. Subcommands: sample-prior, diagnose,
// infer, report, plot. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dgp/constructions.hpp"
#include "dgp/ergodicity.hpp"
#include "dgp/errors.hpp"
#include "dgp/experiments.hpp"
#include "dgp/inference.hpp"
#include "dgp/io.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

dgp::ExperimentSpec load_spec(const std::string& path) {
  return dgp::parse_experiment_config(dgp::read_text_file(path));
}

// The convolution chain lives on the periodic grid; everything else is
// cell-centered.
dgp::Grid chain_grid(const dgp::ExperimentSpec& spec) {
  const bool periodic =
      std::holds_alternative<dgp::ConvolutionConfig>(spec.construction);
  return dgp::Grid::make(spec.dim, spec.sampling_mesh,
                         periodic ? dgp::GridLayout::Periodic
                                  : dgp::GridLayout::CellCentered);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Coordinate columns for a grid, plus their header names.
void grid_columns(const dgp::Grid& grid, std::vector<std::string>& header,
                  std::vector<Eigen::VectorXd>& cols) {
  Eigen::MatrixXd pts = grid.points();
  header.push_back("x");
  cols.push_back(pts.col(0));
  if (grid.dim() == 2) {
    header.push_back("y");
    cols.push_back(pts.col(1));
  }
}

// ---------------------------------------------------------------------------
// sample-prior

struct SamplePriorArgs {
  std::string config;
  std::string out = ".";
  int depth = 4;
  std::optional<std::uint64_t> seed;
};

void run_sample_prior(const SamplePriorArgs& args) {
  dgp::ExperimentSpec spec = load_spec(args.config);
  if (args.seed) spec.seed = *args.seed;
  if (args.depth < 0) throw dgp::ConfigError("depth must be >= 0");

  const dgp::Grid grid = chain_grid(spec);
  dgp::DeepChainConfig cfg;
  cfg.variant = dgp::resolve_construction(spec.construction, grid);
  cfg.grid = grid;
  cfg.depth = args.depth;
  cfg.seed = spec.seed;

  dgp::RandomStream rng(spec.seed);
  const Eigen::MatrixXd u0 = dgp::default_initial_layer(cfg, rng);
  const dgp::ChainTrajectory traj = dgp::run_chain(cfg, u0, rng);

  std::vector<std::string> files;
  for (std::size_t l = 0; l < traj.layers.size(); ++l) {
    std::vector<std::string> header;
    std::vector<Eigen::VectorXd> cols;
    grid_columns(grid, header, cols);
    const Eigen::MatrixXd& layer = traj.layers[l];
    for (Eigen::Index c = 0; c < layer.cols(); ++c) {
      header.push_back(layer.cols() == 1 ? std::string("value")
                                         : "value_" + std::to_string(c));
      cols.push_back(layer.col(c));
    }
    char name[32];
    std::snprintf(name, sizeof(name), "layer_%03zu.csv", l);
    const std::string path = join_path(args.out, name);
    dgp::write_csv(path, header, cols);
    files.push_back(name);
  }
  dgp::write_text_file(join_path(args.out, "manifest.json"),
                       dgp::manifest_to_json(spec, files));
  std::cout << "wrote " << files.size() << " layer files and manifest.json to "
            << args.out << "\n";
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  std::string config;
  std::string out = ".";
  std::string mode = "auto";
  int depth = 20;
  int replicas = 200;
  std::optional<std::uint64_t> seed;
};

void run_diagnose(const DiagnoseArgs& args) {
  dgp::ExperimentSpec spec = load_spec(args.config);
  if (args.seed) spec.seed = *args.seed;
  const dgp::Grid grid = chain_grid(spec);

  dgp::DeepChainConfig cfg;
  cfg.variant = dgp::resolve_construction(spec.construction, grid);
  cfg.grid = grid;
  cfg.depth = args.depth;
  cfg.seed = spec.seed;

  std::string mode = args.mode;
  if (mode == "auto") {
    mode = std::holds_alternative<dgp::ConvolutionConfig>(spec.construction)
               ? "modes"
               : "spread";
  }
  nlohmann::json j;
  j["kind"] = "diagnosis";
  j["mode"] = mode;
  j["spec_digest"] = dgp::spec_hash(spec);
  j["seed"] = spec.seed;
  j["depth"] = args.depth;

  dgp::RandomStream rng(spec.seed);
  if (mode == "spread") {
    std::vector<dgp::ChainTrajectory> ensemble;
    ensemble.reserve(static_cast<std::size_t>(args.replicas));
    for (int r = 0; r < args.replicas; ++r) {
      dgp::RandomStream sub = rng.derive(static_cast<std::uint64_t>(r));
      const Eigen::MatrixXd start = dgp::default_initial_layer(cfg, sub);
      ensemble.push_back(dgp::run_chain(cfg, start, sub));
    }
    const dgp::SpreadSeries s = dgp::fit_spread_decay(ensemble);
    j["replicas"] = s.replicas;
    j["rate"] = s.rate;
    j["rate_se"] = s.rate_se;
    j["rate_ci_halfwidth"] = s.rate_ci_halfwidth;
    j["trivial"] = s.trivial;
    j["fit_begin"] = s.fit_begin;
    j["fit_end"] = s.fit_end;
    Eigen::VectorXd layer(s.mean_square.size());
    for (Eigen::Index i = 0; i < layer.size(); ++i) layer[i] = double(i);
    dgp::write_csv(join_path(args.out, "spread.csv"),
                   {"layer", "mean_square_spread", "max_spread"},
                   {layer, s.mean_square, s.max_spread});
  } else if (mode == "modes") {
    const auto& conv = std::get<dgp::ConvolutionConfig>(cfg.variant);
    const Eigen::MatrixXd start = dgp::default_initial_layer(cfg, rng);
    const dgp::ChainTrajectory traj = dgp::run_chain(cfg, start, rng);
    const int K = conv.cov.truncation();
    Eigen::VectorXd kcol(K), lam(K), lya(K), se(K), verdict(K), grow(K);
    int decays = 0, diverges = 0;
    for (int k = 1; k <= K; ++k) {
      Eigen::VectorXcd traj_k(static_cast<Eigen::Index>(traj.mode_coeffs.size()));
      for (std::size_t l = 0; l < traj.mode_coeffs.size(); ++l) {
        traj_k[static_cast<Eigen::Index>(l)] = traj.mode_coeffs[l][k - 1];
      }
      const dgp::ModeVerdict v =
          dgp::mode_classifier(traj_k, conv.cov.lambda2[k - 1], k);
      kcol[k - 1] = k;
      lam[k - 1] = v.lambda2;
      lya[k - 1] = v.lyapunov;
      se[k - 1] = v.lyapunov_se;
      grow[k - 1] = v.growth_exponent;
      verdict[k - 1] = v.verdict == dgp::ModeFate::Decay      ? -1.0
                       : v.verdict == dgp::ModeFate::Diverge ? 1.0
                                                             : 0.0;
      decays += v.verdict == dgp::ModeFate::Decay;
      diverges += v.verdict == dgp::ModeFate::Diverge;
    }
    j["threshold"] = dgp::convolution_threshold();
    j["modes"] = K;
    j["decaying"] = decays;
    j["diverging"] = diverges;
    dgp::write_csv(
        join_path(args.out, "modes.csv"),
        {"k", "lambda2", "lyapunov", "lyapunov_se", "verdict", "growth"},
        {kcol, lam, lya, se, verdict, grow});
  } else if (mode == "trace") {
    const Eigen::MatrixXd start = dgp::default_initial_layer(cfg, rng);
    const dgp::NormTrace t = dgp::norm_trace(dgp::run_chain(cfg, start, rng));
    Eigen::VectorXd layer(t.norms.size());
    for (Eigen::Index i = 0; i < layer.size(); ++i) layer[i] = double(i);
    j["final_running_mean"] = t.running_mean[t.running_mean.size() - 1];
    dgp::write_csv(join_path(args.out, "trace.csv"),
                   {"layer", "norm", "running_mean"},
                   {layer, t.norms, t.running_mean});
  } else if (mode == "coupling") {
    dgp::RandomStream init_rng = rng.derive(0xa);
    const Eigen::MatrixXd u0_a = dgp::default_initial_layer(cfg, init_rng);
    const Eigen::MatrixXd u0_b = dgp::default_initial_layer(cfg, init_rng);
    const dgp::EnergyDistanceSeries s = dgp::two_start_coupling_diagnostic(
        cfg, u0_a, u0_b, args.replicas, rng);
    Eigen::VectorXd layer(s.distance.size());
    for (Eigen::Index i = 0; i < layer.size(); ++i) layer[i] = double(i);
    j["replicas"] = s.replicas;
    j["first_distance"] = s.distance[0];
    j["last_distance"] = s.distance[s.distance.size() - 1];
    dgp::write_csv(join_path(args.out, "coupling.csv"),
                   {"layer", "energy_distance"}, {layer, s.distance});
  } else {
    throw dgp::ConfigError("unknown diagnose mode: " + mode);
  }
  dgp::write_text_file(join_path(args.out, "diagnose.json"), j.dump(2) + "\n");
  std::cout << "wrote diagnosis (" << mode << ") to " << args.out << "\n";
}

// ---------------------------------------------------------------------------
// infer

struct InferArgs {
  std::string spec_path;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  bool allow_inverse_crime = false;
  std::string checkpoint;
  long checkpoint_every = 0;
  bool resume = false;
};

void run_infer(const InferArgs& args) {
  dgp::ExperimentSpec spec = load_spec(args.spec_path);
  if (args.seed) spec.seed = *args.seed;
  if (args.allow_inverse_crime) spec.allow_inverse_crime = true;

  dgp::CheckpointOptions ckpt;
  ckpt.path = args.checkpoint;
  ckpt.every = args.checkpoint_every;
  ckpt.resume = args.resume;

  dgp::RandomStream rng(spec.seed);
  const dgp::InferenceResult res = dgp::run_inference(spec, rng, ckpt);
  const dgp::PosteriorSummary& s = res.summary;

  const dgp::Grid grid = spec.sampling_grid();
  std::vector<std::string> header;
  std::vector<Eigen::VectorXd> cols;
  grid_columns(grid, header, cols);
  header.insert(header.end(), {"mean", "q05", "q50", "q95", "truth"});
  cols.insert(cols.end(),
              {s.mean, s.q05, s.q50, s.q95, res.data.truth_sampling});
  dgp::write_csv(join_path(args.out, "summary.csv"), header, cols);

  for (std::size_t l = 0; l < s.mean_sqrt_f.size(); ++l) {
    std::vector<std::string> h2;
    std::vector<Eigen::VectorXd> c2;
    grid_columns(grid, h2, c2);
    h2.push_back("mean_sqrt_f");
    c2.push_back(s.mean_sqrt_f[l]);
    dgp::write_csv(
        join_path(args.out, "length_scale_" + std::to_string(l) + ".csv"), h2,
        c2);
  }

  {
    std::vector<std::string> h3{"x"};
    std::vector<Eigen::VectorXd> c3{res.data.obs_points.col(0)};
    if (spec.dim == 2) {
      h3.push_back("y");
      c3.push_back(res.data.obs_points.col(1));
    }
    h3.push_back("value");
    c3.push_back(res.data.y);
    dgp::write_csv(join_path(args.out, "observations.csv"), h3, c3);
  }

  dgp::write_text_file(join_path(args.out, "summary.json"),
                       dgp::summary_to_json(s, spec));
  std::cout << "n_layers " << spec.n_layers << "  J " << spec.J
            << "  l1_error " << s.l1_error << "  l2_error " << s.l2_error
            << "  acceptance " << s.acceptance_rate << "\n";
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string spec_path;
  std::string out = ".";
  std::vector<int> Js = {25, 50, 100};
  std::vector<int> layers = {1, 2, 3, 4};
  int jobs = 0;
  bool allow_inverse_crime = false;
  std::vector<std::string> merge;
};

void run_report_cmd(const ReportArgs& args) {
  dgp::ErrorReport report;
  dgp::ExperimentSpec base;
  if (!args.merge.empty()) {
    std::vector<dgp::ErrorReport> parts;
    for (const std::string& path : args.merge) {
      parts.push_back(dgp::report_from_json(dgp::read_text_file(path)));
    }
    report = dgp::merge_reports(parts);
    // Reuse the first part's embedded spec for the artifact header.
    const nlohmann::json first =
        nlohmann::json::parse(dgp::read_text_file(args.merge.front()));
    base = dgp::parse_experiment_config(first.at("spec").dump());
  } else {
    if (args.spec_path.empty()) {
      throw dgp::ConfigError("report needs --spec or --merge");
    }
    base = load_spec(args.spec_path);
    if (args.allow_inverse_crime) base.allow_inverse_crime = true;
    report = dgp::run_report(base, args.Js, args.layers, args.jobs);
  }

  const std::string l1 = dgp::format_report_table(report, dgp::ErrorNorm::L1);
  const std::string l2 = dgp::format_report_table(report, dgp::ErrorNorm::L2);
  dgp::write_text_file(join_path(args.out, "report.txt"), l1 + "\n" + l2);
  dgp::write_text_file(join_path(args.out, "report.json"),
                       dgp::report_to_json(report, base, dgp::spec_hash(base)));
  std::cout << l1 << "\n" << l2;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string csv;
  std::string out;
  std::string title;
  int heatmap = 0;  // n per side; 0 = line plot
};

void run_plot(const PlotArgs& args) {
  const dgp::CsvTable table = dgp::read_csv(args.csv);
  const std::string title =
      args.title.empty() ? std::filesystem::path(args.csv).stem().string()
                         : args.title;
  if (args.heatmap > 0) {
    dgp::write_text_file(
        args.out,
        dgp::svg_heatmap(title, args.heatmap, table.columns.back()));
  } else {
    if (table.columns.size() < 2) {
      throw dgp::ConfigError("line plot needs an x column plus data columns");
    }
    std::vector<Eigen::VectorXd> series(table.columns.begin() + 1,
                                        table.columns.end());
    std::vector<std::string> names(table.header.begin() + 1,
                                   table.header.end());
    dgp::write_text_file(
        args.out, dgp::svg_line_plot(title, table.columns[0], series, names));
  }
  std::cout << "wrote " << args.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep Gaussian process chains: prior sampling, ergodicity "
               "diagnostics, and Bayesian inference"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SamplePriorArgs sp;
  auto* sample = app.add_subcommand(
      "sample-prior", "draw a deep-GP chain and write one CSV per layer");
  sample->add_option("--config", sp.config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sample->add_option("--depth", sp.depth, "number of chain steps");
  sample->add_option("--seed", sp.seed, "seed override");
  sample->add_option("--out", sp.out, "output directory");
  sample->callback([&sp] { run_sample_prior(sp); });

  DiagnoseArgs dg;
  auto* diag = app.add_subcommand(
      "diagnose", "ergodicity diagnostics for a chain configuration");
  diag->add_option("--config", dg.config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  diag->add_option("--mode", dg.mode,
                   "spread | modes | trace | coupling | auto");
  diag->add_option("--depth", dg.depth, "number of chain steps");
  diag->add_option("--replicas", dg.replicas, "ensemble size");
  diag->add_option("--seed", dg.seed, "seed override");
  diag->add_option("--out", dg.out, "output directory");
  diag->callback([&dg] { run_diagnose(dg); });

  InferArgs in;
  auto* infer = app.add_subcommand(
      "infer", "posterior sampling for one experiment spec");
  infer->add_option("--spec", in.spec_path, "experiment spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--out", in.out, "output directory");
  infer->add_option("--seed", in.seed, "seed override");
  infer->add_flag("--allow-inverse-crime", in.allow_inverse_crime,
                  "permit equal generation and sampling meshes");
  infer->add_option("--checkpoint", in.checkpoint, "chain checkpoint file");
  infer->add_option("--checkpoint-every", in.checkpoint_every,
                    "steps between checkpoint writes");
  infer->add_flag("--resume", in.resume, "resume from the checkpoint file");
  infer->callback([&in] { run_infer(in); });

  ReportArgs rp;
  auto* report = app.add_subcommand(
      "report", "error table over observation counts and layer counts");
  report->add_option("--spec", rp.spec_path, "base experiment spec (JSON)")
      ->check(CLI::ExistingFile);
  report->add_option("--J", rp.Js, "observation counts")->delimiter(',');
  report->add_option("--layers", rp.layers, "layer counts")->delimiter(',');
  report->add_option("--jobs", rp.jobs, "worker threads (0 = all cores)");
  report->add_flag("--allow-inverse-crime", rp.allow_inverse_crime,
                   "permit equal generation and sampling meshes");
  report->add_option("--merge", rp.merge,
                     "merge previously written report.json files")
      ->delimiter(',');
  report->add_option("--out", rp.out, "output directory");
  report->callback([&rp] { run_report_cmd(rp); });

  PlotArgs pl;
  auto* plot =
      app.add_subcommand("plot", "render a CSV artifact as an SVG image");
  plot->add_option("--csv", pl.csv, "input CSV")
      ->required()
      ->check(CLI::ExistingFile);
  plot->add_option("--out", pl.out, "output SVG path")->required();
  plot->add_option("--title", pl.title, "plot title");
  plot->add_option("--heatmap", pl.heatmap,
                   "render an n x n heat map of the last column");
  plot->callback([&pl] { run_plot(pl); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const dgp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dgp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
