#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "json.hpp"

#include "dgp/constructions.hpp"
#include "dgp/errors.hpp"
#include "dgp/experiments.hpp"
#include "dgp/grid.hpp"
#include "dgp/inference.hpp"
#include "dgp/io.hpp"
#include "dgp/kernels.hpp"
#include "dgp/random.hpp"

using namespace dgp;

namespace {

namespace fs = std::filesystem;

bool mentions(const std::exception& e, const char* needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::string temp_file(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

// A spec that validates and runs quickly.
ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.name = "small";
  spec.construction = CovFunctionConfig{};
  spec.dim = 1;
  spec.truth = TruthKind::Indicator1D;
  spec.sampling_mesh = 15;
  spec.generation_mesh = 30;
  spec.J = 5;
  spec.noise_std = 0.05;
  spec.n_layers = 2;
  spec.mcmc.samples = 60;
  spec.mcmc.burn_in = 20;
  spec.mcmc.beta_init = 0.2;
  spec.seed = 5;
  return spec;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("config serialization: round trip over every construction") {
  std::vector<ExperimentSpec> specs;

  ExperimentSpec a = small_spec();
  a.name = "composition";
  a.construction = CompositionConfig{SquaredExponential{2.0, 0.5}, 3, true};
  specs.push_back(a);

  ExperimentSpec b = small_spec();
  b.name = "covfun";
  CovFunctionConfig cf;
  cf.base = GaussianCorrelation{};
  cf.F = ExpMap{};
  b.construction = cf;
  b.obs_layout = ObsLayout::Random;
  b.mcmc.sweep = SweepMode::Gibbs;
  b.mcmc.adapt = false;
  specs.push_back(b);

  ExperimentSpec c = small_spec();
  c.name = "covop";
  CovOperatorConfig co;
  co.F = ClampedExpMap{50.0, 25.0, 0.3, 150.0 * 150.0};
  co.alpha = 2;
  co.sigma = -1.0;
  co.base_gamma = 35.0;
  c.construction = co;
  c.dim = 2;
  c.truth = TruthKind::Trig2D;
  c.J = 9;
  c.allow_inverse_crime = true;
  c.generation_mesh = 15;  // equal meshes, explicitly allowed
  specs.push_back(c);

  ExperimentSpec d = small_spec();
  d.name = "convolution";
  ConvolutionConfig cv;
  cv.cov = make_brownian_bridge_fourier(8);
  d.construction = cv;
  d.truth = TruthKind::FromFile;
  d.truth_file = "/tmp/some_truth.csv";
  specs.push_back(d);

  for (const ExperimentSpec& spec : specs) {
    const std::string text = serialize_experiment_config(spec);
    const ExperimentSpec back = parse_experiment_config(text);
    CHECK(back == spec);
    // Canonical form: serialization is a fixed point.
    CHECK(serialize_experiment_config(back) == text);
  }

  CHECK_THROWS_AS(parse_experiment_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("{\"name\": \"x\"}"), ConfigError);
}

TEST_CASE("config digest: stable under equality, sensitive to every field") {
  const ExperimentSpec base = small_spec();
  CHECK(spec_hash(base) == spec_hash(small_spec()));

  std::vector<ExperimentSpec> variants;
  ExperimentSpec v = base;
  v.J = 6;
  variants.push_back(v);
  v = base;
  v.seed = 6;
  variants.push_back(v);
  v = base;
  v.noise_std = 0.051;
  variants.push_back(v);
  v = base;
  v.n_layers = 3;
  variants.push_back(v);
  v = base;
  v.sampling_mesh = 16;
  variants.push_back(v);
  v = base;
  v.mcmc.burn_in = 21;
  variants.push_back(v);
  v = base;
  std::get<CovFunctionConfig>(v.construction).F = ExpMap{};
  variants.push_back(v);
  for (const ExperimentSpec& w : variants) {
    CHECK(spec_hash(w) != spec_hash(base));
    CHECK_FALSE(w == base);
  }
}

TEST_CASE("spec validation: every invariant has a rejection") {
  CHECK_NOTHROW(validate(small_spec()));

  ExperimentSpec s = small_spec();
  s.dim = 3;
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.generation_mesh = 10;  // coarser than sampling
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.generation_mesh = s.sampling_mesh;
  try {
    validate(s);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "--allow-inverse-crime"));
  }
  s.allow_inverse_crime = true;
  CHECK_NOTHROW(validate(s));

  s = small_spec();
  s.J = 0;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s.J = 31;  // more observations than generation nodes
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.noise_std = -0.1;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s.noise_std = 0.0;  // noiseless generation is allowed
  CHECK_NOTHROW(validate(s));

  s = small_spec();
  s.n_layers = 0;
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.mcmc.samples = 0;
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.mcmc.burn_in = s.mcmc.samples;
  try {
    validate(s);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "empty chain"));
  }

  s = small_spec();
  s.mcmc.beta_init = 0.0;
  CHECK_THROWS_AS(validate(s), ConfigError);
  s.mcmc.beta_init = 1.5;
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.truth = TruthKind::Trig2D;  // dim is 1
  CHECK_THROWS_AS(validate(s), ConfigError);
  s.dim = 2;
  s.J = 4;
  CHECK_NOTHROW(validate(s));
  s.truth = TruthKind::Indicator1D;
  CHECK_THROWS_AS(validate(s), ConfigError);

  s = small_spec();
  s.truth = TruthKind::FromFile;
  s.truth_file.clear();
  CHECK_THROWS_AS(validate(s), ConfigError);
}

TEST_CASE("indicator truth: unit height on the middle interval") {
  ExperimentSpec spec = small_spec();
  const Grid g10 = Grid::make(1, 10);  // nodes 0.05, 0.15, ..., 0.95
  const Eigen::VectorXd v = evaluate_truth(spec, g10);
  REQUIRE(v.size() == 10);
  for (int i = 0; i < 10; ++i) {
    const double expected = (i >= 3 && i <= 6) ? 1.0 : 0.0;
    CHECK(v(i) == expected);
  }
}

TEST_CASE("trigonometric truth: literals and windowed-harmonic oracle") {
  ExperimentSpec spec = small_spec();
  spec.dim = 2;
  spec.truth = TruthKind::Trig2D;

  const Grid g2 = Grid::make(2, 2);  // nodes 0.25, 0.75 per axis
  const Eigen::VectorXd coarse = evaluate_truth(spec, g2);
  // All four nodes sit on the boundaries of the indicator windows, so only
  // the base product of cosines survives: cos(pi/2) = 0 in every factor.
  for (int i = 0; i < 4; ++i)
    CHECK(coarse(i) == doctest::Approx(0.0).epsilon(1e-12));

  const Grid g4 = Grid::make(2, 4);  // nodes 0.125, 0.375, 0.625, 0.875
  const Eigen::VectorXd fine = evaluate_truth(spec, g4);
  using std::numbers::pi;
  auto oracle = [&](double x, double y) {
    double v = std::cos(2 * pi * x) * std::cos(2 * pi * y);
    if (x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75)
      v += std::sin(4 * pi * x) * std::sin(4 * pi * y);
    if (x > 0.5 && x < 0.75 && y > 0.5 && y < 0.75)
      v += std::sin(8 * pi * x) * std::sin(8 * pi * y);
    if (x > 0.25 && x < 0.5 && y > 0.25 && y < 0.5)
      v += std::sin(16 * pi * x) * std::sin(16 * pi * y);
    return v;
  };
  for (Eigen::Index i = 0; i < 16; ++i) {
    const Eigen::Vector2d p = g4.point(i);
    CHECK(fine(i) == doctest::Approx(oracle(p.x(), p.y())).epsilon(1e-14));
  }
  // Node (0.375, 0.375): base cos pair gives 1/2, the first window adds
  // sin(3pi/2)^2 = 1, and the finest window lands on a zero of sin(16 pi x).
  const Eigen::Vector2d probe{0.375, 0.375};
  CHECK(fine(g4.nearest_node(probe)) == doctest::Approx(1.5).epsilon(1e-12));

  const Grid g3 = Grid::make(2, 3);
  const Eigen::VectorXd mid = evaluate_truth(spec, g3);
  CHECK(mid(1 * 3 + 1) == doctest::Approx(1.0).epsilon(1e-12));  // center node
}

TEST_CASE("file truth: generation-mesh identity and nearest-node restriction") {
  const std::string path = temp_file("dgp_truth_test.csv");
  const Grid gen = Grid::make(1, 15);
  Eigen::VectorXd coords(15), values(15);
  for (int i = 0; i < 15; ++i) {
    coords(i) = gen.axis_coord(i);
    values(i) = double(i) * double(i);
  }
  write_csv(path, {"x", "value"}, {coords, values});

  ExperimentSpec spec = small_spec();
  spec.truth = TruthKind::FromFile;
  spec.truth_file = path;
  spec.generation_mesh = 15;
  spec.sampling_mesh = 5;

  CHECK(evaluate_truth(spec, gen) == values);

  // Sampling node j at (j + 0.5)/5 coincides with generation node 3j + 1.
  const Eigen::VectorXd on_sampling = evaluate_truth(spec, spec.sampling_grid());
  REQUIRE(on_sampling.size() == 5);
  for (int j = 0; j < 5; ++j) CHECK(on_sampling(j) == values(3 * j + 1));

  // Wrong length: the file must match the generation mesh exactly.
  spec.generation_mesh = 12;
  CHECK_THROWS_AS(evaluate_truth(spec, spec.generation_grid()), ConfigError);
  spec.generation_mesh = 15;
  spec.truth_file = temp_file("dgp_truth_missing.csv");
  CHECK_THROWS_AS(evaluate_truth(spec, gen), ConfigError);

  fs::remove(path);
}

TEST_CASE("data generation: layouts, noiseless values, and determinism") {
  ExperimentSpec spec = small_spec();
  spec.J = 4;
  spec.noise_std = 0.0;
  RandomStream rng(3);
  const GeneratedData d = generate_data(spec, rng);
  REQUIRE(d.obs_points.rows() == 4);
  for (int j = 0; j < 4; ++j)
    CHECK(d.obs_points(j, 0) == (j + 0.5) / 4.0);
  CHECK(d.truth_generation.size() == 30);
  CHECK(d.truth_sampling.size() == 15);
  // Noiseless observations read the truth at the nearest generation node.
  const Grid gen = spec.generation_grid();
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector2d x{d.obs_points(j, 0), 0.0};
    CHECK(d.y(j) == d.truth_generation(gen.nearest_node(x)));
    CHECK(d.obs_nodes[std::size_t(j)] ==
          spec.sampling_grid().nearest_node(x));
  }

  // The observation points do not depend on the noise level.
  ExperimentSpec rnd = small_spec();
  rnd.obs_layout = ObsLayout::Random;
  rnd.J = 7;
  rnd.noise_std = 0.0;
  RandomStream r1(11);
  const GeneratedData quiet = generate_data(rnd, r1);
  rnd.noise_std = 0.3;
  RandomStream r2(11);
  const GeneratedData loud = generate_data(rnd, r2);
  CHECK(quiet.obs_points == loud.obs_points);
  CHECK(quiet.y != loud.y);
  for (int j = 0; j < 7; ++j) {
    CHECK(quiet.obs_points(j, 0) >= 0.0);
    CHECK(quiet.obs_points(j, 0) <= 1.0);
  }
  RandomStream r3(11);
  const GeneratedData again = generate_data(rnd, r3);
  CHECK(again.obs_points == loud.obs_points);
  CHECK(again.y == loud.y);
}

TEST_CASE("data generation: square layouts in two dimensions") {
  ExperimentSpec spec = small_spec();
  spec.dim = 2;
  spec.truth = TruthKind::Trig2D;
  spec.J = 9;
  RandomStream rng(13);
  const GeneratedData d = generate_data(spec, rng);
  REQUIRE(d.obs_points.rows() == 9);
  const double expect[3] = {1.0 / 6, 0.5, 5.0 / 6};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      CHECK(d.obs_points(a * 3 + b, 0) == doctest::Approx(expect[a]).epsilon(1e-15));
      CHECK(d.obs_points(a * 3 + b, 1) == doctest::Approx(expect[b]).epsilon(1e-15));
    }
  }

  spec.J = 10;
  RandomStream rng2(13);
  try {
    generate_data(spec, rng2);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "square"));
  }

  // Half-domain layouts compress the first coordinate into (0, 1/2).
  ExperimentSpec half = small_spec();
  half.obs_layout = ObsLayout::HalfDomain;
  half.J = 10;
  RandomStream rng3(17);
  const GeneratedData h1 = generate_data(half, rng3);
  for (int j = 0; j < 10; ++j) {
    CHECK(h1.obs_points(j, 0) == (j + 0.5) / 20.0);
    CHECK(h1.obs_points(j, 0) < 0.5);
  }
  half.dim = 2;
  half.truth = TruthKind::Trig2D;
  half.J = 4;
  RandomStream rng4(17);
  const GeneratedData h2 = generate_data(half, rng4);
  for (int j = 0; j < 4; ++j) CHECK(h2.obs_points(j, 0) < 0.5);
  CHECK(h2.obs_points(0, 0) == 0.125);
  CHECK(h2.obs_points(0, 1) == 0.25);
  CHECK(h2.obs_points(3, 0) == 0.375);
  CHECK(h2.obs_points(3, 1) == 0.75);
}

TEST_CASE("error norms: midpoint quadrature against closed forms") {
  const Grid g = Grid::make(1, 10);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(10);
  CHECK(compute_error(zero, zero, g, ErrorNorm::L1) == 0.0);
  CHECK(compute_error(zero, zero, g, ErrorNorm::L2) == 0.0);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(10);
  CHECK(compute_error(ones, zero, g, ErrorNorm::L1) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(compute_error(ones, zero, g, ErrorNorm::L2) ==
        doctest::Approx(1.0).epsilon(1e-12));

  const Grid fine = Grid::make(1, 1000);
  Eigen::VectorXd sq(1000);
  for (int i = 0; i < 1000; ++i) {
    const double x = fine.axis_coord(i);
    sq(i) = x * x;
  }
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(1000);
  CHECK(compute_error(sq, z, fine, ErrorNorm::L1) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(compute_error(sq, z, fine, ErrorNorm::L2) ==
        doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-6));

  const Grid g2 = Grid::make(2, 4);
  const Eigen::VectorXd two = Eigen::VectorXd::Constant(16, 2.0);
  CHECK(compute_error(two, Eigen::VectorXd::Zero(16), g2, ErrorNorm::L1) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(compute_error(two, Eigen::VectorXd::Zero(16), g2, ErrorNorm::L2) ==
        doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(compute_error(zero, Eigen::VectorXd::Zero(9), g, ErrorNorm::L1),
                  ConfigError);
}

TEST_CASE("report: scheduling-independent rows with derived seeds") {
  const ExperimentSpec base = small_spec();
  const std::vector<int> Js{3, 5};
  const std::vector<int> layers{1, 2};

  const ErrorReport serial = run_report(base, Js, layers, 1);
  REQUIRE(serial.rows.size() == 4);
  CHECK(serial.noise_std == base.noise_std);
  CHECK(serial.truth == base.truth);

  const RandomStream master(base.seed);
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      const ErrorRow& row = serial.rows[a * 2 + b];
      CHECK(row.J == Js[a]);
      CHECK(row.n_layers == layers[b]);
      CHECK(row.seed == master.derive(a * 2 + b).seed());
      CHECK(row.l1 > 0.0);
      CHECK(row.l2 > 0.0);
      if (row.n_layers == 1) CHECK(row.acceptance_rate == 1.0);
    }
  }

  const ErrorReport parallel = run_report(base, Js, layers, 4);
  REQUIRE(parallel.rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(parallel.rows[i].J == serial.rows[i].J);
    CHECK(parallel.rows[i].n_layers == serial.rows[i].n_layers);
    CHECK(parallel.rows[i].l1 == serial.rows[i].l1);
    CHECK(parallel.rows[i].l2 == serial.rows[i].l2);
    CHECK(parallel.rows[i].acceptance_rate == serial.rows[i].acceptance_rate);
    CHECK(parallel.rows[i].seed == serial.rows[i].seed);
  }

  CHECK_THROWS_AS(run_report(base, {}, layers, 1), ConfigError);
  CHECK_THROWS_AS(run_report(base, Js, {}, 1), ConfigError);
}

TEST_CASE("report table: layer columns, row labels, and missing cells") {
  ErrorReport report;
  report.noise_std = 0.02;
  report.truth = TruthKind::Indicator1D;
  report.rows.push_back({5, 1, 0.1234, 0.2345, 1.0, 1});
  report.rows.push_back({5, 2, 0.0567, 0.0678, 0.31, 2});
  report.rows.push_back({25, 1, 0.0890, 0.0901, 1.0, 3});

  const std::string l1 = format_report_table(report, ErrorNorm::L1);
  CHECK(contains(l1, "L1 error"));
  CHECK(contains(l1, "1 layer"));
  CHECK(contains(l1, "2 layers"));
  CHECK(contains(l1, "J = 5"));
  CHECK(contains(l1, "J = 25"));
  CHECK(contains(l1, "0.1234"));
  CHECK(contains(l1, "0.0567"));
  CHECK(contains(l1, "-"));  // the absent (J=25, 2 layers) cell

  const std::string l2 = format_report_table(report, ErrorNorm::L2);
  CHECK(contains(l2, "L2 error"));
  CHECK(contains(l2, "0.2345"));
  CHECK_FALSE(contains(l2, "0.1234"));
}

TEST_CASE("report merging and JSON round trip") {
  ErrorReport a;
  a.noise_std = 0.02;
  a.truth = TruthKind::Indicator1D;
  a.rows.push_back({5, 1, 0.1, 0.2, 1.0, 11});
  ErrorReport b = a;
  b.rows.clear();
  b.rows.push_back({10, 3, 0.3, 0.4, 0.27, 22});

  const ErrorReport merged = merge_reports({a, b});
  REQUIRE(merged.rows.size() == 2);
  CHECK(merged.rows[0].J == 5);
  CHECK(merged.rows[1].J == 10);

  ErrorReport clash = b;
  clash.noise_std = 0.09;
  try {
    merge_reports({a, clash});
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "refusing"));
  }
  ErrorReport other_truth = b;
  other_truth.truth = TruthKind::Trig2D;
  CHECK_THROWS_AS(merge_reports({a, other_truth}), ConfigError);
  CHECK_THROWS_AS(merge_reports({}), ConfigError);

  const ExperimentSpec base = small_spec();
  const std::string text = report_to_json(merged, base, spec_hash(base));
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("kind") == "error_report");
  CHECK(j.at("spec_digest").get<std::uint64_t>() == spec_hash(base));
  CHECK(j.at("seed").get<std::uint64_t>() == base.seed);
  CHECK(j.at("rows").size() == 2);

  const ErrorReport back = report_from_json(text);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.noise_std == merged.noise_std);
  CHECK(back.truth == merged.truth);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.rows[i].J == merged.rows[i].J);
    CHECK(back.rows[i].n_layers == merged.rows[i].n_layers);
    CHECK(back.rows[i].l1 == merged.rows[i].l1);
    CHECK(back.rows[i].l2 == merged.rows[i].l2);
    CHECK(back.rows[i].seed == merged.rows[i].seed);
  }

  CHECK_THROWS_AS(report_from_json("{ nope"), ConfigError);
  CHECK_THROWS_AS(report_from_json("{\"kind\": \"manifest\"}"), ConfigError);
}

TEST_CASE("summary and manifest artifacts carry the digest and seed") {
  ExperimentSpec spec = small_spec();
  spec.mcmc.samples = 30;
  spec.mcmc.burn_in = 10;
  RandomStream rng(spec.seed);
  const InferenceResult res = run_inference(spec, rng);

  const std::string text = summary_to_json(res.summary, spec);
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("kind") == "posterior_summary");
  CHECK(j.at("spec_digest").get<std::uint64_t>() == spec_hash(spec));
  CHECK(j.at("seed").get<std::uint64_t>() == spec.seed);
  CHECK(j.at("mean").size() == 15);
  CHECK(j.at("q05").size() == 15);
  CHECK(j.at("q50").size() == 15);
  CHECK(j.at("q95").size() == 15);
  CHECK(j.at("acceptance_rate").get<double>() == res.summary.acceptance_rate);
  CHECK(j.at("l1_error").get<double>() == res.summary.l1_error);
  CHECK(j.at("spec").at("J").get<int>() == spec.J);
  CHECK(j.at("beta_final").size() == 1);
  CHECK(j.at("mean_sqrt_f").size() == 1);

  const std::string mtext = manifest_to_json(spec, {"a.csv", "b.svg"});
  const nlohmann::json m = nlohmann::json::parse(mtext);
  CHECK(m.at("kind") == "manifest");
  CHECK(m.at("spec_digest").get<std::uint64_t>() == spec_hash(spec));
  CHECK(m.at("files").size() == 2);
  CHECK(m.at("files")[0] == "a.csv");
}

TEST_CASE("svg rendering: structure and input validation") {
  Eigen::VectorXd x(10);
  for (int i = 0; i < 10; ++i) x(i) = i / 9.0;
  Eigen::VectorXd s1 = x.array().sin();
  Eigen::VectorXd s2 = x.array().cos();
  const std::string plot =
      svg_line_plot("posterior bands", x, {s1, s2}, {"mean", "truth"});
  CHECK(plot.rfind("<svg", 0) == 0);
  CHECK(contains(plot, "polyline"));
  CHECK(contains(plot, "posterior bands"));
  CHECK(contains(plot, "mean"));
  CHECK(contains(plot, "truth"));
  CHECK(contains(plot, "</svg>"));

  CHECK_THROWS_AS(svg_line_plot("t", x, {}, {}), ConfigError);
  CHECK_THROWS_AS(svg_line_plot("t", x, {s1}, {"a", "b"}), ConfigError);
  CHECK_THROWS_AS(svg_line_plot("t", x, {s1.head(5)}, {"a"}), ConfigError);

  Eigen::VectorXd cells(9);
  for (int i = 0; i < 9; ++i) cells(i) = i;
  const std::string map = svg_heatmap("field", 3, cells);
  CHECK(map.rfind("<svg", 0) == 0);
  CHECK(contains(map, "field"));
  std::size_t rects = 0, pos = 0;
  while ((pos = map.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  CHECK(rects >= 9);
  CHECK_THROWS_AS(svg_heatmap("t", 3, cells.head(8)), ConfigError);
  CHECK_THROWS_AS(svg_heatmap("t", 0, cells), ConfigError);
}

TEST_CASE("csv io: exact round trip and shape errors") {
  const std::string path = temp_file("dgp_csv_test.csv");
  Eigen::VectorXd a(4), b(4);
  a << 0.1, 1.0 / 3.0, -7.0, 1e-300;
  b << 1.0, 0.0, 2.5, -0.125;
  write_csv(path, {"x", "value"}, {a, b});
  const CsvTable table = read_csv(path);
  REQUIRE(table.header.size() == 2);
  CHECK(table.header[0] == "x");
  CHECK(table.header[1] == "value");
  REQUIRE(table.columns.size() == 2);
  CHECK(table.columns[0] == a);  // %.17g keeps doubles bit-exact
  CHECK(table.columns[1] == b);

  CHECK(format_double(1.0) == "1");
  CHECK(std::strtod(format_double(0.1).c_str(), nullptr) == 0.1);
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);

  CHECK_THROWS_AS(write_csv(path, {"x"}, {a, b}), ConfigError);
  CHECK_THROWS_AS(write_csv(path, {"x", "y"}, {a, b.head(3)}), ConfigError);
  CHECK_THROWS_AS(read_csv(temp_file("dgp_csv_missing.csv")), ConfigError);

  write_text_file(path, "x,y\n1.0\n");
  CHECK_THROWS_AS(read_csv(path), ConfigError);
  write_text_file(path, "x,y\n1.0,2.0,3.0\n");
  CHECK_THROWS_AS(read_csv(path), ConfigError);
  write_text_file(path, "x,y\n1.0,oops\n");
  CHECK_THROWS_AS(read_csv(path), ConfigError);
  write_text_file(path, "");
  CHECK_THROWS_AS(read_csv(path), ConfigError);

  fs::remove(path);
}

TEST_CASE("checkpoint io: bit-exact round trip and corruption detection") {
  const std::string path = temp_file("dgp_ck_io_test.bin");

  ChainCheckpoint ck;
  ck.spec_digest = 0x1234567890abcdefULL;
  ck.seed = 42;
  ck.step = 1500;
  ck.xi = {Eigen::VectorXd::LinSpaced(5, -1.0, 1.0),
           Eigen::VectorXd::Constant(5, 0.25)};
  ck.beta = Eigen::VectorXd::Constant(2, 0.2);
  ck.proposals = 1500;
  ck.accepts = Eigen::VectorXd::Constant(2, 431.0);
  ck.post_accepts = 97;
  ck.rng_state = std::string("binary\0state\xff", 13);  // embedded NUL survives
  ck.retained = 500;
  ck.mean_accum = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
  ck.sqrt_f_accum = {Eigen::VectorXd::Constant(5, 3.5)};
  ck.reservoir_seen = {500, 500, 500, 500, 500};
  ck.reservoirs = {{0.1, 0.2, 0.3}, {}, {-1.0, 2.0}, {0.5}, {9.0}};
  ck.potential_trace = {10.0, 9.5, 9.25};
  ck.window_acceptance = {0.44, 0.3};
  ck.window_count = 17;
  ck.window_accepts = Eigen::VectorXd::Constant(2, 5.0);

  save_checkpoint(path, ck);
  const ChainCheckpoint back = load_checkpoint(path);
  CHECK(back.version == 1);
  CHECK(back.spec_digest == ck.spec_digest);
  CHECK(back.seed == ck.seed);
  CHECK(back.step == ck.step);
  REQUIRE(back.xi.size() == 2);
  CHECK(back.xi[0] == ck.xi[0]);
  CHECK(back.xi[1] == ck.xi[1]);
  CHECK(back.beta == ck.beta);
  CHECK(back.proposals == ck.proposals);
  CHECK(back.accepts == ck.accepts);
  CHECK(back.post_accepts == ck.post_accepts);
  CHECK(back.rng_state == ck.rng_state);
  CHECK(back.retained == ck.retained);
  CHECK(back.mean_accum == ck.mean_accum);
  REQUIRE(back.sqrt_f_accum.size() == 1);
  CHECK(back.sqrt_f_accum[0] == ck.sqrt_f_accum[0]);
  CHECK(back.reservoir_seen == ck.reservoir_seen);
  CHECK(back.reservoirs == ck.reservoirs);
  CHECK(back.potential_trace == ck.potential_trace);
  CHECK(back.window_acceptance == ck.window_acceptance);
  CHECK(back.window_count == ck.window_count);
  CHECK(back.window_accepts == ck.window_accepts);

  // Identical state serializes to identical bytes.
  const std::string path2 = temp_file("dgp_ck_io_test2.bin");
  save_checkpoint(path2, back);
  CHECK(read_text_file(path) == read_text_file(path2));

  const std::string full = read_text_file(path);
  write_text_file(path, full.substr(0, 20));
  try {
    load_checkpoint(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "truncated"));
  }

  std::string bad_magic = full;
  bad_magic[0] = 'X';
  write_text_file(path, bad_magic);
  try {
    load_checkpoint(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "not a chain checkpoint"));
  }

  std::string bad_version = full;
  bad_version[4] = 2;  // little-endian low byte of the version word
  write_text_file(path, bad_version);
  try {
    load_checkpoint(path);
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "unsupported checkpoint version"));
  }

  fs::remove(path);
  fs::remove(path2);
}

}  // TEST_SUITE
