#include "dgp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <future>
#include <numbers>
#include <semaphore>
#include <sstream>
#include <thread>
#include <variant>

#include "json.hpp"

#include "dgp/errors.hpp"
#include "dgp/inference.hpp"
#include "dgp/io.hpp"

namespace dgp {

namespace {

using nlohmann::json;

// --------------------------------------------------------------------------
// JSON encoding of the construction configurations.

json kernel_to_json(const IsotropicKernel& k) {
  if (const auto* se = std::get_if<SquaredExponential>(&k)) {
    return {{"type", "squared_exponential"},
            {"sigma2", se->sigma2},
            {"w2", se->w2}};
  }
  return {{"type", "gaussian_correlation"}};
}

IsotropicKernel kernel_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "squared_exponential") {
    return SquaredExponential{j.at("sigma2").get<double>(),
                              j.at("w2").get<double>()};
  }
  if (type == "gaussian_correlation") return GaussianCorrelation{};
  throw ConfigError("unknown kernel type: " + type);
}

json map_to_json(const LengthScaleMap& F) {
  if (std::holds_alternative<SquareMap>(F)) return {{"type", "square"}};
  if (std::holds_alternative<ExpMap>(F)) return {{"type", "exp"}};
  const auto& c = std::get<ClampedExpMap>(F);
  return {{"type", "clamped_exp"},
          {"f_minus", c.f_minus},
          {"a", c.a},
          {"b", c.b},
          {"f_plus", c.f_plus}};
}

LengthScaleMap map_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "square") return SquareMap{};
  if (type == "exp") return ExpMap{};
  if (type == "clamped_exp") {
    return ClampedExpMap{j.at("f_minus").get<double>(), j.at("a").get<double>(),
                         j.at("b").get<double>(), j.at("f_plus").get<double>()};
  }
  throw ConfigError("unknown length-scale map type: " + type);
}

json spectrum_to_json(const SpectralCovariance& cov) {
  json j;
  switch (cov.basis) {
    case SpectralBasis::PeriodicFourier:
      j["basis"] = "periodic_fourier";
      break;
    case SpectralBasis::SineDirichlet:
      j["basis"] = "sine_dirichlet";
      break;
    case SpectralBasis::CosineNeumann:
      j["basis"] = "cosine_neumann";
      break;
  }
  j["lambda2"] = std::vector<double>(cov.lambda2.data(),
                                     cov.lambda2.data() + cov.lambda2.size());
  return j;
}

SpectralCovariance spectrum_from_json(const json& j) {
  SpectralCovariance cov;
  const std::string basis = j.at("basis").get<std::string>();
  if (basis == "periodic_fourier") {
    cov.basis = SpectralBasis::PeriodicFourier;
  } else if (basis == "sine_dirichlet") {
    cov.basis = SpectralBasis::SineDirichlet;
  } else if (basis == "cosine_neumann") {
    cov.basis = SpectralBasis::CosineNeumann;
  } else {
    throw ConfigError("unknown spectral basis: " + basis);
  }
  const auto values = j.at("lambda2").get<std::vector<double>>();
  cov.lambda2 = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  return cov;
}

json construction_to_json(const ConstructionVariant& v) {
  if (const auto* c = std::get_if<CompositionConfig>(&v)) {
    return {{"type", "composition"},
            {"kernel", kernel_to_json(c->h)},
            {"m", c->m},
            {"connect_input", c->connect_input}};
  }
  if (const auto* c = std::get_if<CovFunctionConfig>(&v)) {
    return {{"type", "cov_function"},
            {"base", kernel_to_json(c->base)},
            {"length_scale_map", map_to_json(c->F)}};
  }
  if (const auto* c = std::get_if<CovOperatorConfig>(&v)) {
    return {{"type", "cov_operator"},
            {"length_scale_map", map_to_json(c->F)},
            {"alpha", c->alpha},
            {"sigma", c->sigma},
            {"base_gamma", c->base_gamma}};
  }
  const auto& c = std::get<ConvolutionConfig>(v);
  return {{"type", "convolution"}, {"spectrum", spectrum_to_json(c.cov)}};
}

ConstructionVariant construction_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "composition") {
    CompositionConfig c;
    c.h = kernel_from_json(j.at("kernel"));
    c.m = j.at("m").get<int>();
    c.connect_input = j.at("connect_input").get<bool>();
    return c;
  }
  if (type == "cov_function") {
    CovFunctionConfig c;
    c.base = kernel_from_json(j.at("base"));
    c.F = map_from_json(j.at("length_scale_map"));
    return c;
  }
  if (type == "cov_operator") {
    CovOperatorConfig c;
    c.F = map_from_json(j.at("length_scale_map"));
    c.alpha = j.at("alpha").get<int>();
    c.sigma = j.at("sigma").get<double>();
    c.base_gamma = j.at("base_gamma").get<double>();
    return c;
  }
  if (type == "convolution") {
    ConvolutionConfig c;
    c.cov = spectrum_from_json(j.at("spectrum"));
    return c;
  }
  throw ConfigError("unknown construction type: " + type);
}

json truth_to_json(const ExperimentSpec& spec) {
  if (spec.truth == TruthKind::FromFile) {
    return {{"type", "from_file"}, {"path", spec.truth_file}};
  }
  return {{"type", truth_name(spec.truth)}};
}

const char* layout_name(ObsLayout layout) {
  switch (layout) {
    case ObsLayout::Uniform: return "uniform";
    case ObsLayout::Random: return "random";
    case ObsLayout::HalfDomain: return "half_domain";
  }
  throw ConfigError("unknown observation layout");
}

ObsLayout layout_from_name(const std::string& name) {
  if (name == "uniform") return ObsLayout::Uniform;
  if (name == "random") return ObsLayout::Random;
  if (name == "half_domain") return ObsLayout::HalfDomain;
  throw ConfigError("unknown observation layout: " + name);
}

}  // namespace

const char* truth_name(TruthKind truth) {
  switch (truth) {
    case TruthKind::Indicator1D: return "indicator_1d";
    case TruthKind::Trig2D: return "trig_2d";
    case TruthKind::FromFile: return "from_file";
  }
  throw ConfigError("unknown truth kind");
}

TruthKind truth_from_name(const std::string& name) {
  if (name == "indicator_1d") return TruthKind::Indicator1D;
  if (name == "trig_2d") return TruthKind::Trig2D;
  if (name == "from_file") return TruthKind::FromFile;
  throw ConfigError("unknown truth type: " + name);
}

// --------------------------------------------------------------------------
// Serialization.

std::string serialize_experiment_config(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["construction"] = construction_to_json(spec.construction);
  j["dim"] = spec.dim;
  j["truth"] = truth_to_json(spec);
  j["generation_mesh"] = spec.generation_mesh;
  j["sampling_mesh"] = spec.sampling_mesh;
  j["J"] = spec.J;
  j["obs_layout"] = layout_name(spec.obs_layout);
  j["noise_std"] = spec.noise_std;
  j["n_layers"] = spec.n_layers;
  j["mcmc"] = {{"samples", spec.mcmc.samples},
               {"burn_in", spec.mcmc.burn_in},
               {"beta_init", spec.mcmc.beta_init},
               {"adapt", spec.mcmc.adapt},
               {"sweep", spec.mcmc.sweep == SweepMode::Joint ? "joint"
                                                             : "gibbs"}};
  j["seed"] = spec.seed;
  j["allow_inverse_crime"] = spec.allow_inverse_crime;
  return j.dump(2) + "\n";
}

ExperimentSpec parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    ExperimentSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.construction = construction_from_json(j.at("construction"));
    spec.dim = j.at("dim").get<int>();
    const json& t = j.at("truth");
    spec.truth = truth_from_name(t.at("type").get<std::string>());
    if (spec.truth == TruthKind::FromFile) {
      spec.truth_file = t.at("path").get<std::string>();
    }
    spec.generation_mesh = j.at("generation_mesh").get<int>();
    spec.sampling_mesh = j.at("sampling_mesh").get<int>();
    spec.J = j.at("J").get<int>();
    spec.obs_layout = layout_from_name(j.at("obs_layout").get<std::string>());
    spec.noise_std = j.at("noise_std").get<double>();
    spec.n_layers = j.at("n_layers").get<int>();
    const json& m = j.at("mcmc");
    spec.mcmc.samples = m.at("samples").get<long>();
    spec.mcmc.burn_in = m.at("burn_in").get<long>();
    spec.mcmc.beta_init = m.at("beta_init").get<double>();
    spec.mcmc.adapt = m.at("adapt").get<bool>();
    const std::string sweep = m.at("sweep").get<std::string>();
    if (sweep == "joint") {
      spec.mcmc.sweep = SweepMode::Joint;
    } else if (sweep == "gibbs") {
      spec.mcmc.sweep = SweepMode::Gibbs;
    } else {
      throw ConfigError("unknown sweep mode: " + sweep);
    }
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.allow_inverse_crime = j.at("allow_inverse_crime").get<bool>();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

bool ExperimentSpec::operator==(const ExperimentSpec& other) const {
  return serialize_experiment_config(*this) ==
         serialize_experiment_config(other);
}

std::uint64_t spec_hash(const ExperimentSpec& spec) {
  const std::string text = serialize_experiment_config(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a, 64-bit
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --------------------------------------------------------------------------
// Validation.

void validate(const ExperimentSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) {
    throw ConfigError("dim must be 1 or 2");
  }
  if (spec.sampling_mesh < 2 || spec.generation_mesh < 2) {
    throw ConfigError("meshes need at least 2 nodes per side");
  }
  if (spec.generation_mesh < spec.sampling_mesh) {
    throw ConfigError("generation mesh must be at least as fine as sampling");
  }
  if (spec.generation_mesh == spec.sampling_mesh &&
      !spec.allow_inverse_crime) {
    throw ConfigError(
        "equal generation and sampling meshes commit an inverse crime; pass "
        "--allow-inverse-crime to proceed");
  }
  if (spec.J < 1) throw ConfigError("J must be at least 1");
  const Eigen::Index gen_nodes = spec.generation_grid().size();
  if (spec.J > gen_nodes) {
    throw ConfigError("J exceeds the generation-mesh node count");
  }
  if (spec.noise_std < 0.0) throw ConfigError("noise_std must be >= 0");
  if (spec.n_layers < 1) throw ConfigError("n_layers must be at least 1");
  if (spec.mcmc.samples < 1) throw ConfigError("samples must be positive");
  if (spec.mcmc.burn_in < 0 || spec.mcmc.burn_in >= spec.mcmc.samples) {
    throw ConfigError("burn_in must lie in [0, samples): empty chain");
  }
  if (!(spec.mcmc.beta_init > 0.0 && spec.mcmc.beta_init <= 1.0)) {
    throw ConfigError("beta_init must lie in (0, 1]");
  }
  if (spec.truth == TruthKind::Indicator1D && spec.dim != 1) {
    throw ConfigError("the indicator truth is one-dimensional");
  }
  if (spec.truth == TruthKind::Trig2D && spec.dim != 2) {
    throw ConfigError("the trigonometric truth is two-dimensional");
  }
  if (spec.truth == TruthKind::FromFile && spec.truth_file.empty()) {
    throw ConfigError("truth from_file needs a path");
  }
}

// --------------------------------------------------------------------------
// Truths and data generation.

namespace {

double indicator_1d(double x) { return (x > 0.3 && x < 0.7) ? 1.0 : 0.0; }

double trig_2d(double x, double y) {
  using std::numbers::pi;
  const bool mid = x > 0.25 && x < 0.75 && y > 0.25 && y < 0.75;
  const bool upper = x > 0.5 && x < 0.75 && y > 0.5 && y < 0.75;
  const bool lower = x > 0.25 && x < 0.5 && y > 0.25 && y < 0.5;
  double v = std::cos(2 * pi * x) * std::cos(2 * pi * y);
  if (mid) v += std::sin(4 * pi * x) * std::sin(4 * pi * y);
  if (upper) v += std::sin(8 * pi * x) * std::sin(8 * pi * y);
  if (lower) v += std::sin(16 * pi * x) * std::sin(16 * pi * y);
  return v;
}

Eigen::VectorXd truth_from_file(const std::string& path, const Grid& grid) {
  CsvTable table = read_csv(path);
  if (table.columns.empty()) throw ConfigError("truth file has no columns");
  const Eigen::VectorXd& v = table.columns.back();  // last column = values
  if (v.size() != grid.size()) {
    throw ConfigError("truth file length does not match the generation mesh");
  }
  return v;
}

}  // namespace

Eigen::VectorXd evaluate_truth(const ExperimentSpec& spec, const Grid& grid) {
  Eigen::VectorXd out(grid.size());
  switch (spec.truth) {
    case TruthKind::Indicator1D:
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        out[i] = indicator_1d(grid.point(i)[0]);
      }
      return out;
    case TruthKind::Trig2D:
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const Eigen::Vector2d p = grid.point(i);
        out[i] = trig_2d(p[0], p[1]);
      }
      return out;
    case TruthKind::FromFile: {
      const Grid gen = spec.generation_grid();
      const Eigen::VectorXd file_values = truth_from_file(spec.truth_file, gen);
      if (grid == gen) return file_values;
      for (Eigen::Index i = 0; i < grid.size(); ++i) {
        out[i] = file_values[gen.nearest_node(grid.point(i))];
      }
      return out;
    }
  }
  throw ConfigError("unknown truth kind");
}

namespace {

Eigen::MatrixXd observation_points(const ExperimentSpec& spec,
                                   RandomStream& rng) {
  Eigen::MatrixXd pts(spec.J, spec.dim);
  switch (spec.obs_layout) {
    case ObsLayout::Uniform: {
      if (spec.dim == 1) {
        for (int j = 0; j < spec.J; ++j) pts(j, 0) = (j + 0.5) / spec.J;
        return pts;
      }
      const int s = static_cast<int>(std::lround(std::sqrt(double(spec.J))));
      if (s * s != spec.J) {
        throw ConfigError("2-d uniform layout needs a square J");
      }
      for (int a = 0; a < s; ++a) {
        for (int b = 0; b < s; ++b) {
          pts(a * s + b, 0) = (a + 0.5) / s;
          pts(a * s + b, 1) = (b + 0.5) / s;
        }
      }
      return pts;
    }
    case ObsLayout::Random: {
      for (int j = 0; j < spec.J; ++j) {
        for (int d = 0; d < spec.dim; ++d) pts(j, d) = rng.uniform();
      }
      return pts;
    }
    case ObsLayout::HalfDomain: {
      // Uniform layout compressed into the left half x < 1/2.
      if (spec.dim == 1) {
        for (int j = 0; j < spec.J; ++j) pts(j, 0) = (j + 0.5) / (2.0 * spec.J);
        return pts;
      }
      const int s = static_cast<int>(std::lround(std::sqrt(double(spec.J))));
      if (s * s != spec.J) {
        throw ConfigError("2-d half-domain layout needs a square J");
      }
      for (int a = 0; a < s; ++a) {
        for (int b = 0; b < s; ++b) {
          pts(a * s + b, 0) = (a + 0.5) / (2.0 * s);
          pts(a * s + b, 1) = (b + 0.5) / s;
        }
      }
      return pts;
    }
  }
  throw ConfigError("unknown observation layout");
}

}  // namespace

GeneratedData generate_data(const ExperimentSpec& spec, RandomStream& rng) {
  validate(spec);
  const Grid gen = spec.generation_grid();
  const Grid samp = spec.sampling_grid();

  GeneratedData out;
  out.truth_generation = evaluate_truth(spec, gen);
  out.truth_sampling = evaluate_truth(spec, samp);
  out.obs_points = observation_points(spec, rng);

  out.obs_nodes.resize(static_cast<std::size_t>(spec.J));
  Eigen::VectorXd values(spec.J);
  for (int j = 0; j < spec.J; ++j) {
    Eigen::Vector2d x{out.obs_points(j, 0),
                      spec.dim == 2 ? out.obs_points(j, 1) : 0.0};
    values[j] = out.truth_generation[gen.nearest_node(x)];
    out.obs_nodes[static_cast<std::size_t>(j)] = samp.nearest_node(x);
  }
  out.y = values + spec.noise_std * rng.gaussian_vector(spec.J);
  return out;
}

double compute_error(const Eigen::VectorXd& mean, const Eigen::VectorXd& truth,
                     const Grid& grid, ErrorNorm norm) {
  if (mean.size() != grid.size() || truth.size() != grid.size()) {
    throw ConfigError("field lengths do not match the grid");
  }
  const double vol = grid.cell_volume();
  const Eigen::ArrayXd diff = (mean - truth).array();
  if (norm == ErrorNorm::L1) return (diff.abs() * vol).sum();
  return std::sqrt((diff.square() * vol).sum());
}

// --------------------------------------------------------------------------
// Report.

ErrorReport run_report(const ExperimentSpec& base, const std::vector<int>& Js,
                       const std::vector<int>& layer_counts, int jobs) {
  if (Js.empty() || layer_counts.empty()) {
    throw ConfigError("report needs at least one J and one layer count");
  }
  if (jobs < 1) {
    jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
  }

  struct Cell {
    ExperimentSpec spec;
  };
  std::vector<Cell> cells;
  const RandomStream master(base.seed);
  for (std::size_t a = 0; a < Js.size(); ++a) {
    for (std::size_t b = 0; b < layer_counts.size(); ++b) {
      ExperimentSpec spec = base;
      spec.J = Js[a];
      spec.n_layers = layer_counts[b];
      const std::uint64_t index = a * layer_counts.size() + b;
      spec.seed = master.derive(index).seed();
      spec.name = base.name + "_J" + std::to_string(spec.J) + "_N" +
                  std::to_string(spec.n_layers);
      validate(spec);
      cells.push_back({std::move(spec)});
    }
  }

  std::counting_semaphore<> slots(jobs);
  std::vector<std::future<ErrorRow>> futures;
  futures.reserve(cells.size());
  for (const Cell& cell : cells) {
    futures.push_back(std::async(std::launch::async, [&slots, &cell]() {
      slots.acquire();
      try {
        RandomStream rng(cell.spec.seed);
        InferenceResult res = run_inference(cell.spec, rng);
        ErrorRow row;
        row.J = cell.spec.J;
        row.n_layers = cell.spec.n_layers;
        row.l1 = res.summary.l1_error;
        row.l2 = res.summary.l2_error;
        row.acceptance_rate = res.summary.acceptance_rate;
        row.seed = cell.spec.seed;
        slots.release();
        return row;
      } catch (...) {
        slots.release();
        throw;
      }
    }));
  }

  ErrorReport report;
  report.noise_std = base.noise_std;
  report.truth = base.truth;
  for (auto& f : futures) report.rows.push_back(f.get());
  return report;
}

std::string format_report_table(const ErrorReport& report, ErrorNorm norm) {
  std::vector<int> Js, layers;
  for (const ErrorRow& r : report.rows) {
    if (std::find(Js.begin(), Js.end(), r.J) == Js.end()) Js.push_back(r.J);
    if (std::find(layers.begin(), layers.end(), r.n_layers) == layers.end()) {
      layers.push_back(r.n_layers);
    }
  }
  std::sort(Js.begin(), Js.end());
  std::sort(layers.begin(), layers.end());

  std::ostringstream os;
  os << (norm == ErrorNorm::L1 ? "L1 error" : "L2 error");
  for (int l : layers) os << "\t" << l << (l == 1 ? " layer" : " layers");
  os << "\n";
  for (int J : Js) {
    os << "J = " << J;
    for (int l : layers) {
      const ErrorRow* found = nullptr;
      for (const ErrorRow& r : report.rows) {
        if (r.J == J && r.n_layers == l) {
          found = &r;
          break;
        }
      }
      os << "\t";
      if (found == nullptr) {
        os << "-";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f",
                      norm == ErrorNorm::L1 ? found->l1 : found->l2);
        os << buf;
      }
    }
    os << "\n";
  }
  return os.str();
}

ErrorReport merge_reports(const std::vector<ErrorReport>& parts) {
  if (parts.empty()) throw ConfigError("nothing to merge");
  ErrorReport merged = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].noise_std != merged.noise_std ||
        parts[i].truth != merged.truth) {
      throw ConfigError(
          "refusing to merge report rows with mismatched noise or truth");
    }
    merged.rows.insert(merged.rows.end(), parts[i].rows.begin(),
                       parts[i].rows.end());
  }
  return merged;
}

}  // namespace dgp
