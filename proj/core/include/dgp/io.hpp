#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dgp/inference.hpp"

namespace dgp {

// ---------------------------------------------------------------------------
// Plain text / CSV. Numeric output uses %.17g so identical values serialize
// to identical bytes.

std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Rectangular table with a header row. Throws ConfigError on ragged columns.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<Eigen::VectorXd> columns;
};
CsvTable read_csv(const std::string& path);

// ---------------------------------------------------------------------------
// JSON artifacts. Every artifact embeds the spec digest and seed.

std::string summary_to_json(const PosteriorSummary& summary,
                            const ExperimentSpec& spec);
std::string report_to_json(const ErrorReport& report,
                           const ExperimentSpec& base, std::uint64_t digest);
ErrorReport report_from_json(const std::string& json_text);

// Manifest for a set of emitted files (used by the prior-sampling command).
std::string manifest_to_json(const ExperimentSpec& spec,
                             const std::vector<std::string>& files);

// ---------------------------------------------------------------------------
// Minimal self-contained SVG rendering.

// Line plot of one or more series over shared x coordinates.
std::string svg_line_plot(const std::string& title, const Eigen::VectorXd& x,
                          const std::vector<Eigen::VectorXd>& series,
                          const std::vector<std::string>& names);

// Heat map of values on an n x n grid (row-major, row = x index).
std::string svg_heatmap(const std::string& title, int n,
                        const Eigen::VectorXd& values);

// ---------------------------------------------------------------------------
// Binary chain checkpoints ("DGPK" format, version 1). Little-endian, raw
// IEEE-754 doubles; identical state serializes to identical bytes.

struct ChainCheckpoint {
  std::uint32_t version = 1;
  std::uint64_t spec_digest = 0;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;  // completed pCN steps
  std::vector<Eigen::VectorXd> xi;
  Eigen::VectorXd beta;
  std::uint64_t proposals = 0;
  Eigen::VectorXd accepts;
  std::uint64_t post_accepts = 0;  // accepted moves after burn-in
  std::string rng_state;
  std::uint64_t retained = 0;
  Eigen::VectorXd mean_accum;
  std::vector<Eigen::VectorXd> sqrt_f_accum;
  std::vector<std::uint64_t> reservoir_seen;
  std::vector<std::vector<double>> reservoirs;
  std::vector<double> potential_trace;
  std::vector<double> window_acceptance;
  std::uint64_t window_count = 0;
  Eigen::VectorXd window_accepts;
};

void save_checkpoint(const std::string& path, const ChainCheckpoint& ckpt);
ChainCheckpoint load_checkpoint(const std::string& path);

}  // namespace dgp
