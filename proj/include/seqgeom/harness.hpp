#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqgeom/inference.hpp"
#include "seqgeom/manifold.hpp"

namespace seqgeom {

inline constexpr const char* kCsvSchemaVersion = "1";

struct ExperimentConfig {
  std::string experiment = "coeffs";  // coeffs | losscurves | nonseq-sim | seq-sim | calibrate
  Model model = Model::VonMisesFisher;
  int m = 2;
  double alpha = 0.05;
  double r = 0.1;
  std::vector<double> u0;
  std::vector<double> s_grid;
  int H1 = 1000;
  std::int64_t N = 2000;
  double K = 1000.0;
  int reps = 1;
  std::uint64_t seed = 20240601;
  int workers = 1;
  std::string out;
  std::vector<int> m_list;        // coeffs only
  std::vector<double> K_list;     // calibrate only; empty means {K}
  std::int64_t n_min = 5;
  std::int64_t n_max = 0;         // 0: 10 K nu_max
  double epsilon_tilde = 0.0;

  /// Settings used in the reference experiments for the given experiment and model.
  static ExperimentConfig reference_defaults(const std::string& experiment, Model model);

  /// Overlays keys present in j onto this config; unknown keys are an error.
  void merge_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Canonical JSON of every field that affects results (workers and out excluded).
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
  void validate() const;

  CurvedFamily family() const;
  Vec u0_vec() const;
};

/// 20 equally spaced points on [0, 5].
std::vector<double> default_s_grid();

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string str() const;
};

std::string format_number(double x);

/**
 * H1 alternatives u0 + s e_j / sqrt(scale), e_j at angles 2 pi j / H1 in a g(u0)-orthonormal
 * frame (m = 2). Points are mapped to the canonical chart; an alternative within the
 * singularity margin raises ChartError.
 */
std::vector<Vec> alternatives(const CurvedFamily& fam, const Vec& u0, double s, int H1,
                              double scale);
/// The unit directions e_j themselves.
std::vector<Vec> alternative_directions(const CurvedFamily& fam, const Vec& u0, int H1);
/// Maps an arbitrary coordinate vector to the canonical ranges of the chart.
Vec canonical_coords(const CurvedFamily& fam, const Vec& u);

struct ReportRow {
  double s = 0.0;
  std::string test;
  std::int64_t trials = 0;
  std::int64_t rejections = 0;
  std::int64_t failures = 0;  // degenerate MLE, excluded from the power denominator
  double power = 0.0;
  double se = 0.0;
  double diff = 0.0;  // loss or DP against the reference test
  double diff_se = 0.0;
  bool has_diff = false;
  double mean_tau = 0.0;
  double var_tau = 0.0;
  std::int64_t truncated = 0;
  bool has_tau = false;
};

struct SimulationReport {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  bool valid = true;  // false when a sequential truncation fraction exceeds 1%
  CsvTable to_csv() const;
  const ReportRow& find(double s, const std::string& test) const;
};

CsvTable run_coefficient_tables(const ExperimentConfig& cfg);
CsvTable run_typical_losses(const ExperimentConfig& cfg);
SimulationReport run_nonseq_experiment(const ExperimentConfig& cfg);
SimulationReport run_seq_experiment(const ExperimentConfig& cfg);
CsvTable run_calibration(const ExperimentConfig& cfg);

/// Dispatch on cfg.experiment.
CsvTable run_experiment(const ExperimentConfig& cfg);

/// Output path: cfg.out, else $SEQGEOM_OUTPUT_DIR (or .) / <experiment>_<model>.csv.
std::string resolve_output_path(const ExperimentConfig& cfg);

/// Writes the CSV plus <path>.meta.json and a gnuplot script <path minus .csv>.gp.
void write_outputs(const ExperimentConfig& cfg, const CsvTable& table, const std::string& path);

std::string library_version();

}  // namespace seqgeom
