#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "seqgeom/harness.hpp"

using namespace seqgeom;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> model;
  std::optional<int> m;
  std::optional<double> alpha;
  std::optional<double> r;
  std::vector<double> s_grid;
  std::vector<int> m_list;
  std::vector<double> K_list;
  std::optional<int> H1;
  std::optional<std::int64_t> N;
  std::optional<double> K;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> epsilon;
  std::optional<std::int64_t> n_max;
  std::string out;
  bool print = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON config file overlaid on the defaults");
  sub->add_option("--model", o.model, "vMF or hyperboloid");
  sub->add_option("--m", o.m, "Dimension of the curved family");
  sub->add_option("--alpha", o.alpha, "Test level");
  sub->add_option("--r", o.r, "Concentration");
  sub->add_option("--s-grid", o.s_grid, "Alternative distances")->delimiter(',');
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--workers", o.workers, "Worker threads (results do not depend on it)");
  sub->add_option("--out", o.out, "Output CSV path");
  sub->add_flag("--print", o.print, "Also write the CSV to stdout");
}

void add_simulation(CLI::App* sub, Overrides& o) {
  sub->add_option("--H1", o.H1, "Alternative directions per distance");
  sub->add_option("--N", o.N, "Sample size of the fixed-size tests");
  sub->add_option("--K", o.K, "Scale of the stopping rule");
  sub->add_option("--reps", o.reps, "Replications per alternative");
}

ExperimentConfig build(const std::string& experiment, const Overrides& o) {
  Model model = Model::VonMisesFisher;
  nlohmann::json file;
  if (!o.config.empty()) {
    std::ifstream is(o.config);
    if (!is) throw std::runtime_error("cannot open config " + o.config);
    file = nlohmann::json::parse(is);
    if (file.contains("model")) model = model_from_string(file["model"].get<std::string>());
    if (file.contains("experiment") && file["experiment"].get<std::string>() != experiment) {
      throw std::invalid_argument("config experiment does not match the subcommand");
    }
  }
  if (o.model) model = model_from_string(*o.model);
  auto c = ExperimentConfig::reference_defaults(experiment, model);
  if (!file.is_null()) c.merge_json(file);
  c.model = model;
  if (o.m) c.m = *o.m;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.r) c.r = *o.r;
  if (!o.s_grid.empty()) c.s_grid = o.s_grid;
  if (!o.m_list.empty()) c.m_list = o.m_list;
  if (!o.K_list.empty()) c.K_list = o.K_list;
  if (o.H1) c.H1 = *o.H1;
  if (o.N) c.N = *o.N;
  if (o.K) c.K = *o.K;
  if (o.reps) c.reps = *o.reps;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.epsilon) c.epsilon_tilde = *o.epsilon;
  if (o.n_max) c.n_max = *o.n_max;
  if (!o.out.empty()) c.out = o.out;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power tables and Monte Carlo experiments for curved exponential families"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);
  Overrides o;

  auto* coeffs = app.add_subcommand("coeffs", "Power coefficients and optimal angles over s");
  add_common(coeffs, o);
  coeffs->add_option("--m-list", o.m_list, "Dimensions to tabulate")->delimiter(',');

  auto* losses = app.add_subcommand("losscurves", "Second-order power loss of the k-tests");
  add_common(losses, o);

  auto* nonseq = app.add_subcommand("nonseq-sim", "Fixed sample size power simulation");
  add_common(nonseq, o);
  add_simulation(nonseq, o);

  auto* seq = app.add_subcommand("seq-sim", "Sequential power simulation");
  add_common(seq, o);
  add_simulation(seq, o);
  seq->add_option("--epsilon", o.epsilon, "Level offset of the conformal test");
  seq->add_option("--n-max", o.n_max, "Truncation of the stopping rule (0: automatic)");

  auto* cal = app.add_subcommand("calibrate", "Null calibration of the level offset");
  add_common(cal, o);
  add_simulation(cal, o);
  cal->add_option("--K-list", o.K_list, "Scales to calibrate")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string experiment = app.get_subcommands().front()->get_name();
    const ExperimentConfig c = build(experiment, o);
    const CsvTable table = run_experiment(c);
    const std::string path = resolve_output_path(c);
    write_outputs(c, table, path);
    if (o.print) std::cout << table.str();
    std::cerr << "wrote " << path << " (config " << c.hash() << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
