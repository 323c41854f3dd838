#include "seqgeom/harness.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "seqgeom/parallel.hpp"
#include "seqgeom/power_theory.hpp"
#include "seqgeom/sampling.hpp"

#ifndef SEQGEOM_VERSION
#define SEQGEOM_VERSION "0.0.0"
#endif

namespace seqgeom {
namespace {

using nlohmann::json;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  return y;
}

std::string format_int(std::int64_t x) { return std::to_string(x); }

// Paired difference of two Bernoulli indicators observed on the same trials.
void paired_difference(std::int64_t n10, std::int64_t n01, std::int64_t n, double& mean,
                       double& se) {
  if (n < 2) {
    mean = 0.0;
    se = 0.0;
    return;
  }
  const double dn = static_cast<double>(n);
  mean = static_cast<double>(n10 - n01) / dn;
  const double var = (static_cast<double>(n10 + n01) - dn * mean * mean) / (dn - 1.0);
  se = std::sqrt(std::max(0.0, var) / dn);
}

void set_power(ReportRow& row) {
  const std::int64_t used = row.trials - row.failures;
  row.power = used > 0 ? static_cast<double>(row.rejections) / used : 0.0;
  row.se = used > 0 ? std::sqrt(row.power * (1.0 - row.power) / used) : 0.0;
}

std::int64_t trial_index(std::size_t si, int j, int rep, int H1, int reps) {
  return (static_cast<std::int64_t>(si) * H1 + j) * reps + rep;
}

std::string gnuplot_script(const ExperimentConfig& cfg, const std::string& csv) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n";
  gp << "set xlabel 's'\n";
  gp << "set key outside right\n";
  gp << "file = '" << csv << "'\n";
  auto series = [&](const std::string& keycol, const std::vector<std::string>& keys,
                    const std::string& ycol) {
    gp << "plot ";
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i) gp << ", \\\n     ";
      gp << "file using (strcol('" << keycol << "') eq '" << keys[i] << "' ? column('s') : NaN):'"
         << ycol << "' with linespoints title '" << keys[i] << "'";
    }
    gp << "\n";
  };
  if (cfg.experiment == "coeffs") {
    std::vector<std::string> ms;
    for (int m : cfg.m_list) ms.push_back(std::to_string(m));
    for (const char* col : {"xi0", "xi1", "xi2", "K1", "K2"}) {
      gp << "set ylabel '" << col << "'\npause -1\n";
      series("m", ms, col);
    }
  } else if (cfg.experiment == "losscurves") {
    for (const char* col : {"dP1", "dP2"}) {
      gp << "set ylabel '" << col << "'\n";
      series("test", {"MLT", "LRT", "EST"}, col);
      gp << "pause -1\n";
    }
  } else if (cfg.experiment == "nonseq-sim") {
    gp << "set ylabel 'power'\n";
    series("test", {"MLT", "Wald", "LRT", "EST", "OPT"}, "power");
    gp << "pause -1\nset ylabel 'loss'\n";
    series("test", {"MLT", "Wald", "LRT", "EST"}, "diff");
    gp << "pause -1\n";
  } else if (cfg.experiment == "seq-sim") {
    gp << "set ylabel 'power'\n";
    series("test", {"CMLT", "OMLT", "OLRT", "OEST"}, "power");
    gp << "pause -1\nset ylabel 'DP'\n";
    series("test", {"OMLT", "OLRT", "OEST"}, "diff");
    gp << "pause -1\n";
  } else {
    gp << "set xlabel 'K'\nset ylabel 'epsilon'\n";
    gp << "plot file using 'K':'epsilon':'se' with yerrorbars title 'epsilon'\npause -1\n";
  }
  return gp.str();
}

}  // namespace

std::string library_version() { return SEQGEOM_VERSION; }

std::vector<double> default_s_grid() {
  std::vector<double> s(20);
  for (int i = 0; i < 20; ++i) s[i] = 5.0 * i / 19.0;
  return s;
}

ExperimentConfig ExperimentConfig::reference_defaults(const std::string& experiment, Model model) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.model = model;
  c.m = 2;
  c.alpha = 0.05;
  c.s_grid = default_s_grid();
  c.m_list = {2, 3, 4, 5};
  const double half_pi = 0.5 * std::numbers::pi;
  if (model == Model::VonMisesFisher) {
    c.u0 = {half_pi, half_pi};
  } else {
    c.u0 = {1.0, half_pi};
  }
  if (experiment == "nonseq-sim") {
    if (model == Model::VonMisesFisher) {
      c.r = 0.1;
      c.N = 2000;
      c.H1 = 1000;
    } else {
      c.r = 2.0;
      c.N = 50;
      c.H1 = 5000;
    }
  } else if (experiment == "seq-sim" || experiment == "calibrate") {
    if (model == Model::VonMisesFisher) {
      c.r = 0.2;
      c.N = 1000;
      c.H1 = 500;
      c.K = 1000.0;
    } else {
      c.r = 2.0;
      c.N = 50;
      c.H1 = 500;
      c.K = 60.0;
    }
    if (experiment == "calibrate") c.reps = 10000;
  } else {
    c.r = model == Model::VonMisesFisher ? 0.1 : 2.0;
  }
  return c;
}

void ExperimentConfig::merge_json(const json& j) {
  static const std::set<std::string> known = {
      "experiment", "model", "m",   "alpha",  "r",       "u0",     "s_grid",
      "H1",         "N",     "K",   "reps",   "seed",    "workers", "out",
      "m_list",     "K_list", "n_min", "n_max", "epsilon_tilde"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw std::invalid_argument("unknown config key '" + it.key() + "'");
  }
  if (j.contains("experiment")) experiment = j["experiment"].get<std::string>();
  if (j.contains("model")) model = model_from_string(j["model"].get<std::string>());
  if (j.contains("m")) m = j["m"].get<int>();
  if (j.contains("alpha")) alpha = j["alpha"].get<double>();
  if (j.contains("r")) r = j["r"].get<double>();
  if (j.contains("u0")) u0 = j["u0"].get<std::vector<double>>();
  if (j.contains("s_grid")) s_grid = j["s_grid"].get<std::vector<double>>();
  if (j.contains("H1")) H1 = j["H1"].get<int>();
  if (j.contains("N")) N = j["N"].get<std::int64_t>();
  if (j.contains("K")) K = j["K"].get<double>();
  if (j.contains("reps")) reps = j["reps"].get<int>();
  if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) workers = j["workers"].get<int>();
  if (j.contains("out")) out = j["out"].get<std::string>();
  if (j.contains("m_list")) m_list = j["m_list"].get<std::vector<int>>();
  if (j.contains("K_list")) K_list = j["K_list"].get<std::vector<double>>();
  if (j.contains("n_min")) n_min = j["n_min"].get<std::int64_t>();
  if (j.contains("n_max")) n_max = j["n_max"].get<std::int64_t>();
  if (j.contains("epsilon_tilde")) epsilon_tilde = j["epsilon_tilde"].get<double>();
}

json ExperimentConfig::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["model"] = to_string(model);
  j["m"] = m;
  j["alpha"] = alpha;
  j["r"] = r;
  j["u0"] = u0;
  j["s_grid"] = s_grid;
  j["H1"] = H1;
  j["N"] = N;
  j["K"] = K;
  j["reps"] = reps;
  j["seed"] = seed;
  j["workers"] = workers;
  j["out"] = out;
  j["m_list"] = m_list;
  j["K_list"] = K_list;
  j["n_min"] = n_min;
  j["n_max"] = n_max;
  j["epsilon_tilde"] = epsilon_tilde;
  return j;
}

std::string ExperimentConfig::canonical() const {
  json j = to_json();
  j.erase("workers");
  j.erase("out");
  return j.dump();  // nlohmann::json objects keep keys sorted
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> experiments = {"coeffs", "losscurves", "nonseq-sim",
                                                    "seq-sim", "calibrate"};
  if (!experiments.count(experiment)) {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  if (m < 2) throw std::invalid_argument("config: m must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("config: alpha must be in (0,1)");
  if (!(r > 0.0)) throw std::invalid_argument("config: r must be positive");
  if (s_grid.empty()) throw std::invalid_argument("config: s_grid is empty");
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    if (!(s_grid[i] >= 0.0)) throw std::invalid_argument("config: s_grid must be nonnegative");
    if (i > 0 && !(s_grid[i] > s_grid[i - 1])) {
      throw std::invalid_argument("config: s_grid must be ascending");
    }
  }
  if (H1 < 1) throw std::invalid_argument("config: H1 must be >= 1");
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (N < 1) throw std::invalid_argument("config: N must be >= 1");
  if (!(K > 0.0)) throw std::invalid_argument("config: K must be positive");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  const bool sim = experiment == "nonseq-sim" || experiment == "seq-sim" || experiment == "calibrate";
  if (sim) {
    if (m != 2) throw std::invalid_argument("config: simulations support m = 2 only");
    if (static_cast<int>(u0.size()) != m) throw std::invalid_argument("config: u0 has wrong size");
  }
  if (experiment == "coeffs" && m_list.empty()) throw std::invalid_argument("config: m_list empty");
}

CurvedFamily ExperimentConfig::family() const { return CurvedFamily::make(model, m, r); }

Vec ExperimentConfig::u0_vec() const {
  Vec u(static_cast<int>(u0.size()));
  for (std::size_t i = 0; i < u0.size(); ++i) u[static_cast<int>(i)] = u0[i];
  return u;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

Vec canonical_coords(const CurvedFamily& fam, const Vec& u) {
  Vec v = u;
  const int last = fam.m - 1;
  if (fam.model == Model::VonMisesFisher) {
    v[0] = wrap_2pi(v[0]);
    if (v[0] > std::numbers::pi) {
      v[0] = kTwoPi - v[0];
      v[last] += std::numbers::pi;
    }
  } else if (v[0] < 0.0) {
    v[0] = -v[0];
    v[last] += std::numbers::pi;
  }
  v[last] = wrap_2pi(v[last]);
  return v;
}

std::vector<Vec> alternative_directions(const CurvedFamily& fam, const Vec& u0, int H1) {
  if (fam.m != 2) throw std::invalid_argument("alternatives: m = 2 only");
  if (H1 < 1) throw std::invalid_argument("alternatives: H1 must be >= 1");
  const Mat g = metric(fam, u0);
  const Eigen::LLT<Mat> llt(g);
  const Mat Lt = llt.matrixU();  // g = L L^T, U = L^T
  std::vector<Vec> dirs;
  dirs.reserve(H1);
  for (int j = 0; j < H1; ++j) {
    const double ang = kTwoPi * j / H1;
    Vec z(2);
    z << std::cos(ang), std::sin(ang);
    dirs.push_back(Lt.triangularView<Eigen::Upper>().solve(z));
  }
  return dirs;
}

std::vector<Vec> alternatives(const CurvedFamily& fam, const Vec& u0, double s, int H1,
                              double scale) {
  if (!(s >= 0.0)) throw std::invalid_argument("alternatives: s must be >= 0");
  if (!(scale > 0.0)) throw std::invalid_argument("alternatives: scale must be positive");
  std::vector<Vec> out;
  out.reserve(H1);
  const double step = s / std::sqrt(scale);
  for (const Vec& e : alternative_directions(fam, u0, H1)) {
    const Vec u = canonical_coords(fam, u0 + step * e);
    try {
      check_regular(fam, u, false);
    } catch (const SingularCoordinateError& err) {
      throw ChartError(std::string("alternative leaves the coordinate chart: ") + err.what());
    }
    out.push_back(u);
  }
  return out;
}

CsvTable run_coefficient_tables(const ExperimentConfig& cfg) {
  CsvTable t;
  t.header = {"m",  "s",  "xi0", "xi1", "xi2prime", "xi2",  "xi3",  "xi4",
              "J1", "J2", "K1",  "K2",  "limit",    "seed", "config_hash"};
  const std::string hash = cfg.hash();
  for (int m : cfg.m_list) {
    const PowerContext ctx = PowerContext::make(m, cfg.alpha);
    const std::vector<double>& grid = cfg.s_grid;
    std::vector<PowerCoefficients> coef(grid.size());
    parallel_for(static_cast<std::int64_t>(grid.size()), cfg.workers,
                 [&](std::int64_t i) { coef[i] = coefficients(ctx, grid[i]); });
    for (const auto& c : coef) {
      t.rows.push_back({std::to_string(m), format_number(c.s), format_number(c.xi0),
                        format_number(c.xi1), format_number(c.xi2prime), format_number(c.xi2),
                        format_number(c.xi3), format_number(c.xi4), format_number(c.J1),
                        format_number(c.J2), format_number(c.K1), format_number(c.K2),
                        c.limit ? "1" : "0", std::to_string(cfg.seed), hash});
    }
  }
  return t;
}

CsvTable run_typical_losses(const ExperimentConfig& cfg) {
  CsvTable t;
  t.header = {"test", "s", "k1", "k2", "K1", "K2", "dP1", "dP2", "xi0", "seed", "config_hash"};
  const std::string hash = cfg.hash();
  const PowerContext ctx = PowerContext::make(cfg.m, cfg.alpha);
  std::vector<PowerCoefficients> coef(cfg.s_grid.size());
  parallel_for(static_cast<std::int64_t>(coef.size()), cfg.workers,
               [&](std::int64_t i) { coef[i] = coefficients(ctx, cfg.s_grid[i]); });
  const std::pair<const char*, double> tests[] = {{"MLT", 0.0}, {"LRT", 0.5}, {"EST", 1.0}};
  for (const auto& [name, k] : tests) {
    for (const auto& c : coef) {
      const DeltaP dp = delta_p(c, k, k);
      t.rows.push_back({name, format_number(c.s), format_number(k), format_number(k),
                        format_number(c.K1), format_number(c.K2), format_number(dp.dp1),
                        format_number(dp.dp2), format_number(c.xi0), std::to_string(cfg.seed),
                        hash});
    }
  }
  return t;
}

const ReportRow& SimulationReport::find(double s, const std::string& test) const {
  for (const auto& r : rows) {
    if (r.test == test && std::fabs(r.s - s) < 1e-12) return r;
  }
  throw std::out_of_range("SimulationReport: no row for " + test);
}

CsvTable SimulationReport::to_csv() const {
  CsvTable t;
  t.header = {"experiment", "model",   "s",        "test",      "trials",   "rejections",
              "failures",   "power",   "se",       "diff",      "diff_se",  "mean_tau",
              "var_tau",    "truncated", "seed",   "config_hash"};
  const std::string hash = config.hash();
  for (const auto& r : rows) {
    t.rows.push_back({config.experiment, to_string(config.model), format_number(r.s), r.test,
                      format_int(r.trials), format_int(r.rejections), format_int(r.failures),
                      format_number(r.power), format_number(r.se),
                      r.has_diff ? format_number(r.diff) : "",
                      r.has_diff ? format_number(r.diff_se) : "",
                      r.has_tau ? format_number(r.mean_tau) : "",
                      r.has_tau ? format_number(r.var_tau) : "",
                      r.has_tau ? format_int(r.truncated) : "", std::to_string(config.seed),
                      hash});
  }
  return t;
}

SimulationReport run_nonseq_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const CurvedFamily fam = cfg.family();
  const Vec u0 = cfg.u0_vec();
  const PowerContext ctx = PowerContext::make(fam.m, cfg.alpha);
  const double gamma2 = geometry(fam, u0).scalars.gamma2;
  const char* names[] = {"MLT", "Wald", "LRT", "EST", "OPT"};
  constexpr int kTests = 5;

  SimulationReport report;
  report.config = cfg;
  const std::int64_t per_s = static_cast<std::int64_t>(cfg.H1) * cfg.reps;
  for (std::size_t si = 0; si < cfg.s_grid.size(); ++si) {
    const double s = cfg.s_grid[si];
    const PowerCoefficients coef = coefficients(ctx, s);
    TestDesign designs[kTests] = {
        TestDesign::make(Variant::MLT, cfg.alpha, u0),
        TestDesign::make(Variant::Wald, cfg.alpha, u0),
        TestDesign::make(Variant::LRT, cfg.alpha, u0),
        TestDesign::make(Variant::EST, cfg.alpha, u0),
        TestDesign::make(Variant::DesignedK, cfg.alpha, u0, coef.K1, coef.K2)};
    const std::vector<Vec> alts = alternatives(fam, u0, s, cfg.H1, static_cast<double>(cfg.N));
    std::vector<std::uint8_t> mask(per_s);  // bit t: test t rejects; bit 7: MLE failure
    parallel_for(per_s, cfg.workers, [&](std::int64_t idx) {
      const int j = static_cast<int>(idx / cfg.reps);
      const int rep = static_cast<int>(idx % cfg.reps);
      RngStream stream(cfg.seed, trial_index(si, j, rep, cfg.H1, cfg.reps));
      const Sampler sampler(fam, alts[j]);
      SuffStats st = SuffStats::zero(fam.n());
      double x[3];
      for (std::int64_t n = 0; n < cfg.N; ++n) {
        sampler.draw(stream, x);
        st.add(x);
      }
      std::uint8_t bits = 0;
      try {
        for (int t = 0; t < kTests; ++t) {
          if (nonseq_statistic(fam, designs[t], st).reject) bits |= (1u << t);
        }
      } catch (const DegenerateMleError&) {
        bits = 0x80;
      }
      mask[idx] = bits;
    });

    ReportRow rows[kTests];
    std::int64_t n10[kTests] = {}, n01[kTests] = {};
    for (int t = 0; t < kTests; ++t) {
      rows[t].s = s;
      rows[t].test = names[t];
      rows[t].trials = per_s;
    }
    std::int64_t used = 0;
    for (std::int64_t i = 0; i < per_s; ++i) {
      const std::uint8_t b = mask[i];
      if (b & 0x80) {
        for (auto& r : rows) ++r.failures;
        continue;
      }
      ++used;
      const bool opt = b & (1u << 4);
      for (int t = 0; t < kTests; ++t) {
        const bool rej = b & (1u << t);
        if (rej) ++rows[t].rejections;
        if (opt && !rej) ++n10[t];
        if (!opt && rej) ++n01[t];
      }
    }
    for (int t = 0; t < kTests; ++t) {
      set_power(rows[t]);
      double mean = 0.0, se = 0.0;
      paired_difference(n10[t], n01[t], used, mean, se);
      const double scale = static_cast<double>(cfg.N) / gamma2;
      rows[t].diff = scale * mean;
      rows[t].diff_se = scale * se;
      rows[t].has_diff = true;
      report.rows.push_back(rows[t]);
    }
  }
  return report;
}

SimulationReport run_seq_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const CurvedFamily fam = cfg.family();
  const Vec u0 = cfg.u0_vec();
  const double nu0 = gauge_nu(fam, u0);
  const double scale = cfg.K * nu0;
  const double c = bias_c(fam, u0);
  const TestDesign seq_design = TestDesign::make(Variant::MLT, cfg.alpha, u0);
  const char* names[] = {"OMLT", "OLRT", "OEST"};
  const TestDesign designs[3] = {TestDesign::make(Variant::MLT, cfg.alpha, u0),
                                 TestDesign::make(Variant::LRT, cfg.alpha, u0),
                                 TestDesign::make(Variant::EST, cfg.alpha, u0)};
  StoppingConfig stop;
  stop.K = cfg.K;
  stop.n_min = cfg.n_min;
  stop.n_max = cfg.n_max;
  stop.epsilon_tilde = cfg.epsilon_tilde;
  stop.validate();

  struct Trial {
    std::int64_t tau = 0;
    bool truncated = false;
    bool seq_fail = false;
    bool seq_reject = false;
    bool fixed_fail = false;
    std::uint8_t fixed_mask = 0;
  };

  SimulationReport report;
  report.config = cfg;
  const std::int64_t per_s = static_cast<std::int64_t>(cfg.H1) * cfg.reps;
  for (std::size_t si = 0; si < cfg.s_grid.size(); ++si) {
    const double s = cfg.s_grid[si];
    const std::vector<Vec> alts = alternatives(fam, u0, s, cfg.H1, scale);
    std::vector<Trial> trials(per_s);
    parallel_for(per_s, cfg.workers, [&](std::int64_t idx) {
      const int j = static_cast<int>(idx / cfg.reps);
      const int rep = static_cast<int>(idx % cfg.reps);
      RngStream stream(cfg.seed, trial_index(si, j, rep, cfg.H1, cfg.reps));
      const Sampler sampler(fam, alts[j]);
      const std::int64_t n_max =
          stop.n_max > 0 ? stop.n_max : default_n_max(fam, stop.K, u0, alts[j]);
      SuffStats st = SuffStats::zero(fam.n());
      SuffStats at_tau;
      SuffStats at_N;
      bool stopped = false;
      double x[3];
      // One shared draw sequence: the fixed-size tests see its first N points.
      while (!(stopped || st.count >= n_max) || st.count < cfg.N) {
        sampler.draw(stream, x);
        st.add(x);
        if (st.count == cfg.N) at_N = st;
        if (!stopped && st.count <= n_max) {
          if (st.count >= stop.n_min && stopping_check(fam, stop.K, c, st).stop()) {
            stopped = true;
            at_tau = st;
          } else if (st.count == n_max) {
            at_tau = st;
          }
        }
      }
      Trial& t = trials[idx];
      t.tau = at_tau.count;
      t.truncated = !stopped;
      try {
        t.seq_reject = sequential_decision(fam, seq_design, stop, at_tau).reject;
      } catch (const DegenerateMleError&) {
        t.seq_fail = true;
      }
      try {
        for (int k = 0; k < 3; ++k) {
          if (nonseq_statistic(fam, designs[k], at_N).reject) t.fixed_mask |= (1u << k);
        }
      } catch (const DegenerateMleError&) {
        t.fixed_fail = true;
      }
    });

    ReportRow seq;
    seq.s = s;
    seq.test = "CMLT";
    seq.trials = per_s;
    seq.has_tau = true;
    double sum_tau = 0.0, sum_tau2 = 0.0;
    for (const Trial& t : trials) {
      sum_tau += static_cast<double>(t.tau);
      sum_tau2 += static_cast<double>(t.tau) * static_cast<double>(t.tau);
      if (t.truncated) ++seq.truncated;
      if (t.seq_fail) {
        ++seq.failures;
      } else if (t.seq_reject) {
        ++seq.rejections;
      }
    }
    const double n = static_cast<double>(per_s);
    seq.mean_tau = sum_tau / n;
    seq.var_tau = n > 1 ? (sum_tau2 - n * seq.mean_tau * seq.mean_tau) / (n - 1.0) : 0.0;
    set_power(seq);
    if (static_cast<double>(seq.truncated) > 0.01 * n) report.valid = false;
    report.rows.push_back(seq);

    for (int k = 0; k < 3; ++k) {
      ReportRow row;
      row.s = s;
      row.test = names[k];
      row.trials = per_s;
      std::int64_t n10 = 0, n01 = 0, both = 0;
      for (const Trial& t : trials) {
        if (t.fixed_fail) {
          ++row.failures;
          continue;
        }
        const bool rej = t.fixed_mask & (1u << k);
        if (rej) ++row.rejections;
        if (t.seq_fail) continue;
        ++both;
        if (t.seq_reject && !rej) ++n10;
        if (!t.seq_reject && rej) ++n01;
      }
      set_power(row);
      paired_difference(n10, n01, both, row.diff, row.diff_se);
      row.has_diff = true;
      report.rows.push_back(row);
    }
  }
  return report;
}

CsvTable run_calibration(const ExperimentConfig& cfg) {
  cfg.validate();
  const CurvedFamily fam = cfg.family();
  const Vec u0 = cfg.u0_vec();
  const TestDesign design = TestDesign::make(Variant::MLT, cfg.alpha, u0);
  CsvTable t;
  t.header = {"K",         "epsilon",   "se",   "level_uncalibrated", "replications",
              "truncated", "insufficient", "seed", "config_hash"};
  const std::string hash = cfg.hash();
  std::vector<double> Ks = cfg.K_list.empty() ? std::vector<double>{cfg.K} : cfg.K_list;
  for (std::size_t i = 0; i < Ks.size(); ++i) {
    StoppingConfig stop;
    stop.K = Ks[i];
    stop.n_min = cfg.n_min;
    stop.n_max = cfg.n_max;
    // Distinct stream family per K so the estimates are independent.
    const RngStream stream(cfg.seed + 0x9E3779B97F4A7C15ull * i, 0);
    const EpsilonEstimate e = calibrate_epsilon(fam, design, stop, cfg.reps, stream, cfg.workers);
    t.rows.push_back({format_number(Ks[i]), format_number(e.epsilon),
                      format_number(e.standard_error), format_number(e.level_uncalibrated),
                      format_int(e.replications), format_int(e.truncated),
                      e.insufficient ? "1" : "0", std::to_string(cfg.seed), hash});
  }
  return t;
}

CsvTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == "coeffs") return run_coefficient_tables(cfg);
  if (cfg.experiment == "losscurves") return run_typical_losses(cfg);
  if (cfg.experiment == "nonseq-sim") return run_nonseq_experiment(cfg).to_csv();
  if (cfg.experiment == "seq-sim") return run_seq_experiment(cfg).to_csv();
  return run_calibration(cfg);
}

std::string resolve_output_path(const ExperimentConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  const char* dir = std::getenv("SEQGEOM_OUTPUT_DIR");
  std::string base = (dir && *dir) ? dir : ".";
  if (base.back() != '/') base += '/';
  return base + cfg.experiment + "_" + to_string(cfg.model) + ".csv";
}

void write_outputs(const ExperimentConfig& cfg, const CsvTable& table, const std::string& path) {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << table.str();
  }
  json meta;
  meta["config"] = cfg.to_json();
  meta["config_hash"] = cfg.hash();
  meta["schema_version"] = kCsvSchemaVersion;
  meta["library_version"] = library_version();
  meta["columns"] = table.header;
  meta["rows"] = table.rows.size();
  {
    std::ofstream os(path + ".meta.json", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path + ".meta.json");
    os << meta.dump(2) << '\n';
  }
  std::string stem = path;
  if (stem.size() > 4 && stem.compare(stem.size() - 4, 4, ".csv") == 0) stem.resize(stem.size() - 4);
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  std::ofstream gp(stem + ".gp", std::ios::binary);
  if (!gp) throw std::runtime_error("cannot write " + stem + ".gp");
  gp << gnuplot_script(cfg, name);
}

}  // namespace seqgeom
