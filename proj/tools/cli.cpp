#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "bbmflow/dynamics.hpp"
#include "bbmflow/ensemble_file.hpp"
#include "bbmflow/random_fields.hpp"
#include "bbmflow/transport.hpp"
#include "bbmflow/verification.hpp"
#include "json.hpp"

namespace bbmflow::cli {

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file_atomic(path, text);
}

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::string measure = "gaussian-l2";
  int modes = 32;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  std::vector<double> v;
  std::string out;
};

void add_sample(CLI::App& app, SampleArgs& a) {
  app.add_option("--measure", a.measure, "gaussian-l2 | gaussian-perturbed")
      ->check(CLI::IsMember({"gaussian-l2", "gaussian_l2", "gaussian-perturbed", "gaussian_perturbed"}));
  app.add_option("--modes", a.modes, "Highest Fourier mode N")->required()->check(CLI::NonNegativeNumber);
  app.add_option("--count", a.count, "Number of samples")->required()->check(CLI::PositiveNumber);
  app.add_option("--seed", a.seed, "Base seed")->required();
  app.add_option("--v", a.v, "Multiplier V: one scalar or modes+1 values");
  app.add_option("--out", a.out, "Ensemble file")->required();
}

int run_sample(const SampleArgs& a) {
  const MeasureKind kind = measure_kind_from_string(a.measure);
  if (kind == MeasureKind::gaussian_l2 && !a.v.empty()) throw UsageError("--v only applies to gaussian-perturbed");
  if (kind != MeasureKind::gaussian_l2 && a.v.empty()) throw UsageError("gaussian-perturbed needs --v");
  MeasureSpec spec;
  try {
    if (kind == MeasureKind::gaussian_l2)
      spec = MeasureSpec::gaussian_l2(a.modes);
    else
      spec = a.v.size() == 1 ? MeasureSpec::gaussian_perturbed(a.modes, a.v.front())
                             : MeasureSpec::gaussian_perturbed(a.modes, a.v);
    spec.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  write_ensemble(sample_gaussian(spec, a.seed, a.count), a.out);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct EvolveArgs {
  std::string in, out;
  double t = 0.0;
  double dt = 1e-3;
  int trunc = -1;
  bool linear_only = false;
};

void add_evolve(CLI::App& app, EvolveArgs& a) {
  app.add_option("--in", a.in, "Input ensemble")->required();
  app.add_option("--t", a.t, "Signed flow time")->required();
  app.add_option("--dt", a.dt, "RK4 step")->check(CLI::PositiveNumber);
  app.add_option("--trunc", a.trunc, "Galerkin cutoff N (default: file modes)");
  app.add_flag("--linear-only", a.linear_only, "Drop the quadratic term");
  app.add_option("--out", a.out, "Output ensemble")->required();
}

int run_evolve(const EvolveArgs& a) {
  const EnsembleHeader h = read_ensemble_header(a.in);
  const int trunc = a.trunc < 0 ? h.modes : a.trunc;
  if (trunc > h.modes)
    throw InputError("--trunc " + std::to_string(trunc) + " exceeds file modes " + std::to_string(h.modes));
  const EvolveParams params{a.dt, trunc, a.linear_only};
  write_ensemble(pushforward(read_ensemble(a.in), a.t, params), a.out);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct DistanceArgs {
  std::string a, b, out;
  double s = 0.0;
  double p = 2.0;
  std::string method = "exact";
  double epsilon = 0.0;
  double tol = 1e-6;
};

void add_distance(CLI::App& app, DistanceArgs& a) {
  app.add_option("--a", a.a, "First ensemble")->required();
  app.add_option("--b", a.b, "Second ensemble")->required();
  app.add_option("--s", a.s, "Sobolev index of the ground cost");
  app.add_option("--p", a.p, "Wasserstein exponent")->check(CLI::Range(1.0, 1e6));
  app.add_option("--method", a.method, "exact | sinkhorn | sync | brute")
      ->check(CLI::IsMember({"exact", "sinkhorn", "sync", "brute"}));
  app.add_option("--epsilon", a.epsilon, "Entropic scale (default 0.01 x median cost)");
  app.add_option("--tol", a.tol, "Sinkhorn marginal tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", a.out, "Report file (default stdout)");
}

int run_distance(const DistanceArgs& a, std::ostream& out) {
  const EnsembleHeader ha = read_ensemble_header(a.a);
  const EnsembleHeader hb = read_ensemble_header(a.b);
  if (ha.modes != hb.modes || ha.count != hb.count)
    throw InputError("ensembles are incompatible: modes " + std::to_string(ha.modes) + "/" +
                     std::to_string(hb.modes) + ", count " + std::to_string(ha.count) + "/" +
                     std::to_string(hb.count));
  if (a.method == "brute" && ha.count > 8) throw UsageError("--method brute needs count <= 8");

  const Ensemble ea = read_ensemble(a.a);
  const Ensemble eb = read_ensemble(a.b);
  const SobolevIndex s(a.s);
  json j{{"schema", 1}, {"method", a.method}, {"s_prime", a.s}, {"p", a.p},
         {"count", ha.count}, {"modes", ha.modes}, {"time_a", ha.time}, {"time_b", hb.time}};
  if (a.method == "sync") {
    const auto r = synchronized_bound(ea, eb, s, a.p);
    j["value"] = r.value;
  } else {
    const CostMatrix c = cost_matrix(ea, eb, s, a.p);
    if (a.method == "brute") {
      j["value"] = brute_force_ot(c);
    } else if (a.method == "exact") {
      const auto r = exact_ot(c);
      j["value"] = r.value;
      j["permutation"] = std::get<Permutation>(r.coupling).target;
    } else {
      double eps = a.epsilon > 0.0 ? a.epsilon : 0.01 * median_cost(c);
      if (!(eps > 0.0)) eps = 1e-12;
      const auto r = sinkhorn_ot(c, eps, a.tol);
      j["value"] = r.value;
      j["epsilon"] = eps;
      j["iterations"] = r.iterations;
      j["marginal_error"] = r.marginal_error;
    }
  }
  emit(a.out, j.dump(2) + "\n", out);
  return kSuccess;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string scenario;
  std::optional<double> s, sigma, p, p1, p2, t, dt, alpha, forced_C;
  std::optional<int> modes;
  std::optional<std::size_t> count, holdout, aux_count;
  std::optional<std::uint64_t> seed, seed2;
  std::vector<double> t_grid, v_grid, epsilons;
  bool compare_dt = false;
  bool no_anchors = false;
  std::string out, format = "json";
};

void add_verify(CLI::App& app, VerifyArgs& a) {
  app.add_option("scenario", a.scenario, "growth | difference | continuity | stability | invariance | moments")
      ->required()
      ->check(CLI::IsMember({"growth", "difference", "continuity", "stability", "invariance", "moments"}));
  app.add_option("--s", a.s);
  app.add_option("--sigma", a.sigma);
  app.add_option("--p", a.p);
  app.add_option("--p1", a.p1);
  app.add_option("--p2", a.p2);
  app.add_option("--t", a.t);
  app.add_option("--t-grid", a.t_grid);
  app.add_option("--modes", a.modes);
  app.add_option("--count", a.count);
  app.add_option("--holdout", a.holdout);
  app.add_option("--aux-count", a.aux_count);
  app.add_option("--seed", a.seed);
  app.add_option("--seed2", a.seed2);
  app.add_option("--dt", a.dt);
  app.add_option("--v-grid", a.v_grid);
  app.add_option("--epsilons", a.epsilons);
  app.add_option("--alpha", a.alpha);
  app.add_option("--forced-C", a.forced_C, "Skip calibration and use this C");
  app.add_flag("--no-anchors", a.no_anchors, "Calibrate on Gaussian training data only");
  app.add_flag("--compare-dt", a.compare_dt, "Invariance: rerun at 2 dt");
  app.add_option("--out", a.out, "Report file (default stdout)");
  app.add_option("--format", a.format)->check(CLI::IsMember({"json", "csv"}));
}

VerifyConfig resolve(const VerifyArgs& a) {
  VerifyConfig c = VerifyConfig::defaults(scenario_from_string(a.scenario));
  auto set = [](auto& field, const auto& opt) {
    if (opt) field = *opt;
  };
  set(c.s, a.s);
  set(c.sigma, a.sigma);
  set(c.p, a.p);
  set(c.p1, a.p1);
  set(c.p2, a.p2);
  set(c.t, a.t);
  set(c.dt, a.dt);
  set(c.alpha, a.alpha);
  set(c.modes, a.modes);
  set(c.count, a.count);
  set(c.holdout, a.holdout);
  set(c.aux_count, a.aux_count);
  set(c.seed, a.seed);
  set(c.seed2, a.seed2);
  if (a.t) c.t_grid.clear();
  if (!a.t_grid.empty()) c.t_grid = a.t_grid;
  if (!a.v_grid.empty()) c.v_grid = a.v_grid;
  if (!a.epsilons.empty()) c.epsilons = a.epsilons;
  c.forced_C = a.forced_C;
  c.compare_dt = a.compare_dt;
  c.anchors = !a.no_anchors;
  try {
    c.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  return c;
}

int run_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  const VerifyReport report = run_scenario(resolve(a));
  emit(a.out, a.format == "csv" ? report_to_csv(report) : report_to_json(report), out);
  err << "verify " << a.scenario << ": " << (report.pass ? "pass" : "fail") << "\n";
  return report.pass ? kSuccess : kVerifyFailed;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::string in, out, format = "csv";
};

void add_report(CLI::App& app, ReportArgs& a) {
  app.add_option("--in", a.in, "Report JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--format", a.format)->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--out", a.out, "Output file (default stdout)");
}

int run_report(const ReportArgs& a, std::ostream& out) {
  std::ifstream in(a.in, std::ios::binary);
  const std::string text(std::istreambuf_iterator<char>(in), {});
  VerifyReport report;
  try {
    report = report_from_json(text);
  } catch (const std::invalid_argument& ex) {
    throw InputError(ex.what());
  }
  emit(a.out, a.format == "csv" ? report_to_csv(report) : report_to_json(report), out);
  return kSuccess;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Galerkin BBM flow, Gaussian ensembles and Wasserstein checks", "bbmflow"};
  app.require_subcommand(1);

  SampleArgs sample;
  EvolveArgs evolve;
  DistanceArgs distance;
  VerifyArgs verify;
  ReportArgs report;
  auto* sample_cmd = app.add_subcommand("sample", "Draw a Gaussian ensemble");
  auto* evolve_cmd = app.add_subcommand("evolve", "Push an ensemble through the flow");
  auto* distance_cmd = app.add_subcommand("distance", "Wasserstein distance between two ensembles");
  auto* verify_cmd = app.add_subcommand("verify", "Run a verification scenario");
  auto* report_cmd = app.add_subcommand("report", "Convert a verify report");
  add_sample(*sample_cmd, sample);
  add_evolve(*evolve_cmd, evolve);
  add_distance(*distance_cmd, distance);
  add_verify(*verify_cmd, verify);
  add_report(*report_cmd, report);

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*sample_cmd) return run_sample(sample);
    if (*evolve_cmd) return run_evolve(evolve);
    if (*distance_cmd) return run_distance(distance, out);
    if (*verify_cmd) return run_verify(verify, out, err);
    if (*report_cmd) return run_report(report, out);
  } catch (const UsageError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace bbmflow::cli
