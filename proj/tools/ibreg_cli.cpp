// ibreg: fit, diagnose and simulate inflated beta regressions from the shell.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "ibreg/diagnostics.hpp"
#include "ibreg/inference.hpp"
#include "ibreg/io.hpp"
#include "ibreg/simulation.hpp"

namespace fs = std::filesystem;
using namespace ibreg;

namespace {

constexpr int kInputExit = 2;
constexpr int kNumericalExit = 3;

struct FitArgs {
  std::string data, response, discrete, mean, precision, out = ".";
  int c = 0;
  std::vector<std::string> estimators{"mle"};
  std::string alpha = "auto";
  std::optional<double> alpha_disc, alpha_cont;
  std::string link_theta = "logit", link_mu = "logit", link_phi = "log";
  bool clamp = false;
  std::vector<int> drop_rows;
  std::optional<std::uint64_t> seed;
};

struct DiagnoseArgs {
  std::string fit, kind = "residuals", out = ".";
  std::optional<std::uint64_t> seed;
  int n_sim = 100;
  double band = 0.95;
  bool refit = false;
  bool svg = false;
};

struct SimulateArgs {
  std::string config, out = ".";
  std::optional<int> reps, threads;
  std::optional<std::uint64_t> seed;
};

struct GenerateArgs {
  int n = 100;
  int scenario = 0;
  std::uint64_t seed = 1;
  std::string out = "data.csv";
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& s) {
  if (s) return *s;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) | rd();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw InputError("cannot write " + p.string());
  return os;
}

int run_fit(const FitArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  ModelFormula f;
  f.response = a.response;
  f.c = a.c;
  f.discrete = split_columns(a.discrete);
  f.mean = split_columns(a.mean);
  f.precision = split_columns(a.precision);
  f.links = {Link::from_name(a.link_theta), Link::from_name(a.link_mu), Link::from_name(a.link_phi)};
  const bool automatic = a.alpha == "auto" && !a.alpha_disc && !a.alpha_cont;
  if (a.alpha != "auto") throw InputError("--alpha accepts only 'auto'; use --alpha-disc and --alpha-cont for fixed values");

  const DataTable table = read_csv(fs::path(a.data));
  const ModelData md = build_model_data(table, f, a.drop_rows);
  const auto names = parameter_names(f);
  ensure_dir(a.out);

  std::vector<FitArtifact> arts;
  for (const auto& e : a.estimators) {
    FitArtifact art;
    art.data_path = fs::absolute(a.data).string();
    art.formula = f;
    art.drop_rows = a.drop_rows;
    art.seed = seed;
    art.n = md.obs.n();
    art.n_dagger = md.obs.n_dagger();
    const EstimatorKind kind = estimator_from_name(e);
    if (kind != EstimatorKind::mle && automatic) {
      TuningOptions to;
      to.clamp = a.clamp;
      TunedFit tf = fit_tuned(md.obs, kind, f.links, to);
      art.fit = std::move(tf.fit);
      art.tuned = true;
      art.discrete_trace = std::move(tf.discrete);
      art.continuous_trace = std::move(tf.continuous);
    } else {
      FitOptions fo;
      fo.estimator = kind;
      fo.links = f.links;
      fo.clamp = a.clamp;
      if (kind != EstimatorKind::mle) fo.alpha = {a.alpha_disc.value_or(0.0), a.alpha_cont.value_or(0.0)};
      art.fit = fit(md.obs, fo);
    }
    arts.push_back(std::move(art));
  }

  std::vector<const FitResult*> fits;
  std::vector<const FitArtifact*> ptrs;
  for (const auto& art : arts) {
    fits.push_back(&art.fit);
    ptrs.push_back(&art);
    write_fit_artifact(fs::path(a.out) / ("fit_" + std::string(estimator_name(art.fit.estimator)) + ".json"), art);
  }
  {
    auto os = open_out(fs::path(a.out) / "coefficients.csv");
    write_coefficients_csv(os, names, fits);
  }
  {
    auto os = open_out(fs::path(a.out) / "weights.csv");
    os << "row,estimator,weight\n" << std::setprecision(10);
    for (const auto& art : arts) {
      const auto& wp = md.obs.continuous_indices();
      for (std::size_t k = 0; k < wp.size(); ++k)
        os << md.rows[static_cast<std::size_t>(wp[k])] << ',' << estimator_name(art.fit.estimator) << ','
           << art.fit.weights[static_cast<Eigen::Index>(k)] << '\n';
    }
  }
  std::ostringstream rep;
  write_report(rep, names, ptrs);
  open_out(fs::path(a.out) / "report.txt") << rep.str();
  std::cout << rep.str();

  for (const auto& art : arts)
    if (!art.fit.converged()) {
      std::cerr << "error: " << estimator_name(art.fit.estimator) << " fit did not converge: "
                << (art.fit.discrete.converged ? art.fit.continuous.message : art.fit.discrete.message) << '\n';
      return kNumericalExit;
    }
  return 0;
}

int run_diagnose(const DiagnoseArgs& a) {
  const FitArtifact art = read_fit_artifact(a.fit);
  const std::uint64_t seed = a.seed.value_or(art.seed);
  const DataTable table = read_csv(fs::path(art.data_path));
  const ModelData md = build_model_data(table, art.formula, art.drop_rows);
  FitResult fr = art.fit;
  fr.weights = robust_weights(md.obs, fr.links, fr.estimate, fr.estimator, fr.alpha.alpha_cont);
  ensure_dir(a.out);
  const fs::path out(a.out);
  const auto& wp = md.obs.continuous_indices();

  if (a.kind == "residuals") {
    const Vector q = quantile_residuals(md.obs, fr.links, fr.estimate, seed);
    const ByPartResiduals b = by_part_residuals(md.obs, fr.links, fr.estimate);
    auto os = open_out(out / "residuals.csv");
    os << "row,y,quantile,deviance,swr2,leverage\n" << std::setprecision(10);
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < md.obs.n(); ++i) {
      os << md.rows[static_cast<std::size_t>(i)] << ',' << md.obs.y()[i] << ',' << q[i] << ',' << b.discrete[i];
      if (k < wp.size() && wp[k] == i) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (std::isfinite(b.continuous[kk]))
          os << ',' << b.continuous[kk];
        else
          os << ",NA";
        os << ',' << b.leverage[kk] << '\n';
        ++k;
      } else {
        os << ",NA,NA\n";
      }
    }
    if (b.missing > 0) std::cerr << "warning: " << b.missing << " continuous residuals missing (leverage >= 1)\n";
    if (a.svg) {
      auto sv = open_out(out / "residuals.svg");
      std::vector<Eigen::Index> rows;
      for (int r : md.rows) rows.push_back(r);
      write_index_svg(sv, rows, q, "quantile residual");
    }
    std::cout << "wrote " << (out / "residuals.csv").string() << " (seed " << seed << ")\n";
  } else if (a.kind == "envelope") {
    EnvelopeOptions eo;
    eo.n_sim = a.n_sim;
    eo.band = a.band;
    eo.seed = seed;
    eo.refit = a.refit;
    const EnvelopeTable t = envelope(md.obs, fr, eo);
    auto os = open_out(out / "envelope.csv");
    write_envelope_csv(os, t);
    if (a.svg) {
      auto sv = open_out(out / "envelope.svg");
      write_envelope_svg(sv, t);
    }
    std::cout << "fraction inside the " << a.band << " envelope: " << t.fraction_inside << " (seed " << seed << ")\n";
  } else if (a.kind == "weights") {
    std::vector<std::size_t> order(wp.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return fr.weights[static_cast<Eigen::Index>(x)] > fr.weights[static_cast<Eigen::Index>(y)];
    });
    auto os = open_out(out / "weights.csv");
    os << "row,y,weight\n" << std::setprecision(10);
    for (std::size_t k : order) {
      const Eigen::Index i = wp[k];
      os << md.rows[static_cast<std::size_t>(i)] << ',' << md.obs.y()[i] << ','
         << fr.weights[static_cast<Eigen::Index>(k)] << '\n';
    }
    if (a.svg) {
      auto sv = open_out(out / "weights.svg");
      std::vector<Eigen::Index> rows;
      for (Eigen::Index i : wp) rows.push_back(md.rows[static_cast<std::size_t>(i)]);
      write_index_svg(sv, rows, fr.weights, "weight");
    }
    if (!order.empty())
      std::cout << "smallest weight at row " << md.rows[static_cast<std::size_t>(wp[order.back()])] << ": "
                << fr.weights[static_cast<Eigen::Index>(order.back())] << '\n';
  } else {
    throw InputError("--kind must be residuals, envelope or weights");
  }
  return 0;
}

int run_simulate(const SimulateArgs& a) {
  ScenarioSpec s = load_scenario(a.config);
  if (a.reps) s.reps = *a.reps;
  if (a.threads) s.threads = *a.threads;
  if (a.seed) s.seed = *a.seed;
  s.validate();
  const MonteCarloSummary m = run_monte_carlo(s);
  write_summary(m, a.out);
  std::cout << s.name << ": " << s.reps << " replications, n = " << s.n << ", results in " << a.out << '\n';
  for (const auto& e : m.estimators)
    std::cout << "  " << estimator_name(e.estimator) << (e.contaminated ? " contaminated" : " clean")
              << ": used " << e.used << ", failed " << e.failed << ", TMSE " << e.tmse
              << (e.reliable ? "" : " (unreliable)") << '\n';
  return 0;
}

int run_generate(const GenerateArgs& a) {
  if (a.n < 1) throw InputError("--n must be positive");
  const Dgp d = default_dgp();
  Rng rng = substream(a.seed, 0);
  ObservationSet obs = generate_clean(a.n, d, rng);
  if (a.scenario == 1 || a.scenario == 3) obs = contaminate_continuous(obs, d, 0.05, rng);
  if (a.scenario == 2 || a.scenario == 3) obs = contaminate_discrete(obs, d, 0.05, rng);
  auto os = open_out(a.out);
  os << "y,s1,s2,x1\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < obs.n(); ++i)
    os << obs.y()[i] << ',' << obs.S()(i, 1) << ',' << obs.S()(i, 2) << ',' << obs.X()(i, 1) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust and maximum likelihood estimation for zero-or-one inflated beta regression"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to CSV data");
  fit_cmd->add_option("--data", fa.data, "input CSV")->required();
  fit_cmd->add_option("--response", fa.response, "response column")->required();
  fit_cmd->add_option("--c", fa.c, "inflation point, 0 or 1")->check(CLI::IsMember({0, 1}));
  fit_cmd->add_option("--discrete", fa.discrete, "comma-separated columns of the inflation submodel");
  fit_cmd->add_option("--mean", fa.mean, "comma-separated columns of the mean submodel");
  fit_cmd->add_option("--precision", fa.precision, "comma-separated columns of the precision submodel");
  fit_cmd->add_option("--estimator", fa.estimators, "mle, mlse or mlme; repeat or comma-separate for several")
      ->delimiter(',');
  fit_cmd->add_option("--alpha", fa.alpha, "'auto' selects the tuning constants by SQV");
  fit_cmd->add_option("--alpha-disc", fa.alpha_disc, "fixed discrete tuning constant")->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--alpha-cont", fa.alpha_cont, "fixed continuous tuning constant")->check(CLI::Range(0.0, 0.999999));
  fit_cmd->add_option("--link-theta", fa.link_theta, "logit, cloglog or log");
  fit_cmd->add_option("--link-mu", fa.link_mu, "logit, cloglog or log");
  fit_cmd->add_option("--link-phi", fa.link_phi, "log");
  fit_cmd->add_flag("--clamp", fa.clamp, "clamp probabilities away from 0 and 1 during optimization");
  fit_cmd->add_option("--drop-rows", fa.drop_rows, "1-based data rows to exclude")->delimiter(',');
  fit_cmd->add_option("--seed", fa.seed, "seed recorded for later diagnostics");
  fit_cmd->add_option("--out", fa.out, "output directory");

  DiagnoseArgs da;
  auto* diag_cmd = app.add_subcommand("diagnose", "residuals, envelopes or weights from a fit artifact");
  diag_cmd->add_option("--fit", da.fit, "fit_<estimator>.json written by fit")->required();
  diag_cmd->add_option("--kind", da.kind, "residuals, envelope or weights")
      ->check(CLI::IsMember({"residuals", "envelope", "weights"}));
  diag_cmd->add_option("--seed", da.seed, "defaults to the seed stored in the artifact");
  diag_cmd->add_option("--n-sim", da.n_sim, "envelope simulations")->check(CLI::PositiveNumber);
  diag_cmd->add_option("--band", da.band, "envelope coverage")->check(CLI::Range(0.0, 1.0));
  diag_cmd->add_flag("--refit", da.refit, "refit each simulated dataset");
  diag_cmd->add_flag("--svg", da.svg, "also write an SVG plot");
  diag_cmd->add_option("--out", da.out, "output directory");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo study from a TOML scenario");
  sim_cmd->add_option("--config", sa.config, "scenario file")->required();
  sim_cmd->add_option("--out", sa.out, "output directory");
  sim_cmd->add_option("--reps", sa.reps, "override the replication count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--threads", sa.threads, "worker threads")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sa.seed, "override the seed");

  GenerateArgs ga;
  auto* gen_cmd = app.add_subcommand("generate", "write a dataset from the simulation design");
  gen_cmd->add_option("--n", ga.n, "sample size");
  gen_cmd->add_option("--scenario", ga.scenario, "0 clean, 1-3 contaminated")->check(CLI::Range(0, 3));
  gen_cmd->add_option("--seed", ga.seed, "seed");
  gen_cmd->add_option("--out", ga.out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInputExit;
  }

  try {
    if (*fit_cmd) return run_fit(fa);
    if (*diag_cmd) return run_diagnose(da);
    if (*sim_cmd) return run_simulate(sa);
    if (*gen_cmd) return run_generate(ga);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputExit;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputExit;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalExit;
  }
  return 0;
}
