#include "ibreg/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "toml.hpp"

#include "ibreg/inference.hpp"
#include "ibreg/special.hpp"

namespace ibreg {

Rng substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double draw_beta(double mu, double phi, Rng& rng) {
  std::gamma_distribution<double> ga(mu * phi), gb((1.0 - mu) * phi);
  const double a = ga(rng), b = gb(rng);
  // keep the draw strictly inside (0,1) so that its logit is finite
  constexpr double eps = 1e-12;
  return std::clamp(a / (a + b), eps, 1.0 - eps);
}

Dgp default_dgp() {
  Dgp d;
  d.truth.kappa = (Vector(3) << 0.0, 2.0, 2.0).finished();
  d.truth.beta = (Vector(2) << -1.8, -2.0).finished();
  d.truth.gamma = (Vector(1) << 4.5).finished();
  return d;
}

namespace {

ObservationSet with_responses(const ObservationSet& obs, Vector y) {
  return ObservationSet(obs.c(), std::move(y), obs.S(), obs.X(), obs.Z());
}

std::size_t ceil_count(double rate, Eigen::Index total) {
  return static_cast<std::size_t>(std::ceil(rate * static_cast<double>(total) - 1e-9));
}

}  // namespace

ObservationSet draw_responses(const ObservationSet& obs, const LinkSpec& links, const ParamVector& upsilon, int c,
                              Rng& rng) {
  const Predictors p = linear_predictors(obs, links, upsilon);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector y(obs.n());
  for (Eigen::Index i = 0; i < obs.n(); ++i) {
    const double u = unif(rng);
    y[i] = u < p.theta[i] ? static_cast<double>(c) : draw_beta(p.mu[i], p.phi[i], rng);
  }
  return ObservationSet(c, std::move(y), obs.S(), obs.X(), obs.Z());
}

ObservationSet generate_clean(int n, const Dgp& dgp, Rng& rng) {
  const Eigen::Index p0 = dgp.truth.kappa.size(), p1 = dgp.truth.beta.size(), p2 = dgp.truth.gamma.size();
  if (n <= p0 + p1 + p2) throw InputError("sample size too small for the model");
  std::normal_distribution<double> norm;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix S(n, p0), X(n, p1), Z(n, p2);
  for (int i = 0; i < n; ++i) {
    S(i, 0) = X(i, 0) = Z(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p0; ++j) S(i, j) = norm(rng);
    for (Eigen::Index j = 1; j < p1; ++j) X(i, j) = unif(rng);
    for (Eigen::Index j = 1; j < p2; ++j) Z(i, j) = norm(rng);
  }
  // Responses are drawn through a placeholder set carrying the covariates.
  Vector y0 = Vector::Constant(n, 0.5);
  const ObservationSet design(dgp.c, std::move(y0), std::move(S), std::move(X), std::move(Z));
  return draw_responses(design, dgp.links, dgp.truth, dgp.c, rng);
}

ObservationSet contaminate_continuous(const ObservationSet& obs, const Dgp& dgp, double rate, Rng& rng,
                                      std::vector<Eigen::Index>* touched) {
  if (!(rate >= 0.0 && rate < 0.5)) throw InputError("contamination rate must lie in [0, 0.5)");
  if (touched) touched->clear();
  std::vector<Eigen::Index> wp = obs.continuous_indices();
  const std::size_t k = std::min(ceil_count(rate, obs.n_dagger()), wp.size());
  if (k == 0) return obs;
  const Vector mu = mean_predictor(obs, dgp.links.mu, dgp.truth.beta);
  const Vector phi = precision_predictor(obs, dgp.links.phi, dgp.truth.gamma);
  std::stable_sort(wp.begin(), wp.end(), [&](Eigen::Index a, Eigen::Index b) { return mu[a] < mu[b]; });
  wp.resize(k);
  std::sort(wp.begin(), wp.end());
  Vector y = obs.y();
  for (const Eigen::Index i : wp) y[i] = draw_beta((1.0 + mu[i]) / 2.0, phi[i], rng);
  if (touched) *touched = wp;
  return with_responses(obs, std::move(y));
}

ObservationSet contaminate_discrete(const ObservationSet& obs, const Dgp& dgp, double rate, Rng& rng,
                                    std::vector<Eigen::Index>* touched, double distance_factor, LeverageShift shift) {
  if (!(rate >= 0.0 && rate < 0.5)) throw InputError("contamination rate must lie in [0, 0.5)");
  const Eigen::Index p0 = obs.p0();
  if (p0 < 2) throw InputError("discrete contamination needs at least one slope covariate");
  if (touched) touched->clear();
  const std::size_t k = ceil_count(rate, obs.n());
  if (k == 0) return obs;
  const Vector w = dgp.truth.kappa.tail(p0 - 1);
  const double wn = w.norm();
  if (!(wn > 0.0)) throw InputError("discrete contamination needs a non-zero slope vector");
  const Vector theta = discrete_probabilities(obs, dgp.links.theta, dgp.truth.kappa);
  const Vector mu = mean_predictor(obs, dgp.links.mu, dgp.truth.beta);
  const Vector phi = precision_predictor(obs, dgp.links.phi, dgp.truth.gamma);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(obs.n()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  std::stable_sort(rows.begin(), rows.end(), [&](Eigen::Index a, Eigen::Index b) { return theta[a] > theta[b]; });
  rows.resize(k);
  std::sort(rows.begin(), rows.end());

  Vector y = obs.y();
  Matrix S = obs.S();
  const double distance = distance_factor * std::sqrt(static_cast<double>(p0));
  for (const Eigen::Index i : rows) {
    y[i] = draw_beta(mu[i], phi[i], rng);
    const Vector s = S.row(i).tail(p0 - 1).transpose();
    Vector moved;
    if (shift == LeverageShift::project)
      moved = s - (w.dot(s) / (wn * wn)) * w + (distance / wn) * w;
    else
      moved = s + distance * w.cwiseSign();
    S.row(i).tail(p0 - 1) = moved.transpose();
  }
  if (touched) *touched = rows;
  return ObservationSet(obs.c(), std::move(y), std::move(S), obs.X(), obs.Z());
}

// ---------------------------------------------------------------- scenarios

void ScenarioSpec::validate() const {
  if (n < 1) throw InputError("n must be positive");
  if (reps < 1) throw InputError("reps must be at least 1");
  if (!(rate >= 0.0 && rate < 0.5)) throw InputError("rate must lie in [0, 0.5)");
  if (estimators.empty()) throw InputError("estimators must not be empty");
  if (threads < 1) throw InputError("threads must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0,1)");
  fixed_alpha.validate();
  tuning.continuous_grid.validate();
  tuning.discrete_grid.validate();
}

ScenarioSpec scenario(int number, int n, int reps, std::uint64_t seed) {
  if (number < 1 || number > 3) throw InputError("scenario number must be 1, 2 or 3");
  ScenarioSpec s;
  s.name = "scenario" + std::to_string(number);
  s.n = n;
  s.reps = reps;
  s.seed = seed;
  s.contaminate_continuous = number != 2;
  s.contaminate_discrete = number != 1;
  return s;
}

namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw InputError("config field '" + field + "': " + what);
}

void check_keys(const toml::table& t, const std::string& prefix, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : t) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end())
      config_error(prefix + std::string(key.str()), "unknown field");
  }
}

template <class T>
T get(const toml::table& t, const std::string& prefix, std::string_view key, T fallback) {
  const toml::node* node = t.get(key);
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node->value_exact<bool>()) return *v;
    config_error(prefix + std::string(key), "expected a boolean");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value_exact<std::string>()) return *v;
    config_error(prefix + std::string(key), "expected a string");
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node->value_exact<std::int64_t>()) return static_cast<T>(*v);
    config_error(prefix + std::string(key), "expected an integer");
  } else {
    if (auto v = node->value<double>()) return *v;
    config_error(prefix + std::string(key), "expected a number");
  }
}

Vector get_vector(const toml::table& t, const std::string& prefix, std::string_view key, const Vector& fallback) {
  const toml::node* node = t.get(key);
  if (!node) return fallback;
  const toml::array* arr = node->as_array();
  if (!arr || arr->empty()) config_error(prefix + std::string(key), "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(arr->size()));
  for (std::size_t j = 0; j < arr->size(); ++j) {
    auto x = (*arr)[j].value<double>();
    if (!x) config_error(prefix + std::string(key), "expected a non-empty array of numbers");
    v[static_cast<Eigen::Index>(j)] = *x;
  }
  return v;
}

const toml::table* subtable(const toml::table& t, const std::string& prefix, std::string_view key) {
  const toml::node* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) config_error(prefix + std::string(key), "expected a table");
  return node->as_table();
}

TuningGrid read_grid(const toml::table& t, const std::string& prefix, TuningGrid g) {
  check_keys(t, prefix, {"start", "first_phase_end", "spacing", "alpha_max", "L", "m"});
  g.start = get(t, prefix, "start", g.start);
  g.first_phase_end = get(t, prefix, "first_phase_end", g.first_phase_end);
  g.spacing = get(t, prefix, "spacing", g.spacing);
  g.alpha_max = get(t, prefix, "alpha_max", g.alpha_max);
  g.L = get(t, prefix, "L", g.L);
  g.m = get(t, prefix, "m", g.m);
  try {
    g.validate();
  } catch (const InputError& e) {
    config_error(prefix.substr(0, prefix.size() - 1), e.what());
  }
  return g;
}

}  // namespace

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "cannot parse " << path.string() << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw InputError(msg.str());
  }
  check_keys(root, "", {"name", "scenario", "n", "reps", "seed", "rate", "threads", "estimators", "tune", "fit_clean",
                        "fit_contaminated", "compute_se", "level", "redraw_covariates", "contamination", "fixed_alpha",
                        "dgp", "tuning"});
  const int number = get(root, "", "scenario", 1);
  ScenarioSpec s = scenario(number, get(root, "", "n", 100), get(root, "", "reps", 100),
                            get<std::uint64_t>(root, "", "seed", 1));
  s.name = get(root, "", "name", s.name);
  s.rate = get(root, "", "rate", s.rate);
  s.threads = get(root, "", "threads", s.threads);
  s.tune = get(root, "", "tune", s.tune);
  s.fit_clean = get(root, "", "fit_clean", s.fit_clean);
  s.fit_contaminated = get(root, "", "fit_contaminated", s.fit_contaminated);
  s.compute_se = get(root, "", "compute_se", s.compute_se);
  s.level = get(root, "", "level", s.level);
  s.redraw_covariates = get(root, "", "redraw_covariates", s.redraw_covariates);
  if (const toml::node* e = root.get("estimators")) {
    const toml::array* arr = e->as_array();
    if (!arr || arr->empty()) config_error("estimators", "expected a non-empty array of strings");
    s.estimators.clear();
    for (const auto& item : *arr) {
      auto name = item.value<std::string>();
      if (!name) config_error("estimators", "expected a non-empty array of strings");
      try {
        s.estimators.push_back(estimator_from_name(*name));
      } catch (const InputError& err) {
        config_error("estimators", err.what());
      }
    }
  }
  if (const toml::table* c = subtable(root, "", "contamination")) {
    check_keys(*c, "contamination.", {"continuous", "discrete", "distance_factor", "leverage_shift"});
    s.contaminate_continuous = get(*c, "contamination.", "continuous", s.contaminate_continuous);
    s.contaminate_discrete = get(*c, "contamination.", "discrete", s.contaminate_discrete);
    s.distance_factor = get(*c, "contamination.", "distance_factor", s.distance_factor);
    const std::string shift = get<std::string>(*c, "contamination.", "leverage_shift", "translate");
    if (shift == "translate")
      s.leverage_shift = LeverageShift::translate;
    else if (shift == "project")
      s.leverage_shift = LeverageShift::project;
    else
      config_error("contamination.leverage_shift", "expected \"translate\" or \"project\"");
  }
  if (const toml::table* a = subtable(root, "", "fixed_alpha")) {
    check_keys(*a, "fixed_alpha.", {"disc", "cont"});
    s.fixed_alpha.alpha_disc = get(*a, "fixed_alpha.", "disc", 0.0);
    s.fixed_alpha.alpha_cont = get(*a, "fixed_alpha.", "cont", 0.0);
  }
  if (const toml::table* d = subtable(root, "", "dgp")) {
    check_keys(*d, "dgp.", {"kappa", "beta", "gamma"});
    s.dgp.truth.kappa = get_vector(*d, "dgp.", "kappa", s.dgp.truth.kappa);
    s.dgp.truth.beta = get_vector(*d, "dgp.", "beta", s.dgp.truth.beta);
    s.dgp.truth.gamma = get_vector(*d, "dgp.", "gamma", s.dgp.truth.gamma);
  }
  if (const toml::table* t = subtable(root, "", "tuning")) {
    check_keys(*t, "tuning.", {"continuous", "discrete", "restart", "continuous_se"});
    if (const toml::table* g = subtable(*t, "tuning.", "continuous"))
      s.tuning.continuous_grid = read_grid(*g, "tuning.continuous.", s.tuning.continuous_grid);
    if (const toml::table* g = subtable(*t, "tuning.", "discrete"))
      s.tuning.discrete_grid = read_grid(*g, "tuning.discrete.", s.tuning.discrete_grid);
    const std::string restart = get<std::string>(*t, "tuning.", "restart", "smallest");
    if (restart == "smallest")
      s.tuning.rule = RestartRule::smallest_failing;
    else if (restart == "largest")
      s.tuning.rule = RestartRule::largest_failing;
    else
      config_error("tuning.restart", "expected \"smallest\" or \"largest\"");
    const std::string se = get<std::string>(*t, "tuning.", "continuous_se", "fixed");
    if (se == "fixed")
      s.tuning.continuous_se = ContinuousSe::fixed_beta_regression;
    else if (se == "per_alpha")
      s.tuning.continuous_se = ContinuousSe::per_alpha;
    else
      config_error("tuning.continuous_se", "expected \"fixed\" or \"per_alpha\"");
  }
  try {
    s.validate();
  } catch (const InputError& e) {
    throw InputError(std::string("invalid scenario config: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------- Monte Carlo

namespace {

ReplicationRecord run_one(const ObservationSet& obs, const ScenarioSpec& spec, EstimatorKind kind) {
  ReplicationRecord r;
  r.estimator = kind;
  const Eigen::Index p = obs.p0() + obs.p1() + obs.p2();
  r.estimate = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  r.se = r.estimate;
  r.rejected.assign(static_cast<std::size_t>(p), false);
  try {
    FitResult f;
    if (spec.tune && kind != EstimatorKind::mle) {
      TuningOptions to = spec.tuning;
      TunedFit tf = fit_tuned(obs, kind, spec.dgp.links, to);
      f = std::move(tf.fit);
    } else {
      FitOptions fo;
      fo.estimator = kind;
      fo.alpha = spec.fixed_alpha;
      fo.links = spec.dgp.links;
      fo.optimizer = spec.tuning.optimizer;
      fo.covariance = false;
      f = fit(obs, fo);
    }
    r.alpha = f.alpha;
    r.converged = f.converged();
    r.estimate = f.estimate.flat();
    if (spec.compute_se && r.converged) {
      const CovarianceResult cov = covariance(obs, spec.dgp.links, kind, f.estimate, f.alpha);
      r.se = cov.se;
      const Vector truth = spec.dgp.truth.flat();
      for (Eigen::Index j = 0; j < p; ++j)
        if (r.se[j] > 0.0) r.rejected[static_cast<std::size_t>(j)] = wald_test(r.estimate[j], r.se[j], truth[j]).p_value < spec.level;
    }
  } catch (const NumericalError&) {
    r.converged = false;
  } catch (const InputError&) {
    r.converged = false;
  } catch (const DomainError&) {
    r.converged = false;
  }
  return r;
}

// Redraws until the sample has enough observations in (0,1) and at the point mass.
template <class Draw>
ObservationSet usable_sample(Draw draw) {
  for (int attempt = 0;; ++attempt) {
    try {
      ObservationSet o = draw();
      const Eigen::Index nd = o.n_dagger();
      if (nd > o.p1() + o.p2() + 1 && nd < o.n()) return o;
    } catch (const InputError&) {
      if (attempt > 100) throw;
    }
    if (attempt > 100) throw NumericalError("cannot generate a usable sample");
  }
}

std::optional<ObservationSet> shared_design(const ScenarioSpec& spec) {
  if (spec.redraw_covariates) return std::nullopt;
  Rng rng = substream(spec.seed, std::numeric_limits<std::uint64_t>::max());
  return usable_sample([&] { return generate_clean(spec.n, spec.dgp, rng); });
}

ObservationSet draw_clean(const ScenarioSpec& spec, const std::optional<ObservationSet>& design, Rng& rng) {
  return usable_sample([&] {
    return design ? draw_responses(*design, spec.dgp.links, spec.dgp.truth, spec.dgp.c, rng)
                  : generate_clean(spec.n, spec.dgp, rng);
  });
}

std::vector<ReplicationRecord> replicate(const ScenarioSpec& spec, int rep,
                                         const std::optional<ObservationSet>& design) {
  Rng rng = substream(spec.seed, static_cast<std::uint64_t>(rep));
  std::vector<ReplicationRecord> out;
  const ObservationSet clean = draw_clean(spec, design, rng);
  ObservationSet contaminated = clean;
  if (spec.contaminate_discrete)
    contaminated = contaminate_discrete(contaminated, spec.dgp, spec.rate, rng, nullptr, spec.distance_factor,
                                        spec.leverage_shift);
  if (spec.contaminate_continuous) contaminated = contaminate_continuous(contaminated, spec.dgp, spec.rate, rng);
  const bool any = spec.contaminate_continuous || spec.contaminate_discrete;
  for (const bool cont : {false, true}) {
    if (cont ? !(spec.fit_contaminated && any) : !spec.fit_clean) continue;
    for (const EstimatorKind k : spec.estimators) {
      ReplicationRecord r = run_one(cont ? contaminated : clean, spec, k);
      r.rep = rep;
      r.contaminated = cont;
      out.push_back(std::move(r));
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

const EstimatorSummary& MonteCarloSummary::find(EstimatorKind kind, bool contaminated) const {
  for (const auto& e : estimators)
    if (e.estimator == kind && e.contaminated == contaminated) return e;
  throw InputError("no summary for estimator " + std::string(estimator_name(kind)));
}

double MonteCarloSummary::tmse_ratio(EstimatorKind a, EstimatorKind b, bool contaminated) const {
  return find(a, contaminated).tmse / find(b, contaminated).tmse;
}

ObservationSet clean_sample(const ScenarioSpec& spec, int rep) {
  spec.validate();
  Rng rng = substream(spec.seed, static_cast<std::uint64_t>(rep));
  return draw_clean(spec, shared_design(spec), rng);
}

MonteCarloSummary run_monte_carlo(const ScenarioSpec& spec) {
  spec.validate();
  MonteCarloSummary out;
  out.spec = spec;
  const ParamVector& t = spec.dgp.truth;
  out.parameter_names = default_parameter_names(t.kappa.size(), t.beta.size(), t.gamma.size());

  const std::optional<ObservationSet> design = shared_design(spec);
  std::vector<std::vector<ReplicationRecord>> per_rep(static_cast<std::size_t>(spec.reps));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < spec.reps; r = next++)
      per_rep[static_cast<std::size_t>(r)] = replicate(spec, r, design);
  };
  const int nthreads = std::min(spec.threads, spec.reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& v : per_rep)
    for (auto& r : v) out.records.push_back(std::move(r));

  const Vector truth = t.flat();
  const Eigen::Index p = truth.size();
  for (const bool cont : {false, true}) {
    for (const EstimatorKind k : spec.estimators) {
      EstimatorSummary s;
      s.estimator = k;
      s.contaminated = cont;
      s.bias = Vector::Zero(p);
      s.rmse = Vector::Zero(p);
      s.rejection = Vector::Zero(p);
      Eigen::VectorXi tested = Eigen::VectorXi::Zero(p);
      std::vector<double> ad, ac;
      bool seen = false;
      for (const auto& r : out.records) {
        if (r.estimator != k || r.contaminated != cont) continue;
        seen = true;
        if (!r.converged) {
          ++s.failed;
          continue;
        }
        ++s.used;
        const Vector e = r.estimate - truth;
        s.bias += e;
        s.rmse += e.cwiseAbs2();
        for (Eigen::Index j = 0; j < p; ++j) {
          if (std::isfinite(r.se[j])) {
            ++tested[j];
            s.rejection[j] += r.rejected[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
          }
        }
        ad.push_back(r.alpha.alpha_disc);
        ac.push_back(r.alpha.alpha_cont);
      }
      if (!seen) continue;
      const double used = static_cast<double>(s.used);
      s.bias /= used;
      s.tmse = s.rmse.sum() / used;
      s.rmse = (s.rmse / used).cwiseSqrt();
      for (Eigen::Index j = 0; j < p; ++j)
        s.rejection[j] = tested[j] > 0 ? s.rejection[j] / tested[j] : std::numeric_limits<double>::quiet_NaN();
      s.alpha_disc_mean = mean_of(ad);
      s.alpha_disc_sd = sd_of(ad);
      s.alpha_cont_mean = mean_of(ac);
      s.alpha_cont_sd = sd_of(ac);
      s.reliable = s.failed <= 0.01 * (s.used + s.failed);
      out.estimators.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------- output

namespace {

std::string fmt(double x) {
  if (!std::isfinite(x)) return "NA";
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

const char* condition_name(bool contaminated) { return contaminated ? "cont" : "noncont"; }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw InputError("cannot write " + p.string());
  return os;
}

}  // namespace

void write_summary(const MonteCarloSummary& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& est = s.estimators;

  {  // parameters by (estimator, condition) x (bias, RMSE)
    std::ofstream os = open_out(dir / "bias_rmse.csv");
    os << "parameter";
    for (const auto& e : est)
      os << ',' << estimator_name(e.estimator) << '_' << condition_name(e.contaminated) << "_bias,"
         << estimator_name(e.estimator) << '_' << condition_name(e.contaminated) << "_rmse";
    os << '\n';
    for (std::size_t j = 0; j < s.parameter_names.size(); ++j) {
      os << s.parameter_names[j];
      for (const auto& e : est)
        os << ',' << fmt(e.bias[static_cast<Eigen::Index>(j)]) << ',' << fmt(e.rmse[static_cast<Eigen::Index>(j)]);
      os << '\n';
    }
  }
  {  // selected tuning constants: part x condition (mean, sd)
    std::ofstream os = open_out(dir / "tuning.csv");
    os << "part,condition,mean,sd\n";
    for (const auto& e : est) {
      if (e.estimator == EstimatorKind::mle) continue;
      const std::string cont = e.estimator == EstimatorKind::mlse ? "continuous (LSMLE)" : "continuous (LMDPDE)";
      os << "discrete (" << estimator_name(e.estimator) << ")," << condition_name(e.contaminated) << ','
         << fmt(e.alpha_disc_mean) << ',' << fmt(e.alpha_disc_sd) << '\n';
      os << cont << ',' << condition_name(e.contaminated) << ',' << fmt(e.alpha_cont_mean) << ','
         << fmt(e.alpha_cont_sd) << '\n';
    }
  }
  {  // TMSE ratios
    std::ofstream os = open_out(dir / "tmse_ratio.csv");
    os << "ratio,condition,value\n";
    const std::pair<EstimatorKind, EstimatorKind> pairs[] = {{EstimatorKind::mle, EstimatorKind::mlse},
                                                             {EstimatorKind::mle, EstimatorKind::mlme},
                                                             {EstimatorKind::mlse, EstimatorKind::mlme}};
    for (const bool cont : {false, true}) {
      for (const auto& [a, b] : pairs) {
        double v = std::numeric_limits<double>::quiet_NaN();
        try {
          v = s.tmse_ratio(a, b, cont);
        } catch (const InputError&) {
          continue;
        }
        os << estimator_name(a) << '/' << estimator_name(b) << ',' << condition_name(cont) << ',' << fmt(v) << '\n';
      }
    }
  }
  {  // empirical levels
    std::ofstream os = open_out(dir / "levels.csv");
    os << "estimator,condition";
    for (const auto& n : s.parameter_names) os << ',' << n;
    os << '\n';
    for (const auto& e : est) {
      os << estimator_name(e.estimator) << ',' << condition_name(e.contaminated);
      for (Eigen::Index j = 0; j < e.rejection.size(); ++j) os << ',' << fmt(e.rejection[j]);
      os << '\n';
    }
  }
  {  // raw replications
    std::ofstream os = open_out(dir / "replications.csv");
    os << "rep,condition,estimator,converged,alpha_disc,alpha_cont";
    for (const auto& n : s.parameter_names) os << ',' << n;
    for (const auto& n : s.parameter_names) os << ",se_" << n;
    os << '\n';
    for (const auto& r : s.records) {
      os << r.rep << ',' << condition_name(r.contaminated) << ',' << estimator_name(r.estimator) << ','
         << (r.converged ? 1 : 0) << ',' << fmt(r.alpha.alpha_disc) << ',' << fmt(r.alpha.alpha_cont);
      for (Eigen::Index j = 0; j < r.estimate.size(); ++j) os << ',' << fmt(r.estimate[j]);
      for (Eigen::Index j = 0; j < r.se.size(); ++j) os << ',' << fmt(r.se[j]);
      os << '\n';
    }
  }
  {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["name"] = s.spec.name;
    j["n"] = s.spec.n;
    j["reps"] = s.spec.reps;
    j["seed"] = s.spec.seed;
    j["rate"] = s.spec.rate;
    j["contaminate_continuous"] = s.spec.contaminate_continuous;
    j["contaminate_discrete"] = s.spec.contaminate_discrete;
    j["redraw_covariates"] = s.spec.redraw_covariates;
    j["parameters"] = s.parameter_names;
    auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr); };
    auto vec = [&](const Vector& v) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
      return a;
    };
    for (const auto& e : est) {
      nlohmann::ordered_json x;
      x["estimator"] = estimator_name(e.estimator);
      x["condition"] = condition_name(e.contaminated);
      x["used"] = e.used;
      x["failed"] = e.failed;
      x["reliable"] = e.reliable;
      x["bias"] = vec(e.bias);
      x["rmse"] = vec(e.rmse);
      x["tmse"] = num(e.tmse);
      x["rejection"] = vec(e.rejection);
      x["alpha_disc"] = {{"mean", num(e.alpha_disc_mean)}, {"sd", num(e.alpha_disc_sd)}};
      x["alpha_cont"] = {{"mean", num(e.alpha_cont_mean)}, {"sd", num(e.alpha_cont_sd)}};
      j["summaries"].push_back(std::move(x));
    }
    std::ofstream os = open_out(dir / "summary.json");
    os << j.dump(2) << '\n';
  }
}

}  // namespace ibreg
