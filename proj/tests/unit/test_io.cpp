#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ibreg/io.hpp"
#include "ibreg/simulation.hpp"

using namespace ibreg;
namespace fs = std::filesystem;

TEST_CASE("CSV reading") {
  std::istringstream in("\xEF\xBB\xBFy, a ,\"b\"\n0.5,1,2\n\n0,-1.5e-1,+3\n");
  const DataTable t = read_csv(in);
  CHECK(t.names == std::vector<std::string>{"y", "a", "b"});
  REQUIRE(t.values.rows() == 2);
  CHECK(t.values(1, 1) == -0.15);
  CHECK(t.values(1, 2) == 3.0);
  CHECK(t.column("b") == 2);
  CHECK_THROWS_WITH_AS(t.column("z"), doctest::Contains("'z'"), InputError);

  std::istringstream ragged("y,a\n0.5,1\n0.2\n");
  CHECK_THROWS_WITH_AS(read_csv(ragged, "d.csv"), doctest::Contains("d.csv:3"), InputError);
  std::istringstream bad("y,a\n0.5,1,5\n");
  CHECK_THROWS_AS(read_csv(bad), InputError);
  std::istringstream text("y,a\n0.5,abc\n");
  CHECK_THROWS_WITH_AS(read_csv(text), doctest::Contains("'a'"), InputError);
  std::istringstream comma("y,a\n0.5,\"1,5\"\n");
  CHECK_THROWS_AS(read_csv(comma), InputError);
  std::istringstream dup("y,y\n0.5,1\n");
  CHECK_THROWS_AS(read_csv(dup), InputError);
  std::istringstream empty("y,a\n");
  CHECK_THROWS_AS(read_csv(empty), InputError);
}

TEST_CASE("model data and row exclusion") {
  std::ostringstream csv;
  csv << "y,a,b\n";
  const double ys[] = {0, 0.3, 0.6, 0, 0.2, 0.9, 0.4, 0};
  for (int i = 0; i < 8; ++i) csv << ys[i] << ',' << i << ',' << (i * i) % 5 << '\n';
  std::istringstream in(csv.str());
  const DataTable t = read_csv(in);
  ModelFormula f;
  f.response = "y";
  f.discrete = {"a"};
  f.mean = {"b"};
  const ModelData md = build_model_data(t, f);
  CHECK(md.obs.n() == 8);
  CHECK(md.obs.p0() == 2);
  CHECK(md.obs.p1() == 2);
  CHECK(md.obs.p2() == 1);
  CHECK(md.obs.S()(3, 1) == 3.0);

  const ModelData dropped = build_model_data(t, f, {2, 8});
  CHECK(dropped.obs.n() == 6);
  CHECK(dropped.rows == std::vector<int>{1, 3, 4, 5, 6, 7});
  CHECK(dropped.obs.y()[1] == 0.6);
  CHECK_THROWS_AS(build_model_data(t, f, {9}), InputError);

  ModelFormula g = f;
  g.mean = {"y"};
  CHECK_THROWS_AS(build_model_data(t, g), InputError);
  g = f;
  g.c = 2;
  CHECK_THROWS_AS(build_model_data(t, g), InputError);
  CHECK(split_columns(" a, b ,,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(parameter_names(f) == std::vector<std::string>{"discrete:(Intercept)", "discrete:a", "mean:(Intercept)",
                                                        "mean:b", "precision:(Intercept)"});
}

TEST_CASE("fit artifact round trip") {
  const Dgp d = default_dgp();
  Rng rng = substream(8, 0);
  const ObservationSet obs = contaminate_continuous(generate_clean(120, d, rng), d, 0.05, rng);
  FitArtifact a;
  a.data_path = "/data/x.csv";
  a.formula.response = "y";
  a.formula.discrete = {"s1", "s2"};
  a.formula.mean = {"x1"};
  a.formula.links.theta = Link(LinkKind::cloglog);
  a.drop_rows = {3, 9};
  a.seed = 18446744073709551557ULL;
  a.n = obs.n();
  a.n_dagger = obs.n_dagger();
  a.tuned = true;
  const TunedFit tf = fit_tuned(obs, EstimatorKind::mlse, a.formula.links);
  a.fit = tf.fit;
  a.discrete_trace = tf.discrete;
  a.continuous_trace = tf.continuous;
  const fs::path p = fs::temp_directory_path() / "ibreg_artifact.json";
  write_fit_artifact(p, a);
  const FitArtifact b = read_fit_artifact(p);
  CHECK(b.data_path == a.data_path);
  CHECK(b.drop_rows == a.drop_rows);
  CHECK(b.seed == a.seed);
  CHECK(b.n == a.n);
  CHECK(b.formula.links == a.formula.links);
  CHECK(b.fit.links == a.fit.links);
  CHECK(b.fit.estimator == EstimatorKind::mlse);
  CHECK(b.fit.alpha == a.fit.alpha);
  CHECK(b.fit.estimate.flat() == a.fit.estimate.flat());
  CHECK(b.fit.se == a.fit.se);
  CHECK(b.fit.covariance == a.fit.covariance);
  CHECK(b.continuous_trace.chosen_alpha == a.continuous_trace.chosen_alpha);
  CHECK(b.continuous_trace.sqv_values.size() == a.continuous_trace.sqv_values.size());
  CHECK(b.discrete_trace.evaluated_alphas == a.discrete_trace.evaluated_alphas);

  std::ofstream(p) << "{\"schema_version\": 99}";
  CHECK_THROWS_WITH_AS(read_fit_artifact(p), doctest::Contains("schema"), InputError);
  std::ofstream(p) << "{not json";
  CHECK_THROWS_AS(read_fit_artifact(p), InputError);
}

TEST_CASE("coefficient table") {
  FitResult f;
  f.estimate.kappa = Vector::Constant(1, 0.5);
  f.estimate.beta = Vector::Constant(1, -0.267);
  f.estimate.gamma = Vector::Constant(1, 3.0);
  f.se = (Vector(3) << 0.25, 0.096, 0.0).finished();
  std::ostringstream os;
  write_coefficients_csv(os, {"discrete:(Intercept)", "mean:Pop", "precision:(Intercept)"}, {&f});
  const std::string s = os.str();
  CHECK(s.find("mle,mean:Pop,-0.267,0.096,-2.78125,") != std::string::npos);
  CHECK(s.find("mle,precision:(Intercept),3,NA,NA,NA") != std::string::npos);
}
