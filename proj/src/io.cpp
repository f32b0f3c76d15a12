#include "ibreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ibreg/inference.hpp"

namespace ibreg {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw InputError(where + ": cannot parse '" + cell + "' as a number");
  return v;
}

Matrix design(const DataTable& t, const std::vector<Eigen::Index>& cols, const std::vector<Eigen::Index>& rows) {
  Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()) + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    M(i, 0) = 1.0;
    for (std::size_t k = 0; k < cols.size(); ++k) M(i, static_cast<Eigen::Index>(k) + 1) = t.values(rows[r], cols[k]);
  }
  return M;
}

json vec(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
  return a;
}

Vector to_vector(const json& a) {
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = a[k].is_null() ? std::nan("") : a[k].get<double>();
  return v;
}

json report_json(const ConvergenceReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"final_grad_norm", r.final_grad_norm},
          {"diverging", r.diverging},
          {"message", r.message}};
}

ConvergenceReport report_from(const json& j) {
  ConvergenceReport r;
  r.converged = j.at("converged").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.final_grad_norm = j.at("final_grad_norm").get<double>();
  r.diverging = j.at("diverging").get<bool>();
  r.message = j.at("message").get<std::string>();
  return r;
}

json trace_json(const TuningTrace& t) {
  json s = json::array();
  for (const SqvRecord& r : t.sqv_values)
    s.push_back({{"alpha_k", r.alpha_k},
                 {"alpha_k1", r.alpha_k1},
                 {"sqv", std::isfinite(r.value) ? json(r.value) : json(nullptr)},
                 {"stable", r.stable}});
  return {{"evaluated_alphas", t.evaluated_alphas},
          {"sqv_values", s},
          {"chosen_alpha", t.chosen_alpha},
          {"fallback_to_zero", t.fallback_to_zero},
          {"failed_alphas", t.failed_alphas}};
}

TuningTrace trace_from(const json& j) {
  TuningTrace t;
  t.evaluated_alphas = j.at("evaluated_alphas").get<std::vector<double>>();
  for (const json& r : j.at("sqv_values"))
    t.sqv_values.push_back({r.at("alpha_k").get<double>(), r.at("alpha_k1").get<double>(),
                            r.at("sqv").is_null() ? std::nan("") : r.at("sqv").get<double>(),
                            r.at("stable").get<bool>()});
  t.chosen_alpha = j.at("chosen_alpha").get<double>();
  t.fallback_to_zero = j.at("fallback_to_zero").get<bool>();
  t.failed_alphas = j.at("failed_alphas").get<std::vector<double>>();
  return t;
}

std::string fmt(double v, int digits = 3) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

Eigen::Index DataTable::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError("column '" + name + "' not found in the data");
  return static_cast<Eigen::Index>(it - names.begin());
}

DataTable read_csv(std::istream& in, const std::string& source) {
  std::string line;
  DataTable t;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  t.names = split_line(line);
  std::set<std::string> seen;
  for (const auto& n : t.names) {
    if (n.empty()) throw InputError(source + ": empty column name in header");
    if (!seen.insert(n).second) throw InputError(source + ": duplicate column '" + n + "'");
  }
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != t.names.size())
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.names.size()) +
                       " fields, found " + std::to_string(cells.size()));
    std::vector<double> r;
    for (std::size_t k = 0; k < cells.size(); ++k)
      r.push_back(parse_number(cells[k], source + ":" + std::to_string(line_no) + " column '" + t.names[k] + "'"));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw InputError(source + ": no data rows");
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < t.names.size(); ++k)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return t;
}

DataTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_csv(in, path.string());
}

std::vector<std::string> split_columns(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ModelData build_model_data(const DataTable& table, const ModelFormula& f, const std::vector<int>& drop_rows) {
  if (f.c != 0 && f.c != 1) throw InputError("inflation point must be 0 or 1");
  const Eigen::Index yc = table.column(f.response);
  auto cols = [&](const std::vector<std::string>& names) {
    std::vector<Eigen::Index> out;
    for (const auto& n : names) {
      if (n == f.response) throw InputError("response '" + n + "' cannot be a covariate");
      out.push_back(table.column(n));
    }
    return out;
  };
  const auto cs = cols(f.discrete), cx = cols(f.mean), cz = cols(f.precision);
  const std::set<int> drop(drop_rows.begin(), drop_rows.end());
  for (int r : drop)
    if (r < 1 || r > table.values.rows())
      throw InputError("--drop-rows: row " + std::to_string(r) + " is outside 1.." +
                       std::to_string(table.values.rows()));
  std::vector<Eigen::Index> keep;
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < table.values.rows(); ++i)
    if (!drop.count(static_cast<int>(i) + 1)) {
      keep.push_back(i);
      rows.push_back(static_cast<int>(i) + 1);
    }
  Vector y(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) y[static_cast<Eigen::Index>(k)] = table.values(keep[k], yc);
  return {ObservationSet(f.c, y, design(table, cs, keep), design(table, cx, keep), design(table, cz, keep)), rows};
}

std::vector<std::string> parameter_names(const ModelFormula& f) {
  std::vector<std::string> out;
  auto add = [&](const char* part, const std::vector<std::string>& cols) {
    out.push_back(std::string(part) + ":(Intercept)");
    for (const auto& c : cols) out.push_back(std::string(part) + ":" + c);
  };
  add("discrete", f.discrete);
  add("mean", f.mean);
  add("precision", f.precision);
  return out;
}

void write_fit_artifact(const std::filesystem::path& path, const FitArtifact& a) {
  const FitResult& r = a.fit;
  json cov = json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) cov.push_back(vec(r.covariance.row(i).transpose()));
  json j = {
      {"schema_version", FitArtifact::kSchemaVersion},
      {"data", {{"path", a.data_path}, {"drop_rows", a.drop_rows}, {"n", a.n}, {"n_dagger", a.n_dagger}}},
      {"formula",
       {{"response", a.formula.response},
        {"c", a.formula.c},
        {"discrete", a.formula.discrete},
        {"mean", a.formula.mean},
        {"precision", a.formula.precision}}},
      {"links",
       {{"theta", std::string(r.links.theta.name())},
        {"mu", std::string(r.links.mu.name())},
        {"phi", std::string(r.links.phi.name())}}},
      {"estimator", std::string(estimator_name(r.estimator))},
      {"alpha", {{"disc", r.alpha.alpha_disc}, {"cont", r.alpha.alpha_cont}}},
      {"seed", a.seed},
      {"tuned", a.tuned},
      {"parameters", parameter_names(a.formula)},
      {"estimate", {{"kappa", vec(r.estimate.kappa)}, {"beta", vec(r.estimate.beta)}, {"gamma", vec(r.estimate.gamma)}}},
      {"se", vec(r.se)},
      {"covariance", cov},
      {"convergence", {{"discrete", report_json(r.discrete)}, {"continuous", report_json(r.continuous)}}},
  };
  if (a.tuned) j["tuning"] = {{"discrete", trace_json(a.discrete_trace)}, {"continuous", trace_json(a.continuous_trace)}};
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setw(2) << j << '\n';
}

FitArtifact read_fit_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fit artifact " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("schema_version").get<int>() != FitArtifact::kSchemaVersion)
      throw InputError("fit artifact " + path.string() + " has an unsupported schema version");
    FitArtifact a;
    a.data_path = j.at("data").at("path").get<std::string>();
    a.drop_rows = j.at("data").at("drop_rows").get<std::vector<int>>();
    a.n = j.at("data").at("n").get<Eigen::Index>();
    a.n_dagger = j.at("data").at("n_dagger").get<Eigen::Index>();
    const json& f = j.at("formula");
    a.formula.response = f.at("response").get<std::string>();
    a.formula.c = f.at("c").get<int>();
    a.formula.discrete = f.at("discrete").get<std::vector<std::string>>();
    a.formula.mean = f.at("mean").get<std::vector<std::string>>();
    a.formula.precision = f.at("precision").get<std::vector<std::string>>();
    const json& l = j.at("links");
    a.formula.links = {Link::from_name(l.at("theta").get<std::string>()), Link::from_name(l.at("mu").get<std::string>()),
                       Link::from_name(l.at("phi").get<std::string>())};
    FitResult& r = a.fit;
    r.links = a.formula.links;
    r.estimator = estimator_from_name(j.at("estimator").get<std::string>());
    r.alpha = {j.at("alpha").at("disc").get<double>(), j.at("alpha").at("cont").get<double>()};
    a.seed = j.at("seed").get<std::uint64_t>();
    a.tuned = j.at("tuned").get<bool>();
    const json& e = j.at("estimate");
    r.estimate.kappa = to_vector(e.at("kappa"));
    r.estimate.beta = to_vector(e.at("beta"));
    r.estimate.gamma = to_vector(e.at("gamma"));
    r.se = to_vector(j.at("se"));
    const json& cov = j.at("covariance");
    r.covariance.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(cov.size()));
    for (std::size_t i = 0; i < cov.size(); ++i) r.covariance.row(static_cast<Eigen::Index>(i)) = to_vector(cov[i]);
    r.discrete = report_from(j.at("convergence").at("discrete"));
    r.continuous = report_from(j.at("convergence").at("continuous"));
    if (a.tuned) {
      a.discrete_trace = trace_from(j.at("tuning").at("discrete"));
      a.continuous_trace = trace_from(j.at("tuning").at("continuous"));
    }
    return a;
  } catch (const json::exception& err) {
    throw InputError("malformed fit artifact " + path.string() + ": " + err.what());
  }
}

void write_coefficients_csv(std::ostream& os, const std::vector<std::string>& names,
                            const std::vector<const FitResult*>& fits) {
  os << "estimator,parameter,estimate,se,z,p_value\n" << std::setprecision(10);
  for (const FitResult* f : fits) {
    const Vector est = f->estimate.flat();
    for (Eigen::Index k = 0; k < est.size(); ++k) {
      os << estimator_name(f->estimator) << ',' << names[static_cast<std::size_t>(k)] << ',' << est[k];
      if (f->se.size() == est.size() && f->se[k] > 0.0 && std::isfinite(f->se[k])) {
        const WaldTest w = wald_test(est[k], f->se[k], 0.0);
        os << ',' << f->se[k] << ',' << w.z << ',' << w.p_value << '\n';
      } else {
        os << ",NA,NA,NA\n";
      }
    }
  }
}

void write_report(std::ostream& os, const std::vector<std::string>& names, const std::vector<const FitArtifact*>& fits) {
  if (fits.empty()) return;
  const FitArtifact& first = *fits.front();
  os << "Inflated beta regression (c = " << first.formula.c << "), response " << first.formula.response << "\n";
  os << "data: " << first.data_path << ", n = " << first.n << " (" << first.n_dagger << " in (0,1))";
  if (!first.drop_rows.empty()) {
    os << ", dropped rows:";
    for (int r : first.drop_rows) os << ' ' << r;
  }
  os << "\nlinks: theta " << first.fit.links.theta.name() << ", mu " << first.fit.links.mu.name() << ", phi "
     << first.fit.links.phi.name() << "\nseed: " << first.seed << "\n\n";

  constexpr int w = 10;
  os << std::left << std::setw(24) << "";
  for (const FitArtifact* a : fits) {
    std::ostringstream head;
    head << estimator_name(a->fit.estimator);
    if (a->fit.estimator != EstimatorKind::mle)
      head << " (alpha " << fmt(a->fit.alpha.alpha_disc, 2) << ", " << fmt(a->fit.alpha.alpha_cont, 2) << ")";
    os << std::left << std::setw(4 * w + 2) << head.str();
  }
  os << '\n' << std::setw(24) << "";
  for (std::size_t k = 0; k < fits.size(); ++k)
    os << std::right << std::setw(w) << "Estimate" << std::setw(w) << "SE" << std::setw(w) << "z" << std::setw(w)
       << "p-value" << "  ";
  os << '\n';
  std::string part;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto colon = names[k].find(':');
    const std::string p = names[k].substr(0, colon);
    if (p != part) {
      part = p;
      os << (k ? "\n" : "") << p << " submodel\n";
    }
    os << std::left << std::setw(24) << ("  " + names[k].substr(colon + 1));
    for (const FitArtifact* a : fits) {
      const double est = a->fit.estimate.flat()[static_cast<Eigen::Index>(k)];
      const double se = a->fit.se.size() ? a->fit.se[static_cast<Eigen::Index>(k)] : std::nan("");
      double z = std::nan(""), pv = std::nan("");
      if (se > 0.0 && std::isfinite(se)) {
        const WaldTest t = wald_test(est, se, 0.0);
        z = t.z;
        pv = t.p_value;
      }
      os << std::right << std::setw(w) << fmt(est) << std::setw(w) << fmt(se) << std::setw(w) << fmt(z)
         << std::setw(w) << fmt(pv) << "  ";
    }
    os << '\n';
  }
  os << '\n';
  for (const FitArtifact* a : fits) {
    const FitResult& r = a->fit;
    os << estimator_name(r.estimator) << ": discrete part " << (r.discrete.converged ? "converged" : "did not converge")
       << " in " << r.discrete.iterations << " iterations, continuous part "
       << (r.continuous.converged ? "converged" : "did not converge") << " in " << r.continuous.iterations
       << " iterations";
    if (a->tuned) {
      os << "; alpha selected by SQV: discrete " << fmt(a->discrete_trace.chosen_alpha, 2)
         << (a->discrete_trace.fallback_to_zero ? " (fallback)" : "") << ", continuous "
         << fmt(a->continuous_trace.chosen_alpha, 2) << (a->continuous_trace.fallback_to_zero ? " (fallback)" : "");
    }
    os << '\n';
  }
}

}  // namespace ibreg
