#pragma once
// CSV input, model formulas and the JSON fit artifact.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ibreg/tuning.hpp"

namespace ibreg {

struct DataTable {
  std::vector<std::string> names;
  Matrix values;  ///< rows x columns

  Eigen::Index column(const std::string& name) const;  ///< throws InputError when absent
};

/// Header row, comma separated, decimal point; empty cells are rejected.
DataTable read_csv(std::istream& in, const std::string& source = "<stream>");
DataTable read_csv(const std::filesystem::path& path);

/// Column lists exclude the intercept, which is always added.
struct ModelFormula {
  std::string response;
  int c = 0;
  std::vector<std::string> discrete;
  std::vector<std::string> mean;
  std::vector<std::string> precision;
  LinkSpec links;
};

/// Splits "a,b , c" into names; empty input gives an empty list.
std::vector<std::string> split_columns(const std::string& list);

struct ModelData {
  ObservationSet obs;
  std::vector<int> rows;  ///< 1-based CSV data rows kept, in order
};

/// `drop_rows` holds 1-based data row numbers to exclude.
ModelData build_model_data(const DataTable& table, const ModelFormula& formula, const std::vector<int>& drop_rows = {});

std::vector<std::string> parameter_names(const ModelFormula& formula);

struct FitArtifact {
  static constexpr int kSchemaVersion = 1;
  std::string data_path;
  ModelFormula formula;
  std::vector<int> drop_rows;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  Eigen::Index n_dagger = 0;
  bool tuned = false;
  FitResult fit;
  TuningTrace discrete_trace;
  TuningTrace continuous_trace;
};

void write_fit_artifact(const std::filesystem::path& path, const FitArtifact& artifact);
FitArtifact read_fit_artifact(const std::filesystem::path& path);

/// Table of estimate, se, z and p per parameter, one block per fit.
void write_coefficients_csv(std::ostream& os, const std::vector<std::string>& names,
                            const std::vector<const FitResult*>& fits);
void write_report(std::ostream& os, const std::vector<std::string>& names, const std::vector<const FitArtifact*>& fits);

}  // namespace ibreg
