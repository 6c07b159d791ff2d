#pragma once

#include "fsamp/geometry.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace fsamp {

// Sample files: header x0,...,x{d-1}, one sample per row, 17 significant digits.
void write_samples_csv(const std::string& path, const Mat& rows);
void write_samples_csv(std::ostream& out, const Mat& rows, int dim);
Mat read_samples_csv(const std::string& path);

struct EvalRow {
  std::string metric;
  double value = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

// Columns: metric,value,n_samples,seed.
void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows);
std::vector<EvalRow> read_eval_csv(const std::string& path);

}  // namespace fsamp
