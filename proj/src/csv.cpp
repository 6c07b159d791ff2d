#include "fsamp/csv.hpp"

#include "fsamp/error.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace fsamp {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  return in;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kIo, path + ":" + std::to_string(line) + ": bad number '" + s + "'");
}

}  // namespace

void write_samples_csv(std::ostream& out, const Mat& rows, int dim) {
  for (int i = 0; i < dim; ++i) out << (i ? "," : "") << 'x' << i;
  out << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) out << (c ? "," : "") << rows(r, c);
    out << '\n';
  }
}

void write_samples_csv(const std::string& path, const Mat& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  write_samples_csv(out, rows, static_cast<int>(rows.cols()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path);
}

Mat read_samples_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kIo, path + ": missing header");
  const auto header = split(line);
  const int d = static_cast<int>(header.size());
  for (int i = 0; i < d; ++i) {
    if (header[i] != "x" + std::to_string(i)) {
      throw Error(ErrorCode::kIo, path + ": unexpected header column '" + header[i] + "'");
    }
  }
  std::vector<double> vals;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  path + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) + " columns");
    }
    for (const auto& c : cells) vals.push_back(parse_double(c, path, line_no));
  }
  const Eigen::Index n = d == 0 ? 0 : static_cast<Eigen::Index>(vals.size()) / d;
  Mat out(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) out(r, c) = vals[static_cast<std::size_t>(r * d + c)];
  }
  return out;
}

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "metric,value,n_samples,seed\n" << std::setprecision(17);
  for (const auto& r : rows) out << r.metric << ',' << r.value << ',' << r.n_samples << ',' << r.seed << '\n';
}

std::vector<EvalRow> read_eval_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (line != "metric,value,n_samples,seed") throw Error(ErrorCode::kIo, path + ": bad eval header");
  std::vector<EvalRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 4) throw Error(ErrorCode::kIo, path + ":" + std::to_string(line_no) + ": expected 4 columns");
    rows.push_back({c[0], parse_double(c[1], path, line_no), std::stoi(c[2]), std::stoull(c[3])});
  }
  return rows;
}

}  // namespace fsamp
