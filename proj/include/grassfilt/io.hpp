#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "grassfilt/error.hpp"
#include "grassfilt/graph.hpp"

namespace grassfilt {
namespace io {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::IoError, "cannot parse '" + s + "' as a number (" + context + ")");
  }
}

inline int parse_int(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::IoError, "cannot parse '" + s + "' as an integer (" + context + ")");
  }
}

/// Edge list with header `src,dst,weight`; the weight column is optional
/// and defaults to 1.0. Vertex count is the largest index + 1 unless a
/// larger`n_hint` is given.
inline Graph read_edge_csv(const std::string& path, bool signed_ok = false, int n_hint = 0) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, path + " is empty");
  std::vector<std::tuple<int, int, double>> edges;
  int n = n_hint;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() < 2)
      fail(ErrorCode::IoError, path + ":" + std::to_string(lineno) + ": expected src,dst[,weight]");
    int i = parse_int(cells[0], path);
    int j = parse_int(cells[1], path);
    double w = cells.size() > 2 && !cells[2].empty() ? parse_double(cells[2], path) : 1.0;
    n = std::max({n, i + 1, j + 1});
    edges.emplace_back(i, j, w);
  }
  return build_graph(n, std::move(edges), signed_ok);
}

inline void write_edge_csv(const std::string& path, const Graph& g) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  std::fputs("src,dst,weight\n", f);
  for (const auto& e : g.edges) std::fprintf(f, "%d,%d,%.17g\n", e.i, e.j, e.w);
  std::fclose(f);
}

struct FeatureTable {
  std::vector<int> ids;
  Eigen::MatrixXd features;
};

/// Feature table with header `id,f0,...,f{d-1}`.
inline FeatureTable read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, path + " is empty");
  const std::size_t d = split_csv_line(line).size() - 1;
  if (d == 0) fail(ErrorCode::IoError, path + ": no feature columns");
  std::vector<int> ids;
  std::vector<double> data;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != d + 1)
      fail(ErrorCode::IoError, path + ":" + std::to_string(lineno) + ": ragged row");
    ids.push_back(parse_int(cells[0], path));
    for (std::size_t c = 1; c < cells.size(); ++c) data.push_back(parse_double(cells[c], path));
  }
  FeatureTable t;
  t.ids = std::move(ids);
  t.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), static_cast<Eigen::Index>(t.ids.size()), static_cast<Eigen::Index>(d));
  return t;
}

/// Label table with header `id,label`; ids absent from the file are
/// unlabeled.
inline std::vector<std::pair<int, int>> read_label_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::IoError, path + " is empty");
  std::vector<std::pair<int, int>> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2)
      fail(ErrorCode::IoError, path + ":" + std::to_string(lineno) + ": expected id,label");
    out.emplace_back(parse_int(cells[0], path), parse_int(cells[1], path));
  }
  return out;
}

/// Row-major matrix dump used for anchor serialization.
inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      std::fprintf(f, c ? ",%.17g" : "%.17g", m(r, c));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

inline Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::vector<double> data;
  std::string line;
  Eigen::Index rows = 0, cols = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cols < 0) cols = static_cast<Eigen::Index>(cells.size());
    if (static_cast<Eigen::Index>(cells.size()) != cols)
      fail(ErrorCode::IoError, path + ": ragged matrix row");
    for (auto& c : cells) data.push_back(parse_double(c, path));
    ++rows;
  }
  return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), rows, cols);
}

}  // namespace io
}  // namespace grassfilt
