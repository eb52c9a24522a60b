#include "obsgram/matrix_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "obsgram/errors.hpp"

namespace obsgram {

std::string MatrixFile::field(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return {};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_file(std::ostream& os, const MatrixFile& file) {
  os << "# obsgram-matrix v1\n";
  os << "# kind=" << file.kind << '\n';
  for (const auto& [k, v] : file.fields) os << "# " << k << '=' << v << '\n';
  os << file.data.rows() << ' ' << file.data.cols() << '\n';
  for (Eigen::Index i = 0; i < file.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < file.data.cols(); ++j) {
      if (j > 0) os << ' ';
      os << format_double(file.data(i, j));
    }
    os << '\n';
  }
}

MatrixFile read_matrix_file(std::istream& is) {
  MatrixFile file;
  std::string line;
  if (!std::getline(is, line) || line != "# obsgram-matrix v1") {
    throw ConfigError("not an obsgram matrix file");
  }
  while (is.peek() == '#') {
    std::getline(is, line);
    const auto eq = line.find('=');
    if (line.size() < 2 || eq == std::string::npos) {
      throw ConfigError("malformed matrix header line: " + line);
    }
    std::string key = line.substr(2, eq - 2);
    std::string value = line.substr(eq + 1);
    if (key == "kind") {
      file.kind = std::move(value);
    } else {
      file.fields.emplace_back(std::move(key), std::move(value));
    }
  }
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
    throw ConfigError("matrix file is missing its dimensions");
  }
  file.data.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      std::string token;
      if (!(is >> token)) throw ConfigError("matrix file is truncated");
      file.data(i, j) = std::stod(token);
    }
  }
  return file;
}

MatrixFile to_matrix_file(const GramianSample& sample) {
  MatrixFile file;
  file.kind = "gramian";
  std::ostringstream idx;
  for (std::size_t i = 0; i < sample.perturbed_indices.size(); ++i) {
    if (i > 0) idx << ',';
    idx << sample.perturbed_indices[i];
  }
  file.fields = {
      {"m", std::to_string(sample.dimension())},
      {"epsilon", format_double(sample.epsilon)},
      {"run_index", std::to_string(sample.run_index)},
      {"master_seed", std::to_string(sample.master_seed)},
      {"perturbed", idx.str()},
      {"stochastic", sample.stochastic ? "true" : "false"},
      {"integrator", sample.integrator},
  };
  file.data = sample.w;
  return file;
}

}  // namespace obsgram
