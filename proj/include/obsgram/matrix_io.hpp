#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "obsgram/gramian.hpp"

namespace obsgram {

/// Plain-text matrix file:
///
///   # obsgram-matrix v1
///   # kind=<kind>
///   # <key>=<value>          (zero or more, in insertion order)
///   <rows> <cols>
///   <row 0 values, space separated, %.17g>
///   ...
///
/// Values round-trip exactly through read_matrix_file.
struct MatrixFile {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> fields;
  Eigen::MatrixXd data;

  /// Value of `key`, or empty when absent.
  std::string field(const std::string& key) const;
};

std::string format_double(double v);

void write_matrix_file(std::ostream& os, const MatrixFile& file);
MatrixFile read_matrix_file(std::istream& is);

/// Gramian with header fields m, epsilon, run_index, master_seed,
/// perturbed (comma-separated state indices), stochastic, integrator.
MatrixFile to_matrix_file(const GramianSample& sample);

}  // namespace obsgram
