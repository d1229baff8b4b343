#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace qtf {

/// d_a x d_b coincidence counts in one labeled basis pair.
struct JointCountMatrix {
  int d_a = 0;
  int d_b = 0;
  std::vector<std::uint64_t> counts;  // row-major
  std::string basis_a = "time";
  std::string basis_b = "time";
  double acquisition_seconds = 0.0;
  // Binning parameters and bookkeeping (tau_ps, n_bins, step_ghz, spillover,
  // matched_pairs, ...), carried through the CSV header.
  std::map<std::string, std::string> meta;

  static JointCountMatrix zeros(int d_a, int d_b, std::string basis_a,
                                std::string basis_b);

  std::uint64_t& at(int i, int j) { return counts[static_cast<std::size_t>(i) * d_b + j]; }
  std::uint64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * d_b + j]; }
  std::uint64_t total() const;
};

/// counts / total; throws std::runtime_error on an all-zero matrix.
Eigen::MatrixXd normalize(const JointCountMatrix& m);

/// Contiguous d x d block with rows/cols [offset, offset + d).
JointCountMatrix subspace(const JointCountMatrix& m, int d, int offset);

// CSV exchange format: two '#' comment lines (basis labels / dimensions /
// acquisition time, then binning meta), followed by one comma-separated row
// of counts per a-outcome.
void write_matrix_csv(const JointCountMatrix& m, std::ostream& out);
void write_matrix_csv_file(const JointCountMatrix& m, const std::string& path);
JointCountMatrix read_matrix_csv(std::istream& in);
JointCountMatrix read_matrix_csv_file(const std::string& path);

}  // namespace qtf
