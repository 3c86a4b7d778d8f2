#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace speclab {

/// Square sparse matrix in compressed-sparse-row form, columns sorted per row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> rowPtr{0};
  std::vector<int> colIdx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;

  /// Largest |A_ij - A_ji| relative to max |A_ij|, including pattern asymmetry.
  double asymmetry() const;

  static CsrMatrix identity(std::size_t n);
  /// Build from a dense row-major array, dropping exact zeros.
  static CsrMatrix from_dense(std::size_t n, std::span<const double> dense);
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Coordinate-format Matrix Market dump (symmetric, lower triangle).
void write_matrix_market(const CsrMatrix& a, std::ostream& os);

}  // namespace speclab
