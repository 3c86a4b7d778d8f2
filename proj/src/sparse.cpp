#include "speclab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "speclab/errors.hpp"

namespace speclab {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n || y.size() != n) throw Error("CsrMatrix::multiply: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = rowPtr[i]; k < rowPtr[i + 1]; ++k) s += values[k] * x[static_cast<std::size_t>(colIdx[k])];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n);
  multiply(x, y);
  return y;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto first = colIdx.begin() + static_cast<std::ptrdiff_t>(rowPtr[i]);
  const auto last = colIdx.begin() + static_cast<std::ptrdiff_t>(rowPtr[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != static_cast<int>(j)) return 0.0;
  return values[static_cast<std::size_t>(it - colIdx.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  return d;
}

double CsrMatrix::asymmetry() const {
  double amax = 0.0, dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = rowPtr[i]; k < rowPtr[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(colIdx[k]);
      amax = std::max(amax, std::abs(values[k]));
      dmax = std::max(dmax, std::abs(values[k] - at(j, i)));
    }
  return amax > 0.0 ? dmax / amax : 0.0;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix a;
  a.n = n;
  a.rowPtr.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) a.rowPtr[i] = i;
  a.colIdx.resize(n);
  for (std::size_t i = 0; i < n; ++i) a.colIdx[i] = static_cast<int>(i);
  a.values.assign(n, 1.0);
  return a;
}

CsrMatrix CsrMatrix::from_dense(std::size_t n, std::span<const double> dense) {
  if (dense.size() != n * n) throw Error("CsrMatrix::from_dense: size mismatch");
  CsrMatrix a;
  a.n = n;
  a.rowPtr.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (dense[i * n + j] != 0.0) {
        a.colIdx.push_back(static_cast<int>(j));
        a.values.push_back(dense[i * n + j]);
      }
    a.rowPtr.push_back(a.values.size());
  }
  return a;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void write_matrix_market(const CsrMatrix& a, std::ostream& os) {
  std::size_t lower = 0;
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t k = a.rowPtr[i]; k < a.rowPtr[i + 1]; ++k)
      if (static_cast<std::size_t>(a.colIdx[k]) <= i) ++lower;
  os << "%%MatrixMarket matrix coordinate real symmetric\n" << a.n << ' ' << a.n << ' ' << lower << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t k = a.rowPtr[i]; k < a.rowPtr[i + 1]; ++k)
      if (static_cast<std::size_t>(a.colIdx[k]) <= i) os << i + 1 << ' ' << a.colIdx[k] + 1 << ' ' << a.values[k] << '\n';
}

}  // namespace speclab
