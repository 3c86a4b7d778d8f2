#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "speclab/assembly.hpp"
#include "speclab/sparse.hpp"

namespace speclab {

struct EigenOptions {
  /// Residual tolerance, relative to max(1, |lambda|).
  double tol = 1e-9;
  /// Cap on operator applications (single vectors).
  int maxIterations = 10000;
  /// Spectral shift; chosen automatically when unset (0 if K is positive
  /// definite, -1 otherwise).
  std::optional<double> shift;
  int blockSize = 3;
  std::uint64_t seed = 20231102;
};

/// Eigenpairs of the reduced pencil in DOF numbering.
struct DofEigenpairs {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  ///< M-orthonormal
  std::vector<double> residuals;             ///< ||K u - lambda M u|| / ||M u||
  int operatorApplications = 0;
};

/// k smallest eigenpairs of K u = lambda M u (K symmetric semidefinite,
/// M symmetric positive definite).
DofEigenpairs smallest_eigenpairs(const CsrMatrix& K, const CsrMatrix& M, int k, const EigenOptions& opts = {});

struct EigenResult {
  std::vector<double> eigenvalues;           ///< ascending
  std::vector<std::vector<double>> vectors;  ///< nodal, zero on constrained nodes
  std::vector<double> residuals;
  /// Entry i flags a relative gap below 1e-6 between pairs i and i+1.
  std::vector<bool> multiplicityGapFlag;
  int operatorApplications = 0;

  std::size_t size() const { return eigenvalues.size(); }
};

/// Smallest eigenpairs of a reduced system, expanded to nodal fields with the
/// sign convention  integral(u) > 0, ties broken by the first non-negligible
/// nodal value being positive.
EigenResult smallest_eigenpairs(const ReducedSystem& sys, int k, const EigenOptions& opts = {});

struct TorsionResult {
  std::vector<double> field;  ///< nodal values
  double rigidity = 0.0;      ///< integral of v
  double supNorm = 0.0;
};

/// Discrete torsion problem K v = (integrals of the hat functions).
TorsionResult solve_torsion(const ReducedSystem& sys, const Mesh& mesh, double tol = 1e-12);

/// Jacobi-preconditioned conjugate gradients for SPD A. Throws SolverError on
/// breakdown or when the iteration cap is hit.
std::vector<double> linear_solve(const CsrMatrix& A, std::span<const double> b, double tol = 1e-12,
                                 int maxIterations = 10000);

/// Sparse LDL^T factorisation of A - shift * B (fill-reducing ordering).
class ShiftedFactorization {
public:
  ShiftedFactorization(const CsrMatrix& A, const CsrMatrix& B, double shift);
  ~ShiftedFactorization();
  ShiftedFactorization(ShiftedFactorization&&) noexcept;
  ShiftedFactorization& operator=(ShiftedFactorization&&) noexcept;

  /// True when every pivot is positive and well separated from zero.
  bool positive_definite() const;
  void solve(std::span<const double> rhs, std::span<double> out) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace speclab
