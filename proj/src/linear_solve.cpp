#include <algorithm>
#include <cmath>

#include "speclab/errors.hpp"
#include "speclab/solve.hpp"

namespace speclab {

std::vector<double> linear_solve(const CsrMatrix& A, std::span<const double> b, double tol, int maxIterations) {
  const std::size_t n = A.n;
  if (b.size() != n) throw SolverError("linear_solve: right-hand side has wrong size");
  std::vector<double> x(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return x;

  std::vector<double> invDiag = A.diagonal();
  for (double& d : invDiag) {
    if (!(d > 0.0)) throw SolverError("linear_solve: non-positive diagonal entry");
    d = 1.0 / d;
  }
  std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = invDiag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  for (int it = 0; it < maxIterations; ++it) {
    A.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw SolverError("linear_solve: breakdown (matrix not positive definite)", {rel});
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rel = norm2(r) / bnorm;
    if (rel <= tol) return x;
    for (std::size_t i = 0; i < n; ++i) z[i] = invDiag[i] * r[i];
    const double rzNew = dot(r, z);
    const double beta = rzNew / rz;
    rz = rzNew;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("linear_solve: no convergence in " + std::to_string(maxIterations) + " iterations", {rel});
}

TorsionResult solve_torsion(const ReducedSystem& sys, const Mesh& mesh, double tol) {
  if (mesh.spec.bc != BoundaryCondition::Dirichlet) throw SolverError("solve_torsion requires a Dirichlet domain");
  const std::size_t n = sys.K.n;
  if (sys.load.size() != n) throw SolverError("solve_torsion: load has wrong size");

  // Direct solve, polished by iterative refinement.
  const CsrMatrix zero = CsrMatrix::identity(n);
  ShiftedFactorization fac(sys.K, zero, 0.0);
  if (!fac.positive_definite()) throw SolverError("solve_torsion: stiffness matrix is singular");
  std::vector<double> v(n, 0.0), r(sys.load), dv(n);
  const double bnorm = norm2(sys.load);
  double rel = 1.0;
  for (int it = 0; it < 5; ++it) {
    fac.solve(r, dv);
    for (std::size_t i = 0; i < n; ++i) v[i] += dv[i];
    const auto kv = sys.K * v;
    for (std::size_t i = 0; i < n; ++i) r[i] = sys.load[i] - kv[i];
    rel = norm2(r) / bnorm;
    if (rel <= tol) break;
  }
  if (rel > std::max(tol, 1e-10)) throw SolverError("solve_torsion: residual too large", {rel});

  TorsionResult t;
  t.rigidity = dot(sys.load, v);
  t.field = sys.dofs.expand(v);
  t.supNorm = *std::max_element(t.field.begin(), t.field.end());
  return t;
}

}  // namespace speclab
