#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>

#include "speclab/errors.hpp"
#include "speclab/solve.hpp"

namespace speclab {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

SpMat to_eigen(const CsrMatrix& a, const CsrMatrix* b = nullptr, double shift = 0.0) {
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(a.nnz() + (b ? b->nnz() : 0));
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t k = a.rowPtr[i]; k < a.rowPtr[i + 1]; ++k) t.emplace_back(static_cast<int>(i), a.colIdx[k], a.values[k]);
  if (b && shift != 0.0)
    for (std::size_t i = 0; i < b->n; ++i)
      for (std::size_t k = b->rowPtr[i]; k < b->rowPtr[i + 1]; ++k)
        t.emplace_back(static_cast<int>(i), b->colIdx[k], -shift * b->values[k]);
  SpMat s(static_cast<int>(a.n), static_cast<int>(a.n));
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

/// ||K x - lambda M x|| / ||M x|| with lambda the Rayleigh quotient.
double residual(const SpMat& K, const SpMat& M, const Vec& x, double lambda) {
  const Vec mx = M * x;
  const double denom = mx.norm();
  return denom > 0.0 ? (K * x - lambda * mx).norm() / denom : 0.0;
}

bool acceptable(double res, double lambda, double tol) { return res <= tol * std::max(1.0, std::abs(lambda)); }

DofEigenpairs pack(const Vec& lambdas, const Mat& U, const SpMat& K, const SpMat& M, int applications) {
  DofEigenpairs out;
  out.operatorApplications = applications;
  for (int i = 0; i < lambdas.size(); ++i) {
    out.values.push_back(lambdas[i]);
    const Vec u = U.col(i);
    out.vectors.emplace_back(u.data(), u.data() + u.size());
    out.residuals.push_back(residual(K, M, u, lambdas[i]));
  }
  return out;
}

DofEigenpairs dense_eigenpairs(const SpMat& K, const SpMat& M, int k) {
  const Mat Kd = Mat(K);
  const Mat Md = Mat(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Kd, Md);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
  return pack(es.eigenvalues().head(k), es.eigenvectors().leftCols(k), K, M, 0);
}

}  // namespace

struct ShiftedFactorization::Impl {
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  bool pd = false;
};

ShiftedFactorization::ShiftedFactorization(const CsrMatrix& A, const CsrMatrix& B, double shift)
    : impl_(std::make_unique<Impl>()) {
  if (A.n != B.n) throw SolverError("ShiftedFactorization: dimension mismatch");
  impl_->ldlt.compute(to_eigen(A, &B, shift));
  if (impl_->ldlt.info() == Eigen::Success) {
    const Vec d = impl_->ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    impl_->pd = d.size() > 0 && d.minCoeff() > 1e-10 * dmax;
  }
}

ShiftedFactorization::~ShiftedFactorization() = default;
ShiftedFactorization::ShiftedFactorization(ShiftedFactorization&&) noexcept = default;
ShiftedFactorization& ShiftedFactorization::operator=(ShiftedFactorization&&) noexcept = default;

bool ShiftedFactorization::positive_definite() const { return impl_->pd; }

void ShiftedFactorization::solve(std::span<const double> rhs, std::span<double> out) const {
  const Eigen::Map<const Vec> r(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  Eigen::Map<Vec> o(out.data(), static_cast<Eigen::Index>(out.size()));
  o = impl_->ldlt.solve(r);
}

DofEigenpairs smallest_eigenpairs(const CsrMatrix& Kc, const CsrMatrix& Mc, int k, const EigenOptions& opts) {
  if (Kc.n != Mc.n) throw SolverError("smallest_eigenpairs: K and M differ in size");
  if (!(opts.tol >= 1e-12 && opts.tol <= 1e-6)) throw SolverError("smallest_eigenpairs: tol outside [1e-12, 1e-6]");
  const int n = static_cast<int>(Kc.n);
  if (k < 1 || k > n)
    throw SolverError("smallest_eigenpairs: k=" + std::to_string(k) + " invalid for dimension " + std::to_string(n));

  const SpMat K = to_eigen(Kc);
  const SpMat M = to_eigen(Mc);
  const int b = std::clamp(opts.blockSize, 1, 8);
  int m = std::max({2 * k + 2 * b, k + 6 * b, 20});
  m = (m + b - 1) / b * b;
  if (n <= 400 || m + 2 * b > n / 2) return dense_eigenpairs(K, M, k);

  // Shift-invert operator (K - shift M)^{-1} M; the shift lies below the spectrum.
  std::optional<ShiftedFactorization> fac;
  double shift = 0.0;
  if (opts.shift) {
    shift = *opts.shift;
    fac.emplace(Kc, Mc, shift);
    if (!fac->positive_definite()) throw SolverError("K - shift*M is not positive definite for the requested shift");
  } else {
    for (double s : {0.0, -1.0, -10.0, -100.0}) {
      fac.emplace(Kc, Mc, s);
      shift = s;
      if (fac->positive_definite()) break;
    }
    if (!fac->positive_definite()) throw SolverError("could not find a shift below the spectrum");
  }

  const int cap = m + 2 * b;
  Mat V = Mat::Zero(n, cap);
  Mat MV = Mat::Zero(n, cap);
  Mat T = Mat::Zero(cap, cap);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  int applications = 0;

  // M-orthonormalise w against V[:, 0:c] (two passes), append it as column c.
  // Returns the coefficients and the norm of the remainder.
  auto append = [&](Vec w, int c, Vec& coeff) -> double {
    coeff = Vec::Zero(c);
    const double before = std::sqrt(std::max(0.0, w.dot(M * w)));
    for (int pass = 0; pass < 2; ++pass) {
      const Vec h = MV.leftCols(c).transpose() * w;
      w -= V.leftCols(c) * h;
      coeff += h;
    }
    Vec mw = M * w;
    double norm = std::sqrt(std::max(0.0, w.dot(mw)));
    double reported = norm;
    for (int attempt = 0; norm <= 1e-10 * before || norm == 0.0; ++attempt) {
      // Invariant subspace: continue with a fresh random direction.
      if (attempt > 10) throw SolverError("Krylov basis cannot be extended");
      reported = 0.0;
      for (int i = 0; i < n; ++i) w[i] = normal(rng);
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(c) * (MV.leftCols(c).transpose() * w);
      mw = M * w;
      norm = std::sqrt(std::max(0.0, w.dot(mw)));
    }
    V.col(c) = w / norm;
    MV.col(c) = mw / norm;
    return reported;
  };

  int c = 0;
  {
    Vec coeff;
    Vec w(n);
    for (int l = 0; l < b; ++l) {
      for (int i = 0; i < n; ++i) w[i] = normal(rng);
      append(w, c, coeff);
      ++c;
    }
  }

  double eta = opts.tol * 1e-2;
  std::vector<double> best;
  Vec rhs(n), w(n);
  while (true) {
    // Expand the trailing block until m columns have known images.
    while (c - b < m) {
      const int first = c - b;
      for (int l = 0; l < b; ++l) {
        const int j = first + l;
        rhs = MV.col(j);
        fac->solve({rhs.data(), static_cast<std::size_t>(n)}, {w.data(), static_cast<std::size_t>(n)});
        ++applications;
        Vec coeff;
        const double beta = append(w, c, coeff);
        T.block(0, j, c, 1) = coeff;
        T(c, j) = beta;
        ++c;
      }
    }
    const int mc = c - b;
    const Mat S = 0.5 * (T.topLeftCorner(mc, mc) + T.topLeftCorner(mc, mc).transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    if (es.info() != Eigen::Success) throw SolverError("projected eigenproblem failed");
    // Largest theta first.
    const Vec theta = es.eigenvalues().reverse();
    const Mat Y = es.eigenvectors().rowwise().reverse();
    const Mat B = T.block(mc, 0, b, mc);
    const Mat est = B * Y;

    bool estimated = true;
    for (int i = 0; i < k; ++i)
      if (est.col(i).norm() > eta * std::abs(theta[i])) estimated = false;

    if (estimated || applications >= opts.maxIterations) {
      // Rayleigh-Ritz with K and M on the wanted Ritz vectors.
      const Mat X = V.leftCols(mc) * Y.leftCols(k);
      const Mat KX = K * X;
      const Mat MX = M * X;
      const Mat Kp = 0.5 * (X.transpose() * KX + (X.transpose() * KX).transpose());
      const Mat Mp = 0.5 * (X.transpose() * MX + (X.transpose() * MX).transpose());
      Eigen::GeneralizedSelfAdjointEigenSolver<Mat> rr(Kp, Mp);
      if (rr.info() == Eigen::Success) {
        const Mat U = X * rr.eigenvectors();
        DofEigenpairs out = pack(rr.eigenvalues(), U, K, M, applications);
        bool ok = true;
        for (int i = 0; i < k; ++i) ok = ok && acceptable(out.residuals[static_cast<std::size_t>(i)], out.values[static_cast<std::size_t>(i)], opts.tol);
        if (ok) return out;
        best = out.residuals;
      }
      if (applications >= opts.maxIterations)
        throw SolverError("eigensolver did not converge within " + std::to_string(opts.maxIterations) + " operator applications",
                          best);
      eta = std::max(eta * 1e-2, 1e-15);
    }

    // Thick restart: keep the p best Ritz vectors plus the residual block.
    const int p = std::min(mc - b, std::max(k + b, k + (mc - k) / 2));
    const Mat keptV = V.leftCols(mc) * Y.leftCols(p);
    const Mat keptMV = MV.leftCols(mc) * Y.leftCols(p);
    const Mat resV = V.middleCols(mc, b);
    const Mat resMV = MV.middleCols(mc, b);
    const Mat coupling = est.leftCols(p);
    V.leftCols(p) = keptV;
    MV.leftCols(p) = keptMV;
    V.middleCols(p, b) = resV;
    MV.middleCols(p, b) = resMV;
    T.setZero();
    for (int i = 0; i < p; ++i) T(i, i) = theta[i];
    T.block(p, 0, b, p) = coupling;
    T.block(0, p, p, b) = coupling.transpose();
    c = p + b;
  }
}

EigenResult smallest_eigenpairs(const ReducedSystem& sys, int k, const EigenOptions& opts) {
  DofEigenpairs dp = smallest_eigenpairs(sys.K, sys.M, k, opts);
  EigenResult r;
  r.eigenvalues = dp.values;
  r.residuals = dp.residuals;
  r.operatorApplications = dp.operatorApplications;
  for (auto& u : dp.vectors) {
    double integral = 0.0, scale = 0.0, umax = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      integral += sys.load[i] * u[i];
      scale += std::abs(sys.load[i] * u[i]);
      umax = std::max(umax, std::abs(u[i]));
    }
    bool flip = false;
    if (std::abs(integral) > 1e-8 * scale) {
      flip = integral < 0.0;
    } else {
      auto nodal = sys.dofs.expand(u);
      for (double x : nodal)
        if (std::abs(x) > 1e-8 * umax) {
          flip = x < 0.0;
          break;
        }
    }
    if (flip)
      for (double& x : u) x = -x;
    r.vectors.push_back(sys.dofs.expand(u));
  }
  for (std::size_t i = 0; i + 1 < r.eigenvalues.size(); ++i) {
    const double a = r.eigenvalues[i], b = r.eigenvalues[i + 1];
    const double scale = std::max(std::abs(a), std::abs(b));
    r.multiplicityGapFlag.push_back(scale == 0.0 || std::abs(b - a) < 1e-6 * scale);
  }
  return r;
}

}  // namespace speclab
