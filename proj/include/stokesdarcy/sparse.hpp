#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

namespace stokesdarcy {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Assembled linear system with Dirichlet handling. Constrained dofs carry a
/// finite value in `dirichlet`; free dofs carry NaN.
struct SparseSystem {
  int n = 0;
  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs;
  std::vector<double> dirichlet; // NaN = free

  explicit SparseSystem(int size = 0) { resize(size); }
  void resize(int size) {
    n = size;
    rhs = Eigen::VectorXd::Zero(size);
    dirichlet.assign(size, std::numeric_limits<double>::quiet_NaN());
  }
  bool constrained(int i) const { return !std::isnan(dirichlet[i]); }

  /// Eliminate constrained rows/columns: column contributions move to the
  /// right-hand side, constrained rows become identity equations.
  SparseMatrix constrained_matrix() {
    std::vector<Triplet> kept;
    kept.reserve(triplets.size() + n);
    for (const Triplet& t : triplets) {
      if (constrained(t.row())) continue;
      if (constrained(t.col())) {
        rhs[t.row()] -= t.value() * dirichlet[t.col()];
        continue;
      }
      kept.push_back(t);
    }
    for (int i = 0; i < n; ++i)
      if (constrained(i)) {
        kept.emplace_back(i, i, 1.0);
        rhs[i] = dirichlet[i];
      }
    SparseMatrix mat(n, n);
    mat.setFromTriplets(kept.begin(), kept.end());
    return mat;
  }
};

/// Direct sparse factorization, reusable across right-hand sides.
class SparseFactorization {
public:
  explicit SparseFactorization(const SparseMatrix& mat) : matrix_(mat) {
    solver_.compute(matrix_);
    if (solver_.info() != Eigen::Success)
      throw SingularSystemError("sparse factorization failed: structurally or numerically singular system");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success)
      throw SingularSystemError("sparse back-substitution failed");
    const double scale = matrix_norm_inf() * x.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
    const double res = (matrix_ * x - rhs).lpNorm<Eigen::Infinity>();
    if (!(res <= 1e-10 * scale + 1e-300))
      throw SingularSystemError("sparse solve residual too large: numerically singular system");
    return x;
  }

  const SparseMatrix& matrix() const { return matrix_; }

private:
  double matrix_norm_inf() const {
    if (norm_inf_ < 0.0) {
      Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(matrix_.rows());
      for (int k = 0; k < matrix_.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it)
          rowsum[it.row()] += std::abs(it.value());
      norm_inf_ = rowsum.maxCoeff();
    }
    return norm_inf_;
  }

  SparseMatrix matrix_;
  Eigen::SparseLU<SparseMatrix> solver_;
  mutable double norm_inf_ = -1.0;
};

/// One-shot direct solve of an assembled system.
inline Eigen::VectorXd solve_sparse(SparseSystem& system) {
  SparseMatrix mat = system.constrained_matrix();
  SparseFactorization lu(mat);
  return lu.solve(system.rhs);
}

inline SparseMatrix build_matrix(int n, const std::vector<Triplet>& trips) {
  SparseMatrix mat(n, n);
  mat.setFromTriplets(trips.begin(), trips.end());
  return mat;
}

/// Linear operator with eliminated Dirichlet rows/columns: keeps both the
/// unconstrained matrix (for residual evaluation) and a reusable
/// factorization of the constrained matrix.
class ConstrainedOperator {
public:
  ConstrainedOperator() = default;
  ConstrainedOperator(int n, const std::vector<Triplet>& trips, std::vector<double> dirichlet)
      : n_(n), dirichlet_(std::move(dirichlet)) {
    full_ = build_matrix(n, trips);
    std::vector<Triplet> kept;
    kept.reserve(trips.size());
    for (const Triplet& t : trips)
      if (!fixed(t.row()) && !fixed(t.col())) kept.push_back(t);
    for (int i = 0; i < n; ++i)
      if (fixed(i)) kept.emplace_back(i, i, 1.0);
    lu_ = std::make_shared<SparseFactorization>(build_matrix(n, kept));
  }

  bool fixed(int i) const { return !std::isnan(dirichlet_[i]); }
  const SparseMatrix& full() const { return full_; }
  const std::vector<double>& dirichlet() const { return dirichlet_; }

  /// Residual A x - b with constrained rows masked out (x is assumed to
  /// carry the Dirichlet values already).
  Eigen::VectorXd residual(const Eigen::VectorXd& x, const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd r = full_ * x - rhs;
    for (int i = 0; i < n_; ++i)
      if (fixed(i)) r[i] = 0.0;
    return r;
  }

  /// Solve with the stored Dirichlet values imposed on the solution.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return solve(rhs, dirichlet_); }

  /// Solve with updated Dirichlet values (same constrained set, e.g. the
  /// boundary data of a later time step reusing this factorization).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const std::vector<double>& dirichlet) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
    bool any = false;
    for (int i = 0; i < n_; ++i)
      if (fixed(i) && dirichlet[i] != 0.0) {
        g[i] = dirichlet[i];
        any = true;
      }
    Eigen::VectorXd r = any ? (rhs - full_ * g).eval() : rhs;
    for (int i = 0; i < n_; ++i)
      if (fixed(i)) r[i] = dirichlet[i];
    return lu_->solve(r);
  }

  /// Solve with homogeneous constraints (Newton corrections, linearized problems).
  Eigen::VectorXd solve_homogeneous(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd r = rhs;
    for (int i = 0; i < n_; ++i)
      if (fixed(i)) r[i] = 0.0;
    return lu_->solve(r);
  }

private:
  int n_ = 0;
  SparseMatrix full_;
  std::vector<double> dirichlet_;
  std::shared_ptr<SparseFactorization> lu_;
};

/// Family of step operators that share a single factorization. Stores each
/// member's constrained matrix and solves with GMRES preconditioned by a
/// factorization of one representative member; the anchor is refactored on
/// demand if a member drifts too far from it. Keeps memory bounded when a
/// trajectory has many steps with slowly varying (e.g. frozen-viscosity)
/// matrices, where one factorization per step would exhaust memory.
class SharedFactorizationFamily {
public:
  int add(int n, const std::vector<Triplet>& trips, const std::vector<double>& dirichlet) {
    std::vector<Triplet> kept;
    kept.reserve(trips.size());
    auto fixed = [&](int i) { return !std::isnan(dirichlet[i]); };
    for (const Triplet& t : trips)
      if (!fixed(t.row()) && !fixed(t.col())) kept.push_back(t);
    for (int i = 0; i < n; ++i)
      if (fixed(i)) kept.emplace_back(i, i, 1.0);
    mats_.push_back(build_matrix(n, kept));
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i)
      if (fixed(i)) mask[i] = 0.0;
    masks_.push_back(std::move(mask));
    return static_cast<int>(mats_.size()) - 1;
  }

  int size() const { return static_cast<int>(mats_.size()); }

  /// Solve member k against `rhs` with homogeneous values on constrained dofs.
  Eigen::VectorXd solve_homogeneous(int k, const Eigen::VectorXd& rhs) const {
    const SparseMatrix& A = mats_[k];
    Eigen::VectorXd b = rhs.cwiseProduct(masks_[k]);
    const double bnorm = b.norm();
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(A.rows());
    if (!anchor_) refactor(size() / 2);
    Eigen::VectorXd x;
    if (preconditioned_gmres(A, b, bnorm, x)) return x;
    // The anchor no longer represents this member well: refactor on it and
    // solve directly (memory stays at one factorization).
    refactor(k);
    return anchor_->solve(b);
  }

private:
  void refactor(int k) const { anchor_ = std::make_shared<SparseFactorization>(mats_[k]); }

  // Right-preconditioned GMRES (modified Gram-Schmidt, Givens residual
  // tracking): solve A M^{-1} y = b with M the anchor factorization.
  bool preconditioned_gmres(const SparseMatrix& A, const Eigen::VectorXd& b,
                            double bnorm, Eigen::VectorXd& x) const {
    constexpr double tol = 1e-12;
    constexpr int maxit = 80;
    const int n = static_cast<int>(b.size());
    std::vector<Eigen::VectorXd> V;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(maxit + 1, maxit);
    Eigen::VectorXd cs = Eigen::VectorXd::Zero(maxit), sn = Eigen::VectorXd::Zero(maxit);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(maxit + 1);
    V.push_back(b / bnorm);
    g[0] = bnorm;
    int j = 0;
    for (; j < maxit; ++j) {
      Eigen::VectorXd w = A * anchor_->solve(V[j]);
      for (int i = 0; i <= j; ++i) {
        H(i, j) = V[i].dot(w);
        w -= H(i, j) * V[i];
      }
      H(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      const bool done = std::abs(g[j + 1]) <= tol * bnorm;
      if (!done && j + 1 < maxit) {
        if (w.norm() == 0.0) return false;
        V.push_back(w / w.norm());
        continue;
      }
      // Assemble the iterate (converged or out of budget).
      Eigen::VectorXd y = H.topLeftCorner(j + 1, j + 1)
                              .triangularView<Eigen::Upper>()
                              .solve(g.head(j + 1));
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (int i = 0; i <= j; ++i) z += y[i] * V[i];
      x = anchor_->solve(z);
      if (done) return true;
      return (A * x - b).norm() <= tol * bnorm;
    }
    return false;
  }

  std::vector<SparseMatrix> mats_;
  std::vector<Eigen::VectorXd> masks_;
  mutable std::shared_ptr<SparseFactorization> anchor_;
};

} // namespace stokesdarcy
