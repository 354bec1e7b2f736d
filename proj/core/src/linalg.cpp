#include "linucbd/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "linucbd/error.hpp"

namespace linucbd {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kOffDiagonalTol = 1e-12;
constexpr int kMaxSweeps = 100;

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

Vector symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::kDimensionMismatch, "matrix is not square");
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol) {
        throw Error(ErrorCode::kAsymmetricMatrix, "matrix is not symmetric");
      }
    }
  }
  Matrix a = 0.5 * (m + m.transpose());
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) >= kOffDiagonalTol; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p,q); t is the smaller root.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  if (off_diagonal_norm(a) >= kOffDiagonalTol * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kNumericalFailure, "Jacobi iteration did not converge");
  }
  Vector eig = a.diagonal();
  std::sort(eig.data(), eig.data() + eig.size());
  return eig;
}

double lambda_min(const Matrix& m) { return symmetric_eigenvalues(m)(0); }

Vector solve_dense(Matrix a, Vector b) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "solve_dense needs a square system");
  }
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index col = 0; col < n; ++col) {
    Eigen::Index pivot = col;
    for (Eigen::Index r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (std::abs(a(pivot, col)) <= 1e-14 * scale) {
      throw Error(ErrorCode::kSingularSystem, "singular linear system");
    }
    if (pivot != col) {
      a.row(pivot).swap(a.row(col));
      std::swap(b(pivot), b(col));
    }
    for (Eigen::Index r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      if (factor == 0.0) continue;
      a.row(r).tail(n - col) -= factor * a.row(col).tail(n - col);
      b(r) -= factor * b(col);
    }
  }
  Vector x(n);
  for (Eigen::Index r = n - 1; r >= 0; --r) {
    double acc = b(r);
    for (Eigen::Index k = r + 1; k < n; ++k) acc -= a(r, k) * x(k);
    x(r) = acc / a(r, r);
  }
  return x;
}

}  // namespace linucbd
