#pragma once
// Biorthogonal matrix-pair manifold.
//
// A pair (Phi, Psi) of n x m matrices (n >= m) subject to Psi^T Phi = I_m.
// Tangent vectors (xPhi, xPsi) satisfy xPsi^T Phi + Psi^T xPhi = 0; the
// normal space is spanned by (Psi L, Phi L^T) for arbitrary m x m L.
// Projecting an ambient gradient pair onto the tangent space therefore
// amounts to solving the Sylvester equation
//   (Psi^T Psi) L + L (Phi^T Phi) = Psi^T G_phi + G_psi^T Phi
// and subtracting the normal component.

#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ncae/rng.hpp"

namespace ncae {

/// Thrown when a retraction hits a numerically singular overlap matrix.
class RetractionSingularError : public std::runtime_error {
 public:
  explicit RetractionSingularError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A coupled (Phi, Psi) pair with Psi^T Phi = I. Phi feeds the decoder,
/// Psi^T the encoder.
struct BiorthPair {
  Eigen::MatrixXd phi;  // n x m
  Eigen::MatrixXd psi;  // n x m
};

/// Largest entry of |Psi^T Phi - I|; zero on the constraint set.
inline double biorthogonality_defect(const BiorthPair& p) {
  const Eigen::Index m = p.phi.cols();
  return (p.psi.transpose() * p.phi - Eigen::MatrixXd::Identity(m, m))
      .cwiseAbs()
      .maxCoeff();
}

/// Solves A L + L B = C for L, with A and B symmetric positive definite,
/// by Cholesky on the Kronecker-vectorized system (I (x) A + B^T (x) I).
inline Eigen::MatrixXd solve_sylvester_spd(const Eigen::MatrixXd& A,
                                           const Eigen::MatrixXd& B,
                                           const Eigen::MatrixXd& C) {
  const Eigen::Index n = A.rows();  // rows of the unknown L
  const Eigen::Index m = B.rows();  // cols of the unknown L
  if (A.cols() != n || B.cols() != m || C.rows() != n || C.cols() != m) {
    throw std::invalid_argument("sylvester solve: inconsistent shapes");
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n * m, n * m);
  // vec(A L) = (I_m (x) A) vec(L); vec(L B) = (B^T (x) I_n) vec(L).
  for (Eigen::Index jb = 0; jb < m; ++jb) {
    M.block(jb * n, jb * n, n, n) = A;
    for (Eigen::Index ib = 0; ib < m; ++ib) {
      // Block (jb, ib) of B^T (x) I_n carries B(ib, jb) on its diagonal.
      for (Eigen::Index d = 0; d < n; ++d) {
        M(jb * n + d, ib * n + d) += B(ib, jb);
      }
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "sylvester solve: Kronecker system is not positive definite");
  }
  Eigen::VectorXd vecC = Eigen::Map<const Eigen::VectorXd>(C.data(), n * m);
  Eigen::VectorXd vecL = llt.solve(vecC);
  return Eigen::Map<const Eigen::MatrixXd>(vecL.data(), n, m);
}

/// Projects an ambient gradient pair onto the tangent space at `point`:
/// the returned (t_phi, t_psi) satisfies t_psi^T Phi + Psi^T t_phi = 0.
inline void tangent_project(const BiorthPair& point,
                            const Eigen::MatrixXd& grad_phi,
                            const Eigen::MatrixXd& grad_psi,
                            Eigen::MatrixXd& t_phi, Eigen::MatrixXd& t_psi) {
  Eigen::MatrixXd A = point.psi.transpose() * point.psi;
  Eigen::MatrixXd B = point.phi.transpose() * point.phi;
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  const Eigen::MatrixXd C =
      point.psi.transpose() * grad_phi + grad_psi.transpose() * point.phi;
  const Eigen::MatrixXd L = solve_sylvester_spd(A, B, C);
  t_phi = grad_phi - point.psi * L;
  t_psi = grad_psi - point.phi * L.transpose();
}

/// Moves the pair by the given steps and restores the constraint:
/// Psi <- Psi + step_psi, Phi <- (Phi + step_phi) (Psi~^T Phi~)^{-1}.
/// Throws RetractionSingularError when the overlap matrix Psi~^T Phi~ has
/// condition number beyond 1e12 (step too large; caller should shrink it).
inline BiorthPair retract(const BiorthPair& point,
                          const Eigen::MatrixXd& step_phi,
                          const Eigen::MatrixXd& step_psi) {
  const Eigen::MatrixXd phi_moved = point.phi + step_phi;
  const Eigen::MatrixXd psi_moved = point.psi + step_psi;
  const Eigen::MatrixXd overlap = psi_moved.transpose() * phi_moved;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(overlap, Eigen::ComputeThinU |
                                                     Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || smax / smin > 1e12) {
    throw RetractionSingularError(
        "retraction failed: overlap matrix is numerically singular "
        "(condition " +
        std::to_string(smin > 0.0 ? smax / smin
                                  : std::numeric_limits<double>::infinity()) +
        ")");
  }
  BiorthPair out;
  out.psi = psi_moved;
  // Phi <- Phi~ (Psi~^T Phi~)^{-1} via the SVD already at hand.
  out.phi = phi_moved * svd.solve(Eigen::MatrixXd::Identity(overlap.rows(),
                                                            overlap.cols()));
  return out;
}

/// Random point on the manifold: thin-QR orthonormalization of a Gaussian
/// matrix, with Phi = Psi = Q (an orthonormal pair is biorthogonal).
inline BiorthPair init_biorthogonal(Eigen::Index rows, Eigen::Index cols,
                                    Rng& rng) {
  if (rows < cols || cols < 1) {
    throw std::invalid_argument(
        "biorthogonal pair needs rows >= cols >= 1, got " +
        std::to_string(rows) + " x " + std::to_string(cols));
  }
  Eigen::MatrixXd G(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      G(i, j) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  BiorthPair p;
  p.phi = Q;
  p.psi = Q;
  return p;
}

}  // namespace ncae
