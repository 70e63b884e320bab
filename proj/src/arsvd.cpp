// Adaptive randomized SVD.
//
// Each pass draws a fresh K x d Gaussian sketch, orthonormalizes the range
// sample, and takes the SVD of the d x K projection. The pass succeeds when
// some prefix of the projected spectrum reaches eta * ||dA||_F^2; otherwise the
// working rank doubles. After max_iterations the last rank-d factor is
// returned unconditionally.

#include <algorithm>
#include <cmath>

#include "leowb/lowrank_inverse.hpp"

namespace leowb {

namespace {

// Thin QR with the diagonal of R made real and nonnegative.
ComplexMatrix orthonormal_basis(const ComplexMatrix& Y) {
  const auto m = Y.rows(), n = Y.cols();
  Eigen::HouseholderQR<ComplexMatrix> qr(Y);
  ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(m, n);
  const auto& R = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex rjj = R(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) Q.col(j) *= rjj / mag;
  }
  return Q;
}

LowRankFactor truncate(const ComplexMatrix& U, const RealVector& s, const ComplexMatrix& V,
                       Eigen::Index r) {
  // Numerically zero trailing values carry no energy and would break Sigma^-1.
  const double floor = s.size() > 0 ? s(0) * 1e-15 * static_cast<double>(U.rows()) : 0.0;
  while (r > 0 && !(s(r - 1) > floor)) --r;
  LowRankFactor f;
  f.U = U.leftCols(r);
  f.sigma = s.head(r);
  f.V = V.leftCols(r);
  return f;
}

}  // namespace

ArSvdResult arsvd(const ComplexMatrix& dA, const ArSvdConfig& cfg, RandomSource& rng) {
  if (dA.rows() != dA.cols()) throw DimensionMismatch("arsvd: matrix is not square");
  cfg.validate();

  const auto K = dA.rows();
  ArSvdResult out;
  out.total_energy = dA.squaredNorm();
  out.target_energy = cfg.eta * out.total_energy;
  if (K == 0 || out.total_energy == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::Index k0 = cfg.k_init;
  Eigen::Index d = 0;
  ComplexMatrix U_approx, V_hat;
  RealVector sig;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    out.iterations = it;
    d = std::min<Eigen::Index>(k0 + cfg.oversampling, K);

    const ComplexMatrix omega = rng.complex_normal_matrix(K, d);
    const ComplexMatrix Y = dA * omega;
    const ComplexMatrix Q = orthonormal_basis(Y);
    const ComplexMatrix B = Q.adjoint() * dA;  // d x K

    Eigen::JacobiSVD<ComplexMatrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    U_approx = Q * svd.matrixU();
    V_hat = svd.matrixV();
    sig = svd.singularValues();

    double cumulative = 0.0;
    for (Eigen::Index r = 1; r <= sig.size(); ++r) {
      cumulative += sig(r - 1) * sig(r - 1);
      if (cumulative >= out.target_energy) {
        out.converged = true;
        out.sketch_dim = static_cast<int>(d);
        out.captured_energy = cumulative;
        out.factor = truncate(U_approx, sig, V_hat, r);
        return out;
      }
    }
    k0 *= 2;
  }

  out.sketch_dim = static_cast<int>(d);
  out.factor = truncate(U_approx, sig, V_hat, d);
  out.captured_energy = out.factor.sigma.squaredNorm();
  return out;
}

}  // namespace leowb
