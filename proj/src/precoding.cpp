#include "leowb/precoding.hpp"

#include <algorithm>
#include <cmath>

namespace leowb {

namespace {

void check_precoder_args(const ComplexMatrix& H_eff, const ComplexMatrix& A_inv, double P_t) {
  const auto K = H_eff.rows();
  if (A_inv.rows() != K || A_inv.cols() != K)
    throw DimensionMismatch("rzf_precoder: A_inv must be K x K");
  if (!(P_t > 0.0)) throw InvalidArgument("rzf_precoder: P_t must be positive");
}

Precoder normalized(ComplexMatrix F_BB, double hybrid_norm, double P_t) {
  if (!(hybrid_norm > 0.0)) throw ZeroPrecoder("rzf_precoder: ||F_RF F_BB||_F is zero");
  Precoder p;
  p.P_t = P_t;
  p.scale = std::sqrt(P_t) / hybrid_norm;
  p.F_BB = std::move(F_BB) * p.scale;
  return p;
}

}  // namespace

Precoder rzf_precoder(const ComplexMatrix& H_eff, const ComplexMatrix& A_inv,
                      const ComplexMatrix& F_RF, double P_t) {
  check_precoder_args(H_eff, A_inv, P_t);
  if (F_RF.cols() != H_eff.cols())
    throw DimensionMismatch("rzf_precoder: F_RF column count differs from N_RF");
  ComplexMatrix F_BB = H_eff.adjoint() * A_inv;
  const double norm = (F_RF * F_BB).norm();
  return normalized(std::move(F_BB), norm, P_t);
}

Precoder rzf_precoder_rf_gram(const ComplexMatrix& H_eff, const ComplexMatrix& A_inv,
                              const ComplexMatrix& rf_gram, double P_t) {
  check_precoder_args(H_eff, A_inv, P_t);
  if (rf_gram.rows() != H_eff.cols() || rf_gram.cols() != H_eff.cols())
    throw DimensionMismatch("rzf_precoder: rf_gram must be N_RF x N_RF");
  ComplexMatrix F_BB = H_eff.adjoint() * A_inv;
  // ||F_RF F_BB||_F^2 = tr(F_BB^H (F_RF^H F_RF) F_BB)
  const double sq = (F_BB.conjugate().array() * (rf_gram * F_BB).array()).sum().real();
  return normalized(std::move(F_BB), std::sqrt(std::max(sq, 0.0)), P_t);
}

RateReport sum_rate_hybrid(const ComplexMatrix& H_hybrid, const Precoder& precoder,
                           std::span<const double> noise) {
  const auto K = H_hybrid.rows();
  if (precoder.F_BB.rows() != H_hybrid.cols() || precoder.F_BB.cols() != K ||
      static_cast<Eigen::Index>(noise.size()) != K)
    throw DimensionMismatch("sum_rate: inconsistent shapes");

  const ComplexMatrix G = H_hybrid * precoder.F_BB;  // K x K
  RateReport rep;
  rep.sinr.resize(K);
  rep.per_ut_rate.resize(K);
  rep.sum_rate = 0.0;
  for (Eigen::Index n = 0; n < K; ++n) {
    const double noise_n = noise[static_cast<std::size_t>(n)];
    if (!(noise_n > 0.0)) throw InvalidArgument("sum_rate: noise variances must be positive");
    const double signal = std::norm(G(n, n));
    const double interference = G.row(n).squaredNorm() - signal;
    rep.sinr(n) = signal / (std::max(interference, 0.0) + noise_n);
    rep.per_ut_rate(n) = std::log2(1.0 + rep.sinr(n));
    rep.sum_rate += rep.per_ut_rate(n);
  }
  return rep;
}

RateReport sum_rate(const ComplexMatrix& H, const ComplexMatrix& F_RF, const Precoder& precoder,
                    std::span<const double> noise) {
  if (F_RF.rows() != H.cols()) throw DimensionMismatch("sum_rate: inconsistent shapes");
  return sum_rate_hybrid(H * F_RF, precoder, noise);
}

double default_regularization(std::span<const double> noise, std::span<const double> gamma,
                              double P_t) {
  if (noise.empty() || noise.size() != gamma.size())
    throw InvalidArgument("default_regularization: noise and gain lists must match and be non-empty");
  double acc = 0.0;
  for (std::size_t n = 0; n < noise.size(); ++n) acc += noise[n] / (gamma[n] * gamma[n]);
  const double K = static_cast<double>(noise.size());
  return K * (acc / K) / P_t;
}

}  // namespace leowb
