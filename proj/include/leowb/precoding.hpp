// leowb/precoding.hpp
//
// Regularized zero-forcing digital precoder on the effective channel and the
// Shannon sum-rate evaluated on the full channel.

#pragma once

#include <span>

#include "leowb/types.hpp"

namespace leowb {

struct Precoder {
  ComplexMatrix F_BB;  ///< N_RF x K, already normalized
  double scale = 1.0;  ///< factor applied to H_eff^H A^-1
  double P_t = 0.0;    ///< watts
};

struct RateReport {
  RealVector per_ut_rate;  ///< bits/s/Hz
  RealVector sinr;         ///< linear
  double sum_rate = 0.0;
};

/// F_BB = H_eff^H A^-1 scaled so that ||F_RF F_BB||_F^2 = P_t.
/// Throws ZeroPrecoder when the unscaled hybrid precoder vanishes.
Precoder rzf_precoder(const ComplexMatrix& H_eff, const ComplexMatrix& A_inv,
                      const ComplexMatrix& F_RF, double P_t);

/// Same precoder given F_RF^H F_RF instead of F_RF, which avoids touching the
/// N_t-sized analog stage when several precoders share one snapshot.
Precoder rzf_precoder_rf_gram(const ComplexMatrix& H_eff, const ComplexMatrix& A_inv,
                              const ComplexMatrix& rf_gram, double P_t);

/// Per-UT SINR |g_nn|^2 / (sum_{i != n} |g_ni|^2 + sigma_n^2) with
/// G = H F_RF F_BB, and rates log2(1 + SINR).
RateReport sum_rate(const ComplexMatrix& H, const ComplexMatrix& F_RF, const Precoder& precoder,
                    std::span<const double> noise);

/// sum_rate with H F_RF precomputed (K x N_RF).
RateReport sum_rate_hybrid(const ComplexMatrix& H_hybrid, const Precoder& precoder,
                           std::span<const double> noise);

/// Default regularization K * mean(sigma_n^2 / gamma_n^2) / P_t: the MMSE
/// loading for a channel whose rows were normalized by their LOS gain gamma_n.
double default_regularization(std::span<const double> noise, std::span<const double> gamma,
                              double P_t);

}  // namespace leowb
