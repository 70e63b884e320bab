// leowb/lowrank_inverse.hpp
//
// Maintains the inverse of the regularized Gram matrix A = H H^H + alpha I
// across effective-channel perturbations. A perturbation dA is compressed by
// an adaptive randomized SVD into U_r Sigma_r V_r^H; when the estimated rank is
// small relative to K the inverse is refreshed with the Woodbury identity,
// otherwise A' is inverted directly.
//
// Costs are tracked in dimensionless units with all big-O constants set to 1.

#pragma once

#include <cstdint>
#include <string_view>

#include "leowb/random.hpp"
#include "leowb/types.hpp"

namespace leowb {

// ---------------------------------------------------------------------------
// Cost model

/// K^3: direct inversion of a K x K matrix.
double cost_full(int K);

/// K^2 r + r^2 K: range sketch, projection and small SVD of a rank-r arSVD.
double cost_arsvd(int K, int r);

/// K^2 + K^2 r + r^3 + r^2 K: arSVD plus the Woodbury refresh.
double cost_wb_arsvd(int K, int r);

// ---------------------------------------------------------------------------
// Domain types

struct GramState {
  ComplexMatrix A;      ///< K x K Hermitian Gram matrix (possibly maintained)
  ComplexMatrix A_inv;  ///< its inverse
  double alpha = 0.0;
  double cost_accum = 0.0;
  /// Woodbury refreshes applied since the last direct inversion.
  int updates_since_inversion = 0;

  int users() const { return static_cast<int>(A.rows()); }
};

/// Truncated SVD triple U_r diag(sigma) V_r^H.
struct LowRankFactor {
  ComplexMatrix U;  ///< K x r, orthonormal columns
  RealVector sigma; ///< length r, positive, non-increasing
  ComplexMatrix V;  ///< K x r, orthonormal columns

  int k_est() const { return static_cast<int>(sigma.size()); }
  bool empty() const { return sigma.size() == 0; }
  ComplexMatrix reconstruct() const;
};

struct ArSvdConfig {
  double eta = 0.9;     ///< fraction of ||dA||_F^2 to capture, in (0, 1]
  int k_init = 2;       ///< initial working rank
  int oversampling = 1; ///< extra sketch columns p
  int max_iterations = 6;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct ArSvdResult {
  LowRankFactor factor;
  int iterations = 0;      ///< loop passes executed
  bool converged = false;  ///< returned from inside the loop (energy target met)
  int sketch_dim = 0;      ///< d at return
  double target_energy = 0.0;
  double captured_energy = 0.0;  ///< sum of retained sigma_j^2
  double total_energy = 0.0;     ///< ||dA||_F^2
};

enum class UpdateMethod { none, woodbury, full };

std::string_view to_string(UpdateMethod m);

struct UpdateReport {
  UpdateMethod method = UpdateMethod::none;
  int k_est = 0;
  double cost_units = 0.0;
  bool auxiliary_fallback = false;  ///< Woodbury was chosen but SingularAuxiliary forced a direct inversion
  bool periodic_reset = false;      ///< direct inversion forced by the reset interval
  int arsvd_iterations = 0;
};

struct UpdatePolicy {
  /// Woodbury is applied when k_est / K <= this ratio.
  double rank_ratio_threshold = 0.5;
  /// Force a direct inversion after this many consecutive Woodbury refreshes;
  /// 0 chains indefinitely.
  int reset_interval = 0;
};

// Condition-estimate limits.
inline constexpr double kMaxInverseCondition = 1e14;
inline constexpr double kMaxAuxiliaryCondition = 1e12;

// ---------------------------------------------------------------------------
// Operations

/// Inverse of a Hermitian matrix via LDL^H factor-then-solve.
/// Throws SingularMatrix when the reciprocal condition estimate falls below
/// 1 / kMaxInverseCondition.
ComplexMatrix direct_inverse(const ComplexMatrix& A);

/// A = H_eff H_eff^H + alpha I with its direct inverse; charges K^3.
GramState gram_matrix(const ComplexMatrix& H_eff, double alpha);

/// dA = H dH^H + dH H^H + dH dH^H.
ComplexMatrix gram_delta(const ComplexMatrix& H_eff, const ComplexMatrix& dH_eff);

/// A' = A + U Sigma V^H and its inverse via the Woodbury identity.
/// Throws SingularAuxiliary when (Sigma^-1 + V^H A^-1 U) is too ill-conditioned
/// and DimensionMismatch on shape errors. Charges cost_wb_arsvd(K, r).
GramState woodbury_update(const GramState& state, const LowRankFactor& lr);

/// Adaptive randomized SVD. A zero matrix yields an empty factor.
ArSvdResult arsvd(const ComplexMatrix& dA, const ArSvdConfig& cfg, RandomSource& rng);

/// One step of the rank-ratio dispatcher: compress dA, then refresh the inverse
/// with Woodbury or invert A' directly. `H_eff` is the channel the current
/// inverse was built for; `dH_eff` moves it to the new channel.
struct UpdateResult {
  GramState state;
  UpdateReport report;
};

UpdateResult update_inverse(const GramState& state, const ComplexMatrix& H_eff,
                            const ComplexMatrix& dH_eff, const ArSvdConfig& cfg,
                            RandomSource& rng, const UpdatePolicy& policy = {});

}  // namespace leowb
