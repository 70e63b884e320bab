#include "leowb/lowrank_inverse.hpp"

#include <string>

namespace leowb {

double cost_full(int K) {
  const double k = K;
  return k * k * k;
}

double cost_arsvd(int K, int r) {
  const double k = K, rr = r;
  return k * k * rr + rr * rr * k;
}

double cost_wb_arsvd(int K, int r) {
  const double k = K, rr = r;
  return k * k + k * k * rr + rr * rr * rr + rr * rr * k;
}

std::string_view to_string(UpdateMethod m) {
  switch (m) {
    case UpdateMethod::none: return "none";
    case UpdateMethod::woodbury: return "woodbury";
    case UpdateMethod::full: return "full";
  }
  return "?";
}

ComplexMatrix LowRankFactor::reconstruct() const {
  return U * sigma.cast<Complex>().asDiagonal() * V.adjoint();
}

void ArSvdConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0))
    throw InvalidArgument("arsvd: eta must lie in (0, 1], got " + std::to_string(eta));
  if (k_init < 1) throw InvalidArgument("arsvd: k_init must be >= 1");
  if (oversampling < 0) throw InvalidArgument("arsvd: oversampling must be >= 0");
  if (max_iterations < 1) throw InvalidArgument("arsvd: max_iterations must be >= 1");
}

ComplexMatrix direct_inverse(const ComplexMatrix& A) {
  if (A.rows() != A.cols())
    throw DimensionMismatch("direct_inverse: matrix is not square");
  if (A.rows() == 0) return ComplexMatrix(0, 0);
  if (hermitian_defect(A) > 1e-10)
    throw InvalidArgument("direct_inverse: matrix is not Hermitian");

  // LDLT reads only the lower triangle.
  Eigen::LDLT<ComplexMatrix> ldlt(A);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= 1.0 / kMaxInverseCondition))
    throw SingularMatrix("direct_inverse: condition estimate exceeds 1e14");
  const auto n = A.rows();
  ComplexMatrix inv = ldlt.solve(ComplexMatrix::Identity(n, n));
  // Solve leaves O(eps) asymmetry; keep the stored inverse exactly Hermitian.
  return (inv + inv.adjoint()) * 0.5;
}

GramState gram_matrix(const ComplexMatrix& H_eff, double alpha) {
  if (H_eff.rows() < 1) throw InvalidArgument("gram_matrix: K must be >= 1");
  if (!(alpha >= 0.0)) throw InvalidArgument("gram_matrix: alpha must be >= 0");
  const auto K = H_eff.rows();

  GramState s;
  s.alpha = alpha;
  s.A = H_eff * H_eff.adjoint();
  s.A.diagonal().array() += alpha;
  s.A_inv = direct_inverse(s.A);
  s.cost_accum = cost_full(static_cast<int>(K));
  s.updates_since_inversion = 0;
  return s;
}

ComplexMatrix gram_delta(const ComplexMatrix& H_eff, const ComplexMatrix& dH_eff) {
  if (H_eff.rows() != dH_eff.rows() || H_eff.cols() != dH_eff.cols())
    throw DimensionMismatch("gram_delta: H_eff and dH_eff shapes differ");
  ComplexMatrix cross = H_eff * dH_eff.adjoint();
  ComplexMatrix dA = cross + cross.adjoint();
  dA.noalias() += dH_eff * dH_eff.adjoint();
  return dA;
}

GramState woodbury_update(const GramState& state, const LowRankFactor& lr) {
  const auto K = state.A_inv.rows();
  const auto r = lr.sigma.size();
  if (r < 1) throw InvalidArgument("woodbury_update: empty factor");
  if (lr.U.rows() != K || lr.V.rows() != K || lr.U.cols() != r || lr.V.cols() != r)
    throw DimensionMismatch("woodbury_update: factor shape does not match state");

  // 1. A^-1 U                  (K x r)
  const ComplexMatrix AiU = state.A_inv * lr.U;
  // 2. V^H A^-1 U              (r x r)
  ComplexMatrix cap = lr.V.adjoint() * AiU;
  // 3. Sigma^-1 + V^H A^-1 U, factored
  cap.diagonal() += lr.sigma.cwiseInverse().cast<Complex>();
  Eigen::PartialPivLU<ComplexMatrix> lu(cap);
  if (!(lu.rcond() >= 1.0 / kMaxAuxiliaryCondition))
    throw SingularAuxiliary("woodbury_update: capacitance matrix condition exceeds 1e12");
  // 4. (A^-1 U) cap^-1 (V^H A^-1)
  const ComplexMatrix VhAi = lr.V.adjoint() * state.A_inv;  // r x K
  const ComplexMatrix X = lu.solve(VhAi);                    // r x K

  GramState out;
  out.alpha = state.alpha;
  // 5. subtract
  out.A_inv = state.A_inv;
  out.A_inv.noalias() -= AiU * X;
  out.A = state.A + lr.reconstruct();
  out.cost_accum = state.cost_accum + cost_wb_arsvd(static_cast<int>(K), static_cast<int>(r));
  out.updates_since_inversion = state.updates_since_inversion + 1;
  return out;
}

namespace {

UpdateResult invert_directly(const GramState& state, const ComplexMatrix& H_new,
                             double charge, UpdateReport report) {
  UpdateResult res;
  res.state = gram_matrix(H_new, state.alpha);
  res.state.cost_accum = state.cost_accum + charge;
  report.method = UpdateMethod::full;
  report.cost_units = charge;
  res.report = report;
  return res;
}

}  // namespace

UpdateResult update_inverse(const GramState& state, const ComplexMatrix& H_eff,
                            const ComplexMatrix& dH_eff, const ArSvdConfig& cfg,
                            RandomSource& rng, const UpdatePolicy& policy) {
  const int K = state.users();
  if (H_eff.rows() != K)
    throw DimensionMismatch("update_inverse: H_eff row count differs from state");
  if (dH_eff.rows() != H_eff.rows() || dH_eff.cols() != H_eff.cols())
    throw DimensionMismatch("update_inverse: dH_eff shape differs from H_eff");

  const ComplexMatrix H_new = H_eff + dH_eff;

  if (policy.reset_interval > 0 && state.updates_since_inversion >= policy.reset_interval) {
    UpdateReport rep;
    rep.periodic_reset = true;
    return invert_directly(state, H_new, cost_full(K), rep);
  }

  const ComplexMatrix dA = gram_delta(H_eff, dH_eff);
  const ArSvdResult ar = arsvd(dA, cfg, rng);
  const int k = ar.factor.k_est();

  UpdateReport rep;
  rep.k_est = k;
  rep.arsvd_iterations = ar.iterations;

  if (k == 0) {
    UpdateResult res{state, rep};
    res.report.method = UpdateMethod::none;
    res.report.cost_units = 0.0;
    return res;
  }

  if (static_cast<double>(k) <= policy.rank_ratio_threshold * K) {
    try {
      UpdateResult res;
      res.state = woodbury_update(state, ar.factor);
      rep.method = UpdateMethod::woodbury;
      rep.cost_units = cost_wb_arsvd(K, k);
      res.report = rep;
      return res;
    } catch (const SingularAuxiliary&) {
      rep.auxiliary_fallback = true;
    }
  }
  return invert_directly(state, H_new, cost_full(K) + cost_arsvd(K, k), rep);
}

}  // namespace leowb
