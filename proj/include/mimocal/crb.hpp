#pragma once

#include <vector>

#include "mimocal/model.hpp"

namespace mimocal {

/// Unknowns of the partially calibrated array: DOAs, then real parts of
/// h_3..h_M, then imaginary parts of h_3..h_M.
struct CrbParams {
  std::vector<double> theta;
  std::vector<double> xi;
  std::vector<double> zeta;

  static CrbParams from(const TargetScene& scene, const GainPhase& gp);
  int size() const { return static_cast<int>(theta.size() + xi.size() + zeta.size()); }
  RealVector stacked() const;
};

struct CrbResult {
  RealMatrix fisher;
  RealMatrix crb_matrix;
  std::vector<double> doa_std_deg;
  double condition_number = 0.0;  // of the Fisher matrix
};

/// dA/dη_i for every entry of η, in CrbParams order.  Each is M^2 x K.
std::vector<ComplexMatrix> manifold_derivatives(const TargetScene& scene, const GainPhase& gp,
                                                const ArrayConfig& cfg);

/// I - A (A^H A)^-1 A^H.
ComplexMatrix orthogonal_projector(const ComplexMatrix& a);

/// Stochastic CRB for η with R_b and σ² as nuisance parameters.
CrbResult fisher_matrix(const TargetScene& scene, const GainPhase& gp, const ArrayConfig& cfg,
                        const ComplexMatrix& rb, double sigma2, int snapshots);

}  // namespace mimocal
