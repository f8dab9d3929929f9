#pragma once

#include <optional>
#include <string>
#include <vector>

#include "twinlab/operator_core.hpp"

namespace twinlab {

/// Half-open index range [begin, end) of coefficients equal within
/// degeneracy_tol. Only ranges with two or more members are listed.
struct DegenerateBlock {
  int begin = 0;
  int end = 0;
  bool operator==(const DegenerateBlock&) const = default;
};

/// Schmidt canonical expansion of a pure bipartite vector:
///   |phi> = sum_i sqrt(r_i) |i>_1 (x) |i>_2.
struct StateSchmidt {
  int d1 = 0;
  int d2 = 0;
  RVec coefficients;  // r_i, descending, summing to 1
  Mat basis1;         // d1 x k, columns |i>_1
  Mat basis2;         // d2 x k, columns |i>_2
  std::vector<DegenerateBlock> degenerate_blocks;

  int terms() const { return static_cast<int>(coefficients.size()); }
  Vec reconstruct() const;
};

/// Antilinear map v -> M conj(v).
struct AntilinearMap {
  Mat matrix;
  /// Set when the Schmidt spectrum is degenerate. The map itself is still
  /// fixed by the state, only the listed Schmidt bases are not.
  bool degenerate_spectrum = false;

  Vec apply(const Vec& v) const { return matrix * v.conjugate(); }
};

/// W = c * sum_i coeff_i * factors1_i (x) factors2_i with HS-orthonormal factors.
struct OperatorSchmidt {
  int d1 = 0;
  int d2 = 0;
  double normalization = 0.0;  // c = ||W||_HS
  RVec coefficients;           // descending, squares sum to 1
  std::vector<Mat> factors1;
  std::vector<Mat> factors2;
  bool hermitian_factors = false;
  std::vector<DegenerateBlock> degenerate_blocks;

  int terms() const { return static_cast<int>(coefficients.size()); }
  Mat reconstruct() const;
};

StateSchmidt schmidt_state(const PureBipartiteState& phi, const ToleranceConfig& tol = {});

/// The correlation operator U_a, mapping |i>_1 to |i>_2 antilinearly.
AntilinearMap correlation_map(const PureBipartiteState& phi, const ToleranceConfig& tol = {});

/// Expansion with Hermitian factors, built from the real coefficient matrix
/// of W in the product Gell-Mann basis. Throws InputError for non-Hermitian W.
OperatorSchmidt operator_schmidt_hermitian(const Mat& w, int d1, int d2,
                                           const ToleranceConfig& tol = {});

/// General expansion from the SVD of the realigned matrix.
OperatorSchmidt operator_schmidt_complex(const Mat& w, int d1, int d2,
                                         const ToleranceConfig& tol = {});

/// |phi><phi| = sum_{i,i'} sqrt(r_i r_i') |i><i'|_1 (x) |i><i'|_2.
OperatorSchmidt pure_nonhermitian_expansion(const PureBipartiteState& phi,
                                            const ToleranceConfig& tol = {});

struct AdjointInvarianceReport {
  bool adjoint_fixed = false;          // W^dagger = W
  bool blocks_invariant = false;       // adjoints stay in their singular subspace
  std::optional<bool> factors_hermitian;  // only when hermitian_factors is claimed
  double adjoint_residual = 0.0;
  double block_residual = 0.0;
  double factor_residual = 0.0;
  std::string diagnostic;  // names the failed clauses, empty when all pass

  bool passed() const {
    return adjoint_fixed && blocks_invariant && factors_hermitian.value_or(true);
  }
};

AdjointInvarianceReport adjoint_invariance_check(const Mat& w, const OperatorSchmidt& expansion,
                                                 const ToleranceConfig& tol = {});

/// Groups a descending sequence into runs whose neighbours differ by at most tol.
std::vector<DegenerateBlock> degenerate_blocks(const RVec& descending, double tol);

}  // namespace twinlab
