#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "twinlab/operator_core.hpp"
#include "twinlab/schmidt.hpp"

namespace twinlab {

/// Opposite-subsystem observables with (A1 (x) I) rho = (I (x) A2) rho.
struct TwinPair {
  HermitianObservable a1;
  HermitianObservable a2;
  double residual = 0.0;  // ||A1 rho - A2 rho||
};

enum class Strength { Strong, Weak };
enum class ObservableStrength { Strong, PartiallyStrong, Weak };

const char* to_string(Strength s);
const char* to_string(ObservableStrength s);

struct TwinProjectorPair {
  OrthogonalProjector p1;
  OrthogonalProjector p2;
  Strength strength = Strength::Weak;
  double commutator_norm = 0.0;  // ||[P1, rho]||
  double residual = 0.0;         // twin residual
  bool trivial = false;          // detectable part of P1 is 0 or the identity
};

/// Spectral data of a twin pair; index n runs over common detectable values.
struct TwinSpectralData {
  std::vector<double> eigenvalues;  // a_n, ascending
  std::vector<TwinProjectorPair> projector_pairs;
  std::vector<int> multiplicities1;  // rank of the range-restricted P1^(n)
  std::vector<int> multiplicities2;
  std::vector<Mat> range_projectors1;  // (P1')^(n) as d1 x d1 matrices
  std::vector<Mat> range_projectors2;
};

struct PairCertificate {
  int first = 0;
  int second = 0;
  OrthogonalityCertificate subsystem1;
  OrthogonalityCertificate subsystem2;

  bool biorthogonal() const { return subsystem1.orthogonal && subsystem2.orthogonal; }
};

/// rho = sum_n w_n rho^(n) with pairwise biorthogonal terms.
struct BiorthogonalDecomposition {
  std::vector<double> weights;
  std::vector<BipartiteDensity> terms;
  std::vector<PairCertificate> certificates;
  std::vector<bool> product_form;  // term is |psi><psi| (x) rho2 (rank-1 value)
  std::vector<std::string> notices;

  bool all_biorthogonal() const;
  Mat reconstruct() const;
};

/// rho = P1 rho + P1perp rho for a weak twin projector, each part expanded.
struct WeakSplit {
  Mat part_in;
  Mat part_out;
  OperatorSchmidt expansion_in;
  OperatorSchmidt expansion_out;
  OperatorSchmidt combined;  // concatenation, an expansion of rho
  bool cross_orthogonality = false;
  double max_cross = 0.0;  // largest |<A_i|C_j>| or |<B_i|D_j>|
  double trace_in = 0.0;   // Tr(rho P1 rho)
  double trace_out = 0.0;  // Tr(rho P1perp rho)
};

// ---------------------------------------------------------------------------

double twin_residual(const Mat& a1, const Mat& a2, const BipartiteDensity& rho);

/// Accepts iff the twin residual is at most zero_tol. Non-Hermitian input is
/// an InputError.
std::optional<TwinPair> twin_check(const Mat& a1, const Mat& a2, const BipartiteDensity& rho,
                                   const ToleranceConfig& tol = {});

struct ReducedCommutation {
  double norm1 = 0.0;  // ||[A1, rho1]||
  double norm2 = 0.0;  // ||[A2, rho2]||
};

/// Throws ConsistencyError if either commutator exceeds 10 * zero_tol.
ReducedCommutation verify_reduced_commutation(const TwinPair& pair, const BipartiteDensity& rho,
                                              const ToleranceConfig& tol = {});

struct TwinBasisElement {
  TwinPair pair;
  bool trivial = false;
};

/// HS-orthonormal basis of all twin pairs, nontrivial directions first.
struct TwinSolution {
  int d1 = 0;
  int d2 = 0;
  std::vector<TwinBasisElement> basis;
  /// Same basis as real coordinates over (hermitian_basis(d1), hermitian_basis(d2)).
  RMat coordinates;
  int nontrivial_dim = 0;
  int trivial_dim = 0;

  bool has_nontrivial() const { return nontrivial_dim > 0; }
};

TwinSolution twin_solve(const BipartiteDensity& rho, const ToleranceConfig& tol = {});

/// Null space of the twin equation in Gell-Mann coordinates (columns).
RMat twin_null_space(const BipartiteDensity& rho, const ToleranceConfig& tol = {});

/// Splits a twin null space into nontrivial and trivial directions relative
/// to the ranges of rho1 and rho2. Trivial: both detectable parts scalar.
TwinSolution split_trivial(const RMat& null_space, const BipartiteDensity& rho,
                           const ToleranceConfig& tol = {});

TwinPair pair_from_coordinates(const RVec& x, const BipartiteDensity& rho);

struct DetectablePart {
  Mat restricted;   // r x r, Q A Q in the range basis
  Mat range_basis;  // d x r
};

DetectablePart detectable_part(const HermitianObservable& a, const Mat& rho_i,
                               const ToleranceConfig& tol = {});

TwinSpectralData twin_spectral_projectors(const TwinPair& pair, const BipartiteDensity& rho,
                                          const ToleranceConfig& tol = {});

/// Least-squares Hermitian partner P2 for a lone subsystem-1 projector.
Mat reconstruct_partner(const Mat& p1, const BipartiteDensity& rho,
                        const ToleranceConfig& tol = {});

/// Classifies P1 (with partner p2, reconstructed when absent). InputError
/// when the pair is not a twin.
TwinProjectorPair classify_projector(const Mat& p1, const BipartiteDensity& rho,
                                     const ToleranceConfig& tol = {},
                                     const std::optional<Mat>& p2 = std::nullopt);

ObservableStrength classify_observable(const TwinPair& pair, const BipartiteDensity& rho,
                                       const ToleranceConfig& tol = {});

std::variant<BiorthogonalDecomposition, WeakSplit> decompose_by_projector(
    const TwinProjectorPair& tp, const BipartiteDensity& rho, const ToleranceConfig& tol = {});

/// Strong twins (Q1', Q2') of w rho' + (1 - w) rho''. InputError names the
/// subsystem on which the reduced states are not orthogonal.
TwinProjectorPair biorthogonal_from_mixture(const BipartiteDensity& first,
                                            const BipartiteDensity& second, double w,
                                            const ToleranceConfig& tol = {});

BiorthogonalDecomposition strong_mixture(const TwinPair& pair, const BipartiteDensity& rho,
                                         const ToleranceConfig& tol = {});

WeakSplit weak_split_expansion(const TwinProjectorPair& tp, const BipartiteDensity& rho,
                               const ToleranceConfig& tol = {});

/// (states_orthogonal, |<a|b>| small); ConsistencyError if they differ.
std::pair<bool, bool> hs_orthogonality_equiv(const Mat& a, const Mat& b,
                                             const ToleranceConfig& tol = {});

}  // namespace twinlab
