#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace twinlab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Bad input: malformed data, violated preconditions, unsupported requests.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A relation that must hold mathematically was violated numerically.
/// Usually means the tolerances do not fit the input.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToleranceConfig {
  double zero_tol = 1e-10;        // operator-norm zero tests
  double rank_tol = 1e-12;        // relative eigen/singular value cutoff
  double degeneracy_tol = 1e-8;   // spectral clustering

  /// Throws InputError unless all positive and rank_tol < zero_tol < 1.
  void validate() const;
};

enum class Subsystem { One = 1, Two = 2 };

inline int index_of(Subsystem s) { return static_cast<int>(s); }

// ---------------------------------------------------------------------------
// Norms and small helpers

/// Spectral norm (largest singular value).
double opnorm(const Mat& m);
double hs_norm(const Mat& m);
bool is_hermitian(const Mat& m, double tol);
Mat commutator(const Mat& a, const Mat& b);

/// Hermitian eigendecomposition with eigenvalues sorted descending.
struct Eigh {
  RVec values;
  Mat vectors;
};
Eigh eigh(const Mat& hermitian);

/// HS-orthonormal Hermitian operator basis on C^d: identity/sqrt(d) first,
/// then the generalized Gell-Mann matrices (symmetric, antisymmetric,
/// diagonal), each normalized to unit HS norm.
std::vector<Mat> hermitian_basis(int d);

// ---------------------------------------------------------------------------
// Domain types

/// Positive unit-trace matrix on C^d1 (x) C^d2, index i1*d2 + i2.
class BipartiteDensity {
 public:
  /// Validates hermiticity, positivity and trace against zero_tol.
  /// Eigenvalues in [-zero_tol, 0) are clipped and the trace renormalized.
  BipartiteDensity(int d1, int d2, Mat matrix, const ToleranceConfig& tol = {});

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  int dim() const { return d1_ * d2_; }
  const Mat& matrix() const { return matrix_; }

 private:
  int d1_;
  int d2_;
  Mat matrix_;
};

struct HermitianObservable {
  Subsystem subsystem;
  Mat matrix;

  static HermitianObservable make(Subsystem s, Mat m, const ToleranceConfig& tol = {});
};

struct OrthogonalProjector {
  Subsystem subsystem = Subsystem::One;
  Mat matrix;
  int rank = 0;
  bool empty = false;  // projector of a (numerically) zero operator

  /// Checks hermiticity and idempotency within zero_tol.
  static OrthogonalProjector make(Subsystem s, Mat m, const ToleranceConfig& tol = {});
};

class PureBipartiteState {
 public:
  PureBipartiteState(int d1, int d2, Vec v, const ToleranceConfig& tol = {});

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  const Vec& vector() const { return vector_; }
  Mat density_matrix() const { return vector_ * vector_.adjoint(); }

 private:
  int d1_;
  int d2_;
  Vec vector_;
};

// ---------------------------------------------------------------------------
// Operations

Mat tensor_product(const Mat& a, const Mat& b);

/// Embeds a subsystem operator into the composite space (A (x) I or I (x) A).
Mat embed(const Mat& op, Subsystem s, int d1, int d2);

Mat partial_trace(const Mat& w, int d1, int d2, Subsystem keep);

/// Orthonormal basis (columns) of the span of eigenvectors of a PSD matrix
/// whose eigenvalue exceeds rank_tol * lambda_max. Ordered by eigenvalue,
/// descending.
Mat range_basis(const Mat& psd, const ToleranceConfig& tol = {});

/// Range basis together with an orthonormal basis of its complement.
struct RangeSplit {
  Mat range;
  Mat kernel;
};
RangeSplit range_split(const Mat& psd, const ToleranceConfig& tol = {});

OrthogonalProjector range_projector(const Mat& psd, Subsystem s,
                                    const ToleranceConfig& tol = {});

/// Tr(A^dagger B).
cplx hs_inner(const Mat& a, const Mat& b);

struct OrthogonalityCertificate {
  bool orthogonal = false;
  double product_norm = 0.0;    // ||rho' rho''|| / (||rho'|| ||rho''||)
  double projector_norm = 0.0;  // ||Q' Q''||
  double range_overlap = 0.0;   // max |<u|v>| over range bases
  bool product_test = false;
  bool projector_test = false;
  bool range_test = false;
};

/// Runs the three equivalent orthogonality criteria (product, range
/// projectors, range bases) and throws ConsistencyError if they disagree.
OrthogonalityCertificate states_orthogonal(const Mat& a, const Mat& b,
                                           const ToleranceConfig& tol = {});

}  // namespace twinlab
