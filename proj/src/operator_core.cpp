#include "twinlab/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "twinlab/kernels.hpp"

namespace twinlab {

void ToleranceConfig::validate() const {
  if (!(zero_tol > 0.0) || !(rank_tol > 0.0) || !(degeneracy_tol > 0.0))
    throw InputError("tolerances must be strictly positive");
  if (!(rank_tol < zero_tol) || !(zero_tol < 1.0))
    throw InputError("tolerances must satisfy rank_tol < zero_tol < 1");
}

double opnorm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double hs_norm(const Mat& m) { return m.norm(); }

bool is_hermitian(const Mat& m, double tol) {
  return m.rows() == m.cols() && opnorm(m - m.adjoint()) <= tol;
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

Eigh eigh(const Mat& hermitian) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian);
  if (es.info() != Eigen::Success) throw ConsistencyError("eigh: eigensolver did not converge");
  const Eigen::Index n = hermitian.rows();
  Eigh out{RVec(n), Mat(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
  }
  return out;
}

std::vector<Mat> hermitian_basis(int d) {
  if (d <= 0) throw InputError("hermitian_basis: dimension must be positive");
  std::vector<Mat> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  basis.push_back(Mat::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      Mat sym = Mat::Zero(d, d);
      sym(j, k) = s;
      sym(k, j) = s;
      basis.push_back(sym);
      Mat anti = Mat::Zero(d, d);
      anti(j, k) = cplx(0.0, -s);
      anti(k, j) = cplx(0.0, s);
      basis.push_back(anti);
    }
  }
  for (int l = 1; l < d; ++l) {
    Mat diag = Mat::Zero(d, d);
    const double c = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int j = 0; j < l; ++j) diag(j, j) = c;
    diag(l, l) = -c * l;
    basis.push_back(diag);
  }
  return basis;
}

// ---------------------------------------------------------------------------

BipartiteDensity::BipartiteDensity(int d1, int d2, Mat matrix, const ToleranceConfig& tol)
    : d1_(d1), d2_(d2) {
  if (d1 <= 0 || d2 <= 0) throw InputError("density: subsystem dimensions must be positive");
  if (matrix.rows() != matrix.cols() || matrix.rows() != static_cast<Eigen::Index>(d1) * d2)
    throw InputError("density: matrix must be " + std::to_string(d1 * d2) + "x" +
                     std::to_string(d1 * d2));
  if (!matrix.allFinite()) throw InputError("density: matrix has non-finite entries");
  const double herm = opnorm(matrix - matrix.adjoint());
  if (herm > tol.zero_tol)
    throw InputError("density: not Hermitian (||W - W^dagger|| = " + std::to_string(herm) + ")");
  Mat h = (matrix + matrix.adjoint()) / 2.0;
  const double trace = h.trace().real();
  if (std::abs(trace - 1.0) > tol.zero_tol)
    throw InputError("density: trace " + std::to_string(trace) + " differs from 1");
  const Eigh e = eigh(h);
  const double lmin = e.values(e.values.size() - 1);
  if (lmin < -tol.zero_tol)
    throw InputError("density: negative eigenvalue " + std::to_string(lmin));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       std::max(1.0, e.values(0));
  if (lmin < -noise) {
    RVec clipped = e.values.cwiseMax(0.0);
    clipped /= clipped.sum();
    h = e.vectors * clipped.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    h = (h + h.adjoint()) / 2.0;
  }
  matrix_ = std::move(h);
}

HermitianObservable HermitianObservable::make(Subsystem s, Mat m, const ToleranceConfig& tol) {
  if (m.rows() != m.cols()) throw InputError("observable: matrix is not square");
  if (!is_hermitian(m, tol.zero_tol)) throw InputError("observable: matrix is not Hermitian");
  return {s, (m + m.adjoint()) / 2.0};
}

OrthogonalProjector OrthogonalProjector::make(Subsystem s, Mat m, const ToleranceConfig& tol) {
  if (m.rows() != m.cols()) throw InputError("projector: matrix is not square");
  if (!is_hermitian(m, tol.zero_tol)) throw InputError("projector: matrix is not Hermitian");
  const double idem = opnorm(m * m - m);
  if (idem > tol.zero_tol)
    throw InputError("projector: not idempotent (||P^2 - P|| = " + std::to_string(idem) + ")");
  Mat p = (m + m.adjoint()) / 2.0;
  const int rank = static_cast<int>(std::lround(p.trace().real()));
  return {s, std::move(p), rank, rank == 0};
}

PureBipartiteState::PureBipartiteState(int d1, int d2, Vec v, const ToleranceConfig& tol)
    : d1_(d1), d2_(d2) {
  if (d1 <= 0 || d2 <= 0) throw InputError("pure state: subsystem dimensions must be positive");
  if (v.size() != static_cast<Eigen::Index>(d1) * d2)
    throw InputError("pure state: vector length must be " + std::to_string(d1 * d2));
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > tol.zero_tol)
    throw InputError("pure state: vector norm " + std::to_string(n) + " differs from 1");
  vector_ = v / n;
}

// ---------------------------------------------------------------------------

Mat tensor_product(const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw InputError("tensor_product: factors must be square");
  return kernels::kron(a, b);
}

Mat embed(const Mat& op, Subsystem s, int d1, int d2) {
  if (s == Subsystem::One) {
    if (op.rows() != d1) throw InputError("embed: operator is not d1 x d1");
    return kernels::kron(op, Mat::Identity(d2, d2));
  }
  if (op.rows() != d2) throw InputError("embed: operator is not d2 x d2");
  return kernels::kron(Mat::Identity(d1, d1), op);
}

Mat partial_trace(const Mat& w, int d1, int d2, Subsystem keep) {
  return kernels::partial_trace(w, d1, d2, keep);
}

RangeSplit range_split(const Mat& psd, const ToleranceConfig& tol) {
  if (psd.rows() != psd.cols()) throw InputError("range_basis: matrix is not square");
  const Eigen::Index n = psd.rows();
  if (n == 0 || opnorm(psd) <= tol.zero_tol) return {Mat(n, 0), Mat::Identity(n, n)};
  const Eigh e = eigh((psd + psd.adjoint()) / 2.0);
  const double cut = tol.rank_tol * e.values(0);
  Eigen::Index r = 0;
  while (r < n && e.values(r) > cut) ++r;
  return {e.vectors.leftCols(r), e.vectors.rightCols(n - r)};
}

Mat range_basis(const Mat& psd, const ToleranceConfig& tol) { return range_split(psd, tol).range; }

OrthogonalProjector range_projector(const Mat& psd, Subsystem s, const ToleranceConfig& tol) {
  const Mat b = range_basis(psd, tol);
  OrthogonalProjector p;
  p.subsystem = s;
  p.matrix = b * b.adjoint();
  p.rank = static_cast<int>(b.cols());
  p.empty = p.rank == 0;
  return p;
}

cplx hs_inner(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InputError("hs_inner: shape mismatch");
  return (a.array().conjugate() * b.array()).sum();
}

OrthogonalityCertificate states_orthogonal(const Mat& a, const Mat& b,
                                           const ToleranceConfig& tol) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw InputError("states_orthogonal: operators must be square and of equal size");
  OrthogonalityCertificate cert;
  const double na = opnorm(a), nb = opnorm(b);
  if (na <= tol.zero_tol || nb <= tol.zero_tol) {
    cert.orthogonal = cert.product_test = cert.projector_test = cert.range_test = true;
    return cert;
  }
  cert.product_norm = opnorm(a * b) / (na * nb);
  cert.product_test = cert.product_norm <= tol.zero_tol;

  const Mat ba = range_basis(a, tol), bb = range_basis(b, tol);
  cert.projector_norm = opnorm((ba * ba.adjoint()) * (bb * bb.adjoint()));
  cert.projector_test = cert.projector_norm <= tol.zero_tol;

  cert.range_overlap = (ba.adjoint() * bb).cwiseAbs().maxCoeff();
  cert.range_test = cert.range_overlap <= tol.zero_tol;

  if (cert.product_test != cert.projector_test || cert.product_test != cert.range_test)
    throw ConsistencyError(
        "states_orthogonal: criteria disagree (product " + std::to_string(cert.product_norm) +
        ", projectors " + std::to_string(cert.projector_norm) + ", ranges " +
        std::to_string(cert.range_overlap) + "); check the tolerances");
  cert.orthogonal = cert.product_test;
  return cert;
}

}  // namespace twinlab
