#pragma once

// Seeded generators and brute-force oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the library kernels.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "twinlab/operator_core.hpp"

namespace support {

using twinlab::cplx;
using twinlab::Mat;
using twinlab::RMat;
using twinlab::RVec;
using twinlab::Vec;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  cplx gaussian() { return {normal(), normal()}; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> normal_;
};

inline Mat ginibre(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = rng.gaussian();
  return m;
}

/// Haar unitary: QR of a Ginibre matrix with the diagonal phases removed.
inline Mat random_unitary(Rng& rng, int d) {
  Eigen::HouseholderQR<Mat> qr(ginibre(rng, d, d));
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (int j = 0; j < d; ++j) q.col(j) *= std::polar(1.0, std::arg(r(j, j)));
  return q;
}

/// Orthonormal d x k frame.
inline Mat random_frame(Rng& rng, int d, int k) { return random_unitary(rng, d).leftCols(k); }

inline Mat random_hermitian(Rng& rng, int d) {
  const Mat g = ginibre(rng, d, d);
  return (g + g.adjoint()) / 2.0;
}

inline Mat random_psd(Rng& rng, int d, int rank) {
  const Mat g = ginibre(rng, d, rank);
  return g * g.adjoint();
}

inline Mat random_density(Rng& rng, int d, int rank) {
  Mat m = random_psd(rng, d, rank);
  m /= m.trace().real();
  return (m + m.adjoint()) / 2.0;
}

inline Mat random_density(Rng& rng, int d) { return random_density(rng, d, d); }

inline Vec random_pure(Rng& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
  return v / v.norm();
}

inline Mat projector_onto(const Mat& frame) { return frame * frame.adjoint(); }

inline Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

inline double opnorm(const Mat& m) {
  return m.size() == 0 ? 0.0 : Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

/// Index-loop partial trace, row-major index i1*d2 + i2.
inline Mat partial_trace(const Mat& w, int d1, int d2, int keep) {
  const int d = keep == 1 ? d1 : d2;
  Mat out = Mat::Zero(d, d);
  for (int i1 = 0; i1 < d1; ++i1)
    for (int i2 = 0; i2 < d2; ++i2)
      for (int j1 = 0; j1 < d1; ++j1)
        for (int j2 = 0; j2 < d2; ++j2) {
          if (keep == 1 && i2 == j2) out(i1, j1) += w(i1 * d2 + i2, j1 * d2 + i2);
          if (keep == 2 && i1 == j1) out(i2, j2) += w(i1 * d2 + i2, i1 * d2 + j2);
        }
  return out;
}

/// Operator-Schmidt singular values from the eigenvalues of R R^dagger with
/// R built entry by entry.
inline RVec operator_singular_values(const Mat& w, int d1, int d2) {
  Mat r(d1 * d1, d2 * d2);
  for (int i1 = 0; i1 < d1; ++i1)
    for (int j1 = 0; j1 < d1; ++j1)
      for (int i2 = 0; i2 < d2; ++i2)
        for (int j2 = 0; j2 < d2; ++j2)
          r(i1 * d1 + j1, i2 * d2 + j2) = w(i1 * d2 + i2, j1 * d2 + j2);
  Eigen::SelfAdjointEigenSolver<Mat> es(r * r.adjoint());
  RVec ev = es.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
  return ev;
}

/// Random HS-orthonormal Hermitian operator basis (d^2 elements).
inline std::vector<Mat> random_hermitian_basis(Rng& rng, int d) {
  const int m = d * d;
  std::vector<Mat> raw;
  for (int a = 0; a < m; ++a) raw.push_back(random_hermitian(rng, d));
  // Gram-Schmidt in the real inner product Re Tr(A B).
  std::vector<Mat> out;
  for (auto x : raw) {
    for (const auto& q : out) x -= (q.adjoint() * x).trace().real() * q;
    x /= x.norm();
    out.push_back(x);
  }
  return out;
}

/// Real null space of (A1 (x) I - I (x) A2) rho over a random Hermitian
/// basis, returned as orthonormal columns of flattened (A1, A2) operators.
inline RMat brute_twin_space(const Mat& rho, int d1, int d2, Rng& rng, double cutoff = 1e-9) {
  const auto b1 = random_hermitian_basis(rng, d1);
  const auto b2 = random_hermitian_basis(rng, d2);
  const int m1 = d1 * d1, m2 = d2 * d2;
  const Mat i1 = Mat::Identity(d1, d1), i2 = Mat::Identity(d2, d2);
  RMat sys(2 * rho.size(), m1 + m2);
  auto put = [&](int col, const Mat& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      sys(2 * k, col) = m(k).real();
      sys(2 * k + 1, col) = m(k).imag();
    }
  };
  for (int a = 0; a < m1; ++a) put(a, kron(b1[a], i2) * rho);
  for (int b = 0; b < m2; ++b) put(m1 + b, -(kron(i1, b2[b]) * rho));
  Eigen::JacobiSVD<RMat> svd(sys, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  int rank = 0;
  while (rank < s.size() && s(rank) > cutoff * s(0)) ++rank;
  const RMat null = svd.matrixV().rightCols(m1 + m2 - rank);

  RMat flat(2 * (m1 + m2), null.cols());
  for (Eigen::Index c = 0; c < null.cols(); ++c) {
    Mat a1 = Mat::Zero(d1, d1), a2 = Mat::Zero(d2, d2);
    for (int a = 0; a < m1; ++a) a1 += null(a, c) * b1[a];
    for (int b = 0; b < m2; ++b) a2 += null(m1 + b, c) * b2[b];
    for (int k = 0; k < m1; ++k) {
      flat(2 * k, c) = a1(k).real();
      flat(2 * k + 1, c) = a1(k).imag();
    }
    for (int k = 0; k < m2; ++k) {
      flat(2 * (m1 + k), c) = a2(k).real();
      flat(2 * (m1 + k) + 1, c) = a2(k).imag();
    }
  }
  return flat;
}

/// Flattens operator pairs the same way as brute_twin_space.
inline RVec flatten_pair(const Mat& a1, const Mat& a2) {
  const auto m1 = a1.size(), m2 = a2.size();
  RVec out(2 * (m1 + m2));
  for (Eigen::Index k = 0; k < m1; ++k) {
    out(2 * k) = a1(k).real();
    out(2 * k + 1) = a1(k).imag();
  }
  for (Eigen::Index k = 0; k < m2; ++k) {
    out(2 * (m1 + k)) = a2(k).real();
    out(2 * (m1 + k) + 1) = a2(k).imag();
  }
  return out;
}

/// Largest principal angle between two column spans; pi/2 if the dimensions differ.
inline double max_principal_angle(const RMat& a, const RMat& b) {
  if (a.cols() != b.cols()) return M_PI / 2.0;
  if (a.cols() == 0) return 0.0;
  const RMat qa = Eigen::HouseholderQR<RMat>(a).householderQ() * RMat::Identity(a.rows(), a.cols());
  const RMat qb = Eigen::HouseholderQR<RMat>(b).householderQ() * RMat::Identity(b.rows(), b.cols());
  const RMat residual = qb - qa * (qa.transpose() * qb);
  const double sine = Eigen::JacobiSVD<RMat>(residual).singularValues()(0);
  return std::asin(std::min(1.0, sine));
}

/// The singlet-measured state 1/2 (|+-><+-| + |-+><-+|) in the z basis.
inline Mat measured_singlet() {
  Mat rho = Mat::Zero(4, 4);
  rho(1, 1) = 0.5;
  rho(2, 2) = 0.5;
  return rho;
}

inline Vec bell_vector() {
  Vec v = Vec::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v;
}

}  // namespace support
