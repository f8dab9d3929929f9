#include "twinlab/kernels.hpp"

namespace twinlab::kernels {

namespace {

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) throw InputError(std::string(what) + ": matrix is not square");
}

void require_bipartite(const Mat& w, int d1, int d2) {
  require_square(w, "bipartite operator");
  if (d1 <= 0 || d2 <= 0 || w.rows() != static_cast<Eigen::Index>(d1) * d2)
    throw InputError("bipartite operator: dimension " + std::to_string(w.rows()) +
                     " does not factor as " + std::to_string(d1) + "x" + std::to_string(d2));
}

// Column c of the twin system for one basis element, written into out.col(c).
void twin_column_sub1(const Mat& rho, int d1, int d2, const Mat& g, double sign,
                      RMat& out, Eigen::Index c) {
  const Eigen::Index n = rho.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int i1 = 0; i1 < d1; ++i1) {
      for (int i2 = 0; i2 < d2; ++i2) {
        cplx acc = 0.0;
        for (int k1 = 0; k1 < d1; ++k1) acc += g(i1, k1) * rho(k1 * d2 + i2, j);
        const Eigen::Index k = j * n + i1 * d2 + i2;
        out(2 * k, c) = sign * acc.real();
        out(2 * k + 1, c) = sign * acc.imag();
      }
    }
  }
}

void twin_column_sub2(const Mat& rho, int d1, int d2, const Mat& g, double sign,
                      RMat& out, Eigen::Index c) {
  const Eigen::Index n = rho.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (int i1 = 0; i1 < d1; ++i1) {
      for (int i2 = 0; i2 < d2; ++i2) {
        cplx acc = 0.0;
        for (int k2 = 0; k2 < d2; ++k2) acc += g(i2, k2) * rho(i1 * d2 + k2, j);
        const Eigen::Index k = j * n + i1 * d2 + i2;
        out(2 * k, c) = sign * acc.real();
        out(2 * k + 1, c) = sign * acc.imag();
      }
    }
  }
}

inline void kron_row(const Mat& a, const Mat& b, Mat& out, Eigen::Index r) {
  const Eigen::Index i1 = r / b.rows(), i2 = r % b.rows();
  for (Eigen::Index j1 = 0; j1 < a.cols(); ++j1)
    for (Eigen::Index j2 = 0; j2 < b.cols(); ++j2)
      out(r, j1 * b.cols() + j2) = a(i1, j1) * b(i2, j2);
}

inline cplx ptrace_entry(const Mat& w, int d1, int d2, Subsystem keep, int i, int j) {
  cplx acc = 0.0;
  if (keep == Subsystem::One) {
    for (int k = 0; k < d2; ++k) acc += w(i * d2 + k, j * d2 + k);
  } else {
    for (int k = 0; k < d1; ++k) acc += w(k * d2 + i, k * d2 + j);
  }
  return acc;
}

inline void realign_row(const Mat& w, int d1, int d2, Mat& out, Eigen::Index r) {
  const int i1 = static_cast<int>(r / d1), j1 = static_cast<int>(r % d1);
  for (int i2 = 0; i2 < d2; ++i2)
    for (int j2 = 0; j2 < d2; ++j2) out(r, i2 * d2 + j2) = w(i1 * d2 + i2, j1 * d2 + j2);
}

void require_twin_inputs(const Mat& rho, int d1, int d2, const std::vector<Mat>& basis1,
                         const std::vector<Mat>& basis2) {
  require_bipartite(rho, d1, d2);
  for (const auto& g : basis1)
    if (g.rows() != d1 || g.cols() != d1) throw InputError("twin_system: basis1 shape");
  for (const auto& g : basis2)
    if (g.rows() != d2 || g.cols() != d2) throw InputError("twin_system: basis2 shape");
}

}  // namespace

namespace serial {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) kron_row(a, b, out, r);
  return out;
}

Mat partial_trace(const Mat& w, int d1, int d2, Subsystem keep) {
  require_bipartite(w, d1, d2);
  const int d = keep == Subsystem::One ? d1 : d2;
  Mat out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = ptrace_entry(w, d1, d2, keep, i, j);
  return out;
}

Mat realign(const Mat& w, int d1, int d2) {
  require_bipartite(w, d1, d2);
  Mat out(d1 * d1, d2 * d2);
  for (Eigen::Index r = 0; r < out.rows(); ++r) realign_row(w, d1, d2, out, r);
  return out;
}

RMat twin_system(const Mat& rho, int d1, int d2, const std::vector<Mat>& basis1,
                 const std::vector<Mat>& basis2) {
  require_twin_inputs(rho, d1, d2, basis1, basis2);
  const auto m1 = static_cast<Eigen::Index>(basis1.size());
  const auto m2 = static_cast<Eigen::Index>(basis2.size());
  RMat out(2 * rho.size(), m1 + m2);
  for (Eigen::Index c = 0; c < m1; ++c) twin_column_sub1(rho, d1, d2, basis1[c], 1.0, out, c);
  for (Eigen::Index c = 0; c < m2; ++c)
    twin_column_sub2(rho, d1, d2, basis2[c], -1.0, out, m1 + c);
  return out;
}

}  // namespace serial

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  const Eigen::Index rows = out.rows();
#pragma omp parallel for schedule(static) if (out.size() > kParallelThreshold)
  for (Eigen::Index r = 0; r < rows; ++r) kron_row(a, b, out, r);
  return out;
}

Mat partial_trace(const Mat& w, int d1, int d2, Subsystem keep) {
  require_bipartite(w, d1, d2);
  const int d = keep == Subsystem::One ? d1 : d2;
  Mat out(d, d);
#pragma omp parallel for collapse(2) schedule(static) if (w.size() > kParallelThreshold)
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = ptrace_entry(w, d1, d2, keep, i, j);
  return out;
}

Mat realign(const Mat& w, int d1, int d2) {
  require_bipartite(w, d1, d2);
  Mat out(d1 * d1, d2 * d2);
  const Eigen::Index rows = out.rows();
#pragma omp parallel for schedule(static) if (out.size() > kParallelThreshold)
  for (Eigen::Index r = 0; r < rows; ++r) realign_row(w, d1, d2, out, r);
  return out;
}

RMat twin_system(const Mat& rho, int d1, int d2, const std::vector<Mat>& basis1,
                 const std::vector<Mat>& basis2) {
  require_twin_inputs(rho, d1, d2, basis1, basis2);
  const auto m1 = static_cast<Eigen::Index>(basis1.size());
  const auto m2 = static_cast<Eigen::Index>(basis2.size());
  RMat out(2 * rho.size(), m1 + m2);
  const long work = static_cast<long>(rho.size()) * (m1 * d1 + m2 * d2);
#pragma omp parallel for schedule(dynamic) if (work > kParallelThreshold)
  for (Eigen::Index c = 0; c < m1 + m2; ++c) {
    if (c < m1)
      twin_column_sub1(rho, d1, d2, basis1[c], 1.0, out, c);
    else
      twin_column_sub2(rho, d1, d2, basis2[c - m1], -1.0, out, c);
  }
  return out;
}

}  // namespace twinlab::kernels
