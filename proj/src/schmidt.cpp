#include "twinlab/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "twinlab/kernels.hpp"

namespace twinlab {

namespace {

constexpr double kSignificant = 1e-10;

// Row-major vec/unvec of a d x d operator: index i * d + j.
Mat unvec(const Vec& v, int d) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

Vec vec(const Mat& m) {
  const auto d = m.rows();
  Vec v(m.size());
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(i * m.cols() + j) = m(i, j);
  return v;
}

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (a(k).real() != b(k).real()) return a(k).real() < b(k).real();
    if (a(k).imag() != b(k).imag()) return a(k).imag() < b(k).imag();
  }
  return false;
}

// Term k is s_k * f(u_k) (x) g(v_k) where scaling u_k by z and v_k by z keeps
// the product fixed for |z| = 1 (callers arrange this). Makes the first
// significant entry of each u_k real positive, then orders terms by descending
// s, breaking ties inside degenerate blocks lexicographically on u_k.
std::vector<DegenerateBlock> canonicalize(RVec& s, Mat& u, Mat& v, double degeneracy_tol) {
  const Eigen::Index k = s.size();
  for (Eigen::Index c = 0; c < k; ++c) {
    const double scale = u.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double a = std::abs(u(r, c));
      if (a > kSignificant * std::max(1.0, scale)) {
        const cplx phase = std::conj(u(r, c) / a);
        u.col(c) *= phase;
        v.col(c) *= phase;
        u(r, c) = a;
        break;
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return s(a) > s(b); });
  RVec s2(k);
  Mat u2(u.rows(), k), v2(v.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    s2(c) = s(order[c]);
    u2.col(c) = u.col(order[c]);
    v2.col(c) = v.col(order[c]);
  }
  const double total = s2.norm();
  const RVec normalized = total > 0.0 ? RVec(s2 / total) : s2;
  auto blocks = degenerate_blocks(normalized, degeneracy_tol);
  for (const auto& blk : blocks) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(blk.end - blk.begin));
    std::iota(idx.begin(), idx.end(), blk.begin);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
      return lex_less(u2.col(a), u2.col(b));
    });
    const RVec sb = s2.segment(blk.begin, blk.end - blk.begin);
    const Mat ub = u2.middleCols(blk.begin, blk.end - blk.begin);
    const Mat vb = v2.middleCols(blk.begin, blk.end - blk.begin);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto from = idx[j] - blk.begin;
      const auto to = blk.begin + static_cast<Eigen::Index>(j);
      s2(to) = sb(from);
      u2.col(to) = ub.col(from);
      v2.col(to) = vb.col(from);
    }
  }
  s = std::move(s2);
  u = std::move(u2);
  v = std::move(v2);
  return blocks;
}

Eigen::Index kept_terms(const RVec& s, double rank_tol) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > rank_tol * s(0)) ++r;
  return r;
}

void require_operator(const Mat& w, int d1, int d2, const char* what) {
  if (d1 <= 0 || d2 <= 0 || w.rows() != w.cols() ||
      w.rows() != static_cast<Eigen::Index>(d1) * d2)
    throw InputError(std::string(what) + ": operator is not (d1*d2) x (d1*d2)");
}

bool all_hermitian(const std::vector<Mat>& fs, double tol) {
  return std::all_of(fs.begin(), fs.end(), [&](const Mat& f) { return is_hermitian(f, tol); });
}

}  // namespace

std::vector<DegenerateBlock> degenerate_blocks(const RVec& descending, double tol) {
  std::vector<DegenerateBlock> out;
  int begin = 0;
  const int n = static_cast<int>(descending.size());
  for (int i = 1; i <= n; ++i) {
    if (i == n || descending(i - 1) - descending(i) > tol) {
      if (i - begin >= 2) out.push_back({begin, i});
      begin = i;
    }
  }
  return out;
}

Vec StateSchmidt::reconstruct() const {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(d1) * d2);
  for (int i = 0; i < terms(); ++i)
    out += std::sqrt(coefficients(i)) * kernels::kron(basis1.col(i), basis2.col(i));
  return out;
}

Mat OperatorSchmidt::reconstruct() const {
  const Eigen::Index n = static_cast<Eigen::Index>(d1) * d2;
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < terms(); ++i)
    out += (normalization * coefficients(i)) * kernels::kron(factors1[i], factors2[i]);
  return out;
}

StateSchmidt schmidt_state(const PureBipartiteState& phi, const ToleranceConfig& tol) {
  const int d1 = phi.d1(), d2 = phi.d2();
  Mat c(d1, d2);
  for (int i1 = 0; i1 < d1; ++i1)
    for (int i2 = 0; i2 < d2; ++i2) c(i1, i2) = phi.vector()(i1 * d2 + i2);
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVec r = svd.singularValues().array().square();
  // rank_tol applies to the probabilities r_i = s_i^2
  Eigen::Index k = kept_terms(r, tol.rank_tol);
  RVec rk = r.head(k);
  Mat u = svd.matrixU().leftCols(k), v = svd.matrixV().leftCols(k);
  auto blocks = canonicalize(rk, u, v, tol.degeneracy_tol);
  StateSchmidt out;
  out.d1 = d1;
  out.d2 = d2;
  out.coefficients = rk / rk.sum();
  out.basis1 = u;
  out.basis2 = v.conjugate();
  out.degenerate_blocks = std::move(blocks);
  return out;
}

AntilinearMap correlation_map(const PureBipartiteState& phi, const ToleranceConfig& tol) {
  const StateSchmidt s = schmidt_state(phi, tol);
  // M = sum_i |i>_2 (|i>_1)^T, so M conj(|i>_1) = |i>_2
  AntilinearMap map;
  map.matrix = s.basis2 * s.basis1.transpose();
  map.degenerate_spectrum = !s.degenerate_blocks.empty();
  return map;
}

OperatorSchmidt operator_schmidt_hermitian(const Mat& w, int d1, int d2,
                                           const ToleranceConfig& tol) {
  require_operator(w, d1, d2, "operator_schmidt_hermitian");
  const double scale = std::max(1.0, opnorm(w));
  if (opnorm(w - w.adjoint()) > tol.zero_tol * scale)
    throw InputError(
        "operator_schmidt_hermitian: operator is not Hermitian; use the complex expansion");
  OperatorSchmidt out;
  out.d1 = d1;
  out.d2 = d2;
  out.hermitian_factors = true;
  out.normalization = hs_norm(w);
  if (opnorm(w) <= tol.zero_tol) {
    out.normalization = 0.0;
    return out;
  }
  const auto g1 = hermitian_basis(d1), g2 = hermitian_basis(d2);
  const Mat r = kernels::realign((w + w.adjoint()) / 2.0, d1, d2);
  Mat vg1(d1 * d1, d1 * d1), vg2(d2 * d2, d2 * d2);
  for (int a = 0; a < d1 * d1; ++a) vg1.col(a) = vec(g1[a]);
  for (int b = 0; b < d2 * d2; ++b) vg2.col(b) = vec(g2[b]);
  // T(a, b) = <G_a (x) G_b | W>, real for Hermitian W
  const RMat t = (vg1.adjoint() * r * vg2.conjugate()).real();
  Eigen::JacobiSVD<RMat> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index k = kept_terms(svd.singularValues(), tol.rank_tol);
  RVec s = svd.singularValues().head(k);
  Mat u = svd.matrixU().leftCols(k).cast<cplx>();
  Mat v = svd.matrixV().leftCols(k).cast<cplx>();
  out.degenerate_blocks = canonicalize(s, u, v, tol.degeneracy_tol);
  out.coefficients = s / out.normalization;
  for (Eigen::Index c = 0; c < k; ++c) {
    Mat f1 = Mat::Zero(d1, d1), f2 = Mat::Zero(d2, d2);
    for (int a = 0; a < d1 * d1; ++a) f1 += u(a, c).real() * g1[a];
    for (int b = 0; b < d2 * d2; ++b) f2 += v(b, c).real() * g2[b];
    out.factors1.push_back(std::move(f1));
    out.factors2.push_back(std::move(f2));
  }
  return out;
}

OperatorSchmidt operator_schmidt_complex(const Mat& w, int d1, int d2,
                                         const ToleranceConfig& tol) {
  require_operator(w, d1, d2, "operator_schmidt_complex");
  OperatorSchmidt out;
  out.d1 = d1;
  out.d2 = d2;
  if (opnorm(w) <= tol.zero_tol) return out;
  out.normalization = hs_norm(w);
  const Mat r = kernels::realign(w, d1, d2);
  Eigen::JacobiSVD<Mat> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index k = kept_terms(svd.singularValues(), tol.rank_tol);
  RVec s = svd.singularValues().head(k);
  Mat u = svd.matrixU().leftCols(k), v = svd.matrixV().leftCols(k);
  out.degenerate_blocks = canonicalize(s, u, v, tol.degeneracy_tol);
  out.coefficients = s / out.normalization;
  for (Eigen::Index c = 0; c < k; ++c) {
    out.factors1.push_back(unvec(u.col(c), d1));
    out.factors2.push_back(unvec(v.col(c).conjugate(), d2));
  }
  out.hermitian_factors = all_hermitian(out.factors1, tol.zero_tol) &&
                          all_hermitian(out.factors2, tol.zero_tol);
  return out;
}

OperatorSchmidt pure_nonhermitian_expansion(const PureBipartiteState& phi,
                                            const ToleranceConfig& tol) {
  const StateSchmidt s = schmidt_state(phi, tol);
  const int k = s.terms();
  struct Term {
    double coeff;
    int i, j;
  };
  std::vector<Term> terms;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      terms.push_back({std::sqrt(s.coefficients(i) * s.coefficients(j)), i, j});
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.coeff > b.coeff; });
  OperatorSchmidt out;
  out.d1 = phi.d1();
  out.d2 = phi.d2();
  out.normalization = 1.0;
  out.coefficients.resize(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto& tm = terms[t];
    out.coefficients(static_cast<Eigen::Index>(t)) = tm.coeff;
    out.factors1.push_back(s.basis1.col(tm.i) * s.basis1.col(tm.j).adjoint());
    out.factors2.push_back(s.basis2.col(tm.i) * s.basis2.col(tm.j).adjoint());
  }
  out.degenerate_blocks = degenerate_blocks(out.coefficients, tol.degeneracy_tol);
  out.hermitian_factors = all_hermitian(out.factors1, tol.zero_tol) &&
                          all_hermitian(out.factors2, tol.zero_tol);
  return out;
}

namespace {

// Largest HS distance between F^dagger and its projection onto the span of
// its block, over all factors of one subsystem.
double block_adjoint_residual(const std::vector<Mat>& factors,
                              const std::vector<DegenerateBlock>& blocks) {
  double worst = 0.0;
  const int n = static_cast<int>(factors.size());
  std::vector<int> block_of(static_cast<std::size_t>(n), -1);
  for (int b = 0; b < static_cast<int>(blocks.size()); ++b)
    for (int i = blocks[b].begin; i < blocks[b].end; ++i) block_of[i] = b;
  for (int i = 0; i < n; ++i) {
    const Mat adj = factors[i].adjoint();
    Mat proj = Mat::Zero(adj.rows(), adj.cols());
    const int lo = block_of[i] < 0 ? i : blocks[block_of[i]].begin;
    const int hi = block_of[i] < 0 ? i + 1 : blocks[block_of[i]].end;
    for (int j = lo; j < hi; ++j) proj += hs_inner(factors[j], adj) * factors[j];
    worst = std::max(worst, hs_norm(adj - proj));
  }
  return worst;
}

}  // namespace

AdjointInvarianceReport adjoint_invariance_check(const Mat& w, const OperatorSchmidt& expansion,
                                                 const ToleranceConfig& tol) {
  require_operator(w, expansion.d1, expansion.d2, "adjoint_invariance_check");
  AdjointInvarianceReport rep;
  const double check_tol = 10.0 * tol.zero_tol;
  rep.adjoint_residual = opnorm(w - w.adjoint()) / std::max(1.0, opnorm(w));
  rep.adjoint_fixed = rep.adjoint_residual <= tol.zero_tol;

  const auto blocks = degenerate_blocks(expansion.coefficients, tol.degeneracy_tol);
  rep.block_residual = std::max(block_adjoint_residual(expansion.factors1, blocks),
                                block_adjoint_residual(expansion.factors2, blocks));
  rep.blocks_invariant = rep.block_residual <= check_tol;

  if (expansion.hermitian_factors) {
    double worst = 0.0;
    for (const auto* fs : {&expansion.factors1, &expansion.factors2})
      for (const auto& f : *fs) worst = std::max(worst, opnorm(f - f.adjoint()));
    rep.factor_residual = worst;
    rep.factors_hermitian = worst <= check_tol;
  }

  std::vector<std::string> failed;
  if (!rep.adjoint_fixed) failed.emplace_back("(a) operator is not adjoint-invariant");
  if (!rep.blocks_invariant)
    failed.emplace_back("(b) factor adjoints leave their singular subspace");
  if (rep.factors_hermitian && !*rep.factors_hermitian)
    failed.emplace_back("(c) factors flagged Hermitian are not");
  for (std::size_t i = 0; i < failed.size(); ++i)
    rep.diagnostic += (i ? "; " : "") + failed[i];
  return rep;
}

}  // namespace twinlab
