#include "twinlab/twins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "twinlab/kernels.hpp"

namespace twinlab {

namespace {

constexpr double kSignificant = 1e-10;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

void require_shapes(const Mat& a1, const Mat& a2, const BipartiteDensity& rho) {
  if (a1.rows() != rho.d1() || a1.cols() != rho.d1())
    throw InputError("subsystem-1 operator must be " + std::to_string(rho.d1()) + "x" +
                     std::to_string(rho.d1()));
  if (a2.rows() != rho.d2() || a2.cols() != rho.d2())
    throw InputError("subsystem-2 operator must be " + std::to_string(rho.d2()) + "x" +
                     std::to_string(rho.d2()));
}

Mat reduced(const BipartiteDensity& rho, Subsystem keep) {
  return partial_trace(rho.matrix(), rho.d1(), rho.d2(), keep);
}

// Column-major (re, im) split, matching kernels::twin_system rows.
RVec realify(const Mat& m) {
  RVec out(2 * m.size());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    out(2 * k) = m(k).real();
    out(2 * k + 1) = m(k).imag();
  }
  return out;
}

void fix_signs(RMat& cols) {
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    for (Eigen::Index r = 0; r < cols.rows(); ++r) {
      if (std::abs(cols(r, c)) > kSignificant) {
        if (cols(r, c) < 0.0) cols.col(c) *= -1.0;
        break;
      }
    }
  }
}

Mat combine(const std::vector<Mat>& basis, const Vec& coords, Eigen::Index offset) {
  const auto d = basis.front().rows();
  Mat out = Mat::Zero(d, d);
  for (std::size_t a = 0; a < basis.size(); ++a)
    out += coords(offset + static_cast<Eigen::Index>(a)) * basis[a];
  return out;
}

// Off-scalar part of the compression onto a range, real-vectorized.
void off_scalar(const Mat& a, const Mat& range, RVec& out, Eigen::Index& pos) {
  const auto r = range.cols();
  if (r == 0) return;
  Mat c = range.adjoint() * a * range;
  c -= (c.trace() / static_cast<double>(r)) * Mat::Identity(r, r);
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    out(pos++) = c(k).real();
    out(pos++) = c(k).imag();
  }
}

BipartiteDensity density_or_consistency(int d1, int d2, const Mat& m, const ToleranceConfig& tol,
                                        const std::string& what) {
  try {
    return BipartiteDensity(d1, d2, m, tol);
  } catch (const InputError& e) {
    throw ConsistencyError(what + " is not a valid density: " + e.what());
  }
}

// Strength and bookkeeping for a candidate twin projector pair. Does not
// reject non-twins; callers decide which error applies.
TwinProjectorPair assess_pair(const Mat& p1, const Mat& p2, const BipartiteDensity& rho,
                              const ToleranceConfig& tol) {
  require_shapes(p1, p2, rho);
  TwinProjectorPair tp;
  tp.p1 = OrthogonalProjector::make(Subsystem::One, p1, tol);
  tp.p2 = OrthogonalProjector::make(Subsystem::Two, p2, tol);
  tp.residual = twin_residual(tp.p1.matrix, tp.p2.matrix, rho);
  const int d1 = rho.d1(), d2 = rho.d2();
  const Mat& r = rho.matrix();
  const Mat e1 = embed(tp.p1.matrix, Subsystem::One, d1, d2);
  const Mat e2 = embed(tp.p2.matrix, Subsystem::Two, d1, d2);
  tp.commutator_norm = opnorm(commutator(e1, r));
  tp.strength = tp.commutator_norm <= tol.zero_tol ? Strength::Strong : Strength::Weak;
  if (tp.residual <= tol.zero_tol) {
    // [P1, rho] = 0 <=> [P2, rho] = 0 <=> P1 rho Hermitian
    const Mat term = e1 * r;
    const bool strong2 = opnorm(commutator(e2, r)) <= tol.zero_tol;
    const bool herm = opnorm(term - term.adjoint()) <= tol.zero_tol;
    const bool strong = tp.strength == Strength::Strong;
    if (strong2 != strong || herm != strong)
      throw ConsistencyError("twin projector strength tests disagree (||[P1,rho]|| = " +
                             num(tp.commutator_norm) + ")");
  }
  const Mat b1 = range_basis(reduced(rho, Subsystem::One), tol);
  const Mat c = b1.adjoint() * tp.p1.matrix * b1;
  tp.trivial = opnorm(c) <= 10.0 * tol.zero_tol ||
               opnorm(c - Mat::Identity(c.rows(), c.cols())) <= 10.0 * tol.zero_tol;
  return tp;
}

PairCertificate certify(const BipartiteDensity& a, const BipartiteDensity& b, int i, int j,
                        const ToleranceConfig& tol) {
  PairCertificate cert;
  cert.first = i;
  cert.second = j;
  cert.subsystem1 =
      states_orthogonal(reduced(a, Subsystem::One), reduced(b, Subsystem::One), tol);
  cert.subsystem2 =
      states_orthogonal(reduced(a, Subsystem::Two), reduced(b, Subsystem::Two), tol);
  return cert;
}

double max_cross(const std::vector<Mat>& xs, const std::vector<Mat>& ys) {
  double worst = 0.0;
  for (const auto& x : xs)
    for (const auto& y : ys) worst = std::max(worst, std::abs(hs_inner(x, y)));
  return worst;
}

double invariance_residual(const std::vector<Mat>& factors, const Mat& p) {
  double worst = 0.0;
  for (const auto& f : factors) worst = std::max(worst, hs_norm(p * f - f));
  return worst;
}

}  // namespace

const char* to_string(Strength s) { return s == Strength::Strong ? "strong" : "weak"; }

const char* to_string(ObservableStrength s) {
  switch (s) {
    case ObservableStrength::Strong:
      return "strong";
    case ObservableStrength::PartiallyStrong:
      return "partially-strong";
    case ObservableStrength::Weak:
      return "weak";
  }
  return "?";
}

bool BiorthogonalDecomposition::all_biorthogonal() const {
  return std::all_of(certificates.begin(), certificates.end(),
                     [](const PairCertificate& c) { return c.biorthogonal(); });
}

Mat BiorthogonalDecomposition::reconstruct() const {
  if (terms.empty()) return {};
  Mat out = Mat::Zero(terms.front().dim(), terms.front().dim());
  for (std::size_t k = 0; k < terms.size(); ++k) out += weights[k] * terms[k].matrix();
  return out;
}

// ---------------------------------------------------------------------------

double twin_residual(const Mat& a1, const Mat& a2, const BipartiteDensity& rho) {
  require_shapes(a1, a2, rho);
  const Mat& r = rho.matrix();
  return opnorm(embed(a1, Subsystem::One, rho.d1(), rho.d2()) * r -
                embed(a2, Subsystem::Two, rho.d1(), rho.d2()) * r);
}

std::optional<TwinPair> twin_check(const Mat& a1, const Mat& a2, const BipartiteDensity& rho,
                                   const ToleranceConfig& tol) {
  require_shapes(a1, a2, rho);
  TwinPair pair{HermitianObservable::make(Subsystem::One, a1, tol),
                HermitianObservable::make(Subsystem::Two, a2, tol), 0.0};
  pair.residual = twin_residual(pair.a1.matrix, pair.a2.matrix, rho);
  if (pair.residual > tol.zero_tol) return std::nullopt;
  return pair;
}

ReducedCommutation verify_reduced_commutation(const TwinPair& pair, const BipartiteDensity& rho,
                                              const ToleranceConfig& tol) {
  require_shapes(pair.a1.matrix, pair.a2.matrix, rho);
  ReducedCommutation out;
  out.norm1 = opnorm(commutator(pair.a1.matrix, reduced(rho, Subsystem::One)));
  out.norm2 = opnorm(commutator(pair.a2.matrix, reduced(rho, Subsystem::Two)));
  if (out.norm1 > 10.0 * tol.zero_tol || out.norm2 > 10.0 * tol.zero_tol)
    throw ConsistencyError("twin pair does not commute with the reduced states (" +
                           num(out.norm1) + ", " + num(out.norm2) + ")");
  return out;
}

RMat twin_null_space(const BipartiteDensity& rho, const ToleranceConfig& tol) {
  const auto g1 = hermitian_basis(rho.d1()), g2 = hermitian_basis(rho.d2());
  const RMat m = kernels::twin_system(rho.matrix(), rho.d1(), rho.d2(), g1, g2);
  Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  const double cut = tol.rank_tol * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  RMat null = svd.matrixV().rightCols(m.cols() - rank);
  if (!null.allFinite()) throw ConsistencyError("twin null space has non-finite entries");
  return null;
}

TwinPair pair_from_coordinates(const RVec& x, const BipartiteDensity& rho) {
  const auto g1 = hermitian_basis(rho.d1()), g2 = hermitian_basis(rho.d2());
  if (x.size() != static_cast<Eigen::Index>(g1.size() + g2.size()))
    throw InputError("pair_from_coordinates: coordinate vector has the wrong length");
  Mat a1 = combine(g1, x.cast<cplx>(), 0);
  Mat a2 = combine(g2, x.cast<cplx>(), static_cast<Eigen::Index>(g1.size()));
  TwinPair pair{{Subsystem::One, (a1 + a1.adjoint()) / 2.0},
                {Subsystem::Two, (a2 + a2.adjoint()) / 2.0},
                0.0};
  pair.residual = twin_residual(pair.a1.matrix, pair.a2.matrix, rho);
  return pair;
}

TwinSolution split_trivial(const RMat& null_space, const BipartiteDensity& rho,
                           const ToleranceConfig& tol) {
  const int d1 = rho.d1(), d2 = rho.d2();
  const auto m1 = static_cast<Eigen::Index>(d1) * d1;
  const auto m2 = static_cast<Eigen::Index>(d2) * d2;
  if (null_space.rows() != m1 + m2) throw InputError("split_trivial: coordinate dimension");
  TwinSolution sol;
  sol.d1 = d1;
  sol.d2 = d2;
  const Eigen::Index m = null_space.cols();
  sol.coordinates = RMat(m1 + m2, 0);
  if (m == 0) return sol;

  const auto g1 = hermitian_basis(d1), g2 = hermitian_basis(d2);
  const Mat b1 = range_basis(reduced(rho, Subsystem::One), tol);
  const Mat b2 = range_basis(reduced(rho, Subsystem::Two), tol);
  const Eigen::Index rows = 2 * (b1.cols() * b1.cols() + b2.cols() * b2.cols());
  RMat l(rows, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const Vec x = null_space.col(c).cast<cplx>();
    RVec col(rows);
    Eigen::Index pos = 0;
    off_scalar(combine(g1, x, 0), b1, col, pos);
    off_scalar(combine(g2, x, m1), b2, col, pos);
    l.col(c) = col;
  }
  Eigen::JacobiSVD<RMat> svd(l, Eigen::ComputeFullV);
  Eigen::Index nontrivial = 0;
  while (nontrivial < svd.singularValues().size() &&
         svd.singularValues()(nontrivial) > tol.degeneracy_tol)
    ++nontrivial;
  RMat coords = null_space * svd.matrixV();
  fix_signs(coords);
  sol.coordinates = coords;
  sol.nontrivial_dim = static_cast<int>(nontrivial);
  sol.trivial_dim = static_cast<int>(m - nontrivial);
  for (Eigen::Index c = 0; c < m; ++c)
    sol.basis.push_back({pair_from_coordinates(coords.col(c), rho), c >= nontrivial});
  return sol;
}

TwinSolution twin_solve(const BipartiteDensity& rho, const ToleranceConfig& tol) {
  return split_trivial(twin_null_space(rho, tol), rho, tol);
}

DetectablePart detectable_part(const HermitianObservable& a, const Mat& rho_i,
                               const ToleranceConfig& tol) {
  if (a.matrix.rows() != rho_i.rows() || a.matrix.cols() != rho_i.cols())
    throw InputError("detectable_part: observable and reduced state differ in dimension");
  const double comm = opnorm(commutator(a.matrix, rho_i));
  if (comm > 10.0 * tol.zero_tol * std::max(1.0, opnorm(a.matrix)))
    throw InputError("detectable_part: observable does not commute with the reduced state (" +
                     num(comm) + "), so it is not a twin component");
  DetectablePart out;
  out.range_basis = range_basis(rho_i, tol);
  const Mat c = out.range_basis.adjoint() * a.matrix * out.range_basis;
  out.restricted = (c + c.adjoint()) / 2.0;
  return out;
}

TwinSpectralData twin_spectral_projectors(const TwinPair& pair, const BipartiteDensity& rho,
                                          const ToleranceConfig& tol) {
  verify_reduced_commutation(pair, rho, tol);
  const Mat rho1 = reduced(rho, Subsystem::One), rho2 = reduced(rho, Subsystem::Two);
  const RangeSplit s1 = range_split(rho1, tol), s2 = range_split(rho2, tol);
  const HermitianObservable* obs[2] = {&pair.a1, &pair.a2};
  const RangeSplit* splits[2] = {&s1, &s2};

  Eigh detectable[2];
  Eigh hidden[2];
  std::vector<std::tuple<double, int, Eigen::Index>> entries;  // value, side, index
  for (int side = 0; side < 2; ++side) {
    const Mat& b = splits[side]->range;
    const Mat& k = splits[side]->kernel;
    const Mat& a = obs[side]->matrix;
    const Mat c = b.adjoint() * a * b;
    detectable[side] = eigh((c + c.adjoint()) / 2.0);
    if (k.cols() > 0) {
      const Mat h = k.adjoint() * a * k;
      hidden[side] = eigh((h + h.adjoint()) / 2.0);
    }
    for (Eigen::Index i = 0; i < detectable[side].values.size(); ++i)
      entries.emplace_back(detectable[side].values(i), side, i);
  }
  std::sort(entries.begin(), entries.end());

  TwinSpectralData data;
  std::size_t begin = 0;
  while (begin < entries.size()) {
    std::size_t end = begin + 1;
    while (end < entries.size() &&
           std::get<0>(entries[end]) - std::get<0>(entries[end - 1]) <= tol.degeneracy_tol)
      ++end;
    const double lo = std::get<0>(entries[begin]), hi = std::get<0>(entries[end - 1]);
    double sum = 0.0;
    int count[2] = {0, 0};
    const int dims[2] = {rho.d1(), rho.d2()};
    Mat range_part[2] = {Mat::Zero(dims[0], dims[0]), Mat::Zero(dims[1], dims[1])};
    for (std::size_t e = begin; e < end; ++e) {
      const auto [value, side, idx] = entries[e];
      sum += value;
      ++count[side];
      const Vec v = splits[side]->range * detectable[side].vectors.col(idx);
      range_part[side] += v * v.adjoint();
    }
    if (count[0] == 0 || count[1] == 0)
      throw ConsistencyError("detectable spectra of the twin pair differ near " + num(lo) +
                             " (present only on subsystem " +
                             std::to_string(count[0] == 0 ? 2 : 1) + ")");
    const double value = sum / static_cast<double>(end - begin);
    Mat full[2] = {range_part[0], range_part[1]};
    for (int side = 0; side < 2; ++side) {
      const Mat& k = splits[side]->kernel;
      for (Eigen::Index i = 0; i < hidden[side].values.size(); ++i) {
        const double h = hidden[side].values(i);
        if (h >= lo - tol.degeneracy_tol && h <= hi + tol.degeneracy_tol) {
          const Vec v = k * hidden[side].vectors.col(i);
          full[side] += v * v.adjoint();
        }
      }
    }
    TwinProjectorPair tp = assess_pair(full[0], full[1], rho, tol);
    if (tp.residual > tol.zero_tol)
      throw ConsistencyError("characteristic projectors for value " + num(value) +
                             " are not twins (residual " + num(tp.residual) + ")");
    data.eigenvalues.push_back(value);
    data.projector_pairs.push_back(std::move(tp));
    data.multiplicities1.push_back(count[0]);
    data.multiplicities2.push_back(count[1]);
    data.range_projectors1.push_back(range_part[0]);
    data.range_projectors2.push_back(range_part[1]);
    begin = end;
  }
  return data;
}

Mat reconstruct_partner(const Mat& p1, const BipartiteDensity& rho, const ToleranceConfig& tol) {
  const int d1 = rho.d1(), d2 = rho.d2();
  if (p1.rows() != d1 || p1.cols() != d1)
    throw InputError("projector must be " + std::to_string(d1) + "x" + std::to_string(d1));
  const auto g2 = hermitian_basis(d2);
  // columns are -(I (x) G_b) rho
  const RMat m = kernels::twin_system(rho.matrix(), d1, d2, {}, g2);
  const RVec target = realify(embed(p1, Subsystem::One, d1, d2) * rho.matrix());
  Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(tol.rank_tol);
  const RVec y = svd.solve(-target);
  Mat p2 = combine(g2, y.cast<cplx>(), 0);
  p2 = (p2 + p2.adjoint()) / 2.0;
  const double residual = twin_residual(p1, p2, rho);
  if (residual > tol.zero_tol)
    throw InputError("projector has no twin partner for this state (residual " +
                     num(residual) + ")");
  const double idem = opnorm(p2 * p2 - p2);
  if (idem > 10.0 * tol.zero_tol)
    throw InputError("reconstructed partner is not a projector (||P2^2 - P2|| = " + num(idem) +
                     ")");
  return p2;
}

TwinProjectorPair classify_projector(const Mat& p1, const BipartiteDensity& rho,
                                     const ToleranceConfig& tol, const std::optional<Mat>& p2) {
  const OrthogonalProjector proj1 = OrthogonalProjector::make(Subsystem::One, p1, tol);
  const Mat partner = p2 ? *p2 : reconstruct_partner(proj1.matrix, rho, tol);
  TwinProjectorPair tp = assess_pair(proj1.matrix, partner, rho, tol);
  if (tp.residual > tol.zero_tol)
    throw InputError("projector pair is not a twin for this state (residual " +
                     num(tp.residual) + ")");
  return tp;
}

ObservableStrength classify_observable(const TwinPair& pair, const BipartiteDensity& rho,
                                       const ToleranceConfig& tol) {
  const TwinSpectralData data = twin_spectral_projectors(pair, rho, tol);
  const auto strong = static_cast<std::size_t>(
      std::count_if(data.projector_pairs.begin(), data.projector_pairs.end(),
                    [](const TwinProjectorPair& p) { return p.strength == Strength::Strong; }));

  // Commutation with the observable itself, shifted to its mean detectable value.
  const double mean =
      data.eigenvalues.empty()
          ? 0.0
          : std::accumulate(data.eigenvalues.begin(), data.eigenvalues.end(), 0.0) /
                static_cast<double>(data.eigenvalues.size());
  bool commutes[2];
  const HermitianObservable* obs[2] = {&pair.a1, &pair.a2};
  for (int side = 0; side < 2; ++side) {
    const Mat& a = obs[side]->matrix;
    const Mat shifted = a - mean * Mat::Identity(a.rows(), a.cols());
    const Subsystem s = side == 0 ? Subsystem::One : Subsystem::Two;
    const double c = opnorm(commutator(embed(shifted, s, rho.d1(), rho.d2()), rho.matrix()));
    commutes[side] = c <= tol.zero_tol * std::max(1.0, opnorm(shifted));
  }
  if (commutes[0] != commutes[1])
    throw ConsistencyError("[A1, rho] and [A2, rho] disagree on vanishing");
  const bool all_strong = strong == data.projector_pairs.size();
  if (commutes[0] != all_strong)
    throw ConsistencyError(
        "commutation with the observable disagrees with its characteristic projectors");
  if (all_strong) return ObservableStrength::Strong;
  if (strong == 0) return ObservableStrength::Weak;
  return ObservableStrength::PartiallyStrong;
}

std::variant<BiorthogonalDecomposition, WeakSplit> decompose_by_projector(
    const TwinProjectorPair& tp, const BipartiteDensity& rho, const ToleranceConfig& tol) {
  if (tp.strength == Strength::Weak) return weak_split_expansion(tp, rho, tol);
  const int d1 = rho.d1(), d2 = rho.d2();
  const Mat p = embed(tp.p1.matrix, Subsystem::One, d1, d2);
  const Mat q = Mat::Identity(p.rows(), p.cols()) - p;
  const Mat in = p * rho.matrix() * p;
  const Mat out = q * rho.matrix() * q;
  const double w = in.trace().real();
  if (w <= tol.zero_tol || w >= 1.0 - tol.zero_tol)
    throw InputError("projector splits off weight " + num(w) + "; the split is degenerate");
  BiorthogonalDecomposition dec;
  dec.weights = {w, 1.0 - w};
  dec.terms.push_back(density_or_consistency(d1, d2, in / w, tol, "P1 rho P1 / w"));
  dec.terms.push_back(density_or_consistency(d1, d2, out / (1.0 - w), tol, "P1perp rho / (1-w)"));
  dec.certificates.push_back(certify(dec.terms[0], dec.terms[1], 0, 1, tol));
  dec.product_form = {false, false};
  return dec;
}

TwinProjectorPair biorthogonal_from_mixture(const BipartiteDensity& first,
                                            const BipartiteDensity& second, double w,
                                            const ToleranceConfig& tol) {
  if (first.d1() != second.d1() || first.d2() != second.d2())
    throw InputError("mixture terms have different dimensions");
  if (!(w > 0.0 && w < 1.0)) throw InputError("mixture weight must lie in (0, 1)");
  const PairCertificate cert = certify(first, second, 0, 1, tol);
  if (!cert.subsystem1.orthogonal)
    throw InputError("terms are not biorthogonal: reduced states on subsystem 1 overlap");
  if (!cert.subsystem2.orthogonal)
    throw InputError("terms are not biorthogonal: reduced states on subsystem 2 overlap");
  const BipartiteDensity mix(first.d1(), first.d2(),
                             w * first.matrix() + (1.0 - w) * second.matrix(), tol);
  const Mat q1 = range_projector(reduced(first, Subsystem::One), Subsystem::One, tol).matrix;
  const Mat q2 = range_projector(reduced(first, Subsystem::Two), Subsystem::Two, tol).matrix;
  TwinProjectorPair tp;
  try {
    tp = classify_projector(q1, mix, tol, q2);
  } catch (const InputError& e) {
    throw ConsistencyError(std::string("range projectors of a biorthogonal term are not twins: ") +
                           e.what());
  }
  if (tp.strength != Strength::Strong)
    throw ConsistencyError("range projectors of a biorthogonal term are not strong twins");
  return tp;
}

BiorthogonalDecomposition strong_mixture(const TwinPair& pair, const BipartiteDensity& rho,
                                         const ToleranceConfig& tol) {
  if (classify_observable(pair, rho, tol) != ObservableStrength::Strong)
    throw InputError("twin observable is not strong; no biorthogonal mixture exists");
  const TwinSpectralData data = twin_spectral_projectors(pair, rho, tol);
  const int d1 = rho.d1(), d2 = rho.d2();
  const double check_tol = 10.0 * tol.zero_tol;
  BiorthogonalDecomposition dec;
  std::vector<std::size_t> used;
  for (std::size_t n = 0; n < data.projector_pairs.size(); ++n) {
    const auto& tp = data.projector_pairs[n];
    const Mat p = embed(tp.p1.matrix, Subsystem::One, d1, d2);
    const Mat part = p * rho.matrix() * p;
    const double w = part.trace().real();
    if (w <= tol.zero_tol) {
      dec.notices.push_back("value " + num(data.eigenvalues[n]) + " has zero weight; dropped");
      continue;
    }
    BipartiteDensity term = density_or_consistency(d1, d2, part / w, tol, "strong mixture term");
    for (int side = 0; side < 2; ++side) {
      const Subsystem s = side == 0 ? Subsystem::One : Subsystem::Two;
      const Mat ri = partial_trace(term.matrix(), d1, d2, s);
      const Mat& pi = side == 0 ? tp.p1.matrix : tp.p2.matrix;
      const double r = opnorm(pi * ri - ri);
      if (r > check_tol)
        throw ConsistencyError("term reduced state escapes its characteristic projector (" +
                               num(r) + ")");
    }
    bool product = false;
    if (data.multiplicities1[n] == 1) {
      const Mat psi = data.range_projectors1[n];
      const Mat r2 = partial_trace(term.matrix(), d1, d2, Subsystem::Two);
      const double r = opnorm(term.matrix() - kernels::kron(psi, r2));
      if (r > check_tol)
        throw ConsistencyError("nondegenerate strong value does not give a product term (" +
                               num(r) + ")");
      product = true;
    }
    dec.weights.push_back(w);
    dec.terms.push_back(std::move(term));
    dec.product_form.push_back(product);
    used.push_back(n);
  }
  for (std::size_t i = 0; i < dec.terms.size(); ++i)
    for (std::size_t j = i + 1; j < dec.terms.size(); ++j) {
      auto cert = certify(dec.terms[i], dec.terms[j], static_cast<int>(i), static_cast<int>(j),
                          tol);
      if (!cert.biorthogonal())
        throw ConsistencyError("strong mixture terms " + std::to_string(i) + " and " +
                               std::to_string(j) + " are not biorthogonal");
      dec.certificates.push_back(cert);
    }
  return dec;
}

WeakSplit weak_split_expansion(const TwinProjectorPair& tp, const BipartiteDensity& rho,
                               const ToleranceConfig& tol) {
  if (tp.strength == Strength::Strong)
    throw InputError("projector is a strong twin; use decompose_by_projector");
  const int d1 = rho.d1(), d2 = rho.d2();
  const double check_tol = 10.0 * tol.zero_tol;
  const Mat& r = rho.matrix();
  const Mat p1 = tp.p1.matrix, p1perp = Mat::Identity(d1, d1) - p1;
  const Mat p2 = tp.p2.matrix, p2perp = Mat::Identity(d2, d2) - p2;
  const Mat e1 = embed(p1, Subsystem::One, d1, d2);

  WeakSplit ws;
  ws.part_in = e1 * r;
  ws.part_out = r - ws.part_in;
  ws.trace_in = (r * ws.part_in).trace().real();
  ws.trace_out = (r * ws.part_out).trace().real();
  if (ws.trace_in < -check_tol || ws.trace_out < -check_tol ||
      ws.trace_in + ws.trace_out > 1.0 + tol.zero_tol)
    throw ConsistencyError("HS norms of the split parts violate Tr(rho^2) <= 1");

  ws.expansion_in = operator_schmidt_complex(ws.part_in, d1, d2, tol);
  ws.expansion_out = operator_schmidt_complex(ws.part_out, d1, d2, tol);
  const double inv = std::max({invariance_residual(ws.expansion_in.factors1, p1),
                               invariance_residual(ws.expansion_in.factors2, p2),
                               invariance_residual(ws.expansion_out.factors1, p1perp),
                               invariance_residual(ws.expansion_out.factors2, p2perp)});
  if (inv > check_tol)
    throw ConsistencyError("expansion factors are not invariant under the twin projectors (" +
                           num(inv) + ")");
  ws.max_cross = std::max(max_cross(ws.expansion_in.factors1, ws.expansion_out.factors1),
                          max_cross(ws.expansion_in.factors2, ws.expansion_out.factors2));
  ws.cross_orthogonality = ws.max_cross <= check_tol;
  if (!ws.cross_orthogonality)
    throw ConsistencyError("weak split expansions are not HS-orthogonal (" + num(ws.max_cross) +
                           ")");

  struct Term {
    double coeff;
    const Mat* f1;
    const Mat* f2;
  };
  std::vector<Term> terms;
  for (const auto* e : {&ws.expansion_in, &ws.expansion_out})
    for (int i = 0; i < e->terms(); ++i)
      terms.push_back({e->normalization * e->coefficients(i), &e->factors1[i], &e->factors2[i]});
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.coeff > b.coeff; });
  OperatorSchmidt& c = ws.combined;
  c.d1 = d1;
  c.d2 = d2;
  c.normalization = hs_norm(r);
  c.coefficients.resize(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t i = 0; i < terms.size(); ++i) {
    c.coefficients(static_cast<Eigen::Index>(i)) = terms[i].coeff / c.normalization;
    c.factors1.push_back(*terms[i].f1);
    c.factors2.push_back(*terms[i].f2);
  }
  c.degenerate_blocks = degenerate_blocks(c.coefficients, tol.degeneracy_tol);
  c.hermitian_factors =
      std::all_of(c.factors1.begin(), c.factors1.end(),
                  [&](const Mat& f) { return is_hermitian(f, tol.zero_tol); }) &&
      std::all_of(c.factors2.begin(), c.factors2.end(),
                  [&](const Mat& f) { return is_hermitian(f, tol.zero_tol); });
  const double rec = opnorm(c.reconstruct() - r);
  if (rec > check_tol)
    throw ConsistencyError("combined weak-split expansion does not reproduce the state (" +
                           num(rec) + ")");
  return ws;
}

std::pair<bool, bool> hs_orthogonality_equiv(const Mat& a, const Mat& b,
                                             const ToleranceConfig& tol) {
  const OrthogonalityCertificate cert = states_orthogonal(a, b, tol);
  const double scale = opnorm(a) * opnorm(b);
  const bool hs = std::abs(hs_inner(a, b)) <= tol.zero_tol * scale;
  if (hs != cert.orthogonal)
    throw ConsistencyError("operator orthogonality and HS orthogonality disagree (|<a|b>| = " +
                           num(std::abs(hs_inner(a, b))) + ")");
  return {cert.orthogonal, hs};
}

}  // namespace twinlab
