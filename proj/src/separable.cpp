#include "twinlab/separable.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace twinlab {

namespace {

void require_density(const Mat& m, int d, const std::string& field,
                     const ToleranceConfig& tol) {
  if (m.rows() != d || m.cols() != d)
    throw InputError(field + ": must be " + std::to_string(d) + "x" + std::to_string(d));
  if (!m.allFinite()) throw InputError(field + ": non-finite entries");
  if (!is_hermitian(m, tol.zero_tol)) throw InputError(field + ": not Hermitian");
  if (std::abs(m.trace().real() - 1.0) > tol.zero_tol)
    throw InputError(field + ": trace differs from 1");
  const Eigh e = eigh((m + m.adjoint()) / 2.0);
  if (e.values(e.values.size() - 1) < -tol.zero_tol)
    throw InputError(field + ": negative eigenvalue");
}

int find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

Mat group_sum(const SeparableMixture& mix, const std::vector<int>& group, Subsystem s) {
  const int d = s == Subsystem::One ? mix.d1() : mix.d2();
  Mat sum = Mat::Zero(d, d);
  for (int k : group) {
    const auto& t = mix.terms()[k];
    sum += t.w * (s == Subsystem::One ? t.rho1 : t.rho2);
  }
  return sum;
}

TwinProjectorPair induced_pair(const Mat& p1, const Mat& p2, const BipartiteDensity& rho,
                               const ToleranceConfig& tol) {
  TwinProjectorPair tp;
  try {
    tp = classify_projector(p1, rho, tol, p2);
  } catch (const InputError& e) {
    throw ConsistencyError(std::string("group projectors are not twins: ") + e.what());
  }
  if (tp.strength != Strength::Strong)
    throw ConsistencyError("group projectors form a weak twin pair (||[P1, rho]|| = " +
                           std::to_string(tp.commutator_norm) + ")");
  return tp;
}

}  // namespace

SeparableMixture::SeparableMixture(int d1, int d2, std::vector<SeparableTerm> terms,
                                   const ToleranceConfig& tol)
    : d1_(d1), d2_(d2), terms_(std::move(terms)) {
  if (d1 <= 0 || d2 <= 0) throw InputError("separable: dimensions must be positive");
  if (terms_.empty()) throw InputError("separable: terms is empty");
  double total = 0.0;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const std::string at = "terms[" + std::to_string(k) + "]";
    auto& t = terms_[k];
    if (!(t.w > 0.0) || !std::isfinite(t.w)) throw InputError(at + ".w: must be positive");
    require_density(t.rho1, d1, at + ".rho1", tol);
    require_density(t.rho2, d2, at + ".rho2", tol);
    t.rho1 = (t.rho1 + t.rho1.adjoint()) / 2.0;
    t.rho2 = (t.rho2 + t.rho2.adjoint()) / 2.0;
    total += t.w;
  }
  if (std::abs(total - 1.0) > tol.zero_tol)
    throw InputError("separable: weights sum to " + std::to_string(total) + ", not 1");
}

BipartiteDensity assemble(const SeparableMixture& mix, const ToleranceConfig& tol) {
  const int n = mix.d1() * mix.d2();
  Mat sum = Mat::Zero(n, n);
  for (const auto& t : mix.terms()) sum += t.w * tensor_product(t.rho1, t.rho2);
  return BipartiteDensity(mix.d1(), mix.d2(), sum, tol);
}

PartitionResult partition_biorthogonal(const SeparableMixture& mix, const ToleranceConfig& tol) {
  const int n = mix.size();
  const auto& terms = mix.terms();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      const bool sep = states_orthogonal(terms[k].rho1, terms[l].rho1, tol).orthogonal &&
                       states_orthogonal(terms[k].rho2, terms[l].rho2, tol).orthogonal;
      if (!sep) parent[find(parent, k)] = find(parent, l);
    }

  PartitionResult out;
  std::vector<int> slot(n, -1);
  for (int k = 0; k < n; ++k) {
    const int root = find(parent, k);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(out.groups.size());
      out.groups.emplace_back();
    }
    out.groups[slot[root]].push_back(k);
  }
  for (const auto& g : out.groups)
    out.group_projectors.push_back(
        {range_projector(group_sum(mix, g, Subsystem::One), Subsystem::One, tol),
         range_projector(group_sum(mix, g, Subsystem::Two), Subsystem::Two, tol)});

  out.sharp_group.assign(n, -1);
  const int g = static_cast<int>(out.groups.size());
  if (g < 2) return out;

  const BipartiteDensity rho = assemble(mix, tol);
  const auto sides = [&](const std::vector<int>& chosen) {
    Mat p1 = Mat::Zero(mix.d1(), mix.d1()), p2 = Mat::Zero(mix.d2(), mix.d2());
    for (int i : chosen) {
      p1 += out.group_projectors[i].p1.matrix;
      p2 += out.group_projectors[i].p2.matrix;
    }
    return std::pair{p1, p2};
  };

  if (g <= kMaxBipartitionGroups) {
    const unsigned long count = 1UL << (g - 1);
    for (unsigned long mask = 0; mask + 1 < count; ++mask) {
      std::vector<int> chosen{0};
      for (int i = 1; i < g; ++i)
        if (mask >> (i - 1) & 1UL) chosen.push_back(i);
      const auto [p1, p2] = sides(chosen);
      out.induced_twins.push_back(induced_pair(p1, p2, rho, tol));
      out.bipartitions.push_back(std::move(chosen));
    }
  } else {
    out.bipartitions_truncated = true;
    // group 0 alone, then every other group alone (written as its complement)
    for (int i = 0; i < g; ++i) {
      std::vector<int> chosen;
      for (int j = 0; j < g; ++j)
        if (i == 0 ? j == 0 : j != i) chosen.push_back(j);
      const auto [p1, p2] = sides(chosen);
      out.induced_twins.push_back(induced_pair(p1, p2, rho, tol));
      out.bipartitions.push_back(std::move(chosen));
    }
  }

  for (int i = 0; i < g; ++i) {
    const auto [p1, p2] = sides({i});
    out.group_family.push_back(induced_pair(p1, p2, rho, tol));
  }

  const double check = 10.0 * tol.zero_tol;
  for (int k = 0; k < n; ++k) {
    const Mat prod = tensor_product(terms[k].rho1, terms[k].rho2);
    int hits = 0;
    for (int i = 0; i < g; ++i) {
      const auto& fam = out.group_family[i];
      const Mat e1 = embed(fam.p1.matrix, Subsystem::One, mix.d1(), mix.d2());
      const Mat e2 = embed(fam.p2.matrix, Subsystem::Two, mix.d1(), mix.d2());
      if (opnorm(e1 * prod - prod) <= check && opnorm(e2 * prod - prod) <= check) {
        ++hits;
        out.sharp_group[k] = i;
      }
    }
    if (hits != 1)
      throw ConsistencyError("term " + std::to_string(k) + " is fixed by " +
                             std::to_string(hits) + " group projectors instead of one");
  }
  return out;
}

TwinSolution mixture_twin_intersection(const std::vector<BipartiteDensity>& terms,
                                       const ToleranceConfig& tol) {
  if (terms.empty()) throw InputError("mixture_twin_intersection: no terms");
  const int d1 = terms.front().d1(), d2 = terms.front().d2();
  for (const auto& t : terms)
    if (t.d1() != d1 || t.d2() != d2)
      throw InputError("mixture_twin_intersection: terms differ in dimensions");
  const Eigen::Index m = static_cast<Eigen::Index>(d1) * d1 + static_cast<Eigen::Index>(d2) * d2;
  const RMat id = RMat::Identity(m, m);
  RMat stacked(m * static_cast<Eigen::Index>(terms.size()), m);
  Mat average = Mat::Zero(terms.front().dim(), terms.front().dim());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const RMat nk = twin_null_space(terms[k], tol);
    stacked.middleRows(static_cast<Eigen::Index>(k) * m, m) = id - nk * nk.transpose();
    average += terms[k].matrix();
  }
  average /= static_cast<double>(terms.size());

  Eigen::JacobiSVD<RMat> svd(stacked, Eigen::ComputeFullV);
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > tol.degeneracy_tol)
    ++rank;
  const RMat common = svd.matrixV().rightCols(m - rank);
  return split_trivial(common, BipartiteDensity(d1, d2, average, tol), tol);
}

}  // namespace twinlab
