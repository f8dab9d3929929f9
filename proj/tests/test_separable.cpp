#include <doctest.h>

#include "support/random_states.hpp"
#include "twinlab/separable.hpp"

using namespace twinlab;

namespace {

Mat proj(int d, int i) {
  Mat m = Mat::Zero(d, d);
  m(i, i) = 1.0;
  return m;
}

SeparableMixture singlet_mixture() {
  return SeparableMixture(2, 2, {{0.5, proj(2, 0), proj(2, 1)}, {0.5, proj(2, 1), proj(2, 0)}});
}

RMat flat_basis(const TwinSolution& sol) {
  RMat out(2 * (sol.d1 * sol.d1 + sol.d2 * sol.d2), static_cast<Eigen::Index>(sol.basis.size()));
  for (std::size_t c = 0; c < sol.basis.size(); ++c)
    out.col(c) = support::flatten_pair(sol.basis[c].pair.a1.matrix, sol.basis[c].pair.a2.matrix);
  return out;
}

}  // namespace

TEST_CASE("assemble") {
  CHECK(support::opnorm(assemble(singlet_mixture()).matrix() - support::measured_singlet()) < 1e-15);

  support::Rng rng(51);
  const Mat r1 = support::random_density(rng, 2), r2 = support::random_density(rng, 3);
  CHECK(support::opnorm(assemble(SeparableMixture(2, 3, {{1.0, r1, r2}})).matrix() - support::kron(r1, r2)) < 1e-15);

  Vec xp(2), xm(2);
  xp << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  xm << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  const SeparableMixture unpolarized(2, 1, {{0.5, xp * xp.adjoint(), Mat::Identity(1, 1)},
                                            {0.5, xm * xm.adjoint(), Mat::Identity(1, 1)}});
  CHECK(support::opnorm(assemble(unpolarized).matrix() - Mat::Identity(2, 2) / 2.0) < 1e-15);

  CHECK_THROWS_AS(SeparableMixture(2, 2, {{0.6, proj(2, 0), proj(2, 1)}, {0.6, proj(2, 1), proj(2, 0)}}),
                  InputError);
  CHECK_THROWS_AS(SeparableMixture(2, 2, {{1.0, Mat::Identity(2, 2), proj(2, 1)}}), InputError);
  CHECK_THROWS_AS(SeparableMixture(2, 2, {}), InputError);
}

TEST_CASE("partition of the measured singlet") {
  const PartitionResult res = partition_biorthogonal(singlet_mixture());
  CHECK(res.groups == std::vector<std::vector<int>>{{0}, {1}});
  CHECK(res.has_nontrivial_twins());
  REQUIRE(res.induced_twins.size() == 1);
  const auto& tp = res.induced_twins.front();
  CHECK(tp.strength == Strength::Strong);
  CHECK(support::opnorm(tp.p1.matrix - proj(2, 0)) < 1e-12);
  CHECK(support::opnorm(tp.p2.matrix - proj(2, 1)) < 1e-12);
  CHECK(res.group_family.size() == 2);
  CHECK(res.sharp_group == std::vector<int>{0, 1});
}

TEST_CASE("shared factor joins terms into one group") {
  support::Rng rng(52);
  const Mat shared = support::random_density(rng, 2, 1);
  const SeparableMixture mix(2, 2, {{0.5, proj(2, 0), shared}, {0.5, proj(2, 1), shared}});
  const PartitionResult res = partition_biorthogonal(mix);
  CHECK(res.groups.size() == 1);
  CHECK(res.induced_twins.empty());
  CHECK_FALSE(twin_solve(assemble(mix)).has_nontrivial());
}

TEST_CASE("three disjoint blocks") {
  const SeparableMixture mix(3, 3, {{0.5, proj(3, 0), proj(3, 1)},
                                    {0.3, proj(3, 1), proj(3, 2)},
                                    {0.2, proj(3, 2), proj(3, 0)}});
  const PartitionResult res = partition_biorthogonal(mix);
  CHECK(res.groups.size() == 3);
  CHECK(res.group_family.size() == 3);
  CHECK(res.induced_twins.size() == 3);
  const BipartiteDensity rho = assemble(mix);
  for (const auto& tp : res.induced_twins) CHECK(tp.commutator_norm <= 1e-10);
  for (const auto& tp : res.group_family) CHECK(tp.strength == Strength::Strong);
  CHECK(res.sharp_group == std::vector<int>{0, 1, 2});
}

TEST_CASE("partition verdict agrees with the twin equation") {
  support::Rng rng(53);
  for (int trial = 0; trial < 60; ++trial) {
    const int d1 = rng.pick(2, 3), d2 = rng.pick(2, 3), terms = rng.pick(1, 4);
    const Mat u1 = support::random_unitary(rng, d1), u2 = support::random_unitary(rng, d2);
    std::vector<SeparableTerm> ts;
    double total = 0.0;
    for (int k = 0; k < terms; ++k) {
      // pure factors on randomly chosen frame vectors, sometimes generic
      const int a = rng.pick(0, d1 - 1), b = rng.pick(0, d2 - 1);
      Mat r1 = u1.col(a) * u1.col(a).adjoint(), r2 = u2.col(b) * u2.col(b).adjoint();
      if (rng.uniform() < 0.2) r1 = support::random_density(rng, d1, rng.pick(1, d1));
      const double w = rng.uniform(0.2, 1.0);
      total += w;
      ts.push_back({w, r1, r2});
    }
    for (auto& t : ts) t.w /= total;
    const SeparableMixture mix(d1, d2, ts);
    const PartitionResult res = partition_biorthogonal(mix);
    const TwinSolution sol = twin_solve(assemble(mix));
    CHECK(res.has_nontrivial_twins() == sol.has_nontrivial());
  }
}

TEST_CASE("intersection of term twin spaces") {
  const SeparableMixture mix = singlet_mixture();
  std::vector<BipartiteDensity> terms;
  for (const auto& t : mix.terms()) terms.emplace_back(2, 2, support::kron(t.rho1, t.rho2));
  const TwinSolution common = mixture_twin_intersection(terms);
  RMat zz(8 + 8, 1);
  Mat z = proj(2, 0) - proj(2, 1);
  zz.col(0) = support::flatten_pair(z, -z);
  const RMat span = flat_basis(common);
  const RMat residual = zz - span * (span.transpose() * span).ldlt().solve(span.transpose() * zz);
  CHECK(residual.norm() < 1e-10);
  CHECK(support::max_principal_angle(span, flat_basis(twin_solve(assemble(mix)))) <= 1e-6);

  support::Rng rng(54);
  const BipartiteDensity single(2, 3, support::random_density(rng, 6));
  CHECK(support::max_principal_angle(flat_basis(mixture_twin_intersection({single})),
                                     flat_basis(twin_solve(single))) <= 1e-6);

  const BipartiteDensity p(2, 2, support::kron(support::random_density(rng, 2), support::random_density(rng, 2)));
  const BipartiteDensity q(2, 2, support::kron(support::random_density(rng, 2), support::random_density(rng, 2)));
  CHECK_FALSE(mixture_twin_intersection({p, q}).has_nontrivial());

  CHECK_THROWS_AS(mixture_twin_intersection({}), InputError);
}
