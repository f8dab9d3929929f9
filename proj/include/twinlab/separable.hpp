#pragma once

#include <vector>

#include "twinlab/operator_core.hpp"
#include "twinlab/twins.hpp"

namespace twinlab {

struct SeparableTerm {
  double w = 0.0;
  Mat rho1;
  Mat rho2;
};

/// sum_k w_k rho1^(k) (x) rho2^(k). Terms are kept as given, duplicates included.
class SeparableMixture {
 public:
  /// Weights must be positive and sum to 1 within zero_tol; every factor
  /// must be a density of the right size.
  SeparableMixture(int d1, int d2, std::vector<SeparableTerm> terms,
                   const ToleranceConfig& tol = {});

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  const std::vector<SeparableTerm>& terms() const { return terms_; }
  int size() const { return static_cast<int>(terms_.size()); }

 private:
  int d1_;
  int d2_;
  std::vector<SeparableTerm> terms_;
};

BipartiteDensity assemble(const SeparableMixture& mix, const ToleranceConfig& tol = {});

struct GroupProjectors {
  OrthogonalProjector p1;  // onto the span of the group's subsystem-1 supports
  OrthogonalProjector p2;
};

struct PartitionResult {
  /// Connected components of the overlap graph, each sorted, ordered by
  /// smallest member.
  std::vector<std::vector<int>> groups;
  std::vector<GroupProjectors> group_projectors;
  /// One strong pair per bipartition of the groups; bipartitions[j] lists the
  /// groups on the P side (always containing group 0).
  std::vector<TwinProjectorPair> induced_twins;
  std::vector<std::vector<int>> bipartitions;
  /// Set when there are too many groups to list every bipartition; only
  /// single-group splits are listed then.
  bool bipartitions_truncated = false;
  /// Per-group strong pairs, present with two or more groups.
  std::vector<TwinProjectorPair> group_family;
  /// For each term, the family member that fixes it (-1 without a family).
  std::vector<int> sharp_group;

  bool has_nontrivial_twins() const { return groups.size() >= 2; }
};

/// Largest group count for which every bipartition is listed.
inline constexpr int kMaxBipartitionGroups = 11;

PartitionResult partition_biorthogonal(const SeparableMixture& mix,
                                       const ToleranceConfig& tol = {});

/// Twin pairs common to every term, split into nontrivial and trivial
/// directions relative to the equal-weight mixture.
TwinSolution mixture_twin_intersection(const std::vector<BipartiteDensity>& terms,
                                       const ToleranceConfig& tol = {});

}  // namespace twinlab
