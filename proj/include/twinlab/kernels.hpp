#pragma once

// Dense bipartite kernels. Each kernel has a straightforward serial reference
// in kernels::serial and an OpenMP version in kernels. The OpenMP versions
// parallelize over independent output entries and keep the per-entry
// summation order of the serial code, so both produce identical bits.

#include <vector>

#include "twinlab/operator_core.hpp"

namespace twinlab::kernels {

namespace serial {

Mat kron(const Mat& a, const Mat& b);
Mat partial_trace(const Mat& w, int d1, int d2, Subsystem keep);

/// R[(i1*d1 + j1), (i2*d2 + j2)] = W[(i1*d2 + i2), (j1*d2 + j2)].
Mat realign(const Mat& w, int d1, int d2);

/// Real matrix of the linear map (x, y) -> (sum_a x_a B1_a (x) I - sum_b y_b I (x) B2_b) rho,
/// with each complex output entry split into (re, im) rows: row 2k is Re, 2k+1 is Im
/// of the k-th entry in column-major order.
RMat twin_system(const Mat& rho, int d1, int d2, const std::vector<Mat>& basis1,
                 const std::vector<Mat>& basis2);

}  // namespace serial

Mat kron(const Mat& a, const Mat& b);
Mat partial_trace(const Mat& w, int d1, int d2, Subsystem keep);
Mat realign(const Mat& w, int d1, int d2);
RMat twin_system(const Mat& rho, int d1, int d2, const std::vector<Mat>& basis1,
                 const std::vector<Mat>& basis2);

/// Work below which the OpenMP kernels stay on one thread.
inline constexpr long kParallelThreshold = 1L << 14;

}  // namespace twinlab::kernels
