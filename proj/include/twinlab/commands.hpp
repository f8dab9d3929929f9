#pragma once

#include <string>

#include <json.hpp>

#include "twinlab/operator_core.hpp"
#include "twinlab/state_file.hpp"

namespace twinlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConsistency = 3;

struct Report {
  nlohmann::json json;
  std::string text;
  int exit_code = kExitOk;

  bool verified() const { return json.value("verified", false); }
};

enum class SchmidtMode { Default, Hermitian, Complex, PureNonhermitian };

Report cmd_twins(const StateFile& state, const ToleranceConfig& tol);
Report cmd_schmidt(const StateFile& state, SchmidtMode mode, const ToleranceConfig& tol);
Report cmd_decompose(const StateFile& state, const StateFile& projector,
                     const ToleranceConfig& tol);
Report cmd_partition(const StateFile& state, const ToleranceConfig& tol);

/// File-level entry points: load, validate tolerances, run, and turn
/// InputError / ConsistencyError into reports with exit codes 2 / 3.
Report run_twins(const std::string& path, const ToleranceConfig& tol);
Report run_schmidt(const std::string& path, SchmidtMode mode, const ToleranceConfig& tol);
Report run_decompose(const std::string& path, const std::string& projector_path,
                     const ToleranceConfig& tol);
Report run_partition(const std::string& path, const ToleranceConfig& tol);

}  // namespace twinlab
