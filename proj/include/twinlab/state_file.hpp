#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinlab/operator_core.hpp"
#include "twinlab/separable.hpp"

namespace twinlab {

enum class StateKind { Density, Pure, Separable, Operator, Projector };

const char* to_string(StateKind k);

/// Parsed input document. Only the fields of the given kind are filled.
///   density    {"kind","d1","d2","matrix"}
///   pure       {"kind","d1","d2","vector"}
///   separable  {"kind","d1","d2","terms":[{"w","rho1","rho2"}]}
///   operator   {"kind","d1","d2","matrix"}      any bipartite operator
///   projector  {"kind","d","matrix"[,"partner"]} subsystem-1 projector
/// Complex entries are [re, im] pairs.
struct StateFile {
  StateKind kind = StateKind::Density;
  int d1 = 0;
  int d2 = 0;
  Mat matrix;
  Vec vector;
  std::vector<SeparableTerm> terms;
  std::optional<Mat> partner;
};

/// Shape and type validation; errors name the field path, e.g. matrix[2][1].
StateFile parse_state(const nlohmann::json& doc);
StateFile parse_state_text(const std::string& text);
StateFile load_state_file(const std::string& path);

/// Builds the density a state file describes (density, pure or separable).
BipartiteDensity density_of(const StateFile& f, const ToleranceConfig& tol);

nlohmann::json to_json(cplx z);
nlohmann::json to_json(const Mat& m);
nlohmann::json to_json(const Vec& v);

}  // namespace twinlab
