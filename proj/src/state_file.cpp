#include "twinlab/state_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace twinlab {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& name, const std::string& path) {
  if (!obj.is_object()) throw InputError(path.empty() ? "document: expected an object"
                                                      : path + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end())
    throw InputError((path.empty() ? "" : path + ".") + name + ": missing field");
  return *it;
}

std::string join(const std::string& path, const std::string& name) {
  return path.empty() ? name : path + "." + name;
}

int dimension(const json& obj, const std::string& name) {
  const json& v = field(obj, name, "");
  if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > 4096)
    throw InputError(name + ": expected a positive integer");
  return v.get<int>();
}

cplx entry(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw InputError(path + ": expected [re, im]");
  const cplx z(v[0].get<double>(), v[1].get<double>());
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InputError(path + ": non-finite value");
  return z;
}

Mat matrix(const json& v, int d, const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(d))
    throw InputError(path + ": expected " + std::to_string(d) + " rows");
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    const std::string row = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != static_cast<std::size_t>(d))
      throw InputError(row + ": expected " + std::to_string(d) + " entries");
    for (int j = 0; j < d; ++j) m(i, j) = entry(v[i][j], row + "[" + std::to_string(j) + "]");
  }
  return m;
}

Vec vector(const json& v, int n, const std::string& path) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(n))
    throw InputError(path + ": expected " + std::to_string(n) + " entries");
  Vec out(n);
  for (int i = 0; i < n; ++i) out(i) = entry(v[i], path + "[" + std::to_string(i) + "]");
  return out;
}

}  // namespace

const char* to_string(StateKind k) {
  switch (k) {
    case StateKind::Density:
      return "density";
    case StateKind::Pure:
      return "pure";
    case StateKind::Separable:
      return "separable";
    case StateKind::Operator:
      return "operator";
    case StateKind::Projector:
      return "projector";
  }
  return "?";
}

StateFile parse_state(const json& doc) {
  const json& kind = field(doc, "kind", "");
  if (!kind.is_string()) throw InputError("kind: expected a string");
  const std::string k = kind.get<std::string>();
  StateFile f;
  if (k == "projector") {
    f.kind = StateKind::Projector;
    f.d1 = dimension(doc, "d");
    f.matrix = matrix(field(doc, "matrix", ""), f.d1, "matrix");
    if (doc.contains("partner")) {
      const json& p = doc["partner"];
      if (!p.is_array() || p.empty()) throw InputError("partner: expected a square matrix");
      f.partner = matrix(p, static_cast<int>(p.size()), "partner");
    }
    return f;
  }
  f.d1 = dimension(doc, "d1");
  f.d2 = dimension(doc, "d2");
  const int n = f.d1 * f.d2;
  if (k == "density" || k == "operator") {
    f.kind = k == "density" ? StateKind::Density : StateKind::Operator;
    f.matrix = matrix(field(doc, "matrix", ""), n, "matrix");
  } else if (k == "pure") {
    f.kind = StateKind::Pure;
    f.vector = vector(field(doc, "vector", ""), n, "vector");
  } else if (k == "separable") {
    f.kind = StateKind::Separable;
    const json& terms = field(doc, "terms", "");
    if (!terms.is_array() || terms.empty()) throw InputError("terms: expected a non-empty array");
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const std::string at = "terms[" + std::to_string(t) + "]";
      const json& w = field(terms[t], "w", at);
      if (!w.is_number()) throw InputError(join(at, "w") + ": expected a number");
      f.terms.push_back({w.get<double>(), matrix(field(terms[t], "rho1", at), f.d1, join(at, "rho1")),
                         matrix(field(terms[t], "rho2", at), f.d2, join(at, "rho2"))});
    }
  } else {
    throw InputError("kind: unknown value \"" + k + "\"");
  }
  return f;
}

StateFile parse_state_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  return parse_state(doc);
}

StateFile load_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_state_text(ss.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

BipartiteDensity density_of(const StateFile& f, const ToleranceConfig& tol) {
  switch (f.kind) {
    case StateKind::Density:
      return BipartiteDensity(f.d1, f.d2, f.matrix, tol);
    case StateKind::Pure:
      return BipartiteDensity(f.d1, f.d2,
                              PureBipartiteState(f.d1, f.d2, f.vector, tol).density_matrix(), tol);
    case StateKind::Separable:
      return assemble(SeparableMixture(f.d1, f.d2, f.terms, tol), tol);
    default:
      throw InputError(std::string("expected a state file, got kind ") + to_string(f.kind));
  }
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

}  // namespace twinlab
