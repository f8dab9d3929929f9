#include "twinlab/commands.hpp"

#include <cstdio>
#include <sstream>

#include "twinlab/schmidt.hpp"
#include "twinlab/separable.hpp"
#include "twinlab/twins.hpp"

namespace twinlab {

using nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

json tolerances(const ToleranceConfig& tol) {
  return {{"zero_tol", tol.zero_tol}, {"rank_tol", tol.rank_tol},
          {"degeneracy_tol", tol.degeneracy_tol}};
}

json header(const char* analysis, const ToleranceConfig& tol) {
  json j;
  j["analysis"] = analysis;
  j["tolerances"] = tolerances(tol);
  return j;
}

json to_json(const RVec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mats(const std::vector<Mat>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(twinlab::to_json(m));
  return out;
}

json blocks(const std::vector<DegenerateBlock>& bs) {
  json out = json::array();
  for (const auto& b : bs) out.push_back({b.begin, b.end});
  return out;
}

json expansion_json(const OperatorSchmidt& e, const Mat& target) {
  return {{"normalization", e.normalization},
          {"coefficients", to_json(e.coefficients)},
          {"factors1", mats(e.factors1)},
          {"factors2", mats(e.factors2)},
          {"hermitian_factors", e.hermitian_factors},
          {"degenerate_blocks", blocks(e.degenerate_blocks)},
          {"reconstruction_residual", opnorm(e.reconstruct() - target)}};
}

std::string coeff_line(const OperatorSchmidt& e, bool absolute) {
  std::string s;
  for (int i = 0; i < e.terms(); ++i)
    s += (i ? " " : "") + fmt((absolute ? e.normalization : 1.0) * e.coefficients(i));
  return s;
}

json certificate_json(const OrthogonalityCertificate& c) {
  return {{"orthogonal", c.orthogonal},
          {"product_norm", c.product_norm},
          {"projector_norm", c.projector_norm},
          {"range_overlap", c.range_overlap}};
}

json pair_certificates(const std::vector<PairCertificate>& cs) {
  json out = json::array();
  for (const auto& c : cs)
    out.push_back({{"terms", {c.first, c.second}},
                   {"biorthogonal", c.biorthogonal()},
                   {"subsystem1", certificate_json(c.subsystem1)},
                   {"subsystem2", certificate_json(c.subsystem2)}});
  return out;
}

json projector_pair_json(const TwinProjectorPair& tp) {
  return {{"p1", twinlab::to_json(tp.p1.matrix)},
          {"p2", twinlab::to_json(tp.p2.matrix)},
          {"rank1", tp.p1.rank},
          {"rank2", tp.p2.rank},
          {"strength", to_string(tp.strength)},
          {"commutator_norm", tp.commutator_norm},
          {"twin_residual", tp.residual},
          {"trivial", tp.trivial}};
}

json decomposition_json(const BiorthogonalDecomposition& d, double residual) {
  json terms = json::array();
  for (const auto& t : d.terms) terms.push_back(twinlab::to_json(t.matrix()));
  json product = json::array();
  for (bool b : d.product_form) product.push_back(b);
  return {{"weights", d.weights},
          {"terms", terms},
          {"product_form", product},
          {"certificates", pair_certificates(d.certificates)},
          {"all_biorthogonal", d.all_biorthogonal()},
          {"notices", d.notices},
          {"reconstruction_residual", residual}};
}

Report finish(json j, std::ostringstream& text, bool verified) {
  j["verified"] = verified;
  text << "verified: " << (verified ? "true" : "false") << "\n";
  return {std::move(j), text.str(), verified ? kExitOk : kExitConsistency};
}

Report failure(const char* analysis, const ToleranceConfig& tol, const char* type,
               const std::string& message, int code) {
  json j = header(analysis, tol);
  j["error"] = {{"type", type}, {"message", message}};
  return {std::move(j), std::string(type) + " error: " + message + "\n", code};
}

template <class F>
Report guarded(const char* analysis, const ToleranceConfig& tol, F&& run) {
  try {
    tol.validate();
    return run();
  } catch (const InputError& e) {
    return failure(analysis, tol, "input", e.what(), kExitInput);
  } catch (const ConsistencyError& e) {
    return failure(analysis, tol, "consistency", e.what(), kExitConsistency);
  }
}

}  // namespace

Report cmd_twins(const StateFile& state, const ToleranceConfig& tol) {
  const BipartiteDensity rho = density_of(state, tol);
  const TwinSolution sol = twin_solve(rho, tol);
  const double check = 10.0 * tol.zero_tol;
  json j = header("twins", tol);
  j["d1"] = rho.d1();
  j["d2"] = rho.d2();
  std::ostringstream text;
  text << "twins: d1=" << rho.d1() << " d2=" << rho.d2() << "\n"
       << "twin space dimension " << sol.basis.size() << " (" << sol.nontrivial_dim
       << " nontrivial, " << sol.trivial_dim << " trivial)\n";

  bool verified = true;
  json basis = json::array();
  for (const auto& e : sol.basis) {
    verified = verified && e.pair.residual <= tol.zero_tol;
    basis.push_back({{"a1", twinlab::to_json(e.pair.a1.matrix)},
                     {"a2", twinlab::to_json(e.pair.a2.matrix)},
                     {"trivial", e.trivial},
                     {"residual", e.pair.residual}});
  }
  j["twin_space"] = {{"dimension", sol.basis.size()},
                     {"nontrivial_dimension", sol.nontrivial_dim},
                     {"trivial_dimension", sol.trivial_dim},
                     {"basis", basis}};

  json pairs = json::array();
  for (std::size_t i = 0; i < sol.basis.size(); ++i) {
    if (sol.basis[i].trivial) continue;
    const TwinPair& pair = sol.basis[i].pair;
    const ReducedCommutation rc = verify_reduced_commutation(pair, rho, tol);
    const TwinSpectralData data = twin_spectral_projectors(pair, rho, tol);
    const ObservableStrength strength = classify_observable(pair, rho, tol);
    text << "nontrivial pair " << i << ": " << to_string(strength) << "\n";
    json projectors = json::array();
    for (std::size_t n = 0; n < data.projector_pairs.size(); ++n) {
      const auto& tp = data.projector_pairs[n];
      json pj = projector_pair_json(tp);
      pj["value"] = data.eigenvalues[n];
      pj["multiplicity1"] = data.multiplicities1[n];
      pj["multiplicity2"] = data.multiplicities2[n];
      projectors.push_back(std::move(pj));
      text << "  value " << fmt(data.eigenvalues[n]) << ": P1 rank " << tp.p1.rank
           << ", P2 rank " << tp.p2.rank << ", " << to_string(tp.strength)
           << ", ||[P1,rho]|| = " << fmt(tp.commutator_norm) << "\n";
    }
    json pj = {{"basis_index", i},
               {"strength", to_string(strength)},
               {"reduced_commutation", {rc.norm1, rc.norm2}},
               {"projectors", projectors}};
    if (strength == ObservableStrength::Strong) {
      const BiorthogonalDecomposition dec = strong_mixture(pair, rho, tol);
      const double residual = opnorm(dec.reconstruct() - rho.matrix());
      verified = verified && residual <= check && dec.all_biorthogonal();
      pj["mixture"] = decomposition_json(dec, residual);
      text << "  biorthogonal mixture weights:";
      for (double w : dec.weights) text << " " << fmt(w);
      text << "\n";
    }
    pairs.push_back(std::move(pj));
  }
  j["nontrivial_pairs"] = pairs;
  j["summary"] = sol.has_nontrivial() ? "nontrivial twins" : "trivial only";
  text << (sol.has_nontrivial() ? "nontrivial twins found" : "trivial only") << "\n";
  return finish(std::move(j), text, verified);
}

Report cmd_schmidt(const StateFile& state, SchmidtMode mode, const ToleranceConfig& tol) {
  const double check = 10.0 * tol.zero_tol;
  json j = header("schmidt", tol);
  std::ostringstream text;
  j["d1"] = state.d1;
  j["d2"] = state.d2;

  if (state.kind == StateKind::Pure && mode == SchmidtMode::Default) {
    const PureBipartiteState phi(state.d1, state.d2, state.vector, tol);
    const StateSchmidt s = schmidt_state(phi, tol);
    const AntilinearMap u = correlation_map(phi, tol);
    const double residual = (s.reconstruct() - phi.vector()).norm();
    j["mode"] = "state";
    j["coefficients"] = to_json(s.coefficients);
    j["basis1"] = twinlab::to_json(s.basis1);
    j["basis2"] = twinlab::to_json(s.basis2);
    j["degenerate_blocks"] = blocks(s.degenerate_blocks);
    j["correlation_map"] = {{"matrix", twinlab::to_json(u.matrix)},
                            {"degenerate_spectrum", u.degenerate_spectrum}};
    j["reconstruction_residual"] = residual;
    text << "schmidt (state): coefficients";
    for (int i = 0; i < s.terms(); ++i) text << " " << fmt(s.coefficients(i));
    text << "\nreconstruction residual " << fmt(residual) << "\n";
    return finish(std::move(j), text, residual <= check);
  }

  if (mode == SchmidtMode::PureNonhermitian) {
    if (state.kind != StateKind::Pure)
      throw InputError("--pure-nonhermitian needs a pure state file");
    const PureBipartiteState phi(state.d1, state.d2, state.vector, tol);
    const OperatorSchmidt e = pure_nonhermitian_expansion(phi, tol);
    const json ej = expansion_json(e, phi.density_matrix());
    const double residual = ej["reconstruction_residual"];
    j["mode"] = "pure-nonhermitian";
    j["expansion"] = ej;
    text << "schmidt (pure nonhermitian): " << e.terms() << " terms, coefficients "
         << coeff_line(e, false) << "\nreconstruction residual " << fmt(residual) << "\n";
    return finish(std::move(j), text, residual <= check);
  }

  Mat w;
  switch (state.kind) {
    case StateKind::Operator:
      w = state.matrix;
      break;
    case StateKind::Density:
    case StateKind::Pure:
    case StateKind::Separable:
      w = density_of(state, tol).matrix();
      break;
    default:
      throw InputError(std::string("schmidt cannot expand a ") + to_string(state.kind) +
                       " file");
  }
  const bool hermitian = mode == SchmidtMode::Hermitian ||
                         (mode == SchmidtMode::Default && state.kind != StateKind::Operator);
  const OperatorSchmidt e = hermitian ? operator_schmidt_hermitian(w, state.d1, state.d2, tol)
                                      : operator_schmidt_complex(w, state.d1, state.d2, tol);
  const json ej = expansion_json(e, w);
  const double residual = ej["reconstruction_residual"];
  bool verified = residual <= check;
  j["mode"] = hermitian ? "hermitian" : "complex";
  j["expansion"] = ej;
  text << "schmidt (" << (hermitian ? "hermitian" : "complex") << "): " << e.terms()
       << " terms, normalization " << fmt(e.normalization) << "\n  coefficients "
       << coeff_line(e, false) << "\nreconstruction residual " << fmt(residual) << "\n";
  if (hermitian) {
    const AdjointInvarianceReport a = adjoint_invariance_check(w, e, tol);
    j["adjoint_invariance"] = {{"passed", a.passed()},
                               {"adjoint_fixed", a.adjoint_fixed},
                               {"blocks_invariant", a.blocks_invariant},
                               {"factors_hermitian", a.factors_hermitian
                                                         ? json(*a.factors_hermitian)
                                                         : json("not applicable")},
                               {"adjoint_residual", a.adjoint_residual},
                               {"block_residual", a.block_residual},
                               {"factor_residual", a.factor_residual},
                               {"diagnostic", a.diagnostic}};
    text << "adjoint invariance: " << (a.passed() ? "passed" : "failed " + a.diagnostic) << "\n";
    verified = verified && a.passed();
  }
  return finish(std::move(j), text, verified);
}

Report cmd_decompose(const StateFile& state, const StateFile& projector,
                     const ToleranceConfig& tol) {
  if (projector.kind != StateKind::Projector)
    throw InputError("--projector file must have kind \"projector\"");
  const BipartiteDensity rho = density_of(state, tol);
  if (projector.d1 != rho.d1())
    throw InputError("projector dimension " + std::to_string(projector.d1) +
                     " does not match d1 = " + std::to_string(rho.d1()));
  const TwinProjectorPair tp = classify_projector(projector.matrix, rho, tol, projector.partner);
  const double check = 10.0 * tol.zero_tol;

  json j = header("decompose", tol);
  j["d1"] = rho.d1();
  j["d2"] = rho.d2();
  j["projector_pair"] = projector_pair_json(tp);
  std::ostringstream text;
  text << "decompose: projector rank " << tp.p1.rank << ", partner rank " << tp.p2.rank << ", "
       << to_string(tp.strength) << " twin (||[P1,rho]|| = " << fmt(tp.commutator_norm)
       << ", twin residual " << fmt(tp.residual) << ")\n";

  const auto result = decompose_by_projector(tp, rho, tol);
  bool verified;
  if (const auto* dec = std::get_if<BiorthogonalDecomposition>(&result)) {
    const double residual = opnorm(dec->reconstruct() - rho.matrix());
    verified = residual <= check && dec->all_biorthogonal();
    j["branch"] = "strong";
    j["mixture"] = decomposition_json(*dec, residual);
    text << "biorthogonal mixture: weights";
    for (double w : dec->weights) text << " " << fmt(w);
    text << "\ncertificates: " << (dec->all_biorthogonal() ? "all true" : "FAILED") << "\n";
  } else {
    const auto& ws = std::get<WeakSplit>(result);
    const double residual = opnorm(ws.combined.reconstruct() - rho.matrix());
    verified = residual <= check && ws.cross_orthogonality;
    j["branch"] = "weak";
    j["weak_split"] = {{"part_in", twinlab::to_json(ws.part_in)},
                       {"part_out", twinlab::to_json(ws.part_out)},
                       {"expansion_in", expansion_json(ws.expansion_in, ws.part_in)},
                       {"expansion_out", expansion_json(ws.expansion_out, ws.part_out)},
                       {"combined", expansion_json(ws.combined, rho.matrix())},
                       {"cross_orthogonal", ws.cross_orthogonality},
                       {"max_cross", ws.max_cross},
                       {"trace_in", ws.trace_in},
                       {"trace_out", ws.trace_out}};
    text << "weak split: " << ws.combined.terms() << " terms, coefficients "
         << coeff_line(ws.combined, true) << "\nmax cross product " << fmt(ws.max_cross)
         << "\nreconstruction residual " << fmt(residual) << "\n";
  }
  return finish(std::move(j), text, verified);
}

Report cmd_partition(const StateFile& state, const ToleranceConfig& tol) {
  if (state.kind != StateKind::Separable)
    throw InputError(std::string("partition needs a separable file, got kind ") +
                     to_string(state.kind));
  const SeparableMixture mix(state.d1, state.d2, state.terms, tol);
  const BipartiteDensity rho = assemble(mix, tol);
  const PartitionResult res = partition_biorthogonal(mix, tol);

  json j = header("partition", tol);
  j["d1"] = mix.d1();
  j["d2"] = mix.d2();
  j["groups"] = res.groups;
  std::ostringstream text;
  text << "partition: " << mix.size() << " terms in " << res.groups.size() << " group"
       << (res.groups.size() == 1 ? "" : "s") << "\n";
  json gp = json::array();
  Mat total = Mat::Zero(rho.dim(), rho.dim());
  for (std::size_t g = 0; g < res.groups.size(); ++g) {
    gp.push_back({{"p1", twinlab::to_json(res.group_projectors[g].p1.matrix)},
                  {"p2", twinlab::to_json(res.group_projectors[g].p2.matrix)}});
    text << "  group " << g << ":";
    for (int k : res.groups[g]) {
      text << " " << k;
      const auto& t = mix.terms()[k];
      total += t.w * tensor_product(t.rho1, t.rho2);
    }
    text << "\n";
  }
  j["group_projectors"] = gp;

  bool verified = opnorm(total - rho.matrix()) <= 10.0 * tol.zero_tol;
  json induced = json::array();
  for (std::size_t b = 0; b < res.induced_twins.size(); ++b) {
    const auto& tp = res.induced_twins[b];
    verified = verified && tp.commutator_norm <= tol.zero_tol;
    json pj = projector_pair_json(tp);
    pj["groups"] = res.bipartitions[b];
    induced.push_back(std::move(pj));
  }
  json family = json::array();
  for (const auto& tp : res.group_family) {
    verified = verified && tp.commutator_norm <= tol.zero_tol;
    family.push_back(projector_pair_json(tp));
  }
  j["induced_twins"] = induced;
  j["bipartitions_truncated"] = res.bipartitions_truncated;
  j["group_family"] = family;
  j["sharp_group"] = res.sharp_group;
  j["verdict"] = res.has_nontrivial_twins() ? "nontrivial twins" : "no nontrivial twins";
  text << res.induced_twins.size() << " induced strong twin pair"
       << (res.induced_twins.size() == 1 ? "" : "s") << "\n"
       << (res.has_nontrivial_twins() ? "nontrivial twins" : "no nontrivial twins") << "\n";
  return finish(std::move(j), text, verified);
}

Report run_twins(const std::string& path, const ToleranceConfig& tol) {
  return guarded("twins", tol, [&] { return cmd_twins(load_state_file(path), tol); });
}

Report run_schmidt(const std::string& path, SchmidtMode mode, const ToleranceConfig& tol) {
  return guarded("schmidt", tol, [&] { return cmd_schmidt(load_state_file(path), mode, tol); });
}

Report run_decompose(const std::string& path, const std::string& projector_path,
                     const ToleranceConfig& tol) {
  return guarded("decompose", tol, [&] {
    return cmd_decompose(load_state_file(path), load_state_file(projector_path), tol);
  });
}

Report run_partition(const std::string& path, const ToleranceConfig& tol) {
  return guarded("partition", tol, [&] { return cmd_partition(load_state_file(path), tol); });
}

}  // namespace twinlab
