#include <iostream>

#include <CLI11.hpp>

#include "twinlab/commands.hpp"

int main(int argc, char** argv) {
  using namespace twinlab;
  CLI::App app{"Twin observables of bipartite states"};
  app.require_subcommand(1);

  ToleranceConfig tol;
  bool as_json = false;
  app.add_flag("--json", as_json, "Print the JSON report");
  app.add_option("--zero-tol", tol.zero_tol, "Operator-norm zero threshold");
  app.add_option("--rank-tol", tol.rank_tol, "Relative rank cutoff");
  app.add_option("--degeneracy-tol", tol.degeneracy_tol, "Spectral clustering threshold");

  std::string file, projector;
  auto* twins = app.add_subcommand("twins", "Solve the twin equation and classify twins");
  twins->add_option("file", file, "State file")->required();

  auto* schmidt = app.add_subcommand("schmidt", "Schmidt and operator-Schmidt expansions");
  schmidt->add_option("file", file, "State or operator file")->required();
  bool hermitian = false, complex = false, pure_nonhermitian = false;
  auto* h = schmidt->add_flag("--hermitian", hermitian, "Hermitian-factor expansion");
  auto* c = schmidt->add_flag("--complex", complex, "Complex SVD expansion");
  auto* p = schmidt->add_flag("--pure-nonhermitian", pure_nonhermitian,
                              "Ket-bra expansion of a pure state");
  h->excludes(c)->excludes(p);
  c->excludes(p);

  auto* decompose = app.add_subcommand("decompose", "Split a state by a twin projector");
  decompose->add_option("file", file, "State file")->required();
  decompose->add_option("--projector", projector, "Projector file")->required();

  auto* partition = app.add_subcommand("partition", "Biorthogonal partition of a mixture");
  partition->add_option("file", file, "Separable mixture file")->required();

  for (auto* sub : {twins, schmidt, decompose, partition}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  Report report;
  if (twins->parsed()) {
    report = run_twins(file, tol);
  } else if (schmidt->parsed()) {
    const SchmidtMode mode = hermitian           ? SchmidtMode::Hermitian
                             : complex           ? SchmidtMode::Complex
                             : pure_nonhermitian ? SchmidtMode::PureNonhermitian
                                                 : SchmidtMode::Default;
    report = run_schmidt(file, mode, tol);
  } else if (decompose->parsed()) {
    report = run_decompose(file, projector, tol);
  } else {
    report = run_partition(file, tol);
  }

  if (as_json)
    std::cout << report.json.dump(2) << "\n";
  else
    (report.json.contains("error") ? std::cerr : std::cout) << report.text;
  return report.exit_code;
}
