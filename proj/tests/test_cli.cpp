#include <doctest.h>

#include "support/random_states.hpp"
#include "twinlab/commands.hpp"

using namespace twinlab;

namespace {

const std::string data_dir = TWINLAB_TEST_DATA;

std::string path(const char* name) { return data_dir + "/" + name; }

}  // namespace

TEST_CASE("state file validation names the field") {
  try {
    parse_state_text(R"({"kind":"density","d1":1,"d2":2,"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5]]]})");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("matrix[1][1]") != std::string::npos);
  }
  try {
    parse_state_text(R"({"kind":"separable","d1":1,"d2":1,"terms":[{"w":1,"rho1":[[[1,0]]]}]})");
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("terms[0].rho2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_state_text("{"), InputError);
  CHECK_THROWS_AS(parse_state_text(R"({"kind":"mystery","d1":1,"d2":1})"), InputError);
  CHECK_THROWS_AS(parse_state_text(R"({"kind":"pure","d1":0,"d2":1,"vector":[]})"), InputError);
}

TEST_CASE("json round trip of matrices is exact") {
  support::Rng rng(61);
  const Mat m = support::ginibre(rng, 3, 3);
  nlohmann::json doc = {{"kind", "operator"}, {"d1", 1}, {"d2", 3}, {"matrix", to_json(m)}};
  const StateFile f = parse_state_text(doc.dump());
  CHECK((f.matrix - m).norm() == 0.0);
}

TEST_CASE("twins command") {
  const Report r = run_twins(path("singlet_measured.json"), {});
  CHECK(r.exit_code == 0);
  CHECK(r.verified());
  CHECK(r.json["summary"] == "nontrivial twins");
  REQUIRE(r.json["nontrivial_pairs"].size() == 1);
  CHECK(r.json["nontrivial_pairs"][0]["strength"] == "strong");

  const Report product = run_twins(path("product.json"), {});
  CHECK(product.exit_code == 0);
  CHECK(product.json["summary"] == "trivial only");

  const Report bad = run_twins(path("malformed_row.json"), {});
  CHECK(bad.exit_code == 2);
  CHECK(bad.json["error"]["message"].get<std::string>().find("matrix[1]") != std::string::npos);

  CHECK(run_twins(path("singlet_separable.json"), {}).json["summary"] == "nontrivial twins");
  CHECK(run_twins(path("singlet_measured.json"), {1e-10, 1e-9, 1e-8}).exit_code == 2);
}

TEST_CASE("schmidt command") {
  const Report pure = run_schmidt(path("bell_pure.json"), SchmidtMode::Default, {});
  CHECK(pure.exit_code == 0);
  CHECK(pure.json["coefficients"][0].get<double>() == doctest::Approx(0.5));
  CHECK(pure.json["coefficients"][1].get<double>() == doctest::Approx(0.5));

  const Report herm = run_schmidt(path("bell_density.json"), SchmidtMode::Hermitian, {});
  CHECK(herm.exit_code == 0);
  CHECK(herm.json["adjoint_invariance"]["passed"] == true);
  const auto& coeffs = herm.json["expansion"]["coefficients"];
  REQUIRE(coeffs.size() == 4);
  for (const auto& c : coeffs) CHECK(c.get<double>() == doctest::Approx(0.5));

  const Report cplx_mode = run_schmidt(path("bell_density.json"), SchmidtMode::Complex, {});
  REQUIRE(cplx_mode.json["expansion"]["coefficients"].size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(cplx_mode.json["expansion"]["coefficients"][i].get<double>() ==
          doctest::Approx(coeffs[i].get<double>()));

  CHECK(run_schmidt(path("nonhermitian_operator.json"), SchmidtMode::Hermitian, {}).exit_code == 2);
  CHECK(run_schmidt(path("nonhermitian_operator.json"), SchmidtMode::Complex, {}).exit_code == 0);
  CHECK(run_schmidt(path("bell_pure.json"), SchmidtMode::PureNonhermitian, {}).exit_code == 0);
  CHECK(run_schmidt(path("bell_density.json"), SchmidtMode::PureNonhermitian, {}).exit_code == 2);
}

TEST_CASE("decompose command") {
  const Report strong = run_decompose(path("singlet_measured.json"), path("proj_zplus.json"), {});
  CHECK(strong.exit_code == 0);
  CHECK(strong.json["branch"] == "strong");
  CHECK(strong.json["mixture"]["weights"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(strong.json["mixture"]["all_biorthogonal"] == true);

  const Report weak = run_decompose(path("bell_density.json"), path("proj_zplus.json"), {});
  CHECK(weak.exit_code == 0);
  CHECK(weak.json["branch"] == "weak");
  const auto& c = weak.json["weak_split"]["combined"]["coefficients"];
  REQUIRE(c.size() == 4);
  for (const auto& x : c) CHECK(x.get<double>() == doctest::Approx(0.5));

  CHECK(run_decompose(path("bell_density.json"), path("proj_sigma_x.json"), {}).exit_code == 2);
  const Report notwin = run_decompose(path("singlet_measured.json"), path("proj_xplus.json"), {});
  CHECK(notwin.exit_code == 2);
  CHECK(notwin.json["error"]["message"].get<std::string>().find("residual") != std::string::npos);
}

TEST_CASE("partition command") {
  const Report two = run_partition(path("singlet_separable.json"), {});
  CHECK(two.exit_code == 0);
  CHECK(two.json["groups"].size() == 2);
  const Report one = run_partition(path("single_product_separable.json"), {});
  CHECK(one.json["groups"].size() == 1);
  CHECK(one.json["verdict"] == "no nontrivial twins");
  CHECK(run_partition(path("three_blocks.json"), {}).json["groups"].size() == 3);
  CHECK(run_partition(path("singlet_measured.json"), {}).exit_code == 2);
}

TEST_CASE("reports are deterministic") {
  const std::string a = run_twins(path("three_blocks.json"), {}).json.dump();
  const std::string b = run_twins(path("three_blocks.json"), {}).json.dump();
  CHECK(a == b);
}

TEST_CASE("unverified reports exit with the consistency code") {
  std::vector<Report> reports;
  for (const char* f : {"singlet_measured.json", "product.json", "bell_density.json", "bell_pure.json",
                        "singlet_separable.json", "three_blocks.json", "malformed_row.json"}) {
    reports.push_back(run_twins(path(f), {}));
    reports.push_back(run_partition(path(f), {}));
    for (SchmidtMode m : {SchmidtMode::Default, SchmidtMode::Hermitian, SchmidtMode::Complex,
                          SchmidtMode::PureNonhermitian})
      reports.push_back(run_schmidt(path(f), m, {}));
    reports.push_back(run_decompose(path(f), path("proj_zplus.json"), {}));
  }
  for (const auto& r : reports) {
    if (r.json.contains("verified") && !r.verified()) CHECK(r.exit_code == 3);
    if (r.exit_code == 0) CHECK(r.verified());
    CHECK(r.json.contains("verified") != r.json.contains("error"));
  }
}
