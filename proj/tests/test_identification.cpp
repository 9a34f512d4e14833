#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "fixtures.hpp"
#include "mediatrix/identify.hpp"
#include "random_scm.hpp"

using namespace mediatrix;
using namespace mediatrix::fixtures;
using namespace mediatrix::testing;

namespace {

// Small hand-built graphs: A -> M -> Y with optional extras.
DagView base_dag() {
  DagView dag;
  dag.names = {"A", "M", "Y"};
  dag.roles = {Role::Exposure, Role::Mediator, Role::Outcome};
  dag.observed = {true, true, true};
  dag.parents = {{}, {0}, {1}};
  dag.children = {{1}, {2}, {}};
  dag.exposure = 0;
  dag.mediator = 1;
  dag.outcome = 2;
  return dag;
}

void add_node(DagView& dag, const std::string& name, Role role, bool observed,
              std::vector<int> parents, std::vector<int> children) {
  int v = dag.size();
  dag.names.push_back(name);
  dag.roles.push_back(role);
  dag.observed.push_back(observed);
  dag.parents.push_back(parents);
  dag.children.push_back(children);
  for (int p : parents) dag.children[p].push_back(v);
  for (int c : children) dag.parents[c].push_back(v);
}

}  // namespace

TEST_CASE("ancestry on the base chain") {
  DagView dag = base_dag();
  CHECK(dag.is_ancestor(0, 2));
  CHECK(dag.is_ancestor(0, 1));
  CHECK(!dag.is_ancestor(2, 0));
  CHECK(!dag.is_ancestor(0, 0));
  CHECK(dag.is_descendant(2, 0));
}

TEST_CASE("d-separation handles chains, forks, and colliders") {
  DagView dag = base_dag();
  std::vector<int> a = {0}, m = {1}, y = {2};
  std::vector<int> none;

  // Chain A -> M -> Y: blocked by M, open otherwise.
  CHECK(!d_separated(dag, a, y, none));
  CHECK(d_separated(dag, a, y, m));

  // Fork: U -> A, U -> Y opens a backdoor not blocked by M.
  DagView fork = base_dag();
  add_node(fork, "U", Role::Latent, false, {}, {0, 2});
  CHECK(!d_separated(fork, a, y, m));

  // Collider: A -> K <- Y blocks until conditioned on.
  DagView collider = base_dag();
  collider.children[0].clear();
  collider.parents[1].clear();  // cut A -> M so only the collider path remains
  add_node(collider, "K", Role::Covariate, true, {0, 2}, {});
  std::vector<int> k = {3};
  CHECK(d_separated(collider, a, y, none));
  CHECK(!d_separated(collider, a, y, k));

  std::string witness;
  CHECK(!d_separated_witness(fork, a, y, m, &witness));
  CHECK(witness.find("U") != std::string::npos);
}

TEST_CASE("the fully observed chain is identified at every rung") {
  LadderReport ladder = classify(base_dag());
  for (const auto& rung : ladder.rungs) {
    CAPTURE(rung.name);
    CHECK(rung.identified());
    CHECK(rung.failed_assumption.empty());
  }
  CHECK(ladder.rungs[0].name == "TE");
  CHECK(ladder.rungs[1].name == "CDE/GIDE");
  CHECK(ladder.rungs[2].name == "IDE/IIE");
  CHECK(ladder.rungs[3].name == "NDE/NIE");
}

TEST_CASE("a latent confounder of everything destroys every rung") {
  Scm scm = fixture("collegeprep8");
  LadderReport ladder = classify(scm);
  for (const auto& rung : ladder.rungs) {
    CAPTURE(rung.name);
    CHECK(!rung.identified());
    CHECK(!rung.failed_assumption.empty());
  }
  CHECK(ladder.te().witness.find("U") != std::string::npos);
}

TEST_CASE("the unconfounded variant is identified at every rung") {
  LadderReport ladder = classify(fixture("collegeprep8_unconfounded"));
  for (const auto& rung : ladder.rungs) {
    CAPTURE(rung.name);
    CHECK(rung.identified());
  }
  CHECK(ladder.warnings.empty());
}

TEST_CASE("an intermediate confounder breaks exactly the natural rung") {
  LadderReport ladder = classify(fixture("l_model"));
  CHECK(ladder.te().identified());
  CHECK(ladder.cde_gide().identified());
  CHECK(ladder.ide_iie().identified());
  CHECK(!ladder.nde_nie().identified());
  CHECK(ladder.nde_nie().failed_assumption == "no intermediate confounders (cross-world independence)");
  CHECK(ladder.nde_nie().witness == "L");
}

TEST_CASE("a latent mediator-outcome confounder breaks rungs two through four") {
  DagView dag = base_dag();
  add_node(dag, "U", Role::Latent, false, {}, {1, 2});
  LadderReport ladder = classify(dag);
  CHECK(ladder.te().identified());
  CHECK(!ladder.cde_gide().identified());
  CHECK(!ladder.ide_iie().identified());
  CHECK(!ladder.nde_nie().identified());
  CHECK(ladder.cde_gide().witness.find("U") != std::string::npos);
}

TEST_CASE("a latent exposure-mediator confounder breaks rung three") {
  DagView dag = base_dag();
  add_node(dag, "U", Role::Latent, false, {}, {0, 1});
  LadderReport ladder = classify(dag);
  CHECK(!ladder.ide_iie().identified());
  CHECK(ladder.ide_iie().failed_assumption ==
        "no unobserved exposure-mediator confounding given covariates");
  // The same U opens A <- U -> M -> Y, so the total effect falls with it.
  CHECK(!ladder.te().identified());
}

TEST_CASE("lower-rung failures propagate upward") {
  // Latent A-Y confounder: rung one falls, so everything above falls with it.
  DagView dag = base_dag();
  add_node(dag, "U", Role::Latent, false, {}, {0, 2});
  LadderReport ladder = classify(dag);
  for (const auto& rung : ladder.rungs) CHECK(!rung.identified());
  CHECK(ladder.nde_nie().failed_assumption == ladder.te().failed_assumption);
}

TEST_CASE("misdeclared intermediate confounders are flagged") {
  // A covariate-like node that actually behaves as an L.
  DagView dag = base_dag();
  add_node(dag, "W", Role::Covariate, true, {0}, {1, 2});
  // Covariates cannot descend from the exposure in a validated model, but
  // the graph-level classifier must still notice the shape.
  LadderReport ladder = classify(dag);
  bool warned = std::any_of(ladder.warnings.begin(), ladder.warnings.end(),
                            [](const std::string& w) {
                              return w.find("behaves as an intermediate confounder") !=
                                     std::string::npos;
                            });
  CHECK(warned);
}

TEST_CASE("declared intermediates that do not confound are flagged") {
  DagView dag = base_dag();
  // L descends from A but never reaches Y around the mediator.
  add_node(dag, "L", Role::IntermediateConfounder, true, {0}, {1});
  LadderReport ladder = classify(dag);
  bool warned = std::any_of(ladder.warnings.begin(), ladder.warnings.end(),
                            [](const std::string& w) {
                              return w.find("not structurally an intermediate confounder") !=
                                     std::string::npos;
                            });
  CHECK(warned);
  CHECK(ladder.nde_nie().identified());
}

TEST_CASE("classification is sound against exact plug-in estimation") {
  RandomScmConfig config;
  config.ensure_positivity = true;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CAPTURE(seed);
    Scm scm = random_scm(seed, config);
    SoundnessReport report = soundness_check(scm, 1e-6);
    for (const auto& entry : report.mismatches) {
      CAPTURE(entry.rung);
      CAPTURE(entry.effect);
      CAPTURE(entry.truth);
      CAPTURE(entry.plug_in);
      CHECK(entry.difference <= 1e-6);
    }
    CHECK(report.ok());
  }
}
