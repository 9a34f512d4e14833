#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mediatrix/scm.hpp"

namespace mediatrix {

// Graph-only view of a model: structure and observability, no tables.
struct DagView {
  std::vector<std::string> names;
  std::vector<Role> roles;
  std::vector<bool> observed;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<int>> children;
  int exposure = -1;
  int mediator = -1;
  int outcome = -1;

  static DagView from_scm(const Scm& scm);

  int size() const { return static_cast<int>(names.size()); }
  // Strict: a node is not its own ancestor.
  bool is_ancestor(int a, int b) const;
  bool is_descendant(int a, int b) const { return is_ancestor(b, a); }
};

// True iff every path between X and Y is blocked by Z.
bool d_separated(const DagView& dag, std::span<const int> x, std::span<const int> y,
                 std::span<const int> z);

// As above, but on failure writes a rendered unblocked path ("A <- U -> Y").
bool d_separated_witness(const DagView& dag, std::span<const int> x,
                         std::span<const int> y, std::span<const int> z,
                         std::string* witness);

enum class RungStatus { Identified, NotIdentified };

struct RungReport {
  std::string name;  // TE, CDE/GIDE, IDE/IIE, NDE/NIE
  RungStatus status = RungStatus::Identified;
  std::string failed_assumption;  // empty when identified
  std::string witness;            // offending path or node
  bool identified() const { return status == RungStatus::Identified; }
};

struct LadderReport {
  std::array<RungReport, 4> rungs;
  std::vector<std::string> warnings;

  const RungReport& te() const { return rungs[0]; }
  const RungReport& cde_gide() const { return rungs[1]; }
  const RungReport& ide_iie() const { return rungs[2]; }
  const RungReport& nde_nie() const { return rungs[3]; }
};

LadderReport classify(const DagView& dag);
LadderReport classify(const Scm& scm);

// Empirical validation of the ladder: every identified rung's plug-in
// estimator, fed the exact observational law, must reproduce enumeration
// truth within the tolerance.
struct SoundnessEntry {
  std::string rung;
  std::string effect;
  double truth = 0;
  double plug_in = 0;
  double difference = 0;
};

struct SoundnessReport {
  std::vector<SoundnessEntry> mismatches;
  std::vector<std::string> skipped;  // estimator errors on legitimate gaps
  bool ok() const { return mismatches.empty(); }
};

SoundnessReport soundness_check(const Scm& scm, double tolerance = 1e-6);

}  // namespace mediatrix
