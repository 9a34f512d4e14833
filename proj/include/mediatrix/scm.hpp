#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mediatrix/value.hpp"

namespace mediatrix {

enum class Role {
  Covariate,
  Exposure,
  IntermediateConfounder,
  Mediator,
  Outcome,
  Latent,
};

const char* role_name(Role role);
std::optional<Role> role_from_name(const std::string& name);

struct NoiseSpec {
  std::vector<std::string> symbols;
  std::vector<double> probs;
};

// One row of a structural table in declaration form: parent values in the
// variable's declared parent order, a noise symbol, and the output value.
struct TableEntry {
  std::vector<Value> parent_values;
  std::string noise;
  Value value;
};

struct VariableSpec {
  std::string name;
  Role role = Role::Covariate;
  std::vector<Value> support;
  std::vector<std::string> parents;
  NoiseSpec noise;
  std::vector<TableEntry> table;
};

struct RawScm {
  std::string name;
  std::string description;
  std::vector<VariableSpec> variables;
};

struct Violation {
  std::string variable;  // empty for model-level violations
  std::string rule;      // e.g. "RoleCountViolation/exposure-not-binary"
  std::string message;
};

// Default cap on enumerated cells (unit space, joint observed support).
// MEDIATRIX_MAX_CELLS overrides it; read once.
std::size_t default_cell_cap();

class Scm;
struct ValidationResult;

// Exact observational law over the observed variables, dense over the
// product of their supports in dataset column order (C..., A, L..., M, Y).
struct ObservationalTable {
  std::vector<int> vars;               // variable indices, dataset order
  std::vector<std::size_t> dims;       // support sizes, same order
  std::vector<double> probs;           // mixed-radix dense, sums to 1
  std::size_t index_of(std::span<const int> values) const;
};

// A validated model, variables stored in topological order.
class Scm {
 public:
  struct Variable {
    std::string name;
    Role role;
    std::vector<Value> support;
    std::vector<int> parents;  // indices into the stored order
    NoiseSpec noise;
    std::vector<int> table;    // value index per (parent combo, noise symbol)
  };

  static ValidationResult validate(const RawScm& raw);

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  const Variable& var(int v) const { return vars_[v]; }
  const std::vector<Variable>& variables() const { return vars_; }
  int index_of(const std::string& name) const;        // -1 if absent
  int require_index(const std::string& name) const;   // SpecError if absent

  int exposure() const { return exposure_; }
  int mediator() const { return mediator_; }
  int outcome() const { return outcome_; }
  const std::vector<int>& covariates() const { return covariates_; }
  const std::vector<int>& intermediate_confounders() const { return intermediates_; }
  const std::vector<int>& latents() const { return latents_; }

  // Observed variables in dataset column order: C..., A, L..., M, Y.
  std::vector<int> dataset_order() const;

  // Storage order is topological; parents always precede children.
  std::vector<int> topological_order() const;

  int support_index(int v, const Value& value) const;  // -1 if absent
  std::size_t support_size(int v) const { return vars_[v].support.size(); }

  // Structural lookup, all arguments as support / symbol indices.
  int lookup(int v, std::span<const int> parent_value_idx, int noise_idx) const;

  ObservationalTable observational_distribution(std::size_t max_cells = default_cell_cap()) const;

  RawScm to_raw() const;

  bool operator==(const Scm& o) const;

 private:
  friend struct ScmBuilder;
  std::string name_;
  std::string description_;
  std::vector<Variable> vars_;
  int exposure_ = -1;
  int mediator_ = -1;
  int outcome_ = -1;
  std::vector<int> covariates_;
  std::vector<int> intermediates_;
  std::vector<int> latents_;
};

struct ValidationResult {
  std::optional<Scm> scm;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// JSON (de)serialization. Reading performs schema checks only; callers
// validate the RawScm to obtain an Scm.
RawScm scm_from_json_text(const std::string& text);
std::string scm_to_json_text(const Scm& scm);
Scm load_scm_or_fail(const RawScm& raw);  // SchemaError listing violations

}  // namespace mediatrix
