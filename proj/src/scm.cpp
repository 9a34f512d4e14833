#include "mediatrix/scm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mediatrix/errors.hpp"

namespace mediatrix {

namespace {

constexpr double kMassTolerance = 1e-9;

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

// Symbols appear bare in CSV cells and world-spec text, so keep them free of
// delimiters.
bool valid_symbol(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
              c == '.' || c == '+' || c == '-' || c == ':';
    if (!ok) return false;
  }
  return true;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += " -> ";
    out += names[i];
  }
  return out;
}

}  // namespace

const char* role_name(Role role) {
  switch (role) {
    case Role::Covariate: return "covariate";
    case Role::Exposure: return "exposure";
    case Role::IntermediateConfounder: return "intermediate_confounder";
    case Role::Mediator: return "mediator";
    case Role::Outcome: return "outcome";
    case Role::Latent: return "latent";
  }
  return "covariate";
}

std::optional<Role> role_from_name(const std::string& name) {
  for (Role r : {Role::Covariate, Role::Exposure, Role::IntermediateConfounder,
                 Role::Mediator, Role::Outcome, Role::Latent}) {
    if (name == role_name(r)) return r;
  }
  return std::nullopt;
}

std::size_t default_cell_cap() {
  static const std::size_t cap = [] {
    if (const char* env = std::getenv("MEDIATRIX_MAX_CELLS")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return static_cast<std::size_t>(10'000'000);
  }();
  return cap;
}

std::size_t ObservationalTable::index_of(std::span<const int> values) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    idx = idx * dims[i] + static_cast<std::size_t>(values[i]);
  }
  return idx;
}

int Scm::index_of(const std::string& name) const {
  for (int v = 0; v < num_variables(); ++v) {
    if (vars_[v].name == name) return v;
  }
  return -1;
}

int Scm::require_index(const std::string& name) const {
  int v = index_of(name);
  if (v < 0) fail(ErrorCode::SpecError, "unknown variable '" + name + "'");
  return v;
}

std::vector<int> Scm::dataset_order() const {
  std::vector<int> order = covariates_;
  order.push_back(exposure_);
  order.insert(order.end(), intermediates_.begin(), intermediates_.end());
  order.push_back(mediator_);
  order.push_back(outcome_);
  return order;
}

std::vector<int> Scm::topological_order() const {
  std::vector<int> order(vars_.size());
  std::iota(order.begin(), order.end(), 0);
  return order;
}

int Scm::support_index(int v, const Value& value) const {
  const auto& support = vars_[v].support;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] == value) return static_cast<int>(i);
  }
  return -1;
}

int Scm::lookup(int v, std::span<const int> parent_value_idx, int noise_idx) const {
  const Variable& var = vars_[v];
  std::size_t idx = 0;
  for (std::size_t p = 0; p < var.parents.size(); ++p) {
    idx = idx * vars_[var.parents[p]].support.size() +
          static_cast<std::size_t>(parent_value_idx[p]);
  }
  idx = idx * var.noise.symbols.size() + static_cast<std::size_t>(noise_idx);
  return var.table[idx];
}

struct ScmBuilder {
  static Scm build(const RawScm& raw, const std::vector<int>& topo,
                   const std::vector<int>& pos_of_raw) {
    Scm scm;
    scm.name_ = raw.name;
    scm.description_ = raw.description;
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < topo.size(); ++k) {
      index[raw.variables[topo[k]].name] = static_cast<int>(k);
    }
    for (int raw_idx : topo) {
      const VariableSpec& vs = raw.variables[raw_idx];
      Scm::Variable var;
      var.name = vs.name;
      var.role = vs.role;
      var.support = vs.support;
      var.noise = vs.noise;
      for (const std::string& p : vs.parents) var.parents.push_back(index.at(p));

      std::size_t rows = vs.noise.symbols.size();
      for (const std::string& p : vs.parents) {
        rows *= raw.variables[topo[index.at(p)]].support.size();
      }
      var.table.assign(rows, -1);
      for (const TableEntry& entry : vs.table) {
        std::size_t idx = 0;
        for (std::size_t p = 0; p < vs.parents.size(); ++p) {
          const VariableSpec& parent = raw.variables[topo[index.at(vs.parents[p])]];
          auto it = std::find(parent.support.begin(), parent.support.end(),
                              entry.parent_values[p]);
          idx = idx * parent.support.size() +
                static_cast<std::size_t>(it - parent.support.begin());
        }
        auto nit = std::find(vs.noise.symbols.begin(), vs.noise.symbols.end(), entry.noise);
        idx = idx * vs.noise.symbols.size() +
              static_cast<std::size_t>(nit - vs.noise.symbols.begin());
        auto vit = std::find(vs.support.begin(), vs.support.end(), entry.value);
        var.table[idx] = static_cast<int>(vit - vs.support.begin());
      }

      int pos = static_cast<int>(scm.vars_.size());
      switch (var.role) {
        case Role::Covariate: scm.covariates_.push_back(pos); break;
        case Role::Exposure: scm.exposure_ = pos; break;
        case Role::IntermediateConfounder: scm.intermediates_.push_back(pos); break;
        case Role::Mediator: scm.mediator_ = pos; break;
        case Role::Outcome: scm.outcome_ = pos; break;
        case Role::Latent: scm.latents_.push_back(pos); break;
      }
      scm.vars_.push_back(std::move(var));
    }
    (void)pos_of_raw;
    return scm;
  }
};

ValidationResult Scm::validate(const RawScm& raw) {
  ValidationResult result;
  auto violation = [&result](std::string var, std::string rule, std::string message) {
    result.violations.push_back({std::move(var), std::move(rule), std::move(message)});
  };

  std::map<std::string, int> index;
  for (std::size_t i = 0; i < raw.variables.size(); ++i) {
    const std::string& name = raw.variables[i].name;
    if (!valid_identifier(name)) {
      violation(name, "SchemaViolation/bad-name",
                "variable name '" + name + "' is not an identifier");
      continue;
    }
    if (index.count(name)) {
      violation(name, "SchemaViolation/duplicate-name",
                "variable '" + name + "' declared twice");
      continue;
    }
    index[name] = static_cast<int>(i);
  }
  if (!result.violations.empty()) return result;

  for (const VariableSpec& vs : raw.variables) {
    if (vs.support.empty()) {
      violation(vs.name, "SchemaViolation/empty-support", "support is empty");
    }
    for (std::size_t i = 0; i < vs.support.size(); ++i) {
      const Value& val = vs.support[i];
      if (val.is_symbol() && !valid_symbol(val.symbol())) {
        violation(vs.name, "SchemaViolation/bad-support-symbol",
                  "support symbol '" + val.symbol() +
                      "' contains characters outside [A-Za-z0-9_.+-:]");
      }
      if (val.is_number() && !std::isfinite(val.number())) {
        violation(vs.name, "SchemaViolation/bad-support-number",
                  "support contains a non-finite number");
      }
      for (std::size_t j = i + 1; j < vs.support.size(); ++j) {
        if (val == vs.support[j]) {
          violation(vs.name, "SchemaViolation/duplicate-support-value",
                    "support value " + val.to_string() + " repeated");
        }
      }
    }

    if (vs.noise.symbols.empty()) {
      violation(vs.name, "SchemaViolation/empty-noise", "noise needs at least one symbol");
    }
    if (vs.noise.symbols.size() != vs.noise.probs.size()) {
      violation(vs.name, "BadProbabilityMass",
                "noise has " + std::to_string(vs.noise.symbols.size()) + " symbols but " +
                    std::to_string(vs.noise.probs.size()) + " probabilities");
    } else {
      double total = 0;
      bool bad = false;
      for (double p : vs.noise.probs) {
        if (!std::isfinite(p) || p < 0) bad = true;
        total += p;
      }
      if (bad) {
        violation(vs.name, "BadProbabilityMass", "noise probabilities must be finite and >= 0");
      } else if (!vs.noise.probs.empty() && std::abs(total - 1.0) > kMassTolerance) {
        violation(vs.name, "BadProbabilityMass",
                  "noise probabilities sum to " + format_double(total));
      }
      std::set<std::string> seen;
      for (const std::string& s : vs.noise.symbols) {
        if (!valid_symbol(s)) {
          violation(vs.name, "SchemaViolation/bad-noise-symbol",
                    "noise symbol '" + s + "' contains characters outside [A-Za-z0-9_.+-:]");
        }
        if (!seen.insert(s).second) {
          violation(vs.name, "SchemaViolation/duplicate-noise-symbol",
                    "noise symbol '" + s + "' repeated");
        }
      }
    }

    std::set<std::string> parent_seen;
    for (const std::string& p : vs.parents) {
      if (!index.count(p)) {
        violation(vs.name, "SchemaViolation/unknown-parent",
                  "parent '" + p + "' is not a declared variable");
      } else if (p == vs.name) {
        violation(vs.name, "CyclicGraph", "variable is its own parent");
      }
      if (!parent_seen.insert(p).second) {
        violation(vs.name, "SchemaViolation/duplicate-parent",
                  "parent '" + p + "' listed twice");
      }
    }
  }
  if (!result.violations.empty()) return result;

  // Kahn topological sort, stable by declaration order.
  const std::size_t n = raw.variables.size();
  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string& p : raw.variables[i].parents) {
      children[index.at(p)].push_back(static_cast<int>(i));
      ++indegree[i];
    }
  }
  std::vector<int> topo;
  std::vector<int> remaining = indegree;
  std::vector<bool> placed(n, false);
  for (;;) {
    int next = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i] && remaining[i] == 0) {
        next = static_cast<int>(i);
        break;
      }
    }
    if (next < 0) break;
    placed[next] = true;
    topo.push_back(next);
    for (int c : children[next]) --remaining[c];
  }
  if (topo.size() != n) {
    std::vector<std::string> cycle;
    for (std::size_t i = 0; i < n; ++i) {
      if (!placed[i]) cycle.push_back(raw.variables[i].name);
    }
    violation("", "CyclicGraph", "variables form a cycle: " + join_names(cycle));
    return result;
  }

  int n_exposure = 0, n_mediator = 0, n_outcome = 0;
  for (const VariableSpec& vs : raw.variables) {
    if (vs.role == Role::Exposure) ++n_exposure;
    if (vs.role == Role::Mediator) ++n_mediator;
    if (vs.role == Role::Outcome) ++n_outcome;
  }
  auto role_count = [&](int count, const char* what) {
    if (count == 0) {
      violation("", std::string("RoleCountViolation/missing-") + what,
                std::string("model declares no ") + what);
    } else if (count > 1) {
      violation("", std::string("RoleCountViolation/multiple-") + what,
                std::string("model declares ") + std::to_string(count) + " " + what +
                    " variables; exactly one is allowed");
    }
  };
  role_count(n_exposure, "exposure");
  role_count(n_mediator, "mediator");
  role_count(n_outcome, "outcome");
  if (!result.violations.empty()) return result;

  for (const VariableSpec& vs : raw.variables) {
    if (vs.role == Role::Exposure) {
      bool has0 = false, has1 = false;
      for (const Value& v : vs.support) {
        if (v == Value::number(0)) has0 = true;
        if (v == Value::number(1)) has1 = true;
      }
      if (vs.support.size() != 2 || !has0 || !has1) {
        violation(vs.name, "RoleCountViolation/exposure-not-binary",
                  "exposure support must be exactly {0, 1}");
      }
    }
    if (vs.role == Role::Outcome) {
      for (const Value& v : vs.support) {
        if (!v.is_number()) {
          violation(vs.name, "RoleCountViolation/outcome-not-numeric",
                    "outcome support must be numeric");
          break;
        }
      }
    }
  }

  // Role topology on the DAG.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    int v = *it;
    reach[v][v] = true;
    for (int c : children[v]) {
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[c][j]) reach[v][j] = true;
      }
    }
  }
  int exposure_raw = -1, mediator_raw = -1, outcome_raw = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw.variables[i].role == Role::Exposure) exposure_raw = static_cast<int>(i);
    if (raw.variables[i].role == Role::Mediator) mediator_raw = static_cast<int>(i);
    if (raw.variables[i].role == Role::Outcome) outcome_raw = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const VariableSpec& vs = raw.variables[i];
    bool downstream = reach[exposure_raw][i] && static_cast<int>(i) != exposure_raw;
    if ((vs.role == Role::Covariate || vs.role == Role::Latent) && downstream) {
      violation(vs.name, "RoleTopologyViolation/downstream-of-exposure",
                role_name(vs.role) + std::string(" '") + vs.name +
                    "' is a descendant of the exposure");
    }
    if (vs.role == Role::IntermediateConfounder) {
      bool to_m = reach[i][mediator_raw] && static_cast<int>(i) != mediator_raw;
      bool to_y = reach[i][outcome_raw] && static_cast<int>(i) != outcome_raw;
      if (!downstream) {
        violation(vs.name, "RoleTopologyViolation/intermediate-confounder-not-downstream",
                  "intermediate confounder '" + vs.name +
                      "' is not a descendant of the exposure");
      }
      if (!to_m && !to_y) {
        violation(vs.name, "RoleTopologyViolation/intermediate-confounder-not-upstream",
                  "intermediate confounder '" + vs.name +
                      "' is not an ancestor of the mediator or outcome");
      }
    }
  }

  // Table totality against the declared supports.
  for (const VariableSpec& vs : raw.variables) {
    std::size_t rows = vs.noise.symbols.size();
    bool shape_ok = true;
    for (const std::string& p : vs.parents) {
      rows *= raw.variables[index.at(p)].support.size();
    }
    std::vector<int> hits(rows, 0);
    for (const TableEntry& entry : vs.table) {
      if (entry.parent_values.size() != vs.parents.size()) {
        violation(vs.name, "NonTotalTable/row-arity",
                  "table row lists " + std::to_string(entry.parent_values.size()) +
                      " parent values; variable has " + std::to_string(vs.parents.size()) +
                      " parents");
        shape_ok = false;
        continue;
      }
      std::size_t idx = 0;
      bool row_ok = true;
      for (std::size_t p = 0; p < vs.parents.size(); ++p) {
        const VariableSpec& parent = raw.variables[index.at(vs.parents[p])];
        auto it = std::find(parent.support.begin(), parent.support.end(),
                            entry.parent_values[p]);
        if (it == parent.support.end()) {
          violation(vs.name, "NonTotalTable/unknown-parent-value",
                    "table row uses value " + entry.parent_values[p].to_string() +
                        " outside the support of parent '" + vs.parents[p] + "'");
          row_ok = false;
          break;
        }
        idx = idx * parent.support.size() + static_cast<std::size_t>(it - parent.support.begin());
      }
      if (!row_ok) {
        shape_ok = false;
        continue;
      }
      auto nit = std::find(vs.noise.symbols.begin(), vs.noise.symbols.end(), entry.noise);
      if (nit == vs.noise.symbols.end()) {
        violation(vs.name, "NonTotalTable/unknown-noise-symbol",
                  "table row uses undeclared noise symbol '" + entry.noise + "'");
        shape_ok = false;
        continue;
      }
      idx = idx * vs.noise.symbols.size() + static_cast<std::size_t>(nit - vs.noise.symbols.begin());
      if (std::find(vs.support.begin(), vs.support.end(), entry.value) == vs.support.end()) {
        violation(vs.name, "NonTotalTable/value-not-in-support",
                  "table maps to " + entry.value.to_string() + ", outside the declared support");
        shape_ok = false;
        continue;
      }
      if (++hits[idx] > 1) {
        violation(vs.name, "NonTotalTable/duplicate-row",
                  "table defines the same (parents, noise) combination twice");
        shape_ok = false;
      }
    }
    if (shape_ok) {
      std::size_t missing = static_cast<std::size_t>(
          std::count(hits.begin(), hits.end(), 0));
      if (missing > 0) {
        violation(vs.name, "NonTotalTable/missing-rows",
                  "table leaves " + std::to_string(missing) + " of " +
                      std::to_string(rows) + " (parents, noise) combinations undefined");
      }
    }
  }
  if (!result.violations.empty()) return result;

  std::vector<int> pos_of_raw(n);
  for (std::size_t k = 0; k < topo.size(); ++k) pos_of_raw[topo[k]] = static_cast<int>(k);
  result.scm = ScmBuilder::build(raw, topo, pos_of_raw);
  return result;
}

ObservationalTable Scm::observational_distribution(std::size_t max_cells) const {
  ObservationalTable table;
  table.vars = dataset_order();
  std::size_t cells = 1;
  for (int v : table.vars) {
    table.dims.push_back(vars_[v].support.size());
    if (cells > max_cells / vars_[v].support.size()) {
      fail(ErrorCode::SupportTooLarge,
           "joint observed support exceeds the cap of " + std::to_string(max_cells) +
               " cells (set MEDIATRIX_MAX_CELLS to raise it)");
    }
    cells *= vars_[v].support.size();
  }
  table.probs.assign(cells, 0.0);

  std::size_t units = 1;
  for (const Variable& var : vars_) {
    std::size_t k = var.noise.symbols.size();
    if (units > max_cells / k) {
      fail(ErrorCode::SupportTooLarge,
           "unit space exceeds the cap of " + std::to_string(max_cells) +
               " cells (set MEDIATRIX_MAX_CELLS to raise it)");
    }
    units *= k;
  }

  const int nv = num_variables();
  std::vector<int> noise(nv, 0);
  std::vector<int> world(nv, 0);
  std::vector<int> obs(table.vars.size(), 0);
  for (std::size_t u = 0; u < units; ++u) {
    std::size_t rem = u;
    double p = 1.0;
    for (int v = nv - 1; v >= 0; --v) {
      std::size_t k = vars_[v].noise.symbols.size();
      noise[v] = static_cast<int>(rem % k);
      rem /= k;
      p *= vars_[v].noise.probs[noise[v]];
    }
    if (p == 0.0) continue;
    std::vector<int> parent_vals;
    for (int v = 0; v < nv; ++v) {
      parent_vals.clear();
      for (int pv : vars_[v].parents) parent_vals.push_back(world[pv]);
      world[v] = lookup(v, parent_vals, noise[v]);
    }
    for (std::size_t i = 0; i < table.vars.size(); ++i) obs[i] = world[table.vars[i]];
    table.probs[table.index_of(obs)] += p;
  }
  return table;
}

RawScm Scm::to_raw() const {
  RawScm raw;
  raw.name = name_;
  raw.description = description_;
  for (const Variable& var : vars_) {
    VariableSpec vs;
    vs.name = var.name;
    vs.role = var.role;
    vs.support = var.support;
    for (int p : var.parents) vs.parents.push_back(vars_[p].name);
    vs.noise = var.noise;

    std::vector<std::size_t> dims;
    for (int p : var.parents) dims.push_back(vars_[p].support.size());
    dims.push_back(var.noise.symbols.size());
    std::vector<std::size_t> at(dims.size(), 0);
    for (std::size_t idx = 0; idx < var.table.size(); ++idx) {
      TableEntry entry;
      for (std::size_t p = 0; p + 1 < dims.size(); ++p) {
        entry.parent_values.push_back(vars_[var.parents[p]].support[at[p]]);
      }
      entry.noise = var.noise.symbols[at.back()];
      entry.value = var.support[var.table[idx]];
      vs.table.push_back(std::move(entry));
      for (std::size_t d = dims.size(); d-- > 0;) {
        if (++at[d] < dims[d]) break;
        at[d] = 0;
      }
    }
    raw.variables.push_back(std::move(vs));
  }
  return raw;
}

bool Scm::operator==(const Scm& o) const {
  if (name_ != o.name_ || description_ != o.description_ ||
      vars_.size() != o.vars_.size()) {
    return false;
  }
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    const Variable& a = vars_[v];
    const Variable& b = o.vars_[v];
    if (a.name != b.name || a.role != b.role || a.support != b.support ||
        a.parents != b.parents || a.noise.symbols != b.noise.symbols ||
        a.noise.probs != b.noise.probs || a.table != b.table) {
      return false;
    }
  }
  return true;
}

Scm load_scm_or_fail(const RawScm& raw) {
  ValidationResult result = Scm::validate(raw);
  if (!result.ok()) {
    std::ostringstream msg;
    msg << "model '" << raw.name << "' failed validation:";
    for (const Violation& v : result.violations) {
      msg << "\n  [" << v.rule << "] ";
      if (!v.variable.empty()) msg << v.variable << ": ";
      msg << v.message;
    }
    fail(ErrorCode::SchemaError, msg.str());
  }
  return *std::move(result.scm);
}

}  // namespace mediatrix
