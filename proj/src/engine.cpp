#include "mediatrix/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mediatrix/errors.hpp"

namespace mediatrix {

namespace {

constexpr double kMassTolerance = 1e-9;

std::string stratum_text(const Scm& scm, std::span<const int> stratum) {
  if (scm.covariates().empty()) return "(no covariates)";
  std::string out = "(";
  const auto& cov = scm.covariates();
  for (std::size_t i = 0; i < cov.size(); ++i) {
    if (i) out += ", ";
    out += scm.var(cov[i]).name + "=" + scm.var(cov[i]).support[stratum[i]].to_string();
  }
  return out + ")";
}

}  // namespace

struct MediatorDistributionSpec::Impl {
  Kind kind = Kind::PointMass;
  Value point;
  int exposure_value = 0;
  Conditioning conditioning = Conditioning::Covariates;
  std::vector<double> weights;
  std::vector<MediatorDistributionSpec> components;
  std::vector<ExplicitRow> rows;
};

MediatorDistributionSpec MediatorDistributionSpec::point_mass(Value m) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::PointMass;
  impl->point = std::move(m);
  MediatorDistributionSpec spec;
  spec.impl_ = std::move(impl);
  return spec;
}

MediatorDistributionSpec MediatorDistributionSpec::potential_conditional(
    int exposure_value, Conditioning conditioning) {
  if (exposure_value != 0 && exposure_value != 1) {
    fail(ErrorCode::SpecError, "potential mediator exposure must be 0 or 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::PotentialConditional;
  impl->exposure_value = exposure_value;
  impl->conditioning = conditioning;
  MediatorDistributionSpec spec;
  spec.impl_ = std::move(impl);
  return spec;
}

MediatorDistributionSpec MediatorDistributionSpec::observed_conditional(
    int exposure_value, Conditioning conditioning) {
  if (exposure_value != 0 && exposure_value != 1) {
    fail(ErrorCode::SpecError, "observed mediator exposure must be 0 or 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::ObservedConditional;
  impl->exposure_value = exposure_value;
  impl->conditioning = conditioning;
  MediatorDistributionSpec spec;
  spec.impl_ = std::move(impl);
  return spec;
}

MediatorDistributionSpec MediatorDistributionSpec::mixture(
    std::vector<double> weights, std::vector<MediatorDistributionSpec> components) {
  if (weights.size() != components.size() || components.empty()) {
    fail(ErrorCode::SpecError, "mixture needs matching, non-empty weights and components");
  }
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) {
      fail(ErrorCode::SpecError, "mixture weights must be finite and >= 0");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    fail(ErrorCode::SpecError,
         "mixture weights sum to " + format_double(total) + ", expected 1");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Mixture;
  impl->weights = std::move(weights);
  impl->components = std::move(components);
  MediatorDistributionSpec spec;
  spec.impl_ = std::move(impl);
  return spec;
}

MediatorDistributionSpec MediatorDistributionSpec::explicit_table(
    std::vector<ExplicitRow> rows) {
  if (rows.empty()) fail(ErrorCode::SpecError, "explicit mediator table has no rows");
  for (const ExplicitRow& row : rows) {
    double total = 0;
    for (double p : row.probs) {
      if (!(p >= 0) || !std::isfinite(p)) {
        fail(ErrorCode::SpecError, "explicit mediator table probabilities must be >= 0");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
      fail(ErrorCode::SpecError, "explicit mediator table row sums to " +
                                     format_double(total) + ", expected 1");
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Explicit;
  impl->rows = std::move(rows);
  MediatorDistributionSpec spec;
  spec.impl_ = std::move(impl);
  return spec;
}

MediatorDistributionSpec::Kind MediatorDistributionSpec::kind() const { return impl_->kind; }
const Value& MediatorDistributionSpec::point_value() const { return impl_->point; }
int MediatorDistributionSpec::exposure_value() const { return impl_->exposure_value; }
Conditioning MediatorDistributionSpec::conditioning() const { return impl_->conditioning; }
const std::vector<double>& MediatorDistributionSpec::weights() const { return impl_->weights; }
const std::vector<MediatorDistributionSpec>& MediatorDistributionSpec::components() const {
  return impl_->components;
}
const std::vector<ExplicitRow>& MediatorDistributionSpec::rows() const { return impl_->rows; }

std::string MediatorDistributionSpec::label() const {
  switch (impl_->kind) {
    case Kind::PointMass:
      return "point(" + impl_->point.to_string() + ")";
    case Kind::PotentialConditional:
    case Kind::ObservedConditional: {
      std::string head = impl_->kind == Kind::PotentialConditional ? "pot(" : "obs(";
      head += std::to_string(impl_->exposure_value);
      if (impl_->conditioning == Conditioning::Covariates) head += "|C";
      return head + ")";
    }
    case Kind::Mixture: {
      std::string out = "mix(";
      for (std::size_t i = 0; i < impl_->weights.size(); ++i) {
        if (i) out += ", ";
        out += format_double(impl_->weights[i]) + "*" + impl_->components[i].label();
      }
      return out + ")";
    }
    case Kind::Explicit:
      return "table(" + std::to_string(impl_->rows.size()) + " strata)";
  }
  return "?";
}

WorldSpec& WorldSpec::set(std::string var, Value value) {
  Directive d;
  d.kind = Directive::Kind::Set;
  d.set_value = std::move(value);
  directives_[std::move(var)] = std::move(d);
  return *this;
}

WorldSpec& WorldSpec::potential_under(std::string var, int exposure_value) {
  if (exposure_value != 0 && exposure_value != 1) {
    fail(ErrorCode::SpecError, "potential_under exposure must be 0 or 1");
  }
  Directive d;
  d.kind = Directive::Kind::PotentialUnder;
  d.potential_exposure = exposure_value;
  directives_[std::move(var)] = std::move(d);
  return *this;
}

WorldSpec& WorldSpec::draw(std::string var, MediatorDistributionSpec spec) {
  Directive d;
  d.kind = Directive::Kind::Draw;
  d.draw = std::move(spec);
  directives_[std::move(var)] = std::move(d);
  return *this;
}

std::string WorldSpec::to_string() const {
  if (directives_.empty()) return "natural";
  std::string out;
  for (const auto& [name, d] : directives_) {
    if (!out.empty()) out += ", ";
    switch (d.kind) {
      case Directive::Kind::Set:
        out += name + "=" + d.set_value.to_string();
        break;
      case Directive::Kind::PotentialUnder:
        out += name + "~pot(" + std::to_string(d.potential_exposure) + ")";
        break;
      case Directive::Kind::Draw: {
        std::string label = d.draw->label();
        // In world text a bare pot(a)/obs(a) means the unit-level potential,
        // so a marginal draw keeps an explicit "|." marker.
        if (d.draw->kind() != MediatorDistributionSpec::Kind::Mixture &&
            d.draw->kind() != MediatorDistributionSpec::Kind::PointMass &&
            d.draw->conditioning() == Conditioning::None) {
          label.insert(label.size() - 1, "|.");
        }
        out += name + "~" + label;
        break;
      }
    }
  }
  return out;
}

std::string Condition::to_string() const {
  std::string out;
  for (const auto& [name, value] : equalities) {
    if (!out.empty()) out += ", ";
    out += name + "=" + value.to_string();
  }
  return out;
}

std::vector<Unit> enumerate_units(const Scm& scm, std::size_t max_cells) {
  const int nv = scm.num_variables();
  std::size_t total = 1;
  for (int v = 0; v < nv; ++v) {
    std::size_t k = scm.var(v).noise.symbols.size();
    if (total > max_cells / k) {
      fail(ErrorCode::SupportTooLarge,
           "unit space exceeds the cap of " + std::to_string(max_cells) +
               " cells (set MEDIATRIX_MAX_CELLS to raise it)");
    }
    total *= k;
  }
  std::vector<Unit> units(total);
  for (std::size_t u = 0; u < total; ++u) {
    Unit& unit = units[u];
    unit.noise.resize(nv);
    std::size_t rem = u;
    double p = 1.0;
    for (int v = nv - 1; v >= 0; --v) {
      std::size_t k = scm.var(v).noise.symbols.size();
      unit.noise[v] = static_cast<int>(rem % k);
      rem /= k;
      p *= scm.var(v).noise.probs[unit.noise[v]];
    }
    unit.probability = p;
  }
  return units;
}

struct Enumeration::BoundWorld {
  struct Entry {
    WorldSpec::Directive::Kind kind = WorldSpec::Directive::Kind::Set;
    int value_idx = -1;
    int potential_exposure = 0;
    const MediatorDistributionSpec* draw = nullptr;
    bool active = false;
  };
  std::vector<Entry> entries;
  bool has_draw = false;
  const MediatorDistributionSpec* draw_spec = nullptr;
};

Enumeration::Enumeration(const Scm& scm, std::size_t max_cells) : scm_(&scm) {
  units_ = enumerate_units(scm, max_cells);
  const int nv = scm.num_variables();
  natural_.resize(units_.size());
  std::vector<int> parent_vals;
  for (std::size_t u = 0; u < units_.size(); ++u) {
    std::vector<int>& world = natural_[u];
    world.resize(nv);
    for (int v = 0; v < nv; ++v) {
      parent_vals.clear();
      for (int p : scm.var(v).parents) parent_vals.push_back(world[p]);
      world[v] = scm.lookup(v, parent_vals, units_[u].noise[v]);
    }
  }
}

std::vector<int> Enumeration::covariate_stratum(std::size_t u) const {
  std::vector<int> stratum;
  stratum.reserve(scm_->covariates().size());
  for (int c : scm_->covariates()) stratum.push_back(natural_[u][c]);
  return stratum;
}

double Enumeration::stratum_mass(std::span<const int> stratum) const {
  const auto& cov = scm_->covariates();
  double mass = 0;
  for (std::size_t u = 0; u < units_.size(); ++u) {
    bool match = true;
    for (std::size_t i = 0; i < cov.size(); ++i) {
      if (natural_[u][cov[i]] != stratum[i]) {
        match = false;
        break;
      }
    }
    if (match) mass += units_[u].probability;
  }
  return mass;
}

int Enumeration::mediator_potential(std::size_t u, int a) const {
  if (a != 0 && a != 1) fail(ErrorCode::SpecError, "potential exposure must be 0 or 1");
  auto& slot = mediator_potential_[a];
  if (!slot) {
    const Scm& scm = *scm_;
    const int nv = scm.num_variables();
    const int exposure = scm.exposure();
    const int mediator = scm.mediator();
    int a_idx = scm.support_index(exposure, Value::number(a));
    std::vector<int> vals(units_.size());
    std::vector<int> world(nv);
    std::vector<int> parent_vals;
    for (std::size_t i = 0; i < units_.size(); ++i) {
      for (int v = 0; v < nv; ++v) {
        if (v == exposure) {
          world[v] = a_idx;
          continue;
        }
        parent_vals.clear();
        for (int p : scm.var(v).parents) parent_vals.push_back(world[p]);
        world[v] = scm.lookup(v, parent_vals, units_[i].noise[v]);
      }
      vals[i] = world[mediator];
    }
    slot = std::move(vals);
  }
  return (*slot)[u];
}

Enumeration::BoundWorld Enumeration::bind(const WorldSpec& world) const {
  BoundWorld bound;
  bound.entries.resize(scm_->num_variables());
  for (const auto& [name, d] : world.directives()) {
    int v = scm_->index_of(name);
    if (v < 0) fail(ErrorCode::SpecError, "world references unknown variable '" + name + "'");
    BoundWorld::Entry& entry = bound.entries[v];
    entry.active = true;
    entry.kind = d.kind;
    switch (d.kind) {
      case WorldSpec::Directive::Kind::Set: {
        int idx = scm_->support_index(v, d.set_value);
        if (idx < 0) {
          fail(ErrorCode::SpecError, "value " + d.set_value.to_string() +
                                         " is not in the support of '" + name + "'");
        }
        entry.value_idx = idx;
        break;
      }
      case WorldSpec::Directive::Kind::PotentialUnder: {
        if (v != scm_->mediator()) {
          fail(ErrorCode::SpecError,
               "potential_under applies only to the mediator, not '" + name + "'");
        }
        entry.potential_exposure = d.potential_exposure;
        break;
      }
      case WorldSpec::Directive::Kind::Draw: {
        if (v != scm_->mediator()) {
          fail(ErrorCode::SpecError,
               "draw directives apply only to the mediator, not '" + name + "'");
        }
        entry.draw = &*d.draw;
        bound.has_draw = true;
        bound.draw_spec = entry.draw;
        break;
      }
    }
  }
  return bound;
}

std::vector<int> Enumeration::evaluate_bound(std::size_t u, const BoundWorld& bound,
                                             DrawResolver* resolver,
                                             int override_mediator) const {
  const Scm& scm = *scm_;
  const int nv = scm.num_variables();
  const int mediator = scm.mediator();
  std::vector<int> world(nv);
  std::vector<int> parent_vals;
  for (int v = 0; v < nv; ++v) {
    if (v == mediator && override_mediator >= 0) {
      world[v] = override_mediator;
      continue;
    }
    const BoundWorld::Entry& entry = bound.entries[v];
    if (entry.active) {
      switch (entry.kind) {
        case WorldSpec::Directive::Kind::Set:
          world[v] = entry.value_idx;
          continue;
        case WorldSpec::Directive::Kind::PotentialUnder:
          world[v] = mediator_potential(u, entry.potential_exposure);
          continue;
        case WorldSpec::Directive::Kind::Draw: {
          if (!resolver) {
            fail(ErrorCode::UnresolvedDraw,
                 "world contains a draw directive but no resolver was supplied");
          }
          std::vector<int> stratum = covariate_stratum(u);
          std::vector<double> dist = mediator_distribution(*entry.draw, stratum);
          world[v] = resolver->resolve(units_[u], dist);
          continue;
        }
      }
    }
    parent_vals.clear();
    for (int p : scm.var(v).parents) parent_vals.push_back(world[p]);
    world[v] = scm.lookup(v, parent_vals, units_[u].noise[v]);
  }
  return world;
}

std::vector<int> Enumeration::evaluate(std::size_t u, const WorldSpec& world,
                                       DrawResolver* resolver) const {
  return evaluate_bound(u, bind(world), resolver, -1);
}

std::vector<double> Enumeration::mediator_distribution(
    const MediatorDistributionSpec& spec, std::span<const int> stratum) const {
  const Scm& scm = *scm_;
  const int mediator = scm.mediator();
  const std::size_t msize = scm.support_size(mediator);
  const auto& cov = scm.covariates();
  if (stratum.size() != cov.size()) {
    fail(ErrorCode::SpecError, "stratum has " + std::to_string(stratum.size()) +
                                   " values; model has " + std::to_string(cov.size()) +
                                   " covariates");
  }

  using Kind = MediatorDistributionSpec::Kind;
  switch (spec.kind()) {
    case Kind::PointMass: {
      int idx = scm.support_index(mediator, spec.point_value());
      if (idx < 0) {
        fail(ErrorCode::SpecError, "value " + spec.point_value().to_string() +
                                       " is not in the mediator's support");
      }
      std::vector<double> dist(msize, 0.0);
      dist[idx] = 1.0;
      return dist;
    }
    case Kind::PotentialConditional:
    case Kind::ObservedConditional: {
      const bool use_stratum = spec.conditioning() == Conditioning::Covariates;
      const bool observed = spec.kind() == Kind::ObservedConditional;
      int a_idx = scm.support_index(scm.exposure(), Value::number(spec.exposure_value()));
      std::vector<double> dist(msize, 0.0);
      double mass = 0;
      for (std::size_t u = 0; u < units_.size(); ++u) {
        double p = units_[u].probability;
        if (p == 0) continue;
        if (use_stratum) {
          bool match = true;
          for (std::size_t i = 0; i < cov.size(); ++i) {
            if (natural_[u][cov[i]] != stratum[i]) {
              match = false;
              break;
            }
          }
          if (!match) continue;
        }
        int m;
        if (observed) {
          if (natural_[u][scm.exposure()] != a_idx) continue;
          m = natural_[u][mediator];
        } else {
          m = mediator_potential(u, spec.exposure_value());
        }
        dist[m] += p;
        mass += p;
      }
      if (!(mass > 0)) {
        std::string where = use_stratum ? " in stratum " + stratum_text(scm, stratum) : "";
        if (observed) {
          fail(ErrorCode::PositivityViolation,
               "no probability mass at " + scm.var(scm.exposure()).name + "=" +
                   std::to_string(spec.exposure_value()) + where);
        }
        fail(ErrorCode::PositivityViolation,
             "covariate stratum " + stratum_text(scm, stratum) + " has zero probability");
      }
      for (double& d : dist) d /= mass;
      return dist;
    }
    case Kind::Mixture: {
      std::vector<double> dist(msize, 0.0);
      const auto& weights = spec.weights();
      const auto& components = spec.components();
      for (std::size_t i = 0; i < components.size(); ++i) {
        std::vector<double> part = mediator_distribution(components[i], stratum);
        for (std::size_t m = 0; m < msize; ++m) dist[m] += weights[i] * part[m];
      }
      return dist;
    }
    case Kind::Explicit: {
      for (const ExplicitRow& row : spec.rows()) {
        if (row.stratum.size() != cov.size()) {
          fail(ErrorCode::SpecError,
               "explicit mediator table row has " + std::to_string(row.stratum.size()) +
                   " stratum values; model has " + std::to_string(cov.size()) +
                   " covariates");
        }
        bool match = true;
        for (std::size_t i = 0; i < cov.size(); ++i) {
          int idx = scm.support_index(cov[i], row.stratum[i]);
          if (idx < 0) {
            fail(ErrorCode::SpecError,
                 "explicit mediator table stratum value " + row.stratum[i].to_string() +
                     " is not in the support of '" + scm.var(cov[i]).name + "'");
          }
          if (idx != stratum[i]) {
            match = false;
            break;
          }
        }
        if (!match) continue;
        if (row.probs.size() != msize) {
          fail(ErrorCode::SpecError,
               "explicit mediator table row has " + std::to_string(row.probs.size()) +
                   " probabilities; mediator support has " + std::to_string(msize));
        }
        return row.probs;
      }
      fail(ErrorCode::SpecError, "explicit mediator table has no row for stratum " +
                                     stratum_text(scm, stratum));
    }
  }
  fail(ErrorCode::Internal, "unhandled mediator distribution kind");
}

std::vector<bool> Enumeration::bind_condition(const Condition& condition) const {
  const Scm& scm = *scm_;
  std::vector<std::pair<int, int>> checks;
  std::vector<bool> seen(scm.num_variables(), false);
  for (const auto& [name, value] : condition.equalities) {
    int v = scm.index_of(name);
    if (v < 0) fail(ErrorCode::SpecError, "condition references unknown variable '" + name + "'");
    Role role = scm.var(v).role;
    if (role != Role::Covariate && role != Role::Exposure) {
      fail(ErrorCode::SpecError,
           "conditions may reference covariates and the exposure only; '" + name +
               "' has role " + role_name(role));
    }
    if (seen[v]) {
      fail(ErrorCode::SpecError, "condition lists variable '" + name + "' twice");
    }
    seen[v] = true;
    int idx = scm.support_index(v, value);
    if (idx < 0) {
      fail(ErrorCode::SpecError, "value " + value.to_string() +
                                     " is not in the support of '" + name + "'");
    }
    checks.emplace_back(v, idx);
  }
  std::vector<bool> selected(units_.size(), true);
  for (std::size_t u = 0; u < units_.size(); ++u) {
    for (const auto& [v, idx] : checks) {
      if (natural_[u][v] != idx) {
        selected[u] = false;
        break;
      }
    }
  }
  return selected;
}

double Enumeration::expected_outcome(const WorldSpec& world,
                                     const Condition* condition) const {
  const Scm& scm = *scm_;
  BoundWorld bound = bind(world);
  std::vector<bool> selected;
  if (condition && !condition->empty()) {
    selected = bind_condition(*condition);
  } else {
    selected.assign(units_.size(), true);
    condition = nullptr;
  }

  double total = 0;
  for (std::size_t u = 0; u < units_.size(); ++u) {
    if (selected[u]) total += units_[u].probability;
  }
  if (!(total > 0)) {
    fail(ErrorCode::PositivityViolation,
         "condition {" + (condition ? condition->to_string() : std::string()) +
             "} has zero probability");
  }

  const int outcome = scm.outcome();
  const auto& y_support = scm.var(outcome).support;
  double acc = 0;

  if (!bound.has_draw) {
    for (std::size_t u = 0; u < units_.size(); ++u) {
      double p = units_[u].probability;
      if (!selected[u] || p == 0) continue;
      std::vector<int> vals = evaluate_bound(u, bound, nullptr, -1);
      acc += p * y_support[vals[outcome]].number();
    }
    return acc / total;
  }

  // Integrate the draw analytically: per unit, mix the set-mediator worlds
  // by the spec's distribution at the unit's stratum.
  std::map<std::vector<int>, std::vector<double>> dist_cache;
  for (std::size_t u = 0; u < units_.size(); ++u) {
    double p = units_[u].probability;
    if (!selected[u] || p == 0) continue;
    std::vector<int> stratum = covariate_stratum(u);
    auto it = dist_cache.find(stratum);
    if (it == dist_cache.end()) {
      it = dist_cache.emplace(stratum, mediator_distribution(*bound.draw_spec, stratum)).first;
    }
    const std::vector<double>& dist = it->second;
    double y_u = 0;
    for (std::size_t m = 0; m < dist.size(); ++m) {
      if (dist[m] <= 0) continue;
      std::vector<int> vals = evaluate_bound(u, bound, nullptr, static_cast<int>(m));
      y_u += dist[m] * y_support[vals[outcome]].number();
    }
    acc += p * y_u;
  }
  return acc / total;
}

namespace {
std::size_t unit_index_of(const Scm& scm, std::span<const int> noise) {
  std::size_t idx = 0;
  for (int v = 0; v < scm.num_variables(); ++v) {
    idx = idx * scm.var(v).noise.symbols.size() + static_cast<std::size_t>(noise[v]);
  }
  return idx;
}
}  // namespace

std::size_t Enumeration::unit_index(std::span<const int> noise) const {
  return unit_index_of(*scm_, noise);
}

std::vector<int> evaluate(const Scm& scm, const Unit& unit, const WorldSpec& world,
                          DrawResolver* resolver) {
  Enumeration enumeration(scm);
  return enumeration.evaluate(unit_index_of(scm, unit.noise), world, resolver);
}

double expected_outcome(const Scm& scm, const WorldSpec& world,
                        const Condition* condition, std::size_t max_cells) {
  Enumeration enumeration(scm, max_cells);
  return enumeration.expected_outcome(world, condition);
}

std::vector<std::pair<Value, double>> stratum_mediator_distribution(
    const Scm& scm, const MediatorDistributionSpec& spec,
    const std::vector<Value>& stratum) {
  Enumeration enumeration(scm);
  const auto& cov = scm.covariates();
  if (stratum.size() != cov.size()) {
    fail(ErrorCode::SpecError, "stratum has " + std::to_string(stratum.size()) +
                                   " values; model has " + std::to_string(cov.size()) +
                                   " covariates");
  }
  std::vector<int> idx(cov.size());
  for (std::size_t i = 0; i < cov.size(); ++i) {
    int k = scm.support_index(cov[i], stratum[i]);
    if (k < 0) {
      fail(ErrorCode::SpecError, "value " + stratum[i].to_string() +
                                     " is not in the support of '" +
                                     scm.var(cov[i]).name + "'");
    }
    idx[i] = k;
  }
  if (!(enumeration.stratum_mass(idx) > 0)) {
    fail(ErrorCode::PositivityViolation,
         "covariate stratum has zero probability under the model");
  }
  std::vector<double> dist = enumeration.mediator_distribution(spec, idx);
  std::vector<std::pair<Value, double>> out;
  const auto& support = scm.var(scm.mediator()).support;
  for (std::size_t m = 0; m < dist.size(); ++m) out.emplace_back(support[m], dist[m]);
  return out;
}

}  // namespace mediatrix
