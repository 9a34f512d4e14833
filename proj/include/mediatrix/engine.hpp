#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mediatrix/rng.hpp"
#include "mediatrix/scm.hpp"

namespace mediatrix {

// One point of the exogenous product space: a noise symbol index per
// variable (storage order) and the product probability. Zero-probability
// units are kept; they contribute nothing to expectations.
struct Unit {
  std::vector<int> noise;
  double probability = 0.0;
};

std::vector<Unit> enumerate_units(const Scm& scm,
                                  std::size_t max_cells = default_cell_cap());

enum class Conditioning { None, Covariates };

struct ExplicitRow {
  std::vector<Value> stratum;  // one value per covariate, dataset order
  std::vector<double> probs;   // over the mediator support
};

// Where a drawn mediator value comes from. The value is drawn independently
// of the unit's own noise, given the covariate stratum.
class MediatorDistributionSpec {
 public:
  enum class Kind { PointMass, PotentialConditional, ObservedConditional, Mixture, Explicit };

  static MediatorDistributionSpec point_mass(Value m);
  static MediatorDistributionSpec potential_conditional(int exposure_value,
                                                        Conditioning conditioning);
  static MediatorDistributionSpec observed_conditional(int exposure_value,
                                                       Conditioning conditioning);
  static MediatorDistributionSpec mixture(std::vector<double> weights,
                                          std::vector<MediatorDistributionSpec> components);
  static MediatorDistributionSpec explicit_table(std::vector<ExplicitRow> rows);

  Kind kind() const;
  const Value& point_value() const;
  int exposure_value() const;
  Conditioning conditioning() const;
  const std::vector<double>& weights() const;
  const std::vector<MediatorDistributionSpec>& components() const;
  const std::vector<ExplicitRow>& rows() const;

  // Textual form matching the CLI grammar: point(low), pot(0|C), obs(1),
  // mix(0.5*pot(0|C), 0.5*pot(1|C)), table(...).
  std::string label() const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// What happens to each variable in a hypothetical world. Variables without
// a directive follow their structural equation.
class WorldSpec {
 public:
  struct Directive {
    enum class Kind { Set, PotentialUnder, Draw };
    Kind kind = Kind::Set;
    Value set_value;
    int potential_exposure = 0;
    std::optional<MediatorDistributionSpec> draw;
  };

  static WorldSpec natural() { return WorldSpec(); }

  WorldSpec& set(std::string var, Value value);
  WorldSpec& potential_under(std::string var, int exposure_value);
  WorldSpec& draw(std::string var, MediatorDistributionSpec spec);

  const std::map<std::string, Directive>& directives() const { return directives_; }
  bool is_natural() const { return directives_.empty(); }

  std::string to_string() const;  // "natural" or "A=1, M~pot(0|C)"

 private:
  std::map<std::string, Directive> directives_;
};

// Conjunction of equalities on naturally realized covariate/exposure values.
struct Condition {
  std::vector<std::pair<std::string, Value>> equalities;
  bool empty() const { return equalities.empty(); }
  std::string to_string() const;
};

// Supplies concrete mediator values for draw directives during single-world
// evaluation (sampling); exact expectations integrate draws analytically
// and never need one.
class DrawResolver {
 public:
  virtual ~DrawResolver() = default;
  virtual int resolve(const Unit& unit, std::span<const double> dist) = 0;
};

class SamplingResolver : public DrawResolver {
 public:
  explicit SamplingResolver(Rng& rng) : rng_(&rng) {}
  int resolve(const Unit&, std::span<const double> dist) override {
    return rng_->sample(dist);
  }

 private:
  Rng* rng_;
};

// Cached unit-space view of a model: the workhorse behind every exact
// effect computation.
class Enumeration {
 public:
  explicit Enumeration(const Scm& scm, std::size_t max_cells = default_cell_cap());

  const Scm& scm() const { return *scm_; }

  // Units are stored in mixed-radix order over noise symbols (last variable
  // fastest), so a noise assignment maps back to its index arithmetically.
  const std::vector<Unit>& units() const { return units_; }
  std::size_t unit_index(std::span<const int> noise) const;
  const std::vector<int>& natural_world(std::size_t u) const { return natural_[u]; }

  // Covariate stratum of a unit (value indices, dataset order).
  std::vector<int> covariate_stratum(std::size_t u) const;
  double stratum_mass(std::span<const int> stratum) const;

  // Value indices of every variable in the given world for one unit.
  std::vector<int> evaluate(std::size_t u, const WorldSpec& world,
                            DrawResolver* resolver = nullptr) const;

  // Mediator value of unit u in the world where the exposure is set to a.
  int mediator_potential(std::size_t u, int a) const;

  // Distribution over mediator support indices the spec induces at a
  // covariate stratum. Specs with Conditioning::None ignore the stratum.
  std::vector<double> mediator_distribution(const MediatorDistributionSpec& spec,
                                            std::span<const int> stratum) const;

  double expected_outcome(const WorldSpec& world,
                          const Condition* condition = nullptr) const;

 private:
  struct BoundWorld;
  BoundWorld bind(const WorldSpec& world) const;
  std::vector<int> evaluate_bound(std::size_t u, const BoundWorld& bound,
                                  DrawResolver* resolver, int override_mediator) const;
  std::vector<bool> bind_condition(const Condition& condition) const;

  const Scm* scm_;
  std::vector<Unit> units_;
  std::vector<std::vector<int>> natural_;
  mutable std::array<std::optional<std::vector<int>>, 2> mediator_potential_;
};

// Convenience single-shot wrappers.
std::vector<int> evaluate(const Scm& scm, const Unit& unit, const WorldSpec& world,
                          DrawResolver* resolver = nullptr);
double expected_outcome(const Scm& scm, const WorldSpec& world,
                        const Condition* condition = nullptr,
                        std::size_t max_cells = default_cell_cap());
std::vector<std::pair<Value, double>> stratum_mediator_distribution(
    const Scm& scm, const MediatorDistributionSpec& spec,
    const std::vector<Value>& stratum);

}  // namespace mediatrix
