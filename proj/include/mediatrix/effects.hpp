#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mediatrix/engine.hpp"

namespace mediatrix {

enum class IdentifiedFlag { Yes, No, Unchecked };

struct EffectReport {
  std::string label;
  double value = 0;
  double left_mean = 0;
  double right_mean = 0;
  std::string condition;  // empty when unconditional
  IdentifiedFlag identified = IdentifiedFlag::Unchecked;
};

struct EffectQuery {
  WorldSpec left;
  WorldSpec right;
  std::optional<Condition> condition;
  std::string label;
};

enum class Decomposition { DirectIndirect, IndirectDirect };

struct NaturalEffects {
  EffectReport nde;
  EffectReport nie;
};

struct InterventionalEffects {
  EffectReport ide0;  // IDE(.0)
  EffectReport ide1;  // IDE(.1)
  EffectReport iie0;  // IIE(0.)
  EffectReport iie1;  // IIE(1.)
  EffectReport oe;
};

struct IndividualNaturalRow {
  std::size_t unit;          // index into Enumeration::units()
  std::vector<std::string> noise;  // noise symbol per variable
  double probability = 0;
  Value m0, m1;
  double y0 = 0, y10 = 0, y1 = 0;  // Y(0), Y(1, M(0)), Y(1)
  double nde = 0, nie = 0;
};

struct DisparityRow {
  std::vector<Value> stratum;  // covariate values, dataset order
  double mass_exposed = 0;     // P(C=c | A=1)
  double disparity = 0;
  double removed = 0;
  double remaining = 0;
};

struct DisparityReport {
  std::vector<DisparityRow> strata;
  DisparityRow summary;  // averaged over P(C | A=1); stratum empty
};

EffectReport total_effect(const Enumeration& e);
NaturalEffects natural_effects(const Enumeration& e, Decomposition decomposition);
std::vector<IndividualNaturalRow> individual_natural_effects(const Enumeration& e);
InterventionalEffects interventional_effects(const Enumeration& e);
EffectReport controlled_direct_effect(const Enumeration& e, const Value& m);
EffectReport generalized_ide(const Enumeration& e, const MediatorDistributionSpec& spec);
EffectReport general_contrast(const Enumeration& e, const EffectQuery& query);
DisparityReport disparity_decomposition(const Enumeration& e);
EffectReport halfway_intervention_effect(const Enumeration& e);

// Convenience wrappers that enumerate internally.
EffectReport total_effect(const Scm& scm);
NaturalEffects natural_effects(const Scm& scm, Decomposition decomposition);
std::vector<IndividualNaturalRow> individual_natural_effects(const Scm& scm);
InterventionalEffects interventional_effects(const Scm& scm);
EffectReport controlled_direct_effect(const Scm& scm, const Value& m);
EffectReport generalized_ide(const Scm& scm, const MediatorDistributionSpec& spec);
EffectReport general_contrast(const Scm& scm, const EffectQuery& query);
DisparityReport disparity_decomposition(const Scm& scm);
EffectReport halfway_intervention_effect(const Scm& scm);

}  // namespace mediatrix
