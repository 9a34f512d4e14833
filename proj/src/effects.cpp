#include "mediatrix/effects.hpp"

#include <cmath>
#include <map>

#include "mediatrix/errors.hpp"

namespace mediatrix {

namespace {

constexpr double kIdentityTolerance = 1e-9;

EffectReport contrast(const Enumeration& e, const std::string& label,
                      const WorldSpec& left, const WorldSpec& right,
                      const Condition* condition = nullptr) {
  EffectReport report;
  report.label = label;
  report.left_mean = e.expected_outcome(left, condition);
  report.right_mean = e.expected_outcome(right, condition);
  report.value = report.left_mean - report.right_mean;
  if (condition) report.condition = condition->to_string();
  return report;
}

WorldSpec exposure_world(const Enumeration& e, int a) {
  return WorldSpec().set(e.scm().var(e.scm().exposure()).name, Value::number(a));
}

WorldSpec cross_world(const Enumeration& e, int a, int a_prime) {
  const Scm& scm = e.scm();
  WorldSpec w;
  w.set(scm.var(scm.exposure()).name, Value::number(a));
  w.potential_under(scm.var(scm.mediator()).name, a_prime);
  return w;
}

WorldSpec draw_world(const Enumeration& e, int a, const MediatorDistributionSpec& spec) {
  const Scm& scm = e.scm();
  WorldSpec w;
  w.set(scm.var(scm.exposure()).name, Value::number(a));
  w.draw(scm.var(scm.mediator()).name, spec);
  return w;
}

}  // namespace

EffectReport total_effect(const Enumeration& e) {
  return contrast(e, "TE", exposure_world(e, 1), exposure_world(e, 0));
}

NaturalEffects natural_effects(const Enumeration& e, Decomposition decomposition) {
  NaturalEffects out;
  if (decomposition == Decomposition::DirectIndirect) {
    out.nde = contrast(e, "NDE(.0)", cross_world(e, 1, 0), exposure_world(e, 0));
    out.nie = contrast(e, "NIE(1.)", exposure_world(e, 1), cross_world(e, 1, 0));
  } else {
    out.nie = contrast(e, "NIE(0.)", cross_world(e, 0, 1), exposure_world(e, 0));
    out.nde = contrast(e, "NDE(.1)", exposure_world(e, 1), cross_world(e, 0, 1));
  }
  return out;
}

std::vector<IndividualNaturalRow> individual_natural_effects(const Enumeration& e) {
  const Scm& scm = e.scm();
  const int outcome = scm.outcome();
  const int mediator = scm.mediator();
  const auto& y_support = scm.var(outcome).support;
  const auto& m_support = scm.var(mediator).support;

  WorldSpec w0 = exposure_world(e, 0);
  WorldSpec w1 = exposure_world(e, 1);
  WorldSpec w10 = cross_world(e, 1, 0);

  std::vector<IndividualNaturalRow> rows;
  rows.reserve(e.units().size());
  for (std::size_t u = 0; u < e.units().size(); ++u) {
    IndividualNaturalRow row;
    row.unit = u;
    for (int v = 0; v < scm.num_variables(); ++v) {
      row.noise.push_back(scm.var(v).noise.symbols[e.units()[u].noise[v]]);
    }
    row.probability = e.units()[u].probability;
    row.m0 = m_support[e.mediator_potential(u, 0)];
    row.m1 = m_support[e.mediator_potential(u, 1)];
    row.y0 = y_support[e.evaluate(u, w0)[outcome]].number();
    row.y1 = y_support[e.evaluate(u, w1)[outcome]].number();
    row.y10 = y_support[e.evaluate(u, w10)[outcome]].number();
    row.nde = row.y10 - row.y0;
    row.nie = row.y1 - row.y10;
    rows.push_back(std::move(row));
  }
  return rows;
}

InterventionalEffects interventional_effects(const Enumeration& e) {
  auto pot = [](int a_prime) {
    return MediatorDistributionSpec::potential_conditional(a_prime, Conditioning::Covariates);
  };
  // The four world means E[Y(a, M-draw(a'|C))].
  double m[2][2];
  for (int a = 0; a <= 1; ++a) {
    for (int ap = 0; ap <= 1; ++ap) {
      m[a][ap] = e.expected_outcome(draw_world(e, a, pot(ap)));
    }
  }
  InterventionalEffects out;
  auto make = [](const char* label, double left, double right) {
    EffectReport r;
    r.label = label;
    r.left_mean = left;
    r.right_mean = right;
    r.value = left - right;
    return r;
  };
  out.ide0 = make("IDE(.0)", m[1][0], m[0][0]);
  out.ide1 = make("IDE(.1)", m[1][1], m[0][1]);
  out.iie0 = make("IIE(0.)", m[0][1], m[0][0]);
  out.iie1 = make("IIE(1.)", m[1][1], m[1][0]);
  out.oe = make("OE", m[1][1], m[0][0]);
  double path_a = out.ide0.value + out.iie1.value;
  double path_b = out.iie0.value + out.ide1.value;
  if (std::abs(path_a - out.oe.value) > kIdentityTolerance ||
      std::abs(path_b - out.oe.value) > kIdentityTolerance) {
    fail(ErrorCode::Internal, "overall-effect identity broken: " +
                                  format_double(path_a) + " vs " + format_double(path_b) +
                                  " vs OE " + format_double(out.oe.value));
  }
  return out;
}

EffectReport controlled_direct_effect(const Enumeration& e, const Value& m) {
  const Scm& scm = e.scm();
  if (scm.support_index(scm.mediator(), m) < 0) {
    fail(ErrorCode::SpecError,
         "value " + m.to_string() + " is not in the mediator's support");
  }
  const std::string& mname = scm.var(scm.mediator()).name;
  WorldSpec left = exposure_world(e, 1).set(mname, m);
  WorldSpec right = exposure_world(e, 0).set(mname, m);
  return contrast(e, "CDE(" + m.to_string() + ")", left, right);
}

EffectReport generalized_ide(const Enumeration& e, const MediatorDistributionSpec& spec) {
  return contrast(e, "GIDE(" + spec.label() + ")", draw_world(e, 1, spec),
                  draw_world(e, 0, spec));
}

EffectReport general_contrast(const Enumeration& e, const EffectQuery& query) {
  const Condition* condition =
      query.condition && !query.condition->empty() ? &*query.condition : nullptr;
  std::string label = query.label;
  if (label.empty()) {
    label = "[" + query.left.to_string() + "] - [" + query.right.to_string() + "]";
  }
  return contrast(e, label, query.left, query.right, condition);
}

namespace {

// Shared machinery for the observed-conditional stratum sweeps: returns the
// per-stratum contrast E[Y | A=1, c] − E[Y(1, M~spec) | A=1, c] plus the
// exposed-stratum weights, averaging into `summary`.
struct StratumSweep {
  std::vector<std::vector<int>> strata;  // value indices, positive strata only
  std::vector<double> exposed_mass;      // P(C=c | A=1)
};

std::string stratum_label(const Scm& scm, std::span<const int> stratum) {
  if (scm.covariates().empty()) return "(no covariates)";
  std::string out = "(";
  const auto& cov = scm.covariates();
  for (std::size_t i = 0; i < cov.size(); ++i) {
    if (i) out += ", ";
    out += scm.var(cov[i]).name + "=" + scm.var(cov[i]).support[stratum[i]].to_string();
  }
  return out + ")";
}

// Positive covariate strata with both exposure arms present; fails naming
// the first stratum that lacks one.
StratumSweep positive_strata(const Enumeration& e) {
  const Scm& scm = e.scm();
  const auto& cov = scm.covariates();
  const int exposure = scm.exposure();
  int a1 = scm.support_index(exposure, Value::number(1));

  struct Mass {
    double exposed = 0, unexposed = 0;
  };
  std::map<std::vector<int>, Mass> mass;
  for (std::size_t u = 0; u < e.units().size(); ++u) {
    double p = e.units()[u].probability;
    if (p == 0) continue;
    std::vector<int> stratum;
    stratum.reserve(cov.size());
    for (int c : cov) stratum.push_back(e.natural_world(u)[c]);
    Mass& slot = mass[stratum];
    if (e.natural_world(u)[exposure] == a1) {
      slot.exposed += p;
    } else {
      slot.unexposed += p;
    }
  }
  double exposed_total = 0;
  for (const auto& [stratum, slot] : mass) {
    if (slot.exposed == 0) {
      fail(ErrorCode::PositivityViolation,
           "stratum " + stratum_label(scm, stratum) + " has no exposed units");
    }
    if (slot.unexposed == 0) {
      fail(ErrorCode::PositivityViolation,
           "stratum " + stratum_label(scm, stratum) + " has no unexposed units");
    }
    exposed_total += slot.exposed;
  }
  if (mass.empty()) {
    fail(ErrorCode::PositivityViolation, "model has no positive-probability units");
  }
  StratumSweep sweep;
  for (const auto& [stratum, slot] : mass) {
    sweep.strata.push_back(stratum);
    sweep.exposed_mass.push_back(slot.exposed / exposed_total);
  }
  return sweep;
}

Condition stratum_condition(const Scm& scm, std::span<const int> stratum, int a) {
  Condition cond;
  const auto& cov = scm.covariates();
  for (std::size_t i = 0; i < cov.size(); ++i) {
    cond.equalities.emplace_back(scm.var(cov[i]).name, scm.var(cov[i]).support[stratum[i]]);
  }
  cond.equalities.emplace_back(scm.var(scm.exposure()).name, Value::number(a));
  return cond;
}

std::vector<Value> stratum_values(const Scm& scm, std::span<const int> stratum) {
  std::vector<Value> values;
  const auto& cov = scm.covariates();
  for (std::size_t i = 0; i < cov.size(); ++i) {
    values.push_back(scm.var(cov[i]).support[stratum[i]]);
  }
  return values;
}

}  // namespace

DisparityReport disparity_decomposition(const Enumeration& e) {
  const Scm& scm = e.scm();
  StratumSweep sweep = positive_strata(e);
  MediatorDistributionSpec draw0 =
      MediatorDistributionSpec::observed_conditional(0, Conditioning::Covariates);
  WorldSpec natural = WorldSpec::natural();
  WorldSpec intervened = draw_world(e, 1, draw0);

  DisparityReport report;
  report.summary.mass_exposed = 1.0;
  for (std::size_t i = 0; i < sweep.strata.size(); ++i) {
    const auto& stratum = sweep.strata[i];
    Condition cond1 = stratum_condition(scm, stratum, 1);
    Condition cond0 = stratum_condition(scm, stratum, 0);
    DisparityRow row;
    row.stratum = stratum_values(scm, stratum);
    row.mass_exposed = sweep.exposed_mass[i];
    double exposed_mean = e.expected_outcome(natural, &cond1);
    double unexposed_mean = e.expected_outcome(natural, &cond0);
    double intervened_mean = e.expected_outcome(intervened, &cond1);
    row.disparity = exposed_mean - unexposed_mean;
    row.removed = exposed_mean - intervened_mean;
    row.remaining = row.disparity - row.removed;
    report.summary.disparity += row.mass_exposed * row.disparity;
    report.summary.removed += row.mass_exposed * row.removed;
    report.summary.remaining += row.mass_exposed * row.remaining;
    report.strata.push_back(std::move(row));
  }
  return report;
}

EffectReport halfway_intervention_effect(const Enumeration& e) {
  const Scm& scm = e.scm();
  MediatorDistributionSpec halfway = MediatorDistributionSpec::mixture(
      {0.5, 0.5},
      {MediatorDistributionSpec::observed_conditional(1, Conditioning::Covariates),
       MediatorDistributionSpec::observed_conditional(0, Conditioning::Covariates)});
  StratumSweep sweep = positive_strata(e);
  WorldSpec natural = WorldSpec::natural();
  WorldSpec intervened = draw_world(e, 1, halfway);

  EffectReport report;
  report.label = "HALFWAY";
  for (std::size_t i = 0; i < sweep.strata.size(); ++i) {
    Condition cond1 = stratum_condition(scm, sweep.strata[i], 1);
    double w = sweep.exposed_mass[i];
    report.left_mean += w * e.expected_outcome(natural, &cond1);
    report.right_mean += w * e.expected_outcome(intervened, &cond1);
  }
  report.value = report.left_mean - report.right_mean;
  Condition exposed;
  exposed.equalities.emplace_back(scm.var(scm.exposure()).name, Value::number(1));
  report.condition = exposed.to_string();
  return report;
}

EffectReport total_effect(const Scm& scm) { return total_effect(Enumeration(scm)); }
NaturalEffects natural_effects(const Scm& scm, Decomposition d) {
  return natural_effects(Enumeration(scm), d);
}
std::vector<IndividualNaturalRow> individual_natural_effects(const Scm& scm) {
  return individual_natural_effects(Enumeration(scm));
}
InterventionalEffects interventional_effects(const Scm& scm) {
  return interventional_effects(Enumeration(scm));
}
EffectReport controlled_direct_effect(const Scm& scm, const Value& m) {
  return controlled_direct_effect(Enumeration(scm), m);
}
EffectReport generalized_ide(const Scm& scm, const MediatorDistributionSpec& spec) {
  return generalized_ide(Enumeration(scm), spec);
}
EffectReport general_contrast(const Scm& scm, const EffectQuery& query) {
  return general_contrast(Enumeration(scm), query);
}
DisparityReport disparity_decomposition(const Scm& scm) {
  return disparity_decomposition(Enumeration(scm));
}
EffectReport halfway_intervention_effect(const Scm& scm) {
  return halfway_intervention_effect(Enumeration(scm));
}

}  // namespace mediatrix
