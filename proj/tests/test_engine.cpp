#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "mediatrix/engine.hpp"
#include "mediatrix/errors.hpp"
#include "oracle.hpp"
#include "random_scm.hpp"

using namespace mediatrix;
using namespace mediatrix::fixtures;
using namespace mediatrix::testing;

namespace {

// Noise symbols of one unit, keyed by variable name.
NoiseMap noise_map(const Scm& scm, const Unit& unit) {
  NoiseMap out;
  for (int v = 0; v < scm.num_variables(); ++v) {
    out[scm.var(v).name] = scm.var(v).noise.symbols[unit.noise[v]];
  }
  return out;
}

std::string exposure_name(const Scm& scm) { return scm.var(scm.exposure()).name; }
std::string mediator_name(const Scm& scm) { return scm.var(scm.mediator()).name; }

}  // namespace

TEST_CASE("unit space covers the noise product with total mass one") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    Scm scm = random_scm(seed);
    Enumeration e(scm);
    std::size_t expected = 1;
    for (int v = 0; v < scm.num_variables(); ++v) {
      expected *= scm.var(v).noise.symbols.size();
    }
    CHECK(e.units().size() == expected);
    double total = 0;
    for (const Unit& u : e.units()) total += u.probability;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t u = 0; u < e.units().size(); ++u) {
      CHECK(e.unit_index(e.units()[u].noise) == u);
    }
  }
}

TEST_CASE("natural worlds match recursive evaluation") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    RawScm raw = random_raw_scm(seed);
    Scm scm = load_scm_or_fail(raw);
    Enumeration e(scm);
    for (std::size_t u = 0; u < e.units().size(); ++u) {
      NoiseMap noise = noise_map(scm, e.units()[u]);
      for (int v = 0; v < scm.num_variables(); ++v) {
        Value expected = oracle_value(raw, noise, {}, scm.var(v).name);
        CHECK(scm.var(v).support[e.natural_world(u)[v]] == expected);
      }
    }
  }
}

TEST_CASE("set and potential directives match recursive evaluation") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    RawScm raw = random_raw_scm(seed);
    Scm scm = load_scm_or_fail(raw);
    Enumeration e(scm);
    const std::string a = exposure_name(scm);
    const std::string m = mediator_name(scm);
    const int outcome = scm.outcome();
    const int mediator = scm.mediator();

    for (int arm = 0; arm <= 1; ++arm) {
      WorldSpec exposed = WorldSpec().set(a, Value::number(arm));
      WorldSpec cross = WorldSpec().set(a, Value::number(arm)).potential_under(m, 1 - arm);
      for (std::size_t u = 0; u < e.units().size(); ++u) {
        NoiseMap noise = noise_map(scm, e.units()[u]);
        ForcedMap forced = {{a, Value::number(arm)}};

        std::vector<int> world = e.evaluate(u, exposed);
        CHECK(scm.var(outcome).support[world[outcome]] ==
              oracle_value(raw, noise, forced, scm.var(outcome).name));
        CHECK(scm.var(mediator).support[world[mediator]] ==
              oracle_value(raw, noise, forced, m));
        CHECK(scm.var(mediator).support[e.mediator_potential(u, arm)] ==
              oracle_value(raw, noise, forced, m));

        ForcedMap other = {{a, Value::number(1 - arm)}};
        ForcedMap cross_forced = {{a, Value::number(arm)},
                                  {m, oracle_value(raw, noise, other, m)}};
        std::vector<int> cw = e.evaluate(u, cross);
        CHECK(scm.var(outcome).support[cw[outcome]] ==
              oracle_value(raw, noise, cross_forced, scm.var(outcome).name));
      }
    }
  }
}

TEST_CASE("composition: setting the mediator to its own potential changes nothing") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    Scm scm = random_scm(seed);
    Enumeration e(scm);
    const std::string a = exposure_name(scm);
    const std::string m = mediator_name(scm);
    for (int arm = 0; arm <= 1; ++arm) {
      WorldSpec plain = WorldSpec().set(a, Value::number(arm));
      WorldSpec composed =
          WorldSpec().set(a, Value::number(arm)).potential_under(m, arm);
      for (std::size_t u = 0; u < e.units().size(); ++u) {
        CHECK(e.evaluate(u, plain) == e.evaluate(u, composed));
      }
    }
  }
}

TEST_CASE("consistency: units that naturally take an arm keep their natural world") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    Scm scm = random_scm(seed);
    Enumeration e(scm);
    const int exposure = scm.exposure();
    for (int arm = 0; arm <= 1; ++arm) {
      WorldSpec world = WorldSpec().set(exposure_name(scm), Value::number(arm));
      int arm_idx = scm.support_index(exposure, Value::number(arm));
      for (std::size_t u = 0; u < e.units().size(); ++u) {
        if (e.natural_world(u)[exposure] != arm_idx) continue;
        CHECK(e.evaluate(u, world) == e.natural_world(u));
      }
    }
  }
}

TEST_CASE("expected outcomes aggregate unit outcomes") {
  Scm scm = fixture("collegeprep8");
  Enumeration e(scm);
  const int outcome = scm.outcome();

  double manual = 0;
  for (std::size_t u = 0; u < e.units().size(); ++u) {
    manual += e.units()[u].probability *
              scm.var(outcome).support[e.natural_world(u)[outcome]].number();
  }
  CHECK(e.expected_outcome(WorldSpec::natural()) == doctest::Approx(manual));

  Condition exposed;
  exposed.equalities.emplace_back("A", Value::number(1));
  CHECK(e.expected_outcome(WorldSpec::natural(), &exposed) == doctest::Approx(7.75));
  Condition unexposed;
  unexposed.equalities.emplace_back("A", Value::number(0));
  CHECK(e.expected_outcome(WorldSpec::natural(), &unexposed) == doctest::Approx(5.5));

  WorldSpec w1 = WorldSpec().set("A", Value::number(1));
  WorldSpec w0 = WorldSpec().set("A", Value::number(0));
  CHECK(e.expected_outcome(w1) == doctest::Approx(7.375));
  CHECK(e.expected_outcome(w0) == doctest::Approx(5.75));
}

TEST_CASE("conditions are restricted and positivity is enforced") {
  Scm scm = fixture("l_model");
  Enumeration e(scm);

  Condition on_mediator;
  on_mediator.equalities.emplace_back("M", Value::number(1));
  CHECK_THROWS_WITH_AS(e.expected_outcome(WorldSpec::natural(), &on_mediator),
                       doctest::Contains("covariates and the exposure"), Error);

  Condition bad_value;
  bad_value.equalities.emplace_back("A", Value::number(7));
  CHECK_THROWS_WITH_AS(e.expected_outcome(WorldSpec::natural(), &bad_value),
                       doctest::Contains("not in the support"), Error);

  Condition unknown;
  unknown.equalities.emplace_back("Q", Value::number(0));
  CHECK_THROWS_AS(e.expected_outcome(WorldSpec::natural(), &unknown), Error);

  // No noise assignment yields C=0, A=1 with zero mass here; build one that
  // cannot happen instead: impossible strata must raise PositivityViolation.
  RawScm raw = l_model_raw();
  for (auto& vs : raw.variables) {
    if (vs.name == "C") vs.noise.probs = {1.0, 0.0};
  }
  Scm degenerate = load_scm_or_fail(raw);
  Enumeration d(degenerate);
  Condition impossible;
  impossible.equalities.emplace_back("C", Value::number(1));
  CHECK_THROWS_WITH_AS(d.expected_outcome(WorldSpec::natural(), &impossible),
                       doctest::Contains("PositivityViolation"), Error);
}

TEST_CASE("world binding rejects bad directives") {
  Scm scm = fixture("l_model");
  Enumeration e(scm);
  CHECK_THROWS_WITH_AS(
      e.expected_outcome(WorldSpec().set("A", Value::number(3))),
      doctest::Contains("not in the support"), Error);
  CHECK_THROWS_WITH_AS(
      e.expected_outcome(WorldSpec().set("Q", Value::number(0))),
      doctest::Contains("unknown variable"), Error);
  CHECK_THROWS_WITH_AS(
      e.expected_outcome(WorldSpec().potential_under("L", 0)),
      doctest::Contains("only to the mediator"), Error);
  CHECK_THROWS_WITH_AS(
      e.expected_outcome(
          WorldSpec().draw("Y", MediatorDistributionSpec::point_mass(Value::number(1)))),
      doctest::Contains("only to the mediator"), Error);
}

TEST_CASE("draws need a resolver for single-world evaluation only") {
  Scm scm = fixture("l_model");
  Enumeration e(scm);
  WorldSpec world = WorldSpec().set("A", Value::number(1));
  world.draw("M", MediatorDistributionSpec::potential_conditional(0, Conditioning::Covariates));

  CHECK_THROWS_WITH_AS(e.evaluate(0, world), doctest::Contains("UnresolvedDraw"), Error);

  // Exact expectation integrates the draw analytically.
  CHECK(std::isfinite(e.expected_outcome(world)));

  Rng rng(7);
  SamplingResolver resolver(rng);
  std::vector<int> values = e.evaluate(0, world, &resolver);
  CHECK(values.size() == static_cast<std::size_t>(scm.num_variables()));
}

TEST_CASE("point-mass draws behave like set directives") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    Scm scm = random_scm(seed);
    Enumeration e(scm);
    const std::string a = exposure_name(scm);
    const std::string m = mediator_name(scm);
    for (const Value& value : scm.var(scm.mediator()).support) {
      WorldSpec set_world = WorldSpec().set(a, Value::number(1)).set(m, value);
      WorldSpec draw_world = WorldSpec().set(a, Value::number(1));
      draw_world.draw(m, MediatorDistributionSpec::point_mass(value));
      CHECK(e.expected_outcome(set_world) ==
            doctest::Approx(e.expected_outcome(draw_world)).epsilon(1e-12));
    }
  }
}

TEST_CASE("draw expectations decompose over the drawn distribution") {
  // E[Y(a, M~d)] must equal sum_m d(m|c) E[Y(a,m)] within each stratum; with
  // marginal conditioning the weights are the marginal law.
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    RawScm raw = random_raw_scm(seed);
    Scm scm = load_scm_or_fail(raw);
    Enumeration e(scm);
    const std::string a = exposure_name(scm);
    const std::string m = mediator_name(scm);
    const std::string y = scm.var(scm.outcome()).name;
    const auto& m_support = scm.var(scm.mediator()).support;

    for (int source_arm = 0; source_arm <= 1; ++source_arm) {
      WorldSpec world = WorldSpec().set(a, Value::number(1));
      world.draw(m, MediatorDistributionSpec::potential_conditional(source_arm,
                                                                    Conditioning::None));
      double got = e.expected_outcome(world);

      // Marginal d_{M(source_arm)} and stratum-free outcome means by hand.
      std::map<Value, double> dist;
      double expected = 0;
      oracle_for_each_unit(raw, [&](const NoiseMap& noise, double prob) {
        dist[oracle_value(raw, noise, {{a, Value::number(source_arm)}}, m)] += prob;
      });
      for (const Value& value : m_support) {
        double mean = 0;
        oracle_for_each_unit(raw, [&](const NoiseMap& noise, double prob) {
          mean += prob * oracle_value(raw, noise,
                                      {{a, Value::number(1)}, {m, value}}, y)
                             .as_number();
        });
        expected += dist[value] * mean;
      }
      CHECK(got == doctest::Approx(expected).epsilon(1e-9));
    }
  }
}

TEST_CASE("mixture draws are linear in their weights") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CAPTURE(seed);
    Scm scm = random_scm(seed);
    Enumeration e(scm);
    const std::string a = exposure_name(scm);
    const std::string m = mediator_name(scm);

    auto pot0 = MediatorDistributionSpec::potential_conditional(0, Conditioning::Covariates);
    auto obs1 = MediatorDistributionSpec::observed_conditional(1, Conditioning::Covariates);
    double w = 0.25 + 0.5 * (seed % 3) / 2.0;

    WorldSpec mixed = WorldSpec().set(a, Value::number(1));
    mixed.draw(m, MediatorDistributionSpec::mixture({w, 1 - w}, {pot0, obs1}));
    WorldSpec left = WorldSpec().set(a, Value::number(1));
    left.draw(m, pot0);
    WorldSpec right = WorldSpec().set(a, Value::number(1));
    right.draw(m, obs1);

    double lhs;
    try {
      lhs = e.expected_outcome(mixed);
    } catch (const Error& err) {
      // obs(1|C) needs exposed mass in every stratum; fine to skip those.
      CHECK(err.code() == ErrorCode::PositivityViolation);
      continue;
    }
    double rhs = w * e.expected_outcome(left) + (1 - w) * e.expected_outcome(right);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("mediator distributions are normalized and match their sources") {
  Scm scm = fixture("collegeprep8_unconfounded");
  Enumeration e(scm);
  const auto& m_support = scm.var(scm.mediator()).support;

  for (std::size_t u = 0; u < e.units().size(); ++u) {
    std::vector<int> stratum = e.covariate_stratum(u);
    for (auto spec :
         {MediatorDistributionSpec::potential_conditional(0, Conditioning::Covariates),
          MediatorDistributionSpec::observed_conditional(1, Conditioning::Covariates)}) {
      std::vector<double> dist = e.mediator_distribution(spec, stratum);
      REQUIRE(dist.size() == m_support.size());
      double total = 0;
      for (double p : dist) {
        CHECK(p >= 0);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    if (u > 40) break;  // strata repeat; a few are enough
  }

  std::vector<double> point = e.mediator_distribution(
      MediatorDistributionSpec::point_mass(m_support[1]), e.covariate_stratum(0));
  CHECK(point[1] == doctest::Approx(1.0));
  CHECK(point[0] == doctest::Approx(0.0));
}

TEST_CASE("explicit tables look up the stratum") {
  Scm scm = fixture("l_model");
  Enumeration e(scm);
  ExplicitRow row0{{Value::number(0)}, {0.25, 0.75}};
  ExplicitRow row1{{Value::number(1)}, {0.5, 0.5}};
  auto spec = MediatorDistributionSpec::explicit_table({row0, row1});

  std::vector<double> at0 = e.mediator_distribution(spec, std::vector<int>{0});
  CHECK(at0[1] == doctest::Approx(0.75));

  auto missing = MediatorDistributionSpec::explicit_table({row0});
  CHECK_THROWS_WITH_AS(e.mediator_distribution(missing, std::vector<int>{1}),
                       doctest::Contains("no row for stratum"), Error);
}

TEST_CASE("world and condition text forms") {
  WorldSpec w;
  CHECK(w.to_string() == "natural");
  w.set("A", Value::number(1));
  w.set("M", Value::symbol("low"));
  CHECK(w.to_string() == "A=1, M=low");

  WorldSpec pot = WorldSpec().set("A", Value::number(1)).potential_under("M", 0);
  CHECK(pot.to_string() == "A=1, M~pot(0)");

  WorldSpec draw = WorldSpec().set("A", Value::number(0));
  draw.draw("M", MediatorDistributionSpec::potential_conditional(1, Conditioning::Covariates));
  CHECK(draw.to_string() == "A=0, M~pot(1|C)");

  WorldSpec marginal;
  marginal.draw("M", MediatorDistributionSpec::observed_conditional(0, Conditioning::None));
  CHECK(marginal.to_string() == "M~obs(0|.)");

  CHECK(MediatorDistributionSpec::point_mass(Value::symbol("low")).label() == "point(low)");
  CHECK(MediatorDistributionSpec::mixture(
            {0.5, 0.5},
            {MediatorDistributionSpec::potential_conditional(0, Conditioning::Covariates),
             MediatorDistributionSpec::potential_conditional(1, Conditioning::Covariates)})
            .label() == "mix(0.5*pot(0|C), 0.5*pot(1|C))");

  Condition cond;
  cond.equalities.emplace_back("C", Value::number(0));
  cond.equalities.emplace_back("A", Value::number(1));
  CHECK(cond.to_string() == "C=0, A=1");
}

TEST_CASE("stratum masses add to one") {
  Scm scm = fixture("bullying");
  Enumeration e(scm);
  std::map<std::vector<int>, double> strata;
  for (std::size_t u = 0; u < e.units().size(); ++u) {
    strata[e.covariate_stratum(u)] = 0;
  }
  double total = 0;
  for (auto& [stratum, mass] : strata) {
    mass = e.stratum_mass(stratum);
    total += mass;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free-function wrappers agree with the enumeration") {
  Scm scm = fixture("nullmodel");
  Enumeration e(scm);
  WorldSpec w1 = WorldSpec().set("A", Value::number(1));
  CHECK(expected_outcome(scm, w1) == doctest::Approx(e.expected_outcome(w1)));
  CHECK(evaluate(scm, e.units()[0], w1) == e.evaluate(0, w1));

  auto pairs = stratum_mediator_distribution(
      scm, MediatorDistributionSpec::potential_conditional(0, Conditioning::Covariates),
      {Value::number(0)});
  double total = 0;
  for (const auto& [value, p] : pairs) total += p;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("enumeration respects the cell cap") {
  Scm scm = fixture("collegeprep8_unconfounded");
  CHECK_THROWS_WITH_AS(Enumeration(scm, 10), doctest::Contains("SupportTooLarge"), Error);
  CHECK_THROWS_WITH_AS(enumerate_units(scm, 10), doctest::Contains("SupportTooLarge"),
                       Error);
}
