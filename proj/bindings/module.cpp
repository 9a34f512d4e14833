#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mediatrix/datagen.hpp"
#include "mediatrix/effects.hpp"
#include "mediatrix/errors.hpp"
#include "mediatrix/estimate.hpp"
#include "mediatrix/identify.hpp"
#include "mediatrix/parse.hpp"

namespace py = pybind11;
using namespace mediatrix;

namespace {

py::object value_to_py(const Value& v) {
  if (v.is_number()) return py::float_(v.number());
  return py::str(v.symbol());
}

py::dict effect_to_dict(const EffectReport& effect) {
  py::dict out;
  out["label"] = effect.label;
  out["value"] = effect.value;
  out["left_mean"] = effect.left_mean;
  out["right_mean"] = effect.right_mean;
  if (!effect.condition.empty()) out["condition"] = effect.condition;
  return out;
}

py::dict estimate_to_dict(const EstimatorResult& result) {
  py::dict out;
  out["estimate"] = result.estimate;
  if (result.standard_error) {
    out["se"] = *result.standard_error;
  } else {
    out["se"] = py::none();
  }
  out["n"] = result.n;
  out["method"] = result.method;
  out["warnings"] = result.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_mediatrix, m) {
  m.doc() = "exact mediation effects on finite structural causal models";

  py::register_exception<Error>(m, "MediatrixError");

  py::class_<Scm>(m, "Model")
      .def_property_readonly("name", &Scm::name)
      .def_property_readonly("num_variables", &Scm::num_variables)
      .def("to_json", &scm_to_json_text)
      .def("__repr__", [](const Scm& scm) { return "<Model " + scm.name() + ">"; });

  m.def("load_model", [](const std::string& path) { return read_scm(path); },
        py::arg("path"));
  m.def("model_from_json",
        [](const std::string& text) { return load_scm_or_fail(scm_from_json_text(text)); },
        py::arg("text"));

  m.def(
      "truth",
      [](const Scm& scm) {
        Enumeration enumeration(scm);
        py::dict out;
        auto add = [&](const EffectReport& e) { out[e.label.c_str()] = e.value; };
        add(total_effect(enumeration));
        NaturalEffects di = natural_effects(enumeration, Decomposition::DirectIndirect);
        NaturalEffects id = natural_effects(enumeration, Decomposition::IndirectDirect);
        add(di.nde);
        add(di.nie);
        add(id.nie);
        add(id.nde);
        InterventionalEffects iv = interventional_effects(enumeration);
        add(iv.ide0);
        add(iv.iie1);
        add(iv.iie0);
        add(iv.ide1);
        add(iv.oe);
        return out;
      },
      py::arg("model"), "Exact TE, natural, and interventional effects by enumeration.");

  m.def(
      "controlled_direct_effect",
      [](const Scm& scm, py::object m_value) {
        Value v = py::isinstance<py::str>(m_value)
                      ? Value::symbol(m_value.cast<std::string>())
                      : Value::number(m_value.cast<double>());
        return effect_to_dict(controlled_direct_effect(scm, v));
      },
      py::arg("model"), py::arg("m"));

  m.def(
      "contrast",
      [](const Scm& scm, const std::string& text) {
        return effect_to_dict(general_contrast(scm, parse_contrast(text)));
      },
      py::arg("model"), py::arg("expr"),
      "Custom contrast \"left || right [| cond]\" in world text.");

  m.def(
      "expected_outcome",
      [](const Scm& scm, const std::string& world, const std::string& condition) {
        WorldSpec spec = parse_world(world);
        if (condition.empty()) return expected_outcome(scm, spec);
        Condition cond = parse_condition(condition);
        return expected_outcome(scm, spec, &cond);
      },
      py::arg("model"), py::arg("world"), py::arg("condition") = "");

  m.def(
      "identify",
      [](const Scm& scm) {
        LadderReport ladder = classify(scm);
        py::list out;
        for (const auto& rung : ladder.rungs) {
          py::dict entry;
          entry["name"] = rung.name;
          entry["identified"] = rung.identified();
          if (!rung.identified()) {
            entry["assumption"] = rung.failed_assumption;
            entry["witness"] = rung.witness;
          }
          out.append(entry);
        }
        return out;
      },
      py::arg("model"));

  m.def(
      "sample_csv",
      [](const Scm& scm, std::size_t n, std::uint64_t seed, bool include_latents) {
        SamplerConfig config;
        config.n = n;
        config.seed = seed;
        config.include_latents = include_latents;
        return dataset_to_csv(sample_dataset(scm, config));
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 0,
      py::arg("include_latents") = false);

  m.def(
      "sample_rows",
      [](const Scm& scm, std::size_t n, std::uint64_t seed) {
        SamplerConfig config;
        config.n = n;
        config.seed = seed;
        Dataset dataset = sample_dataset(scm, config);
        py::list rows;
        for (const auto& row : dataset.rows) {
          py::dict entry;
          for (std::size_t i = 0; i < row.size(); ++i) {
            entry[dataset.columns[i].c_str()] = value_to_py(row[i]);
          }
          rows.append(entry);
        }
        return rows;
      },
      py::arg("model"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "estimate_csv",
      [](const Scm& scm, const std::string& csv, std::uint64_t seed, bool force) {
        Dataset dataset = dataset_from_csv(csv);
        validate_dataset(scm, dataset);
        EmpiricalLaw law = EmpiricalLaw::from_dataset(scm, dataset);
        BootstrapConfig bootstrap;
        bootstrap.seed = seed;
        py::dict out;
        out["TE"] = estimate_to_dict(plug_in_te(law, bootstrap));
        if (scm.intermediate_confounders().empty() || force) {
          NaturalEstimates nat = mediation_formula_natural(law, force, bootstrap);
          out["NDE(.0)"] = estimate_to_dict(nat.nde0);
          out["NIE(1.)"] = estimate_to_dict(nat.nie1);
          out["NIE(0.)"] = estimate_to_dict(nat.nie0);
          out["NDE(.1)"] = estimate_to_dict(nat.nde1);
        }
        InterventionalEstimates iv = mediation_formula_interventional(law, bootstrap);
        out["IDE(.0)"] = estimate_to_dict(iv.ide0);
        out["IIE(1.)"] = estimate_to_dict(iv.iie1);
        out["IIE(0.)"] = estimate_to_dict(iv.iie0);
        out["IDE(.1)"] = estimate_to_dict(iv.ide1);
        out["OE"] = estimate_to_dict(iv.oe);
        return out;
      },
      py::arg("model"), py::arg("csv"), py::arg("seed") = 0, py::arg("force") = false);

  m.def(
      "monte_carlo",
      [](const Scm& scm, const std::string& expr, std::size_t n, std::uint64_t seed) {
        return estimate_to_dict(monte_carlo_estimate(scm, parse_contrast(expr), n, seed));
      },
      py::arg("model"), py::arg("expr"), py::arg("n"), py::arg("seed") = 0);
}
