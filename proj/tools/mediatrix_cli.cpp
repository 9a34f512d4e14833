#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mediatrix/datagen.hpp"
#include "mediatrix/effects.hpp"
#include "mediatrix/errors.hpp"
#include "mediatrix/estimate.hpp"
#include "mediatrix/identify.hpp"
#include "mediatrix/parse.hpp"
#include "mediatrix/report.hpp"

namespace {

using namespace mediatrix;

struct Options {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  std::size_t n = 10'000;
  std::uint64_t seed = 0;
  bool json = false;
  bool natural = false;
  bool interventional = false;
  bool traditional = false;
  bool force = false;
  std::string cde;
  std::string gide;
  std::vector<std::string> contrasts;
};

Value value_from_text(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end == begin + text.size() && !text.empty()) return Value::number(x);
  return Value::symbol(text);
}

std::string rung_annotation(const RungReport& rung) {
  if (rung.identified()) return "";
  std::string out = "NOT IDENTIFIED (" + rung.failed_assumption;
  if (!rung.witness.empty()) out += "; witness: " + rung.witness;
  return out + ")";
}

ReportRow truth_row(const EffectReport& effect, const RungReport* rung) {
  ReportRow row;
  row.label = effect.label;
  row.value = effect.value;
  row.left_mean = effect.left_mean;
  row.right_mean = effect.right_mean;
  row.condition = effect.condition;
  if (rung) row.annotation = rung_annotation(*rung);
  return row;
}

void emit(const Report& report, bool json) {
  std::cout << (json ? report_to_json(report) : report_to_text(report));
}

int cmd_truth(const Options& opt) {
  Scm scm = read_scm(opt.model_path);
  Enumeration enumeration(scm);
  LadderReport ladder = classify(scm);

  Report report;
  report.command = "truth";
  report.model = scm.name();

  bool all = !opt.natural && !opt.interventional;

  report.rows.push_back(truth_row(total_effect(enumeration), &ladder.te()));
  {
    // The unadjusted observed contrast, for comparison against TE.
    Condition exposed, unexposed;
    exposed.equalities.emplace_back(scm.var(scm.exposure()).name, Value::number(1));
    unexposed.equalities.emplace_back(scm.var(scm.exposure()).name, Value::number(0));
    ReportRow naive;
    naive.label = "naive";
    naive.left_mean = enumeration.expected_outcome(WorldSpec::natural(), &exposed);
    naive.right_mean = enumeration.expected_outcome(WorldSpec::natural(), &unexposed);
    naive.value = *naive.left_mean - *naive.right_mean;
    naive.annotation = "observed difference, no adjustment";
    report.rows.push_back(std::move(naive));
  }

  if (all || opt.natural) {
    NaturalEffects di = natural_effects(enumeration, Decomposition::DirectIndirect);
    NaturalEffects id = natural_effects(enumeration, Decomposition::IndirectDirect);
    report.rows.push_back(truth_row(di.nde, &ladder.nde_nie()));
    report.rows.push_back(truth_row(di.nie, &ladder.nde_nie()));
    report.rows.push_back(truth_row(id.nie, &ladder.nde_nie()));
    report.rows.push_back(truth_row(id.nde, &ladder.nde_nie()));
  }
  if (all || opt.interventional) {
    InterventionalEffects iv = interventional_effects(enumeration);
    report.rows.push_back(truth_row(iv.ide0, &ladder.ide_iie()));
    report.rows.push_back(truth_row(iv.iie1, &ladder.ide_iie()));
    report.rows.push_back(truth_row(iv.iie0, &ladder.ide_iie()));
    report.rows.push_back(truth_row(iv.ide1, &ladder.ide_iie()));
    report.rows.push_back(truth_row(iv.oe, &ladder.ide_iie()));
  }
  if (!opt.cde.empty()) {
    report.rows.push_back(truth_row(
        controlled_direct_effect(enumeration, value_from_text(opt.cde)),
        &ladder.cde_gide()));
  }
  if (!opt.gide.empty()) {
    report.rows.push_back(truth_row(
        generalized_ide(enumeration, parse_mediator_spec(opt.gide)),
        &ladder.cde_gide()));
  }
  for (const auto& text : opt.contrasts) {
    report.rows.push_back(truth_row(
        general_contrast(enumeration, parse_contrast(text)), nullptr));
  }

  for (const auto& warning : ladder.warnings) report.notes.push_back(warning);
  emit(report, opt.json);
  return 0;
}

int cmd_identify(const Options& opt) {
  Scm scm = read_scm(opt.model_path);
  LadderReport ladder = classify(scm);

  Report report;
  report.command = "identify";
  report.model = scm.name();
  for (const auto& rung : ladder.rungs) report.ladder.push_back(rung_line(rung));
  for (const auto& warning : ladder.warnings) report.notes.push_back(warning);
  emit(report, opt.json);
  return 0;
}

int cmd_simulate(const Options& opt) {
  Scm scm = read_scm(opt.model_path);
  SamplerConfig config;
  config.n = opt.n;
  config.seed = opt.seed;
  Dataset dataset = sample_dataset(scm, config);

  if (opt.out_path.empty()) {
    if (opt.json) {
      fail(ErrorCode::UsageError, "--json on simulate needs --out (CSV goes to stdout)");
    }
    std::cout << dataset_to_csv(dataset);
    return 0;
  }
  write_dataset(dataset, opt.out_path);
  if (opt.json) {
    Report report;
    report.command = "simulate";
    report.model = scm.name();
    report.notes.push_back("wrote " + std::to_string(dataset.n()) + " rows to " +
                           opt.out_path);
    report.notes.push_back("seed " + std::to_string(opt.seed));
    emit(report, true);
  } else {
    std::cout << "wrote " << dataset.n() << " rows to " << opt.out_path << "\n";
  }
  return 0;
}

ReportRow estimate_row(const std::string& label, const EstimatorResult& result,
                       const RungReport* rung) {
  ReportRow row;
  row.label = label;
  row.estimate = result.estimate;
  row.se = result.standard_error;
  row.n = result.n;
  row.method = result.method;
  row.warnings = result.warnings;
  if (rung) row.annotation = rung_annotation(*rung);
  return row;
}

int cmd_estimate(const Options& opt) {
  Scm scm = read_scm(opt.model_path);
  Dataset dataset = read_dataset(opt.data_path);
  validate_dataset(scm, dataset);
  EmpiricalLaw law = EmpiricalLaw::from_dataset(scm, dataset);
  BootstrapConfig bootstrap;
  bootstrap.seed = opt.seed;
  LadderReport ladder = classify(scm);

  Report report;
  report.command = "estimate";
  report.model = scm.name();

  bool all = !opt.natural && !opt.interventional && !opt.traditional &&
             opt.cde.empty() && opt.gide.empty();
  bool has_l = !scm.intermediate_confounders().empty();

  if (all || opt.natural || opt.interventional) {
    report.rows.push_back(estimate_row("TE", plug_in_te(law, bootstrap), &ladder.te()));
  }
  if (opt.natural || (all && (!has_l || opt.force))) {
    NaturalEstimates nat = mediation_formula_natural(law, opt.force, bootstrap);
    report.rows.push_back(estimate_row("NDE(.0)", nat.nde0, &ladder.nde_nie()));
    report.rows.push_back(estimate_row("NIE(1.)", nat.nie1, &ladder.nde_nie()));
    report.rows.push_back(estimate_row("NIE(0.)", nat.nie0, &ladder.nde_nie()));
    report.rows.push_back(estimate_row("NDE(.1)", nat.nde1, &ladder.nde_nie()));
  } else if (all && has_l) {
    report.notes.push_back(
        "natural-effect formulas skipped: the model declares intermediate confounders "
        "(rerun with --natural --force to compute them anyway)");
  }
  if (all || opt.interventional) {
    InterventionalEstimates iv = mediation_formula_interventional(law, bootstrap);
    report.rows.push_back(estimate_row("IDE(.0)", iv.ide0, &ladder.ide_iie()));
    report.rows.push_back(estimate_row("IIE(1.)", iv.iie1, &ladder.ide_iie()));
    report.rows.push_back(estimate_row("IIE(0.)", iv.iie0, &ladder.ide_iie()));
    report.rows.push_back(estimate_row("IDE(.1)", iv.ide1, &ladder.ide_iie()));
    report.rows.push_back(estimate_row("OE", iv.oe, &ladder.ide_iie()));
  }
  if (!opt.cde.empty()) {
    auto result = cde_estimator(law, value_from_text(opt.cde), bootstrap);
    report.rows.push_back(
        estimate_row("CDE(" + opt.cde + ")", result, &ladder.cde_gide()));
  }
  if (opt.traditional) {
    TraditionalResult t = traditional_product_of_coefficients(law, bootstrap);
    ReportRow a, b, cp, prod, diff;
    a.label = "a";
    a.estimate = t.a_coef;
    if (t.m_model_ses.size() > 1) a.se = t.m_model_ses[1];
    b.label = "b";
    b.estimate = t.b_coef;
    if (t.y_model_ses.size() > 2) b.se = t.y_model_ses[2];
    cp.label = "c'";
    cp.estimate = t.c_prime;
    if (t.y_model_ses.size() > 1) cp.se = t.y_model_ses[1];
    prod.label = "product a*b";
    prod.estimate = t.product;
    prod.se = t.product_se;
    prod.warnings = t.warnings;
    diff.label = "difference";
    diff.estimate = t.difference_method;
    for (auto* row : {&a, &b, &cp, &prod, &diff}) {
      row->n = t.n;
      row->method = "traditional_ols";
      report.rows.push_back(*row);
    }
  }

  for (const auto& warning : ladder.warnings) report.notes.push_back(warning);
  emit(report, opt.json);
  return 0;
}

int cmd_compare(const Options& opt) {
  Scm scm = read_scm(opt.model_path);
  Enumeration enumeration(scm);
  LadderReport ladder = classify(scm);

  SamplerConfig config;
  config.n = opt.n;
  config.seed = opt.seed;
  Dataset dataset = sample_dataset(scm, config);
  EmpiricalLaw law = EmpiricalLaw::from_dataset(scm, dataset);
  BootstrapConfig bootstrap;
  bootstrap.seed = opt.seed;

  Report report;
  report.command = "compare";
  report.model = scm.name();

  struct Pair {
    std::string label;
    double truth;
    EstimatorResult estimate;
    const RungReport* rung;
  };
  std::vector<Pair> pairs;

  pairs.push_back({"TE", total_effect(enumeration).value, plug_in_te(law, bootstrap),
                   &ladder.te()});
  bool has_l = !scm.intermediate_confounders().empty();
  if (!has_l) {
    NaturalEffects di = natural_effects(enumeration, Decomposition::DirectIndirect);
    NaturalEffects id = natural_effects(enumeration, Decomposition::IndirectDirect);
    NaturalEstimates nat = mediation_formula_natural(law, false, bootstrap);
    pairs.push_back({"NDE(.0)", di.nde.value, nat.nde0, &ladder.nde_nie()});
    pairs.push_back({"NIE(1.)", di.nie.value, nat.nie1, &ladder.nde_nie()});
    pairs.push_back({"NIE(0.)", id.nie.value, nat.nie0, &ladder.nde_nie()});
    pairs.push_back({"NDE(.1)", id.nde.value, nat.nde1, &ladder.nde_nie()});
  } else {
    report.notes.push_back(
        "natural-effect comparison skipped: intermediate confounders present");
  }
  {
    InterventionalEffects iv = interventional_effects(enumeration);
    InterventionalEstimates est = mediation_formula_interventional(law, bootstrap);
    pairs.push_back({"IDE(.0)", iv.ide0.value, est.ide0, &ladder.ide_iie()});
    pairs.push_back({"IIE(1.)", iv.iie1.value, est.iie1, &ladder.ide_iie()});
    pairs.push_back({"IIE(0.)", iv.iie0.value, est.iie0, &ladder.ide_iie()});
    pairs.push_back({"IDE(.1)", iv.ide1.value, est.ide1, &ladder.ide_iie()});
    pairs.push_back({"OE", iv.oe.value, est.oe, &ladder.ide_iie()});
  }

  for (const auto& pair : pairs) {
    ReportRow row;
    row.label = pair.label;
    row.value = pair.truth;
    row.estimate = pair.estimate.estimate;
    row.se = pair.estimate.standard_error;
    row.n = pair.estimate.n;
    row.method = pair.estimate.method;
    row.warnings = pair.estimate.warnings;
    if (row.se && *row.se > 0) {
      row.z = (*row.estimate - *row.value) / *row.se;
      row.flagged = std::abs(*row.z) > 4;
    }
    if (pair.rung) row.annotation = rung_annotation(*pair.rung);
    report.rows.push_back(std::move(row));
  }

  for (const auto& warning : ladder.warnings) report.notes.push_back(warning);
  emit(report, opt.json);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"mediatrix: exact mediation effects on finite structural causal models"};
  app.require_subcommand(1);
  Options opt;

  auto add_model = [&](CLI::App* sub) {
    sub->add_option("-m,--model,model", opt.model_path, "model JSON file")
        ->required();
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", opt.json, "machine-readable output");
  };

  CLI::App* truth = app.add_subcommand("truth", "exact effects by enumeration");
  add_model(truth);
  add_common(truth);
  truth->add_flag("--natural", opt.natural, "natural decompositions only");
  truth->add_flag("--interventional", opt.interventional, "interventional set only");
  truth->add_option("--cde", opt.cde, "controlled direct effect at this mediator value");
  truth->add_option("--gide", opt.gide,
                    "generalized interventional direct effect for a distribution, e.g. "
                    "\"mix(0.5*pot(0|C), 0.5*pot(1|C))\"");
  truth->add_option("--contrast", opt.contrasts,
                    "custom contrast \"left || right [| cond]\", e.g. "
                    "\"A=1, M~pot(0|C) || A=0\"");

  CLI::App* identify = app.add_subcommand("identify", "identification ladder");
  add_model(identify);
  add_common(identify);

  CLI::App* simulate = app.add_subcommand("simulate", "sample an observational dataset");
  add_model(simulate);
  add_common(simulate);
  simulate->add_option("-n", opt.n, "number of rows");
  simulate->add_option("--seed", opt.seed, "sampling seed");
  simulate->add_option("-o,--out", opt.out_path, "output CSV path (default stdout)");

  CLI::App* estimate = app.add_subcommand("estimate", "plug-in estimates from a dataset");
  estimate->add_option("-d,--data,data", opt.data_path, "dataset CSV file")->required();
  estimate->add_option("-m,--model", opt.model_path, "model JSON file (for supports)")
      ->required();
  add_common(estimate);
  estimate->add_flag("--natural", opt.natural, "natural-effect formulas");
  estimate->add_flag("--interventional", opt.interventional, "interventional formulas");
  estimate->add_flag("--traditional", opt.traditional, "product of coefficients");
  estimate->add_flag("--force", opt.force, "compute refused formulas anyway");
  estimate->add_option("--cde", opt.cde, "controlled direct effect at this value");
  estimate->add_option("--seed", opt.seed, "bootstrap seed");

  CLI::App* compare = app.add_subcommand("compare", "truth vs plug-in on simulated data");
  add_model(compare);
  add_common(compare);
  compare->add_option("-n", opt.n, "number of rows to simulate");
  compare->add_option("--seed", opt.seed, "sampling and bootstrap seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (truth->parsed()) return cmd_truth(opt);
  if (identify->parsed()) return cmd_identify(opt);
  if (simulate->parsed()) return cmd_simulate(opt);
  if (estimate->parsed()) return cmd_estimate(opt);
  if (compare->parsed()) return cmd_compare(opt);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mediatrix::Error& e) {
    std::cerr << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "Internal: " << e.what() << "\n";
    return 1;
  }
}
