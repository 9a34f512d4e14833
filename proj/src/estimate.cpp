#include "mediatrix/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "mediatrix/errors.hpp"
#include "mediatrix/rng.hpp"

namespace mediatrix {

namespace {

using Key = std::vector<int>;

struct Layout {
  std::vector<int> c_cols;
  std::vector<int> l_cols;
  int a_col = -1;
  int m_col = -1;
  int y_col = -1;
  int a0 = -1, a1 = -1;  // exposure support indices of the values 0 and 1
};

Layout layout_of(const EmpiricalLaw& law) {
  const Scm& scm = law.scm();
  Layout layout;
  for (std::size_t i = 0; i < law.columns().size(); ++i) {
    int var = law.columns()[i];
    switch (scm.var(var).role) {
      case Role::Covariate: layout.c_cols.push_back(static_cast<int>(i)); break;
      case Role::IntermediateConfounder: layout.l_cols.push_back(static_cast<int>(i)); break;
      case Role::Exposure: layout.a_col = static_cast<int>(i); break;
      case Role::Mediator: layout.m_col = static_cast<int>(i); break;
      case Role::Outcome: layout.y_col = static_cast<int>(i); break;
      case Role::Latent: break;
    }
  }
  layout.a0 = scm.support_index(scm.exposure(), Value::number(0));
  layout.a1 = scm.support_index(scm.exposure(), Value::number(1));
  return layout;
}

std::string stratum_text(const EmpiricalLaw& law, const Layout& layout, const Key& c) {
  const Scm& scm = law.scm();
  if (layout.c_cols.empty()) return "(no covariates)";
  std::string out = "(";
  for (std::size_t i = 0; i < layout.c_cols.size(); ++i) {
    int var = law.columns()[layout.c_cols[i]];
    if (i) out += ", ";
    out += scm.var(var).name + "=" + scm.var(var).support[c[i]].to_string();
  }
  return out + ")";
}

std::string l_text(const EmpiricalLaw& law, const Layout& layout, std::span<const int> l) {
  const Scm& scm = law.scm();
  std::string out;
  for (std::size_t i = 0; i < layout.l_cols.size(); ++i) {
    int var = law.columns()[layout.l_cols[i]];
    if (i) out += ", ";
    out += scm.var(var).name + "=" + scm.var(var).support[l[i]].to_string();
  }
  return out;
}

[[noreturn]] void empty_cell(const std::string& what) {
  fail(ErrorCode::EmptyCell, "no observations with " + what);
}

struct MassMean {
  double mass = 0;
  double sum_y = 0;
  double mean() const { return sum_y / mass; }
};

Key project(const std::vector<int>& cell, const std::vector<int>& cols) {
  Key key;
  key.reserve(cols.size());
  for (int col : cols) key.push_back(cell[col]);
  return key;
}

double outcome_value(const EmpiricalLaw& law, const Layout& layout,
                     const std::vector<int>& cell) {
  const Scm& scm = law.scm();
  return scm.var(scm.outcome()).support[cell[layout.y_col]].number();
}

// ---- point-estimate kernels over a weight vector -------------------------

double te_kernel(const EmpiricalLaw& law, const Layout& layout,
                 std::span<const double> w) {
  std::map<Key, double> mass_c;
  std::map<Key, MassMean> by_ac;  // key: c..., a
  double total = 0;
  for (std::size_t i = 0; i < law.cells().size(); ++i) {
    if (w[i] <= 0) continue;
    const auto& cell = law.cells()[i];
    total += w[i];
    Key c = project(cell, layout.c_cols);
    mass_c[c] += w[i];
    Key ac = c;
    ac.push_back(cell[layout.a_col]);
    MassMean& slot = by_ac[ac];
    slot.mass += w[i];
    slot.sum_y += w[i] * outcome_value(law, layout, cell);
  }
  if (!(total > 0)) empty_cell("any values (the source is empty)");

  double estimate = 0;
  for (const auto& [c, pc] : mass_c) {
    double means[2];
    for (int a : {0, 1}) {
      Key ac = c;
      ac.push_back(a == 0 ? layout.a0 : layout.a1);
      auto it = by_ac.find(ac);
      if (it == by_ac.end()) {
        empty_cell("A=" + std::to_string(a) + " in stratum " +
                   stratum_text(law, layout, c));
      }
      means[a] = it->second.mean();
    }
    estimate += pc / total * (means[1] - means[0]);
  }
  return estimate;
}

// Natural-effects plug-in: theta(a, a') = sum_c P(c) sum_m P(m|a',c) E[Y|a,m,c];
// returns {NDE(.0), NIE(1.), NDE(.1), NIE(0.)}.
std::array<double, 4> natural_kernel(const EmpiricalLaw& law, const Layout& layout,
                                     std::span<const double> w) {
  std::map<Key, double> mass_c;
  std::map<Key, double> mass_ac;    // c..., a
  std::map<Key, MassMean> by_amc;   // c..., a, m
  double total = 0;
  const std::size_t msize = law.scm().support_size(law.scm().mediator());
  for (std::size_t i = 0; i < law.cells().size(); ++i) {
    if (w[i] <= 0) continue;
    const auto& cell = law.cells()[i];
    total += w[i];
    Key c = project(cell, layout.c_cols);
    mass_c[c] += w[i];
    Key ac = c;
    ac.push_back(cell[layout.a_col]);
    mass_ac[ac] += w[i];
    Key amc = ac;
    amc.push_back(cell[layout.m_col]);
    MassMean& slot = by_amc[amc];
    slot.mass += w[i];
    slot.sum_y += w[i] * outcome_value(law, layout, cell);
  }
  if (!(total > 0)) empty_cell("any values (the source is empty)");

  auto theta = [&](int a, int a_prime) {
    int a_idx = a == 0 ? layout.a0 : layout.a1;
    int ap_idx = a_prime == 0 ? layout.a0 : layout.a1;
    double acc = 0;
    for (const auto& [c, pc] : mass_c) {
      Key apc = c;
      apc.push_back(ap_idx);
      auto denom = mass_ac.find(apc);
      if (denom == mass_ac.end()) {
        empty_cell("A=" + std::to_string(a_prime) + " in stratum " +
                   stratum_text(law, layout, c));
      }
      for (std::size_t m = 0; m < msize; ++m) {
        Key apmc = apc;
        apmc.push_back(static_cast<int>(m));
        auto num = by_amc.find(apmc);
        if (num == by_amc.end()) continue;
        double pm = num->second.mass / denom->second;
        Key amc = c;
        amc.push_back(a_idx);
        amc.push_back(static_cast<int>(m));
        auto ycell = by_amc.find(amc);
        if (ycell == by_amc.end()) {
          const Scm& scm = law.scm();
          empty_cell("A=" + std::to_string(a) + ", " +
                     scm.var(scm.mediator()).name + "=" +
                     scm.var(scm.mediator()).support[m].to_string() + " in stratum " +
                     stratum_text(law, layout, c));
        }
        acc += pc / total * pm * ycell->second.mean();
      }
    }
    return acc;
  };

  double t10 = theta(1, 0);
  double t00 = theta(0, 0);
  double t11 = theta(1, 1);
  double t01 = theta(0, 1);
  return {t10 - t00, t11 - t10, t11 - t01, t01 - t00};
}

// Interventional plug-in: psi(a, a') = sum_c P(c) sum_l P(l|a,c) sum_m
// P(m|a',c) E[Y|a,l,m,c]; returns {IDE(.0), IDE(.1), IIE(0.), IIE(1.), OE}.
std::array<double, 5> interventional_kernel(const EmpiricalLaw& law, const Layout& layout,
                                            std::span<const double> w) {
  std::map<Key, double> mass_c;
  std::map<Key, double> mass_ac;            // c..., a
  std::map<Key, double> mass_alc;           // c..., a, l...
  std::map<Key, double> mass_amc;           // c..., a, m
  std::map<Key, MassMean> by_almc;          // c..., a, l..., m
  double total = 0;
  const Scm& scm = law.scm();
  const std::size_t msize = scm.support_size(scm.mediator());
  for (std::size_t i = 0; i < law.cells().size(); ++i) {
    if (w[i] <= 0) continue;
    const auto& cell = law.cells()[i];
    total += w[i];
    Key c = project(cell, layout.c_cols);
    mass_c[c] += w[i];
    Key ac = c;
    ac.push_back(cell[layout.a_col]);
    mass_ac[ac] += w[i];
    Key alc = ac;
    for (int col : layout.l_cols) alc.push_back(cell[col]);
    mass_alc[alc] += w[i];
    Key amc = ac;
    amc.push_back(cell[layout.m_col]);
    mass_amc[amc] += w[i];
    Key almc = alc;
    almc.push_back(cell[layout.m_col]);
    MassMean& slot = by_almc[almc];
    slot.mass += w[i];
    slot.sum_y += w[i] * outcome_value(law, layout, cell);
  }
  if (!(total > 0)) empty_cell("any values (the source is empty)");

  auto psi = [&](int a, int a_prime) {
    int a_idx = a == 0 ? layout.a0 : layout.a1;
    int ap_idx = a_prime == 0 ? layout.a0 : layout.a1;
    double acc = 0;
    for (const auto& [c, pc] : mass_c) {
      Key ac = c;
      ac.push_back(a_idx);
      auto a_denom = mass_ac.find(ac);
      if (a_denom == mass_ac.end()) {
        empty_cell("A=" + std::to_string(a) + " in stratum " +
                   stratum_text(law, layout, c));
      }
      Key apc = c;
      apc.push_back(ap_idx);
      auto ap_denom = mass_ac.find(apc);
      if (ap_denom == mass_ac.end()) {
        empty_cell("A=" + std::to_string(a_prime) + " in stratum " +
                   stratum_text(law, layout, c));
      }
      // Mediator law at a'.
      std::vector<double> pm(msize, 0.0);
      for (std::size_t m = 0; m < msize; ++m) {
        Key apmc = apc;
        apmc.push_back(static_cast<int>(m));
        auto it = mass_amc.find(apmc);
        if (it != mass_amc.end()) pm[m] = it->second / ap_denom->second;
      }
      // Joint intermediate-confounder strata under a.
      for (const auto& [alc, l_mass] : mass_alc) {
        if (alc.size() < ac.size() ||
            !std::equal(ac.begin(), ac.end(), alc.begin())) {
          continue;
        }
        double pl = l_mass / a_denom->second;
        for (std::size_t m = 0; m < msize; ++m) {
          if (pm[m] <= 0) continue;
          Key almc = alc;
          almc.push_back(static_cast<int>(m));
          auto ycell = by_almc.find(almc);
          if (ycell == by_almc.end()) {
            std::span<const int> l_vals(alc.data() + ac.size(), layout.l_cols.size());
            std::string what = "A=" + std::to_string(a);
            if (!layout.l_cols.empty()) what += ", " + l_text(law, layout, l_vals);
            what += ", " + scm.var(scm.mediator()).name + "=" +
                    scm.var(scm.mediator()).support[m].to_string();
            empty_cell(what + " in stratum " + stratum_text(law, layout, c));
          }
          acc += pc / total * pl * pm[m] * ycell->second.mean();
        }
      }
    }
    return acc;
  };

  double p10 = psi(1, 0);
  double p00 = psi(0, 0);
  double p11 = psi(1, 1);
  double p01 = psi(0, 1);
  return {p10 - p00, p11 - p01, p01 - p00, p11 - p10, p11 - p00};
}

double cde_kernel(const EmpiricalLaw& law, const Layout& layout, int m_idx,
                  std::span<const double> w) {
  std::map<Key, double> mass_c;
  std::map<Key, double> mass_ac;    // c..., a
  std::map<Key, double> mass_alc;   // c..., a, l...
  std::map<Key, MassMean> by_almc;  // c..., a, l..., m
  double total = 0;
  const Scm& scm = law.scm();
  for (std::size_t i = 0; i < law.cells().size(); ++i) {
    if (w[i] <= 0) continue;
    const auto& cell = law.cells()[i];
    total += w[i];
    Key c = project(cell, layout.c_cols);
    mass_c[c] += w[i];
    Key ac = c;
    ac.push_back(cell[layout.a_col]);
    mass_ac[ac] += w[i];
    Key alc = ac;
    for (int col : layout.l_cols) alc.push_back(cell[col]);
    mass_alc[alc] += w[i];
    Key almc = alc;
    almc.push_back(cell[layout.m_col]);
    MassMean& slot = by_almc[almc];
    slot.mass += w[i];
    slot.sum_y += w[i] * outcome_value(law, layout, cell);
  }
  if (!(total > 0)) empty_cell("any values (the source is empty)");

  double estimate = 0;
  for (const auto& [c, pc] : mass_c) {
    double arm[2] = {0, 0};
    for (int a : {0, 1}) {
      Key ac = c;
      ac.push_back(a == 0 ? layout.a0 : layout.a1);
      auto denom = mass_ac.find(ac);
      if (denom == mass_ac.end()) {
        empty_cell("A=" + std::to_string(a) + " in stratum " +
                   stratum_text(law, layout, c));
      }
      for (const auto& [alc, l_mass] : mass_alc) {
        if (alc.size() < ac.size() ||
            !std::equal(ac.begin(), ac.end(), alc.begin())) {
          continue;
        }
        Key almc = alc;
        almc.push_back(m_idx);
        auto ycell = by_almc.find(almc);
        if (ycell == by_almc.end()) {
          std::span<const int> l_vals(alc.data() + ac.size(), layout.l_cols.size());
          std::string what = "A=" + std::to_string(a);
          if (!layout.l_cols.empty()) what += ", " + l_text(law, layout, l_vals);
          what += ", " + scm.var(scm.mediator()).name + "=" +
                  scm.var(scm.mediator()).support[m_idx].to_string();
          empty_cell(what + " in stratum " + stratum_text(law, layout, c));
        }
        arm[a] += l_mass / denom->second * ycell->second.mean();
      }
    }
    estimate += pc / total * (arm[1] - arm[0]);
  }
  return estimate;
}

// ---- bootstrap helper -----------------------------------------------------

// Runs a k-output kernel over the shared resample weights; SE per output.
std::vector<std::optional<double>> bootstrap_family(
    const EmpiricalLaw& law, const BootstrapConfig& config, std::size_t k,
    const std::function<std::vector<double>(std::span<const double>)>& kernel,
    std::vector<std::string>& warnings) {
  std::vector<std::optional<double>> out(k);
  if (!config.enabled) return out;
  if (law.is_exact()) {
    warnings.push_back("exact law: no sampling variability; standard errors omitted");
    return out;
  }
  if (law.sample_n() < 2 || config.resamples < 2) return out;

  const auto& resamples = law.bootstrap_weights(config);
  std::vector<std::vector<double>> draws(k);
  std::size_t skipped = 0;
  for (const auto& w : resamples) {
    try {
      std::vector<double> values = kernel(w);
      for (std::size_t j = 0; j < k; ++j) draws[j].push_back(values[j]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyCell || e.code() == ErrorCode::SingularDesign) {
        ++skipped;
        continue;
      }
      throw;
    }
  }
  if (skipped > 0) {
    warnings.push_back(std::to_string(skipped) + " of " +
                       std::to_string(resamples.size()) +
                       " bootstrap resamples hit empty cells and were skipped");
  }
  if (skipped * 2 > resamples.size()) {
    warnings.push_back("too few usable bootstrap resamples; standard errors omitted");
    return out;
  }
  for (std::size_t j = 0; j < k; ++j) {
    const auto& xs = draws[j];
    if (xs.size() < 2) continue;
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    out[j] = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

EstimatorResult make_result(const EmpiricalLaw& law, const std::string& method,
                            double estimate, std::optional<double> se,
                            std::vector<std::string> warnings) {
  EstimatorResult result;
  result.estimate = estimate;
  result.standard_error = se;
  result.n = law.sample_n();
  result.method = method;
  result.warnings = std::move(warnings);
  return result;
}

}  // namespace

// ---- EmpiricalLaw ----------------------------------------------------------

int EmpiricalLaw::column_of(int var) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i] == var) return static_cast<int>(i);
  }
  return -1;
}

EmpiricalLaw EmpiricalLaw::from_dataset(const Scm& scm, const Dataset& dataset) {
  EmpiricalLaw law;
  law.scm_ = &scm;
  law.columns_ = scm.dataset_order();

  if (dataset.columns.size() < law.columns_.size()) {
    fail(ErrorCode::SchemaError,
         "dataset has " + std::to_string(dataset.columns.size()) +
             " columns; the model's observed schema has " +
             std::to_string(law.columns_.size()));
  }
  for (std::size_t i = 0; i < dataset.columns.size(); ++i) {
    if (i < law.columns_.size()) {
      const std::string& expected = scm.var(law.columns_[i]).name;
      if (dataset.columns[i] != expected) {
        fail(ErrorCode::SchemaError, "dataset column " + std::to_string(i) + " is '" +
                                         dataset.columns[i] + "'; the model expects '" +
                                         expected + "'");
      }
    } else {
      // Latent columns (opt-in at sampling time) are ignored here.
      int var = scm.index_of(dataset.columns[i]);
      if (var < 0 || scm.var(var).role != Role::Latent) {
        fail(ErrorCode::SchemaError, "dataset column '" + dataset.columns[i] +
                                         "' is not a latent variable of the model");
      }
    }
  }

  std::map<std::vector<int>, double> counts;
  std::vector<int> encoded(law.columns_.size());
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    const auto& row = dataset.rows[r];
    if (row.size() != dataset.columns.size()) {
      fail(ErrorCode::SchemaError, "row " + std::to_string(r + 1) + " has " +
                                       std::to_string(row.size()) + " values, expected " +
                                       std::to_string(dataset.columns.size()));
    }
    for (std::size_t i = 0; i < law.columns_.size(); ++i) {
      int var = law.columns_[i];
      int idx = scm.support_index(var, row[i]);
      if (idx < 0) {
        fail(ErrorCode::SchemaError, "row " + std::to_string(r + 1) + ", column " +
                                         scm.var(var).name + ": value " +
                                         row[i].to_string() +
                                         " is not in the declared support");
      }
      encoded[i] = idx;
    }
    counts[encoded] += 1.0;
  }
  law.sample_n_ = dataset.rows.size();
  law.exact_ = false;
  const double denom = law.sample_n_ > 0 ? static_cast<double>(law.sample_n_) : 1.0;
  for (auto& [cell, count] : counts) {
    law.cells_.push_back(cell);
    law.weights_.push_back(count / denom);
  }
  return law;
}

EmpiricalLaw EmpiricalLaw::from_exact(const Scm& scm, std::size_t max_cells) {
  EmpiricalLaw law;
  law.scm_ = &scm;
  law.columns_ = scm.dataset_order();
  law.sample_n_ = 0;
  law.exact_ = true;

  ObservationalTable table = scm.observational_distribution(max_cells);
  std::vector<int> cell(table.vars.size(), 0);
  for (std::size_t idx = 0; idx < table.probs.size(); ++idx) {
    if (table.probs[idx] > 0) {
      law.cells_.push_back(cell);
      law.weights_.push_back(table.probs[idx]);
    }
    for (std::size_t d = table.dims.size(); d-- > 0;) {
      if (++cell[d] < static_cast<int>(table.dims[d])) break;
      cell[d] = 0;
    }
  }
  return law;
}

const std::vector<std::vector<double>>& EmpiricalLaw::bootstrap_weights(
    const BootstrapConfig& config) const {
  if (exact_) fail(ErrorCode::Internal, "bootstrap requested on an exact law");
  std::pair<std::size_t, std::uint64_t> key{config.resamples, config.seed};
  if (bootstrap_key_ && *bootstrap_key_ == key) return bootstrap_;

  bootstrap_.clear();
  bootstrap_.reserve(config.resamples);
  std::vector<double> cumulative(weights_.size());
  double acc = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    acc += weights_[i];
    cumulative[i] = acc;
  }
  for (std::size_t r = 0; r < config.resamples; ++r) {
    Rng rng(derive_seed(config.seed, kStreamBootstrap, r));
    std::vector<double> counts(weights_.size(), 0.0);
    for (std::size_t i = 0; i < sample_n_; ++i) {
      double u = rng.u01() * acc;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      std::size_t cell = std::min<std::size_t>(
          static_cast<std::size_t>(it - cumulative.begin()), weights_.size() - 1);
      counts[cell] += 1.0;
    }
    bootstrap_.push_back(std::move(counts));
  }
  bootstrap_key_ = key;
  return bootstrap_;
}

// ---- public estimators -----------------------------------------------------

EstimatorResult plug_in_te(const EmpiricalLaw& law, const BootstrapConfig& config) {
  Layout layout = layout_of(law);
  double estimate = te_kernel(law, layout, law.weights());
  std::vector<std::string> warnings;
  auto ses = bootstrap_family(
      law, config, 1,
      [&](std::span<const double> w) {
        return std::vector<double>{te_kernel(law, layout, w)};
      },
      warnings);
  return make_result(law, "plug_in_te", estimate, ses[0], std::move(warnings));
}

NaturalEstimates mediation_formula_natural(const EmpiricalLaw& law, bool force,
                                           const BootstrapConfig& config) {
  Layout layout = layout_of(law);
  std::vector<std::string> warnings;
  if (!layout.l_cols.empty()) {
    if (!force) {
      fail(ErrorCode::RefusedNotIdentified,
           "the model declares intermediate confounders; natural effects are not "
           "identified by this formula (pass --force to compute it anyway)");
    }
    warnings.push_back(
        "intermediate confounders present; these estimates marginalize over them and "
        "generally do not equal the natural effects");
  }
  std::array<double, 4> est = natural_kernel(law, layout, law.weights());
  auto ses = bootstrap_family(
      law, config, 4,
      [&](std::span<const double> w) {
        auto v = natural_kernel(law, layout, w);
        return std::vector<double>(v.begin(), v.end());
      },
      warnings);
  NaturalEstimates out;
  out.nde0 = make_result(law, "mediation_formula_natural", est[0], ses[0], warnings);
  out.nie1 = make_result(law, "mediation_formula_natural", est[1], ses[1], warnings);
  out.nde1 = make_result(law, "mediation_formula_natural", est[2], ses[2], warnings);
  out.nie0 = make_result(law, "mediation_formula_natural", est[3], ses[3], warnings);
  return out;
}

InterventionalEstimates mediation_formula_interventional(const EmpiricalLaw& law,
                                                         const BootstrapConfig& config) {
  Layout layout = layout_of(law);
  std::vector<std::string> warnings;
  std::array<double, 5> est = interventional_kernel(law, layout, law.weights());
  auto ses = bootstrap_family(
      law, config, 5,
      [&](std::span<const double> w) {
        auto v = interventional_kernel(law, layout, w);
        return std::vector<double>(v.begin(), v.end());
      },
      warnings);
  InterventionalEstimates out;
  out.ide0 = make_result(law, "mediation_formula_interventional", est[0], ses[0], warnings);
  out.ide1 = make_result(law, "mediation_formula_interventional", est[1], ses[1], warnings);
  out.iie0 = make_result(law, "mediation_formula_interventional", est[2], ses[2], warnings);
  out.iie1 = make_result(law, "mediation_formula_interventional", est[3], ses[3], warnings);
  out.oe = make_result(law, "mediation_formula_interventional", est[4], ses[4], warnings);
  return out;
}

EstimatorResult cde_estimator(const EmpiricalLaw& law, const Value& m,
                              const BootstrapConfig& config) {
  const Scm& scm = law.scm();
  int m_idx = scm.support_index(scm.mediator(), m);
  if (m_idx < 0) {
    fail(ErrorCode::SpecError,
         "value " + m.to_string() + " is not in the mediator's support");
  }
  Layout layout = layout_of(law);
  double estimate = cde_kernel(law, layout, m_idx, law.weights());
  std::vector<std::string> warnings;
  auto ses = bootstrap_family(
      law, config, 1,
      [&](std::span<const double> w) {
        return std::vector<double>{cde_kernel(law, layout, m_idx, w)};
      },
      warnings);
  return make_result(law, "cde", estimate, ses[0], std::move(warnings));
}

// ---- traditional product of coefficients -----------------------------------

namespace {

// Weighted least squares on grouped cells via normal equations.
struct OlsFit {
  std::vector<double> coefs;
  std::vector<double> ses;  // classical, empty when n unknown
};

// Solves (X'WX) b = X'Wy accumulated over cells; design rows built by `row`.
OlsFit weighted_ols(std::size_t k,
                    const std::function<void(std::size_t, std::vector<double>&)>& row,
                    const std::function<double(std::size_t)>& target,
                    std::span<const double> w, std::size_t n_cells, double n_obs) {
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  std::vector<double> x(k);
  double total = 0;
  for (std::size_t i = 0; i < n_cells; ++i) {
    if (w[i] <= 0) continue;
    row(i, x);
    double y = target(i);
    total += w[i];
    for (std::size_t p = 0; p < k; ++p) {
      xty[p] += w[i] * x[p] * y;
      for (std::size_t q = p; q < k; ++q) xtx[p][q] += w[i] * x[p] * x[q];
    }
  }
  if (!(total > 0)) empty_cell("any values (the source is empty)");
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < p; ++q) xtx[p][q] = xtx[q][p];
  }

  // Gaussian elimination with partial pivoting on [xtx | xty, I].
  std::vector<std::vector<double>> aug(k, std::vector<double>(2 * k + 1, 0.0));
  double scale = 0;
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < k; ++q) {
      aug[p][q] = xtx[p][q];
      scale = std::max(scale, std::abs(xtx[p][q]));
    }
    aug[p][k] = xty[p];
    aug[p][k + 1 + p] = 1.0;
  }
  const double tiny = scale * 1e-12;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
    }
    if (std::abs(aug[pivot][col]) <= tiny) {
      fail(ErrorCode::SingularDesign,
           "design matrix is singular (column " + std::to_string(col) + ")");
    }
    std::swap(aug[col], aug[pivot]);
    double d = aug[col][col];
    for (double& v : aug[col]) v /= d;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = aug[r][col];
      if (f == 0) continue;
      for (std::size_t q = 0; q < 2 * k + 1; ++q) aug[r][q] -= f * aug[col][q];
    }
  }

  OlsFit fit;
  fit.coefs.resize(k);
  for (std::size_t p = 0; p < k; ++p) fit.coefs[p] = aug[p][k];

  if (n_obs > static_cast<double>(k)) {
    // Residual variance from grouped sums: rss = sum w (y - x b)^2.
    double rss = 0;
    for (std::size_t i = 0; i < n_cells; ++i) {
      if (w[i] <= 0) continue;
      row(i, x);
      double fitted = 0;
      for (std::size_t p = 0; p < k; ++p) fitted += x[p] * fit.coefs[p];
      double r = target(i) - fitted;
      rss += w[i] * r * r;
    }
    double sigma2 = rss / total * n_obs / (n_obs - static_cast<double>(k));
    fit.ses.resize(k);
    for (std::size_t p = 0; p < k; ++p) {
      // inv(X'WX) scaled to counts: weights are normalized, so divide by n.
      double inv = aug[p][k + 1 + p] / total;
      fit.ses[p] = std::sqrt(std::max(0.0, sigma2 * inv / n_obs));
    }
  }
  return fit;
}

}  // namespace

TraditionalResult traditional_product_of_coefficients(const EmpiricalLaw& law,
                                                      const BootstrapConfig& config) {
  const Scm& scm = law.scm();
  Layout layout = layout_of(law);
  TraditionalResult result;
  result.n = law.sample_n();

  const auto& m_support = scm.var(scm.mediator()).support;
  bool m_numeric = std::all_of(m_support.begin(), m_support.end(),
                               [](const Value& v) { return v.is_number(); });
  if (!m_numeric) {
    result.warnings.push_back(
        "mediator support is symbolic; values are encoded by support index, which "
        "presumes a meaningful numeric scale");
  }
  std::vector<bool> c_numeric(layout.c_cols.size(), true);
  for (std::size_t i = 0; i < layout.c_cols.size(); ++i) {
    int var = law.columns()[layout.c_cols[i]];
    const auto& support = scm.var(var).support;
    c_numeric[i] = std::all_of(support.begin(), support.end(),
                               [](const Value& v) { return v.is_number(); });
    if (!c_numeric[i]) {
      result.warnings.push_back("covariate " + scm.var(var).name +
                                " is symbolic; encoded by support index");
    }
  }

  auto a_num = [&](const std::vector<int>& cell) {
    return scm.var(scm.exposure()).support[cell[layout.a_col]].number();
  };
  auto m_num = [&](const std::vector<int>& cell) {
    int idx = cell[layout.m_col];
    return m_numeric ? m_support[idx].number() : static_cast<double>(idx);
  };
  auto c_num = [&](const std::vector<int>& cell, std::size_t i) {
    int var = law.columns()[layout.c_cols[i]];
    int idx = cell[layout.c_cols[i]];
    return c_numeric[i] ? scm.var(var).support[idx].number() : static_cast<double>(idx);
  };

  const std::size_t n_cells = law.cells().size();
  const std::size_t kc = layout.c_cols.size();
  const double n_obs = static_cast<double>(law.sample_n());

  if (!law.is_exact() && law.sample_n() <= kc + 3) {
    fail(ErrorCode::EstimationError,
         "need more rows than regressors for the linear models (n=" +
             std::to_string(law.sample_n()) + ")");
  }

  auto m_row = [&](std::size_t i, std::vector<double>& x) {
    const auto& cell = law.cells()[i];
    x[0] = 1.0;
    x[1] = a_num(cell);
    for (std::size_t j = 0; j < kc; ++j) x[2 + j] = c_num(cell, j);
  };
  auto y_row = [&](std::size_t i, std::vector<double>& x) {
    const auto& cell = law.cells()[i];
    x[0] = 1.0;
    x[1] = a_num(cell);
    x[2] = m_num(cell);
    for (std::size_t j = 0; j < kc; ++j) x[3 + j] = c_num(cell, j);
  };
  auto m_target = [&](std::size_t i) { return m_num(law.cells()[i]); };
  auto y_target = [&](std::size_t i) { return outcome_value(law, layout, law.cells()[i]); };

  auto fit_all = [&](std::span<const double> w) -> std::array<double, 5> {
    OlsFit m_fit = weighted_ols(2 + kc, m_row, m_target, w, n_cells, n_obs);
    OlsFit y_fit = weighted_ols(3 + kc, y_row, y_target, w, n_cells, n_obs);
    OlsFit t_fit = weighted_ols(2 + kc, m_row, y_target, w, n_cells, n_obs);
    return {m_fit.coefs[1], y_fit.coefs[2], y_fit.coefs[1], t_fit.coefs[1],
            m_fit.coefs[1] * y_fit.coefs[2]};
  };

  OlsFit m_fit = weighted_ols(2 + kc, m_row, m_target, law.weights(), n_cells, n_obs);
  OlsFit y_fit = weighted_ols(3 + kc, y_row, y_target, law.weights(), n_cells, n_obs);
  OlsFit t_fit = weighted_ols(2 + kc, m_row, y_target, law.weights(), n_cells, n_obs);
  result.a_coef = m_fit.coefs[1];
  result.b_coef = y_fit.coefs[2];
  result.c_prime = y_fit.coefs[1];
  result.product = result.a_coef * result.b_coef;
  result.difference_method = t_fit.coefs[1] - result.c_prime;
  result.m_model_coefs = m_fit.coefs;
  result.m_model_ses = m_fit.ses;
  result.y_model_coefs = y_fit.coefs;
  result.y_model_ses = y_fit.ses;

  auto ses = bootstrap_family(
      law, config, 1,
      [&](std::span<const double> w) {
        return std::vector<double>{fit_all(w)[4]};
      },
      result.warnings);
  result.product_se = ses[0];
  return result;
}

// ---- Monte Carlo ------------------------------------------------------------

EstimatorResult monte_carlo_estimate(const Scm& scm, const EffectQuery& query,
                                     std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorCode::SpecError, "monte_carlo_estimate needs n >= 1");
  Enumeration enumeration(scm);
  const int nv = scm.num_variables();
  const Condition* condition =
      query.condition && !query.condition->empty() ? &*query.condition : nullptr;

  const int outcome = scm.outcome();
  const auto& y_support = scm.var(outcome).support;

  std::vector<std::pair<int, int>> wanted;  // (var, support index)
  if (condition) {
    for (const auto& [name, value] : condition->equalities) {
      int var = scm.require_index(name);
      Role role = scm.var(var).role;
      if (role != Role::Covariate && role != Role::Exposure) {
        fail(ErrorCode::SpecError,
             "conditions may only mention covariates or the exposure, not '" + name + "'");
      }
      int idx = scm.support_index(var, value);
      if (idx < 0) {
        fail(ErrorCode::SpecError, "value " + value.to_string() +
                                       " is not in the support of '" + name + "'");
      }
      wanted.emplace_back(var, idx);
    }
  }

  double sum = 0, sumsq = 0;
  std::vector<int> noise(nv);
  constexpr std::size_t kMaxRejects = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, kStreamMonteCarlo, i));
    SamplingResolver resolver(rng);
    std::size_t u = 0;
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < kMaxRejects; ++attempt) {
      for (int v = 0; v < nv; ++v) noise[v] = rng.sample(scm.var(v).noise.probs);
      u = enumeration.unit_index(noise);
      const auto& world = enumeration.natural_world(u);
      accepted = true;
      for (const auto& [var, idx] : wanted) {
        if (world[var] != idx) {
          accepted = false;
          break;
        }
      }
      if (accepted) break;
    }
    if (!accepted) {
      fail(ErrorCode::PositivityViolation,
           "condition {" + condition->to_string() + "} rejected " +
               std::to_string(kMaxRejects) + " consecutive samples");
    }
    double y_left = y_support[enumeration.evaluate(u, query.left, &resolver)[outcome]].number();
    double y_right = y_support[enumeration.evaluate(u, query.right, &resolver)[outcome]].number();
    double contrast = y_left - y_right;
    sum += contrast;
    sumsq += contrast * contrast;
  }

  EstimatorResult result;
  result.estimate = sum / static_cast<double>(n);
  if (n >= 2) {
    double var = (sumsq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1);
    result.standard_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  }
  result.n = n;
  result.method = "monte_carlo";
  return result;
}

}  // namespace mediatrix
