#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mediatrix/effects.hpp"
#include "mediatrix/scm.hpp"

namespace mediatrix {

struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  // Provenance, carried through the CSV round trip.
  std::string source;
  std::uint64_t seed = 0;
  std::size_t declared_n = 0;
  bool has_provenance = false;

  std::size_t n() const { return rows.size(); }
};

struct EstimatorResult {
  double estimate = 0;
  std::optional<double> standard_error;
  std::size_t n = 0;  // 0 when computed from an exact law
  std::string method;
  std::vector<std::string> warnings;
};

struct BootstrapConfig {
  std::size_t resamples = 500;
  std::uint64_t seed = 0;
  bool enabled = true;
};

// A weighted empirical law over the observed variables: either the cell
// frequencies of a finite dataset or the exact observational distribution.
// All plug-in estimators run on this, so truth-vs-sample comparisons share
// one code path.
class EmpiricalLaw {
 public:
  static EmpiricalLaw from_dataset(const Scm& scm, const Dataset& dataset);
  static EmpiricalLaw from_exact(const Scm& scm,
                                 std::size_t max_cells = default_cell_cap());

  const Scm& scm() const { return *scm_; }
  std::size_t sample_n() const { return sample_n_; }
  bool is_exact() const { return exact_; }

  // Variable indices in column order (C..., A, L..., M, Y).
  const std::vector<int>& columns() const { return columns_; }
  int column_of(int var) const;

  // Distinct observed rows (support indices per column) and their
  // normalized weights.
  const std::vector<std::vector<int>>& cells() const { return cells_; }
  const std::vector<double>& weights() const { return weights_; }

  // Shared bootstrap resample weights (cell counts per resample), built
  // lazily and cached per config so every estimator sees the same resamples.
  const std::vector<std::vector<double>>& bootstrap_weights(const BootstrapConfig& config) const;

 private:
  const Scm* scm_ = nullptr;
  std::vector<int> columns_;
  std::vector<std::vector<int>> cells_;
  std::vector<double> weights_;
  std::size_t sample_n_ = 0;
  bool exact_ = false;
  mutable std::optional<std::pair<std::size_t, std::uint64_t>> bootstrap_key_;
  mutable std::vector<std::vector<double>> bootstrap_;
};

EstimatorResult plug_in_te(const EmpiricalLaw& law, const BootstrapConfig& config = {});

struct NaturalEstimates {
  EstimatorResult nde0;  // NDE(.0)
  EstimatorResult nie1;  // NIE(1.)
  EstimatorResult nde1;  // NDE(.1)
  EstimatorResult nie0;  // NIE(0.)
};
NaturalEstimates mediation_formula_natural(const EmpiricalLaw& law, bool force = false,
                                           const BootstrapConfig& config = {});

struct InterventionalEstimates {
  EstimatorResult ide0;
  EstimatorResult ide1;
  EstimatorResult iie0;
  EstimatorResult iie1;
  EstimatorResult oe;
};
InterventionalEstimates mediation_formula_interventional(const EmpiricalLaw& law,
                                                         const BootstrapConfig& config = {});

EstimatorResult cde_estimator(const EmpiricalLaw& law, const Value& m,
                              const BootstrapConfig& config = {});

struct TraditionalResult {
  double a_coef = 0;       // A in M ~ A + C
  double b_coef = 0;       // M in Y ~ A + M + C
  double c_prime = 0;      // A in Y ~ A + M + C
  double product = 0;      // a_coef * b_coef
  double difference_method = 0;  // A in Y ~ A + C, minus c_prime
  std::optional<double> product_se;
  // Coefficients [intercept, A, (M,) C...] with classical OLS errors.
  std::vector<double> m_model_coefs, m_model_ses;
  std::vector<double> y_model_coefs, y_model_ses;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};
TraditionalResult traditional_product_of_coefficients(const EmpiricalLaw& law,
                                                      const BootstrapConfig& config = {});

EstimatorResult monte_carlo_estimate(const Scm& scm, const EffectQuery& query,
                                     std::size_t n, std::uint64_t seed);

}  // namespace mediatrix
