#pragma once

#include <cstdint>

#include "mediatrix/scm.hpp"

namespace mediatrix::testing {

enum class LatentMode {
  None,
  Any,        // children drawn freely
  Separated,  // no latent may confound A-M or M-Y (children limited)
};

struct RandomScmConfig {
  int max_covariates = 2;
  int max_intermediates = 1;
  int max_latents = 1;
  int max_support = 4;
  int max_noise = 4;
  LatentMode latent_mode = LatentMode::Any;
  bool allow_intermediates = true;
  // Forces every support value reachable under every parent combination
  // with noise probabilities bounded away from zero, so plug-in estimators
  // never hit empty cells on the exact law.
  bool ensure_positivity = false;
};

// Deterministic in (seed, config). Always returns a valid model with
// one exposure, one mediator, one numeric outcome.
RawScm random_raw_scm(std::uint64_t seed, const RandomScmConfig& config = {});
Scm random_scm(std::uint64_t seed, const RandomScmConfig& config = {});

}  // namespace mediatrix::testing
