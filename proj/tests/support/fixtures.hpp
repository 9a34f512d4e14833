#pragma once

#include <string>
#include <vector>

#include "mediatrix/scm.hpp"

namespace mediatrix::fixtures {

// The eight-student college prep example: one latent profile variable
// driving exposure, mediator, and outcome, so the observed data are
// confounded (naive difference 2.25 vs TE 1.625).
RawScm collegeprep8_raw();

// Same structural flavor with the profile observed as a covariate, exposure
// randomized within strata, and a noisy mediator: every rung identified.
RawScm collegeprep8_unconfounded_raw();

// Intermediate confounder chain A -> L -> M with L -> Y: rungs 1-3
// identified, rung 4 not; NIE(1.) = 0.6 while IIE(1.) = 0.
RawScm l_model_raw();

// Disparity-style fixture: binary group exposure, three-level mediator,
// numeric outcome, group-dependent exposure prevalence.
RawScm bullying_raw();

// Outcome ignores exposure and mediator entirely; every effect is zero.
RawScm nullmodel_raw();

// Exactly linear, interaction-free: M = A + C + u, Y = 1 + A + 2M + C + u.
RawScm linear_noint_raw();

// Strong exposure-mediator interaction: Y = 1 + A + M + 3AM + C + u.
RawScm interaction_raw();

// All of the above, validated.
Scm fixture(const std::string& name);
std::vector<std::string> fixture_names();

}  // namespace mediatrix::fixtures
